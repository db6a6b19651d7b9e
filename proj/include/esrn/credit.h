// Copyright 2026 The ESRN Search Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Block credit bookkeeping and the credit-to-probability mapping used by
// guided mutation.
//
// A block's credit is the fitness gained by appending it to the blocks in
// front of it. Credits are tracked per (genotype, depth) cell as an
// exponential moving average. To sample a replacement genotype at depth l
// the column is shifted so its minimum becomes epsilon, squared, and
// normalized.

#ifndef ESRN_CREDIT_H_
#define ESRN_CREDIT_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "esrn/genome.h"
#include "json.hpp"

namespace esrn {

inline constexpr double kCreditAlpha = 0.9;
inline constexpr double kCreditEpsilon = 0.001;
// Where an unobserved cell sits between the lowest observed credit of its
// column (0) and the column mean (1).
inline constexpr double kUnobservedPriorWeight = 0.25;

struct DepthCredit {
  int depth = 0;
  double credit = 0.0;
  bool operator==(const DepthCredit&) const = default;
};

// prefix[k] is the fitness after the k-th active block; floor is the fitness
// with no backbone blocks. depths[k] is the chromosome position of that
// block. Throws std::invalid_argument on empty or mismatched input.
std::vector<DepthCredit> CreditFromPrefix(double floor,
                                          std::span<const double> prefix,
                                          std::span<const int> depths);

// Shift so the minimum entry becomes epsilon.
std::vector<double> NormalizeCredits(std::span<const double> column,
                                     double epsilon = kCreditEpsilon);

// p_j = c_j^2 / sum c^2.
std::vector<double> SquaredProportions(std::span<const double> normalized);

class CreditMatrix {
 public:
  static constexpr int kRows = kNumGenotypes;
  static constexpr int kCols = kMaxBlocks;

  explicit CreditMatrix(double alpha = kCreditAlpha,
                        double epsilon = kCreditEpsilon);

  double alpha() const { return alpha_; }
  double epsilon() const { return epsilon_; }

  double value(GenotypeId j, int depth) const;
  int64_t count(GenotypeId j, int depth) const;
  int64_t total_observations() const;

  // EMA update; the first observation of a cell overwrites it. Throws
  // std::out_of_range on bad indices, std::invalid_argument on non-finite c.
  void Update(GenotypeId j, int depth, double credit);

  // Prior used for unobserved cells: a quarter of the way from the lowest
  // observed value in the column to the column mean (0 when nothing was
  // observed there). Observed cells are biased upward by selection, so the
  // plain mean would make untried genotypes dominate the squared mass.
  double ColumnPrior(int depth) const;

  // Column with unobserved cells filled in from the prior, then shifted.
  // A column with no observations normalizes to all-epsilon.
  std::vector<double> NormalizeColumn(int depth) const;

  std::vector<double> SelectionProbabilities(int depth) const;

  nlohmann::json ToJson() const;
  // Throws std::invalid_argument on shape or type mismatch.
  static CreditMatrix FromJson(const nlohmann::json& j);

  bool operator==(const CreditMatrix&) const = default;

 private:
  size_t Index(GenotypeId j, int depth) const;

  double alpha_;
  double epsilon_;
  std::vector<double> values_;
  std::vector<int64_t> counts_;
};

}  // namespace esrn

#endif  // ESRN_CREDIT_H_
