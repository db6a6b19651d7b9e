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

#include "esrn/credit.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace esrn {

std::vector<DepthCredit> CreditFromPrefix(double floor,
                                          std::span<const double> prefix,
                                          std::span<const int> depths) {
  if (prefix.empty()) throw std::invalid_argument("empty prefix fitness");
  if (prefix.size() != depths.size()) {
    throw std::invalid_argument("prefix fitness / depth length mismatch");
  }
  std::vector<DepthCredit> credits;
  credits.reserve(prefix.size());
  double before = floor;
  for (size_t k = 0; k < prefix.size(); ++k) {
    credits.push_back({depths[k], prefix[k] - before});
    before = prefix[k];
  }
  return credits;
}

std::vector<double> NormalizeCredits(std::span<const double> column,
                                     double epsilon) {
  std::vector<double> out(column.begin(), column.end());
  if (out.empty()) return out;
  const double shift = *std::min_element(out.begin(), out.end()) - epsilon;
  for (double& v : out) v -= shift;
  return out;
}

std::vector<double> SquaredProportions(std::span<const double> normalized) {
  std::vector<double> p(normalized.size());
  double total = 0.0;
  for (size_t j = 0; j < p.size(); ++j) {
    p[j] = normalized[j] * normalized[j];
    total += p[j];
  }
  for (double& v : p) v /= total;
  return p;
}

CreditMatrix::CreditMatrix(double alpha, double epsilon)
    : alpha_(alpha),
      epsilon_(epsilon),
      values_(static_cast<size_t>(kRows) * kCols, 0.0),
      counts_(static_cast<size_t>(kRows) * kCols, 0) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("credit alpha must be in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

size_t CreditMatrix::Index(GenotypeId j, int depth) const {
  if (j.value < 0 || j.value >= kRows || depth < 0 || depth >= kCols) {
    throw std::out_of_range("credit cell (" + std::to_string(j.value) + ", " +
                            std::to_string(depth) + ") out of range");
  }
  return static_cast<size_t>(j.value) * kCols + depth;
}

double CreditMatrix::value(GenotypeId j, int depth) const {
  return values_[Index(j, depth)];
}

int64_t CreditMatrix::count(GenotypeId j, int depth) const {
  return counts_[Index(j, depth)];
}

int64_t CreditMatrix::total_observations() const {
  int64_t n = 0;
  for (int64_t c : counts_) n += c;
  return n;
}

void CreditMatrix::Update(GenotypeId j, int depth, double credit) {
  const size_t i = Index(j, depth);
  if (!std::isfinite(credit)) {
    throw std::invalid_argument("credit must be finite");
  }
  if (counts_[i] == 0) {
    values_[i] = credit;
  } else {
    values_[i] = alpha_ * values_[i] + (1.0 - alpha_) * credit;
  }
  ++counts_[i];
}

double CreditMatrix::ColumnPrior(int depth) const {
  double lowest = 0.0;
  double sum = 0.0;
  int observed = 0;
  for (int j = 0; j < kRows; ++j) {
    const size_t i = Index({j}, depth);
    if (counts_[i] == 0) continue;
    if (observed == 0 || values_[i] < lowest) lowest = values_[i];
    sum += values_[i];
    ++observed;
  }
  if (observed == 0) return 0.0;
  return lowest + kUnobservedPriorWeight * (sum / observed - lowest);
}

std::vector<double> CreditMatrix::NormalizeColumn(int depth) const {
  const double prior = ColumnPrior(depth);
  std::vector<double> column(kRows);
  for (int j = 0; j < kRows; ++j) {
    const size_t i = Index({j}, depth);
    column[j] = counts_[i] > 0 ? values_[i] : prior;
  }
  return NormalizeCredits(column, epsilon_);
}

std::vector<double> CreditMatrix::SelectionProbabilities(int depth) const {
  return SquaredProportions(NormalizeColumn(depth));
}

nlohmann::json CreditMatrix::ToJson() const {
  nlohmann::json values = nlohmann::json::array();
  nlohmann::json counts = nlohmann::json::array();
  for (int j = 0; j < kRows; ++j) {
    const auto row = values_.begin() + static_cast<ptrdiff_t>(j) * kCols;
    const auto crow = counts_.begin() + static_cast<ptrdiff_t>(j) * kCols;
    values.push_back(std::vector<double>(row, row + kCols));
    counts.push_back(std::vector<int64_t>(crow, crow + kCols));
  }
  return {{"alpha", alpha_},
          {"epsilon", epsilon_},
          {"values", std::move(values)},
          {"counts", std::move(counts)}};
}

CreditMatrix CreditMatrix::FromJson(const nlohmann::json& j) {
  try {
    CreditMatrix m(j.at("alpha").get<double>(), j.at("epsilon").get<double>());
    const auto& values = j.at("values");
    const auto& counts = j.at("counts");
    if (values.size() != kRows || counts.size() != kRows) {
      throw std::invalid_argument("credit matrix must have 450 rows");
    }
    for (int r = 0; r < kRows; ++r) {
      if (values[r].size() != kCols || counts[r].size() != kCols) {
        throw std::invalid_argument("credit matrix must have 20 columns");
      }
      for (int c = 0; c < kCols; ++c) {
        const size_t i = static_cast<size_t>(r) * kCols + c;
        m.values_[i] = values[r][c].get<double>();
        m.counts_[i] = counts[r][c].get<int64_t>();
        if (m.counts_[i] < 0 || !std::isfinite(m.values_[i])) {
          throw std::invalid_argument("credit matrix entry out of domain");
        }
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("credit matrix json: ") +
                                e.what());
  }
}

}  // namespace esrn
