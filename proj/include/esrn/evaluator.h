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

// Fitness evaluation contract. An evaluator turns a genome into a PSNR-like
// fitness plus the fitness of every prefix of the backbone (the network cut
// after each active block), led by the floor fitness of the bare head+tail.

#ifndef ESRN_EVALUATOR_H_
#define ESRN_EVALUATOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "esrn/genome.h"
#include "json.hpp"

namespace esrn {

inline constexpr double kSurrogateFloor = 28.0;

struct EvalRequest {
  std::string id;
  Genome genome;
  int scale = 2;
  int budget = 0;
  uint64_t seed = 0;
};

enum class EvalStatus { kOk, kError };

struct EvalResponse {
  std::string id;
  EvalStatus status = EvalStatus::kError;
  double fitness = 0.0;
  // prefix_fitness[0] is the floor, then one entry per active block.
  std::vector<double> prefix_fitness;
  std::string message;

  bool ok() const { return status == EvalStatus::kOk; }
  bool operator==(const EvalResponse&) const = default;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json ToJson(const EvalRequest& request);
EvalRequest RequestFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const EvalResponse& response);
// Throws ProtocolError when required keys are missing or mistyped. Unknown
// keys are ignored.
EvalResponse ResponseFromJson(const nlohmann::json& j);

// For ok responses: prefix length == active + 1, all values finite, fitness
// equal to the last prefix entry. Returns the violation, if any.
std::optional<std::string> CheckResponseContract(const EvalResponse& response,
                                                 int active_blocks);

class Evaluator {
 public:
  virtual ~Evaluator() = default;

  // Responses are returned in request order, whatever order the backend
  // produced them in.
  virtual std::vector<EvalResponse> EvaluateBatch(
      std::span<const EvalRequest> requests) = 0;

  EvalResponse Evaluate(const EvalRequest& request) {
    return EvaluateBatch(std::span<const EvalRequest>(&request, 1)).front();
  }
};

// Deterministic closed-form stand-in for trained PSNR.
//
//   q(gene, d) = w_type * (C/8) * sqrt(G_r/64) * rho(R) * 0.97^d + 0.05 u
//   prefix[0] = 28
//   prefix[k] = prefix[k-1] + q_k / (1 + 0.02 k)     (k-th active block)
//
// w_S = 0.60, w_G = 0.55, w_C = 0.70; rho = {1.0, 1.08, 1.12, 1.13} for
// R = 1..4; d is the chromosome position. The noise u in [-1, 1) is
//
//   h = FNV-1a-64(genome text)    offset 0xcbf29ce484222325,
//                                 prime  0x100000001b3
//   z = splitmix64(h ^ splitmix64(seed ^ splitmix64(d)))
//   u = 2 * (z >> 11) * 2^-53 - 1
//
// where splitmix64(x) adds 0x9e3779b97f4a7c15 and applies the standard
// finalizer (see rng.h).
struct SurrogateOptions {
  bool zero_noise = false;
};

double SurrogateNoise(const std::string& genome_text, int depth,
                      uint64_t seed);
double SurrogateGeneQuality(const BlockGene& gene, int depth, double noise);
EvalResponse SurrogateEvaluate(const Genome& genome, uint64_t seed,
                               const SurrogateOptions& options = {});

class SurrogateEvaluator : public Evaluator {
 public:
  explicit SurrogateEvaluator(SurrogateOptions options = {})
      : options_(options) {}

  std::vector<EvalResponse> EvaluateBatch(
      std::span<const EvalRequest> requests) override;

 private:
  SurrogateOptions options_;
};

// Memoizes ok responses by (genome text, scale, budget, seed).
class CachedEvaluator : public Evaluator {
 public:
  explicit CachedEvaluator(Evaluator& backend) : backend_(&backend) {}

  std::vector<EvalResponse> EvaluateBatch(
      std::span<const EvalRequest> requests) override;

  static std::string Key(const EvalRequest& request);

  int64_t backend_calls() const { return backend_calls_; }
  size_t size() const { return cache_.size(); }

  nlohmann::json ToJson() const;
  void LoadJson(const nlohmann::json& j);

 private:
  Evaluator* backend_;
  std::map<std::string, EvalResponse> cache_;
  int64_t backend_calls_ = 0;
};

}  // namespace esrn

#endif  // ESRN_EVALUATOR_H_
