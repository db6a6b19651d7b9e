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

#ifndef ESRN_OBJECTIVES_H_
#define ESRN_OBJECTIVES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace esrn {

// psnr is maximized, params and flops are minimized.
struct ObjectiveVector {
  double psnr = 0.0;
  int64_t params = 0;
  int64_t flops = 0;

  bool operator==(const ObjectiveVector&) const = default;
};

// Strict upper bounds: feasible iff params < w_net and flops < v_net.
struct ConstraintSpec {
  int64_t w_net = 0;
  int64_t v_net = 0;

  // Throws std::invalid_argument unless both bounds are positive.
  static ConstraintSpec Make(int64_t w_net, int64_t v_net);

  bool Feasible(const ObjectiveVector& v) const;
  // Relative excess over both bounds; 0 for feasible vectors.
  double Violation(const ObjectiveVector& v) const;
};

bool Dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Fronts of indices; front 0 is the non-dominated set. Indices inside a front
// are ascending.
std::vector<std::vector<size_t>> NonDominatedSort(
    std::span<const ObjectiveVector> vs);

// Per-objective boundary points get +inf; interior points sum normalized
// neighbor gaps. Exact duplicates have no gap on that axis.
std::vector<double> CrowdingDistance(std::span<const ObjectiveVector> front);

// Deterministic total order used to break ties everywhere: psnr desc, then
// params asc, flops asc, tie key asc (genome text), index asc.
bool PreferredOver(const ObjectiveVector& a, const ObjectiveVector& b,
                   const std::string& key_a, const std::string& key_b);

// Feasibility-first order (best first). Without constraints every vector is
// feasible and the order is by psnr. tie_keys may be empty.
std::vector<size_t> ConstrainedRank(std::span<const ObjectiveVector> vs,
                                    const std::optional<ConstraintSpec>& cs,
                                    std::span<const std::string> tie_keys = {});

struct ParetoStanding {
  int front = 0;
  double crowding = 0.0;
};

std::vector<ParetoStanding> ParetoStandings(
    std::span<const ObjectiveVector> vs);

// Front asc, crowding desc, then PreferredOver.
std::vector<size_t> ParetoRank(std::span<const ObjectiveVector> vs,
                               std::span<const std::string> tie_keys = {});

}  // namespace esrn

#endif  // ESRN_OBJECTIVES_H_
