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

#include "esrn/objectives.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace esrn {

namespace {

const std::string& KeyAt(std::span<const std::string> keys, size_t i) {
  static const std::string kEmpty;
  return i < keys.size() ? keys[i] : kEmpty;
}

// Oriented so that larger is better on every axis.
double Axis(const ObjectiveVector& v, int m) {
  switch (m) {
    case 0:
      return v.psnr;
    case 1:
      return -static_cast<double>(v.params);
    default:
      return -static_cast<double>(v.flops);
  }
}

}  // namespace

ConstraintSpec ConstraintSpec::Make(int64_t w_net, int64_t v_net) {
  if (w_net <= 0 || v_net <= 0) {
    throw std::invalid_argument("constraint bounds must be positive");
  }
  return ConstraintSpec{w_net, v_net};
}

bool ConstraintSpec::Feasible(const ObjectiveVector& v) const {
  return v.params < w_net && v.flops < v_net;
}

double ConstraintSpec::Violation(const ObjectiveVector& v) const {
  const double p = std::max<int64_t>(0, v.params - w_net);
  const double f = std::max<int64_t>(0, v.flops - v_net);
  return p / static_cast<double>(w_net) + f / static_cast<double>(v_net);
}

bool Dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  if (a.psnr < b.psnr || a.params > b.params || a.flops > b.flops) return false;
  return a.psnr > b.psnr || a.params < b.params || a.flops < b.flops;
}

std::vector<std::vector<size_t>> NonDominatedSort(
    std::span<const ObjectiveVector> vs) {
  const size_t n = vs.size();
  std::vector<std::vector<size_t>> dominated_by_me(n);
  std::vector<size_t> domination_count(n, 0);
  std::vector<std::vector<size_t>> fronts;
  std::vector<size_t> current;
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (Dominates(vs[p], vs[q])) {
        dominated_by_me[p].push_back(q);
      } else if (Dominates(vs[q], vs[p])) {
        ++domination_count[p];
      }
    }
    if (domination_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<size_t> next;
    for (size_t p : current) {
      for (size_t q : dominated_by_me[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    fronts.push_back(std::move(current));
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> CrowdingDistance(std::span<const ObjectiveVector> front) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const size_t n = front.size();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  for (int m = 0; m < 3; ++m) {
    std::vector<double> sorted(n);
    for (size_t i = 0; i < n; ++i) sorted[i] = Axis(front[i], m);
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    const double range = hi - lo;
    if (range <= 0.0) continue;
    for (size_t i = 0; i < n; ++i) {
      const double v = Axis(front[i], m);
      if (v == lo || v == hi) {
        distance[i] = kInf;
        continue;
      }
      auto [first, last] = std::equal_range(sorted.begin(), sorted.end(), v);
      if (last - first > 1) continue;
      distance[i] += (*last - *(first - 1)) / range;
    }
  }
  return distance;
}

bool PreferredOver(const ObjectiveVector& a, const ObjectiveVector& b,
                   const std::string& key_a, const std::string& key_b) {
  if (a.psnr != b.psnr) return a.psnr > b.psnr;
  if (a.params != b.params) return a.params < b.params;
  if (a.flops != b.flops) return a.flops < b.flops;
  return key_a < key_b;
}

std::vector<size_t> ConstrainedRank(std::span<const ObjectiveVector> vs,
                                    const std::optional<ConstraintSpec>& cs,
                                    std::span<const std::string> tie_keys) {
  std::vector<size_t> order(vs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<char> feasible(vs.size(), 1);
  std::vector<double> violation(vs.size(), 0.0);
  if (cs) {
    for (size_t i = 0; i < vs.size(); ++i) {
      feasible[i] = cs->Feasible(vs[i]);
      violation[i] = cs->Violation(vs[i]);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (feasible[a] != feasible[b]) return feasible[a] > feasible[b];
    if (!feasible[a] && violation[a] != violation[b]) {
      return violation[a] < violation[b];
    }
    return PreferredOver(vs[a], vs[b], KeyAt(tie_keys, a), KeyAt(tie_keys, b));
  });
  return order;
}

std::vector<ParetoStanding> ParetoStandings(
    std::span<const ObjectiveVector> vs) {
  std::vector<ParetoStanding> standings(vs.size());
  const auto fronts = NonDominatedSort(vs);
  for (size_t f = 0; f < fronts.size(); ++f) {
    std::vector<ObjectiveVector> members;
    for (size_t i : fronts[f]) members.push_back(vs[i]);
    const auto crowd = CrowdingDistance(members);
    for (size_t k = 0; k < fronts[f].size(); ++k) {
      standings[fronts[f][k]] = {static_cast<int>(f), crowd[k]};
    }
  }
  return standings;
}

std::vector<size_t> ParetoRank(std::span<const ObjectiveVector> vs,
                               std::span<const std::string> tie_keys) {
  const auto standings = ParetoStandings(vs);
  std::vector<size_t> order(vs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (standings[a].front != standings[b].front) {
      return standings[a].front < standings[b].front;
    }
    if (standings[a].crowding != standings[b].crowding) {
      return standings[a].crowding > standings[b].crowding;
    }
    return PreferredOver(vs[a], vs[b], KeyAt(tie_keys, a), KeyAt(tie_keys, b));
  });
  return order;
}

}  // namespace esrn
