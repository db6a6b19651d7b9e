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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "esrn/credit.h"
#include "esrn/rng.h"

namespace esrn {
namespace {

double Sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

TEST_CASE("credits are prefix differences") {
  const std::vector<double> prefix = {30.0, 30.5, 30.7};
  const std::vector<int> depths = {0, 4, 9};
  const auto c = CreditFromPrefix(28.0, prefix, depths);
  REQUIRE(c.size() == 3);
  CHECK(c[0].depth == 0);
  CHECK(c[0].credit == doctest::Approx(2.0));
  CHECK(c[1].depth == 4);
  CHECK(c[1].credit == doctest::Approx(0.5));
  CHECK(c[2].depth == 9);
  CHECK(c[2].credit == doctest::Approx(0.2));

  const std::vector<double> flat = {31.0, 31.0, 31.0};
  for (const auto& d : CreditFromPrefix(31.0, flat, depths)) {
    CHECK(d.credit == 0.0);
  }

  const std::vector<double> one = {29.0};
  const std::vector<int> at = {6};
  const auto single = CreditFromPrefix(28.0, one, at);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == DepthCredit{6, 1.0});

  CHECK_THROWS_AS(CreditFromPrefix(28.0, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(CreditFromPrefix(28.0, prefix, at), std::invalid_argument);
}

TEST_CASE("moving average update") {
  CreditMatrix m;
  m.Update({3}, 2, 0.7);
  CHECK(m.value({3}, 2) == 0.7);  // first observation overwrites
  CHECK(m.count({3}, 2) == 1);

  CreditMatrix ex;
  ex.Update({0}, 0, 0.5);
  ex.Update({0}, 0, 0.3);
  CHECK(ex.value({0}, 0) == doctest::Approx(0.48).epsilon(1e-15));
  CHECK(ex.count({0}, 0) == 2);
  CHECK(ex.total_observations() == 2);

  CreditMatrix fixed;
  fixed.Update({449}, 19, -1.25);
  for (int i = 0; i < 10; ++i) fixed.Update({449}, 19, -1.25);
  CHECK(fixed.value({449}, 19) == -1.25);
}

TEST_CASE("update is a contraction toward the observation") {
  Rng rng(31);
  CreditMatrix m;
  for (int i = 0; i < 2000; ++i) {
    const GenotypeId j{static_cast<int>(rng.UniformInt(kNumGenotypes))};
    const int d = static_cast<int>(rng.UniformInt(kMaxBlocks));
    const double c = rng.Uniform01() * 4.0 - 2.0;
    if (m.count(j, d) == 0) {
      m.Update(j, d, c);
      continue;
    }
    const double before = m.value(j, d);
    m.Update(j, d, c);
    CHECK(std::abs(m.value(j, d) - c) <=
          kCreditAlpha * std::abs(before - c) + 1e-15);
  }
}

TEST_CASE("update rejects bad indices and values") {
  CreditMatrix m;
  CHECK_THROWS_AS(m.Update({450}, 0, 0.1), std::out_of_range);
  CHECK_THROWS_AS(m.Update({-1}, 0, 0.1), std::out_of_range);
  CHECK_THROWS_AS(m.Update({0}, 20, 0.1), std::out_of_range);
  CHECK_THROWS_AS(m.value({0}, -1), std::out_of_range);
  CHECK_THROWS_AS(m.Update({0}, 0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(m.Update({0}, 0, INFINITY), std::invalid_argument);
}

TEST_CASE("normalization shifts the minimum to epsilon") {
  const std::vector<double> col = {0.2, -0.1, 0.4};
  const auto n = NormalizeCredits(col);
  CHECK(n[0] == doctest::Approx(0.301).epsilon(1e-12));
  CHECK(n[1] == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(n[2] == doctest::Approx(0.501).epsilon(1e-12));

  const std::vector<double> flat = {0.3, 0.3};
  for (double v : NormalizeCredits(flat)) {
    CHECK(v == doctest::Approx(0.001).epsilon(1e-12));
  }

  const CreditMatrix empty;
  const auto fresh = empty.NormalizeColumn(5);
  CHECK(fresh.size() == 450);
  for (double v : fresh) CHECK(v == kCreditEpsilon);
}

TEST_CASE("squared proportions") {
  const std::vector<double> even = {0.001, 0.001};
  const auto p = SquaredProportions(even);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  const std::vector<double> skew = {0.3, 0.1};
  const auto q = SquaredProportions(skew);
  CHECK(q[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("unobserved cells take the column prior") {
  CreditMatrix m;
  CHECK(m.ColumnPrior(0) == 0.0);
  m.Update({10}, 0, 0.2);
  m.Update({20}, 0, 1.0);
  // lowest 0.2, mean 0.6
  CHECK(m.ColumnPrior(0) ==
        doctest::Approx(0.2 + kUnobservedPriorWeight * 0.4));
  const auto n = m.NormalizeColumn(0);
  CHECK(n[10] == doctest::Approx(kCreditEpsilon));
  CHECK(n[20] == doctest::Approx(0.8 + kCreditEpsilon));
  CHECK(n[0] == doctest::Approx(kUnobservedPriorWeight * 0.4 + kCreditEpsilon));
  // Other columns are unaffected.
  CHECK(m.ColumnPrior(1) == 0.0);
}

TEST_CASE("selection probabilities on random matrices") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    CreditMatrix m;
    const int depth = static_cast<int>(rng.UniformInt(kMaxBlocks));
    const int observations = 1 + static_cast<int>(rng.UniformInt(600));
    for (int i = 0; i < observations; ++i) {
      m.Update({static_cast<int>(rng.UniformInt(kNumGenotypes))}, depth,
               rng.Uniform01() * 3.0 - 1.0);
    }
    const auto n = m.NormalizeColumn(depth);
    const auto p = m.SelectionProbabilities(depth);
    CHECK(std::abs(Sum(p) - 1.0) <= 1e-12);
    CHECK(*std::min_element(p.begin(), p.end()) > 0.0);
    CHECK(*std::min_element(n.begin(), n.end()) >=
          kCreditEpsilon - 1e-15);
    // Squaring keeps the argmax.
    CHECK(std::max_element(p.begin(), p.end()) - p.begin() ==
          std::max_element(n.begin(), n.end()) - n.begin());
    // Probabilities ignore a common positive scale of the shifted credits.
    std::vector<double> scaled = n;
    for (double& v : scaled) v *= 7.5;
    const auto ps = SquaredProportions(scaled);
    for (size_t j = 0; j < p.size(); ++j) {
      CHECK(ps[j] == doctest::Approx(p[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("same observations give bitwise identical matrices") {
  auto build = [] {
    Rng rng(5);
    CreditMatrix m;
    for (int i = 0; i < 5000; ++i) {
      m.Update({static_cast<int>(rng.UniformInt(kNumGenotypes))},
               static_cast<int>(rng.UniformInt(kMaxBlocks)),
               rng.Uniform01() - 0.5);
    }
    return m;
  };
  const CreditMatrix a = build();
  const CreditMatrix b = build();
  CHECK(a == b);
  for (int d = 0; d < kMaxBlocks; ++d) {
    CHECK(a.SelectionProbabilities(d) == b.SelectionProbabilities(d));
  }
}

TEST_CASE("credit matrix json round trip") {
  Rng rng(8);
  CreditMatrix m;
  for (int i = 0; i < 300; ++i) {
    m.Update({static_cast<int>(rng.UniformInt(kNumGenotypes))},
             static_cast<int>(rng.UniformInt(kMaxBlocks)),
             rng.Uniform01() * 0.37 - 0.1);
  }
  const CreditMatrix back =
      CreditMatrix::FromJson(nlohmann::json::parse(m.ToJson().dump()));
  CHECK(back == m);
  CHECK(back.ToJson().dump() == m.ToJson().dump());

  nlohmann::json bad = m.ToJson();
  bad["alpha"] = "high";
  CHECK_THROWS_AS(CreditMatrix::FromJson(bad), std::invalid_argument);
}

}  // namespace
}  // namespace esrn
