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

// Shared helpers for the unit and acceptance tests.

#ifndef ESRN_TESTS_TEST_SUPPORT_H_
#define ESRN_TESTS_TEST_SUPPORT_H_

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "esrn/genome.h"
#include "esrn/objectives.h"
#include "esrn/rng.h"

namespace esrn::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (stem + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Random genome restricted to shrink and group blocks.
inline Genome RandomShrinkGroupGenome(Rng& rng, int scale) {
  Genome g = RandomGenome(rng, scale);
  for (auto& b : g.blocks) {
    if (b.type == BlockType::kContextual) {
      b.type = rng.UniformInt(2) == 0 ? BlockType::kShrink : BlockType::kGroup;
      b.recursion = 1;
    }
  }
  return g;
}

// Peels non-dominated layers by exhaustive pairwise checks: O(n^3).
inline std::vector<std::vector<size_t>> BruteForceFronts(
    std::span<const ObjectiveVector> vs) {
  auto dominates = [](const ObjectiveVector& a, const ObjectiveVector& b) {
    const bool no_worse =
        a.psnr >= b.psnr && a.params <= b.params && a.flops <= b.flops;
    const bool better =
        a.psnr > b.psnr || a.params < b.params || a.flops < b.flops;
    return no_worse && better;
  };
  std::vector<bool> assigned(vs.size(), false);
  size_t remaining = vs.size();
  std::vector<std::vector<size_t>> fronts;
  while (remaining > 0) {
    std::vector<size_t> front;
    for (size_t i = 0; i < vs.size(); ++i) {
      if (assigned[i]) continue;
      bool dominated = false;
      for (size_t j = 0; j < vs.size() && !dominated; ++j) {
        dominated = !assigned[j] && j != i && dominates(vs[j], vs[i]);
      }
      if (!dominated) front.push_back(i);
    }
    for (size_t i : front) assigned[i] = true;
    remaining -= front.size();
    fronts.push_back(std::move(front));
  }
  return fronts;
}

}  // namespace esrn::testing

#endif  // ESRN_TESTS_TEST_SUPPORT_H_
