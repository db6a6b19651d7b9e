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

#ifndef ESRN_RNG_H_
#define ESRN_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace esrn {

// Seeded random source used by every stochastic operator in the engine.
//
// The generator is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. The standard distributions are implementation-defined, so
// the mapping from raw 64-bit words to integers and reals is done here:
//   * UniformInt(n): rejection sampling on the top of the 64-bit range.
//   * Uniform01():   (word >> 11) * 2^-53, in [0, 1).
// Together these make a search reproducible across compilers and the state
// round-trips through SerializeState()/RestoreState().
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t UniformInt(uint64_t n);

  // Uniform real in [0, 1).
  double Uniform01();

  bool Bernoulli(double p) { return Uniform01() < p; }

  // Index drawn proportionally to non-negative weights. At least one weight
  // must be positive.
  size_t Roulette(std::span<const double> weights);

  std::string SerializeState() const;
  void RestoreState(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_;
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 output function; used to derive independent seeds and for the
// surrogate's pseudo-noise.
constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace esrn

#endif  // ESRN_RNG_H_
