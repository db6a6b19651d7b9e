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

// Credit-guided evolutionary search.
//
// Each generation:
//   E_g      <- top-T of {H, E_{g-1}}
//   children <- lambda/2 guided mutations of E_g (elites cycled in rank
//               order) + lambda/2 uniform crossovers of roulette-selected
//               parents from {H, E_{g-1}}
//   H        <- children, evaluated; block credits updated from every
//               child's prefix fitness in index order.
//
// All randomness flows from one Rng owned by the search state, so a search
// is a pure function of its config (given a deterministic evaluator).

#ifndef ESRN_EVOLUTION_H_
#define ESRN_EVOLUTION_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "esrn/cost_model.h"
#include "esrn/credit.h"
#include "esrn/evaluator.h"
#include "esrn/genome.h"
#include "esrn/objectives.h"
#include "esrn/rng.h"
#include "json.hpp"

namespace esrn {

enum class ObjectiveMode { kConstrained, kPareto };
enum class MutationMode { kGuided, kRandom };

const char* ObjectiveModeName(ObjectiveMode mode);
const char* MutationModeName(MutationMode mode);
ObjectiveMode ParseObjectiveMode(const std::string& name);
MutationMode ParseMutationMode(const std::string& name);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SearchConfig {
  int generations = 40;
  int lambda = 16;
  double mutation_rate = 0.2;
  int elitism = 8;
  uint64_t seed = 0;
  ObjectiveMode mode = ObjectiveMode::kConstrained;
  // Only used in constrained mode; without it the search maximizes psnr.
  std::optional<ConstraintSpec> constraints;
  MutationMode mutation = MutationMode::kGuided;
  ResolutionSpec resolution;
  int budget = 10;
  // Fitness assigned when an evaluation fails.
  double floor_fitness = kSurrogateFloor;

  int scale() const { return resolution.scale; }
  // Throws ConfigError naming the offending field.
  void Validate() const;
};

nlohmann::json ToJson(const SearchConfig& config);
SearchConfig SearchConfigFromJson(const nlohmann::json& j);

enum class Origin { kInit, kMutation, kCrossover };

struct Individual {
  Genome genome;
  std::string text;
  bool evaluated = false;
  bool failed = false;
  double fitness = 0.0;
  double floor_fitness = 0.0;
  // One entry per active block; the last equals fitness.
  std::vector<double> prefix_fitness;
  CostReport cost;
  int birth_generation = 0;
  Origin origin = Origin::kInit;

  ObjectiveVector objectives() const {
    return {fitness, cost.params, cost.flops};
  }
};

nlohmann::json ToJson(const Individual& individual);
Individual IndividualFromJson(const nlohmann::json& j);

struct Population {
  std::vector<Individual> individuals;
  // E_{g-1}: the elites the next generation selects against.
  std::vector<Individual> elitism;
  int generation = 0;
};

struct GenerationRecord {
  int gen = 0;
  double best = 0.0;
  double median = 0.0;
  std::string best_genome;
  int pareto_size = 0;

  bool operator==(const GenerationRecord&) const = default;
};

nlohmann::json ToJson(const GenerationRecord& record);
GenerationRecord GenerationRecordFromJson(const nlohmann::json& j);

// ---- Operators -------------------------------------------------------------

struct MutationOptions {
  double rate = 0.2;
  MutationMode mode = MutationMode::kGuided;
  // Resample one uniformly chosen position when nothing else fired.
  bool force_at_least_one = true;
};

struct MutationTrace {
  std::vector<int> resampled;
  std::vector<int> flipped;
  bool forced = false;
};

// Per position: with probability rate the genotype is redrawn (from the
// squared-credit distribution of that depth, or uniformly over all
// genotypes in random mode), and independently with probability rate the
// active bit flips. The result is repaired to the active-block floor.
Genome GuidedMutate(const Genome& parent, const MutationOptions& options,
                    const CreditMatrix& credit, Rng& rng,
                    MutationTrace* trace = nullptr);

// Per-position fair coin between the parents, then repair.
Genome UniformCrossover(const Genome& a, const Genome& b, Rng& rng);

// Best-first order under the configured objective mode.
std::vector<size_t> SelectionOrder(std::span<const Individual> pool,
                                   const SearchConfig& config);

// Roulette weights: score - min(score) + 0.01, where score is fitness in
// constrained mode and -front + 0.5 * cd / (1 + cd) in pareto mode.
std::vector<double> RouletteWeights(std::span<const Individual> pool,
                                    const SearchConfig& config);

// Drops later duplicates (by genome text), keeping pool order.
std::vector<Individual> Deduplicate(std::span<const Individual> pool);

// Top-t after deduplication, best first; fewer if the pool is smaller.
std::vector<Individual> SelectElitism(std::span<const Individual> pool,
                                      const SearchConfig& config, int t);

// Two distinct roulette-selected parents, uniform crossover. A pool of one
// yields a (repaired) clone.
Genome CrossoverFromPool(std::span<const Individual> pool,
                         const SearchConfig& config, Rng& rng);

// ---- Search driver ---------------------------------------------------------

struct SearchState {
  SearchConfig config;
  Population population;
  CreditMatrix credit;
  Rng rng{0};
  std::vector<GenerationRecord> history;

  bool Done() const { return population.generation >= config.generations; }
};

// Evaluates individuals in place (one batch). Failed evaluations get the
// config's floor fitness and are flagged.
void EvaluateIndividuals(std::vector<Individual>& individuals,
                         const SearchConfig& config, Evaluator& evaluator);

// Adds every successful individual's block credits, in index order.
void UpdateCredits(CreditMatrix& credit,
                   std::span<const Individual> individuals);

SearchState InitializeSearch(const SearchConfig& config, Evaluator& evaluator);
void RunGeneration(SearchState& state, Evaluator& evaluator);

// Final elites: top-T of {H, E} after the last generation.
std::vector<Individual> CurrentElitism(const SearchState& state);

using GenerationCallback = std::function<void(const SearchState&)>;

// Runs until config.generations, or until stop_at_generation if given.
// on_generation fires after initialization and after every generation.
void ContinueSearch(SearchState& state, Evaluator& evaluator,
                    const GenerationCallback& on_generation = {},
                    std::optional<int> stop_at_generation = std::nullopt);

struct SearchResult {
  std::vector<Individual> elitism;
  std::vector<GenerationRecord> history;
  CreditMatrix credit;
};

SearchResult RunSearch(const SearchConfig& config, Evaluator& evaluator,
                       const GenerationCallback& on_generation = {});

}  // namespace esrn

#endif  // ESRN_EVOLUTION_H_
