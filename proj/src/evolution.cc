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

#include "esrn/evolution.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <spdlog/spdlog.h>

namespace esrn {

namespace {

constexpr double kRouletteDelta = 0.01;

std::vector<ObjectiveVector> Objectives(std::span<const Individual> pool) {
  std::vector<ObjectiveVector> vs;
  vs.reserve(pool.size());
  for (const auto& ind : pool) vs.push_back(ind.objectives());
  return vs;
}

std::vector<std::string> Texts(std::span<const Individual> pool) {
  std::vector<std::string> keys;
  keys.reserve(pool.size());
  for (const auto& ind : pool) keys.push_back(ind.text);
  return keys;
}

Individual MakeIndividual(Genome genome, int generation, Origin origin) {
  Individual ind;
  ind.text = EncodeText(genome);
  ind.genome = std::move(genome);
  ind.birth_generation = generation;
  ind.origin = origin;
  return ind;
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

const char* OriginName(Origin origin) {
  switch (origin) {
    case Origin::kInit:
      return "init";
    case Origin::kMutation:
      return "mutation";
    case Origin::kCrossover:
      return "crossover";
  }
  return "init";
}

Origin ParseOrigin(const std::string& name) {
  if (name == "mutation") return Origin::kMutation;
  if (name == "crossover") return Origin::kCrossover;
  return Origin::kInit;
}

// Pool the next generation is built from: H followed by E_{g-1}.
std::vector<Individual> ParentPool(const Population& population) {
  std::vector<Individual> pool = population.individuals;
  pool.insert(pool.end(), population.elitism.begin(),
              population.elitism.end());
  return Deduplicate(pool);
}

GenerationRecord Summarize(const SearchState& state) {
  const std::vector<Individual> pool = ParentPool(state.population);
  GenerationRecord rec;
  rec.gen = state.population.generation;

  const Individual* best = nullptr;
  if (state.config.mode == ObjectiveMode::kConstrained) {
    best = &pool[SelectionOrder(pool, state.config).front()];
  } else {
    for (const auto& ind : pool) {
      if (best == nullptr || PreferredOver(ind.objectives(), best->objectives(),
                                           ind.text, best->text)) {
        best = &ind;
      }
    }
  }
  rec.best = best->fitness;
  rec.best_genome = best->text;

  std::vector<double> fitness;
  for (const auto& ind : state.population.individuals) {
    fitness.push_back(ind.fitness);
  }
  rec.median = Median(std::move(fitness));
  rec.pareto_size =
      static_cast<int>(NonDominatedSort(Objectives(pool)).front().size());
  return rec;
}

}  // namespace

const char* ObjectiveModeName(ObjectiveMode mode) {
  return mode == ObjectiveMode::kPareto ? "pareto" : "constrained";
}

const char* MutationModeName(MutationMode mode) {
  return mode == MutationMode::kRandom ? "random" : "guided";
}

ObjectiveMode ParseObjectiveMode(const std::string& name) {
  if (name == "pareto") return ObjectiveMode::kPareto;
  if (name == "constrained") return ObjectiveMode::kConstrained;
  throw ConfigError("mode: expected 'pareto' or 'constrained', got '" + name +
                    "'");
}

MutationMode ParseMutationMode(const std::string& name) {
  if (name == "guided") return MutationMode::kGuided;
  if (name == "random") return MutationMode::kRandom;
  throw ConfigError("mutation: expected 'guided' or 'random', got '" + name +
                    "'");
}

void SearchConfig::Validate() const {
  if (generations < 0) throw ConfigError("generations: must be >= 0");
  if (lambda < 2 || lambda % 2 != 0) {
    throw ConfigError("lambda: must be an even number >= 2");
  }
  if (!(mutation_rate > 0.0 && mutation_rate < 1.0)) {
    throw ConfigError("mutation_rate: must be in (0, 1)");
  }
  if (elitism < 1 || elitism > lambda) {
    throw ConfigError("elitism: must be in [1, lambda]");
  }
  if (std::find(kScaleChoices.begin(), kScaleChoices.end(),
                resolution.scale) == kScaleChoices.end()) {
    throw ConfigError("scale: must be one of 2, 3, 4");
  }
  try {
    ResolutionSpec::Make(resolution.hr_width, resolution.hr_height,
                         resolution.scale);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("resolution: ") + e.what());
  }
  if (resolution.lr_pixels() % 4 != 0) {
    throw ConfigError(
        "resolution: LR pixel count must be divisible by 4 for pooled blocks");
  }
  if (budget < 0) throw ConfigError("budget: must be >= 0");
  if (constraints && (constraints->w_net <= 0 || constraints->v_net <= 0)) {
    throw ConfigError("constraints: max_params and max_flops must be > 0");
  }
  if (!std::isfinite(floor_fitness)) {
    throw ConfigError("floor_fitness: must be finite");
  }
}

nlohmann::json ToJson(const SearchConfig& c) {
  nlohmann::json constraints = nullptr;
  if (c.constraints) {
    constraints = {{"max_params", c.constraints->w_net},
                   {"max_flops", c.constraints->v_net}};
  }
  return {{"generations", c.generations},
          {"lambda", c.lambda},
          {"mutation_rate", c.mutation_rate},
          {"elitism", c.elitism},
          {"seed", c.seed},
          {"mode", ObjectiveModeName(c.mode)},
          {"constraints", constraints},
          {"mutation", MutationModeName(c.mutation)},
          {"resolution",
           {{"hr_width", c.resolution.hr_width},
            {"hr_height", c.resolution.hr_height},
            {"scale", c.resolution.scale}}},
          {"budget", c.budget},
          {"floor_fitness", c.floor_fitness}};
}

SearchConfig SearchConfigFromJson(const nlohmann::json& j) {
  SearchConfig c;
  c.generations = j.at("generations").get<int>();
  c.lambda = j.at("lambda").get<int>();
  c.mutation_rate = j.at("mutation_rate").get<double>();
  c.elitism = j.at("elitism").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  c.mode = ParseObjectiveMode(j.at("mode").get<std::string>());
  if (!j.at("constraints").is_null()) {
    c.constraints = ConstraintSpec{j["constraints"].at("max_params").get<int64_t>(),
                                   j["constraints"].at("max_flops").get<int64_t>()};
  }
  c.mutation = ParseMutationMode(j.at("mutation").get<std::string>());
  const auto& r = j.at("resolution");
  c.resolution = ResolutionSpec{r.at("hr_width").get<int>(),
                                r.at("hr_height").get<int>(),
                                r.at("scale").get<int>()};
  c.budget = j.at("budget").get<int>();
  c.floor_fitness = j.at("floor_fitness").get<double>();
  return c;
}

nlohmann::json ToJson(const Individual& ind) {
  return {{"genome", ind.text},
          {"scale", ind.genome.scale},
          {"evaluated", ind.evaluated},
          {"failed", ind.failed},
          {"fitness", ind.fitness},
          {"floor_fitness", ind.floor_fitness},
          {"prefix_fitness", ind.prefix_fitness},
          {"params", ind.cost.params},
          {"flops", ind.cost.flops},
          {"lr", {ind.cost.lr_width, ind.cost.lr_height}},
          {"birth_generation", ind.birth_generation},
          {"origin", OriginName(ind.origin)}};
}

Individual IndividualFromJson(const nlohmann::json& j) {
  Individual ind;
  ind.text = j.at("genome").get<std::string>();
  ind.genome = DecodeText(ind.text, j.at("scale").get<int>());
  ind.evaluated = j.at("evaluated").get<bool>();
  ind.failed = j.at("failed").get<bool>();
  ind.fitness = j.at("fitness").get<double>();
  ind.floor_fitness = j.at("floor_fitness").get<double>();
  ind.prefix_fitness = j.at("prefix_fitness").get<std::vector<double>>();
  ind.cost.params = j.at("params").get<int64_t>();
  ind.cost.flops = j.at("flops").get<int64_t>();
  ind.cost.multi_adds = ind.cost.flops / 2;
  ind.cost.lr_width = j.at("lr").at(0).get<int>();
  ind.cost.lr_height = j.at("lr").at(1).get<int>();
  ind.birth_generation = j.at("birth_generation").get<int>();
  ind.origin = ParseOrigin(j.at("origin").get<std::string>());
  return ind;
}

nlohmann::json ToJson(const GenerationRecord& r) {
  return {{"gen", r.gen},
          {"best", r.best},
          {"median", r.median},
          {"best_genome", r.best_genome},
          {"pareto_size", r.pareto_size}};
}

GenerationRecord GenerationRecordFromJson(const nlohmann::json& j) {
  return {j.at("gen").get<int>(), j.at("best").get<double>(),
          j.at("median").get<double>(), j.at("best_genome").get<std::string>(),
          j.at("pareto_size").get<int>()};
}

Genome GuidedMutate(const Genome& parent, const MutationOptions& options,
                    const CreditMatrix& credit, Rng& rng,
                    MutationTrace* trace) {
  MutationTrace local;
  MutationTrace& t = trace != nullptr ? *trace : local;
  t = MutationTrace{};

  auto draw = [&](int depth) {
    if (options.mode == MutationMode::kRandom) {
      return GenotypeId{static_cast<int>(rng.UniformInt(kNumGenotypes))};
    }
    const auto p = credit.SelectionProbabilities(depth);
    return GenotypeId{static_cast<int>(rng.Roulette(p))};
  };

  Genome child = parent;
  const int n = static_cast<int>(child.blocks.size());
  for (int l = 0; l < n; ++l) {
    if (rng.Bernoulli(options.rate)) {
      child.blocks[l] = GeneFromGenotype(draw(l), child.blocks[l].active);
      t.resampled.push_back(l);
    }
    if (rng.Bernoulli(options.rate)) {
      child.blocks[l].active = !child.blocks[l].active;
      t.flipped.push_back(l);
    }
  }
  if (options.force_at_least_one && t.resampled.empty() && t.flipped.empty()) {
    const int l = static_cast<int>(rng.UniformInt(n));
    child.blocks[l] = GeneFromGenotype(draw(l), child.blocks[l].active);
    t.resampled.push_back(l);
    t.forced = true;
  }
  RepairActiveCount(child, rng);
  return child;
}

Genome UniformCrossover(const Genome& a, const Genome& b, Rng& rng) {
  Genome child = a;
  for (size_t l = 0; l < child.blocks.size() && l < b.blocks.size(); ++l) {
    if (rng.UniformInt(2) == 1) child.blocks[l] = b.blocks[l];
  }
  RepairActiveCount(child, rng);
  return child;
}

std::vector<size_t> SelectionOrder(std::span<const Individual> pool,
                                   const SearchConfig& config) {
  const auto vs = Objectives(pool);
  const auto keys = Texts(pool);
  if (config.mode == ObjectiveMode::kPareto) return ParetoRank(vs, keys);
  return ConstrainedRank(vs, config.constraints, keys);
}

std::vector<double> RouletteWeights(std::span<const Individual> pool,
                                    const SearchConfig& config) {
  std::vector<double> score(pool.size());
  if (config.mode == ObjectiveMode::kPareto) {
    const auto standings = ParetoStandings(Objectives(pool));
    for (size_t i = 0; i < pool.size(); ++i) {
      const double cd = standings[i].crowding;
      const double bonus = std::isinf(cd) ? 0.5 : 0.5 * cd / (1.0 + cd);
      score[i] = -standings[i].front + bonus;
    }
  } else {
    for (size_t i = 0; i < pool.size(); ++i) score[i] = pool[i].fitness;
  }
  if (score.empty()) return score;
  const double lo = *std::min_element(score.begin(), score.end());
  for (double& s : score) s = s - lo + kRouletteDelta;
  return score;
}

std::vector<Individual> Deduplicate(std::span<const Individual> pool) {
  std::vector<Individual> out;
  std::set<std::string> seen;
  for (const auto& ind : pool) {
    if (seen.insert(ind.text).second) out.push_back(ind);
  }
  return out;
}

std::vector<Individual> SelectElitism(std::span<const Individual> pool,
                                      const SearchConfig& config, int t) {
  const std::vector<Individual> unique = Deduplicate(pool);
  const auto order = SelectionOrder(unique, config);
  std::vector<Individual> elites;
  for (size_t k = 0; k < order.size() && static_cast<int>(k) < t; ++k) {
    elites.push_back(unique[order[k]]);
  }
  return elites;
}

Genome CrossoverFromPool(std::span<const Individual> pool,
                         const SearchConfig& config, Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("crossover of empty pool");
  if (pool.size() == 1) {
    Genome clone = pool.front().genome;
    RepairActiveCount(clone, rng);
    return clone;
  }
  std::vector<double> weights = RouletteWeights(pool, config);
  const size_t first = rng.Roulette(weights);
  weights[first] = 0.0;
  const size_t second = rng.Roulette(weights);
  return UniformCrossover(pool[first].genome, pool[second].genome, rng);
}

void EvaluateIndividuals(std::vector<Individual>& individuals,
                         const SearchConfig& config, Evaluator& evaluator) {
  std::vector<EvalRequest> requests;
  std::vector<size_t> slots;
  for (size_t i = 0; i < individuals.size(); ++i) {
    Individual& ind = individuals[i];
    if (ind.evaluated) continue;
    if (!Validate(ind.genome).ok()) {
      throw std::logic_error("invalid genome reached evaluation: " + ind.text);
    }
    ind.cost = NetworkCost(ind.genome, config.resolution).total;
    EvalRequest req;
    req.id = "g" + std::to_string(ind.birth_generation) + "-i" +
             std::to_string(i);
    req.genome = ind.genome;
    req.scale = config.scale();
    req.budget = config.budget;
    req.seed = config.seed;
    requests.push_back(std::move(req));
    slots.push_back(i);
  }
  if (requests.empty()) return;

  const auto responses = evaluator.EvaluateBatch(requests);
  for (size_t k = 0; k < slots.size(); ++k) {
    Individual& ind = individuals[slots[k]];
    const EvalResponse& resp = responses[k];
    const int active = ind.genome.ActiveCount();
    auto violation = CheckResponseContract(resp, active);
    ind.evaluated = true;
    if (resp.ok() && !violation) {
      ind.failed = false;
      ind.floor_fitness = resp.prefix_fitness.front();
      ind.prefix_fitness.assign(resp.prefix_fitness.begin() + 1,
                                resp.prefix_fitness.end());
      ind.fitness = resp.fitness;
    } else {
      spdlog::warn("evaluation of {} failed ({}); assigning floor fitness",
                   ind.text, violation ? *violation : resp.message);
      ind.failed = true;
      ind.floor_fitness = config.floor_fitness;
      ind.prefix_fitness.assign(active, config.floor_fitness);
      ind.fitness = config.floor_fitness;
    }
  }
}

void UpdateCredits(CreditMatrix& credit,
                   std::span<const Individual> individuals) {
  for (const auto& ind : individuals) {
    if (!ind.evaluated || ind.failed) continue;
    const std::vector<int> depths = ind.genome.ActivePositions();
    for (const auto& dc :
         CreditFromPrefix(ind.floor_fitness, ind.prefix_fitness, depths)) {
      credit.Update(GenotypeIdOf(ind.genome.blocks[dc.depth]), dc.depth,
                    dc.credit);
    }
  }
}

SearchState InitializeSearch(const SearchConfig& config, Evaluator& evaluator) {
  config.Validate();
  SearchState state;
  state.config = config;
  state.rng = Rng(config.seed);
  for (int i = 0; i < config.lambda; ++i) {
    state.population.individuals.push_back(
        MakeIndividual(RandomGenome(state.rng, config.scale()), 0,
                       Origin::kInit));
  }
  EvaluateIndividuals(state.population.individuals, config, evaluator);
  UpdateCredits(state.credit, state.population.individuals);
  state.population.elitism =
      SelectElitism(state.population.individuals, config, config.elitism);
  state.population.generation = 0;
  state.history.push_back(Summarize(state));
  return state;
}

void RunGeneration(SearchState& state, Evaluator& evaluator) {
  const SearchConfig& cfg = state.config;
  Population& pop = state.population;
  const int next_gen = pop.generation + 1;

  const std::vector<Individual> pool = ParentPool(pop);
  const std::vector<Individual> elites =
      SelectElitism(pool, cfg, cfg.elitism);

  const MutationOptions mutation{cfg.mutation_rate, cfg.mutation, true};
  std::vector<Individual> children;
  const int half = cfg.lambda / 2;
  for (int i = 0; i < half; ++i) {
    const Individual& parent = elites[static_cast<size_t>(i) % elites.size()];
    children.push_back(MakeIndividual(
        GuidedMutate(parent.genome, mutation, state.credit, state.rng),
        next_gen, Origin::kMutation));
  }
  for (int i = 0; i < half; ++i) {
    children.push_back(MakeIndividual(CrossoverFromPool(pool, cfg, state.rng),
                                      next_gen, Origin::kCrossover));
  }

  EvaluateIndividuals(children, cfg, evaluator);
  UpdateCredits(state.credit, children);

  pop.individuals = std::move(children);
  pop.elitism = elites;
  pop.generation = next_gen;
  state.history.push_back(Summarize(state));
}

std::vector<Individual> CurrentElitism(const SearchState& state) {
  return SelectElitism(ParentPool(state.population), state.config,
                       state.config.elitism);
}

void ContinueSearch(SearchState& state, Evaluator& evaluator,
                    const GenerationCallback& on_generation,
                    std::optional<int> stop_at_generation) {
  const int last = stop_at_generation
                       ? std::min(*stop_at_generation, state.config.generations)
                       : state.config.generations;
  while (state.population.generation < last) {
    RunGeneration(state, evaluator);
    if (on_generation) on_generation(state);
  }
}

SearchResult RunSearch(const SearchConfig& config, Evaluator& evaluator,
                       const GenerationCallback& on_generation) {
  SearchState state = InitializeSearch(config, evaluator);
  if (on_generation) on_generation(state);
  ContinueSearch(state, evaluator, on_generation);
  return {CurrentElitism(state), state.history, state.credit};
}

}  // namespace esrn
