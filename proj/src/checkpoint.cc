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

#include "esrn/checkpoint.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "esrn/objectives.h"

namespace esrn {

namespace fs = std::filesystem;

void WriteFileAtomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

nlohmann::json CheckpointToJson(const SearchState& state,
                                const EvaluatorConfig& evaluator,
                                const CachedEvaluator* cache) {
  nlohmann::json population = nlohmann::json::array();
  for (const auto& ind : state.population.individuals) {
    population.push_back(ToJson(ind));
  }
  nlohmann::json elitism = nlohmann::json::array();
  for (const auto& ind : state.population.elitism) {
    elitism.push_back(ToJson(ind));
  }
  nlohmann::json history = nlohmann::json::array();
  for (const auto& rec : state.history) history.push_back(ToJson(rec));
  return {{"version", kCheckpointVersion},
          {"config", ToJson(state.config)},
          {"evaluator", ToJson(evaluator)},
          {"generation", state.population.generation},
          {"population", std::move(population)},
          {"elitism", std::move(elitism)},
          {"credit", state.credit.ToJson()},
          {"cache", cache != nullptr ? cache->ToJson() : nlohmann::json(nullptr)},
          {"rng", state.rng.SerializeState()},
          {"history", std::move(history)}};
}

LoadedCheckpoint CheckpointFromJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version")) {
    throw CheckpointError("checkpoint: missing version");
  }
  if (!j["version"].is_number_integer() ||
      j["version"].get<int>() != kCheckpointVersion) {
    throw CheckpointError("checkpoint: version " + j["version"].dump() +
                          " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  try {
    LoadedCheckpoint lc;
    lc.run.search = SearchConfigFromJson(j.at("config"));
    lc.run.search.Validate();
    lc.run.evaluator = EvaluatorConfigFromJson(j.at("evaluator"));
    lc.state.config = lc.run.search;
    lc.state.population.generation = j.at("generation").get<int>();
    for (const auto& ind : j.at("population")) {
      lc.state.population.individuals.push_back(IndividualFromJson(ind));
    }
    for (const auto& ind : j.at("elitism")) {
      lc.state.population.elitism.push_back(IndividualFromJson(ind));
    }
    lc.state.credit = CreditMatrix::FromJson(j.at("credit"));
    lc.state.rng.RestoreState(j.at("rng").get<std::string>());
    for (const auto& rec : j.at("history")) {
      lc.state.history.push_back(GenerationRecordFromJson(rec));
    }
    lc.cache = j.at("cache");
    if (lc.state.population.individuals.empty() ||
        lc.state.history.size() !=
            static_cast<size_t>(lc.state.population.generation) + 1) {
      throw CheckpointError("checkpoint: inconsistent population/history");
    }
    return lc;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

LoadedCheckpoint LoadCheckpoint(const fs::path& dir) {
  const fs::path path = dir / kCheckpointFile;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto j = nlohmann::json::parse(buffer.str(), nullptr, false);
  if (j.is_discarded()) throw CheckpointError("checkpoint: corrupt JSON");
  return CheckpointFromJson(j);
}

std::string SerializeCheckpoint(const nlohmann::json& checkpoint) {
  return checkpoint.dump() + "\n";
}

std::string HistoryJsonl(std::span<const GenerationRecord> history) {
  std::string out;
  for (const auto& rec : history) out += ToJson(rec).dump() + "\n";
  return out;
}

std::string ParetoCsv(std::span<const Individual> archive) {
  const std::vector<Individual> unique = Deduplicate(archive);
  std::vector<ObjectiveVector> vs;
  for (const auto& ind : unique) vs.push_back(ind.objectives());
  const auto standings = ParetoStandings(vs);

  std::vector<size_t> order(unique.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (standings[a].front != standings[b].front) {
      return standings[a].front < standings[b].front;
    }
    return PreferredOver(vs[a], vs[b], unique[a].text, unique[b].text);
  });

  std::string out = "genome,psnr,params,flops,multi_adds,front,crowding\n";
  for (size_t i : order) {
    const auto& ind = unique[i];
    const double cd = standings[i].crowding;
    out += fmt::format("{},{},{},{},{},{},{}\n", ind.text, ind.fitness,
                       ind.cost.params, ind.cost.flops, ind.cost.flops / 2,
                       standings[i].front,
                       std::isinf(cd) ? std::string("inf") : fmt::format("{}", cd));
  }
  return out;
}

std::vector<Individual> ArchiveOf(const SearchState& state) {
  std::vector<Individual> pool = state.population.individuals;
  pool.insert(pool.end(), state.population.elitism.begin(),
              state.population.elitism.end());
  return pool;
}

void SaveRun(const fs::path& dir, const SearchState& state,
             const EvaluatorConfig& evaluator, const CachedEvaluator* cache) {
  fs::create_directories(dir);
  WriteFileAtomic(dir / kCheckpointFile,
                  SerializeCheckpoint(CheckpointToJson(state, evaluator, cache)));
  WriteFileAtomic(dir / kHistoryFile, HistoryJsonl(state.history));
  WriteFileAtomic(dir / kParetoFile, ParetoCsv(ArchiveOf(state)));
}

}  // namespace esrn
