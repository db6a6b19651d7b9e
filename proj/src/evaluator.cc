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

#include "esrn/evaluator.h"

#include <cmath>

#include "esrn/rng.h"

namespace esrn {

namespace {

uint64_t Fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double TypeWeight(BlockType type) {
  switch (type) {
    case BlockType::kShrink:
      return 0.60;
    case BlockType::kGroup:
      return 0.55;
    case BlockType::kContextual:
      return 0.70;
  }
  return 0.0;
}

double RecursionGain(int recursion) {
  static constexpr double kGain[] = {1.0, 1.08, 1.12, 1.13};
  return kGain[recursion - 1];
}

}  // namespace

nlohmann::json ToJson(const EvalRequest& request) {
  return {{"id", request.id},
          {"genome", ToJson(request.genome)},
          {"scale", request.scale},
          {"budget", request.budget},
          {"seed", request.seed}};
}

EvalRequest RequestFromJson(const nlohmann::json& j) {
  try {
    EvalRequest r;
    r.id = j.at("id").get<std::string>();
    r.genome = GenomeFromJson(j.at("genome"));
    r.scale = j.at("scale").get<int>();
    r.budget = j.at("budget").get<int>();
    r.seed = j.at("seed").get<uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("request: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string("request: ") + e.what());
  }
}

nlohmann::json ToJson(const EvalResponse& response) {
  nlohmann::json j = {{"id", response.id},
                      {"status", response.ok() ? "ok" : "error"},
                      {"fitness", response.fitness},
                      {"prefix_fitness", response.prefix_fitness}};
  if (!response.message.empty()) j["message"] = response.message;
  return j;
}

EvalResponse ResponseFromJson(const nlohmann::json& j) {
  try {
    EvalResponse r;
    r.id = j.at("id").get<std::string>();
    const std::string status = j.at("status").get<std::string>();
    if (status == "ok") {
      r.status = EvalStatus::kOk;
    } else if (status == "error") {
      r.status = EvalStatus::kError;
    } else {
      throw ProtocolError("unknown status '" + status + "'");
    }
    if (j.contains("message") && j["message"].is_string()) {
      r.message = j["message"].get<std::string>();
    }
    if (r.ok()) {
      // NaN / inf are not JSON numbers; a null here means a non-finite value.
      const auto& f = j.at("fitness");
      r.fitness = f.is_null() ? std::nan("") : f.get<double>();
      for (const auto& v : j.at("prefix_fitness")) {
        r.prefix_fitness.push_back(v.is_null() ? std::nan("") : v.get<double>());
      }
    } else {
      if (j.contains("fitness") && j["fitness"].is_number()) {
        r.fitness = j["fitness"].get<double>();
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("response: ") + e.what());
  }
}

std::optional<std::string> CheckResponseContract(const EvalResponse& response,
                                                 int active_blocks) {
  if (!response.ok()) return std::nullopt;
  if (static_cast<int>(response.prefix_fitness.size()) != active_blocks + 1) {
    return "prefix_fitness has " +
           std::to_string(response.prefix_fitness.size()) +
           " entries, expected " + std::to_string(active_blocks + 1);
  }
  if (!std::isfinite(response.fitness)) return "non-finite fitness";
  for (double v : response.prefix_fitness) {
    if (!std::isfinite(v)) return "non-finite prefix fitness";
  }
  if (response.fitness != response.prefix_fitness.back()) {
    return "fitness differs from last prefix entry";
  }
  return std::nullopt;
}

double SurrogateNoise(const std::string& genome_text, int depth,
                      uint64_t seed) {
  const uint64_t z =
      SplitMix64(Fnv1a64(genome_text) ^
                 SplitMix64(seed ^ SplitMix64(static_cast<uint64_t>(depth))));
  return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
}

double SurrogateGeneQuality(const BlockGene& gene, int depth, double noise) {
  return TypeWeight(gene.type) * (gene.layers / 8.0) *
             std::sqrt(gene.growth / 64.0) * RecursionGain(gene.recursion) *
             std::pow(0.97, depth) +
         0.05 * noise;
}

EvalResponse SurrogateEvaluate(const Genome& genome, uint64_t seed,
                               const SurrogateOptions& options) {
  EvalResponse r;
  const ValidationResult v = Validate(genome);
  if (!v.ok()) {
    r.status = EvalStatus::kError;
    r.message = "invalid genome: " + v.violations.front();
    return r;
  }
  const std::string text = EncodeText(genome);
  double fitness = kSurrogateFloor;
  r.prefix_fitness.push_back(fitness);
  int k = 0;
  for (int d : genome.ActivePositions()) {
    ++k;
    const double u = options.zero_noise ? 0.0 : SurrogateNoise(text, d, seed);
    fitness += SurrogateGeneQuality(genome.blocks[d], d, u) / (1.0 + 0.02 * k);
    r.prefix_fitness.push_back(fitness);
  }
  r.status = EvalStatus::kOk;
  r.fitness = fitness;
  return r;
}

std::vector<EvalResponse> SurrogateEvaluator::EvaluateBatch(
    std::span<const EvalRequest> requests) {
  std::vector<EvalResponse> out;
  out.reserve(requests.size());
  for (const auto& req : requests) {
    EvalResponse r = SurrogateEvaluate(req.genome, req.seed, options_);
    r.id = req.id;
    out.push_back(std::move(r));
  }
  return out;
}

std::string CachedEvaluator::Key(const EvalRequest& request) {
  return EncodeText(request.genome) + "|" + std::to_string(request.scale) +
         "|" + std::to_string(request.budget) + "|" +
         std::to_string(request.seed);
}

std::vector<EvalResponse> CachedEvaluator::EvaluateBatch(
    std::span<const EvalRequest> requests) {
  std::vector<EvalResponse> out(requests.size());
  std::vector<EvalRequest> misses;
  std::map<std::string, size_t> miss_slot;
  std::vector<std::string> keys;
  for (const auto& req : requests) {
    keys.push_back(Key(req));
    const std::string& key = keys.back();
    if (cache_.count(key) == 0 && miss_slot.count(key) == 0) {
      miss_slot[key] = misses.size();
      misses.push_back(req);
    }
  }
  std::vector<EvalResponse> fresh;
  if (!misses.empty()) {
    fresh = backend_->EvaluateBatch(misses);
    backend_calls_ += static_cast<int64_t>(misses.size());
    for (size_t i = 0; i < misses.size(); ++i) {
      if (fresh[i].ok()) cache_[Key(misses[i])] = fresh[i];
    }
  }
  for (size_t i = 0; i < requests.size(); ++i) {
    auto hit = cache_.find(keys[i]);
    out[i] = hit != cache_.end() ? hit->second : fresh[miss_slot.at(keys[i])];
    out[i].id = requests[i].id;
  }
  return out;
}

nlohmann::json CachedEvaluator::ToJson() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, response] : cache_) {
    j[key] = {{"fitness", response.fitness},
              {"prefix_fitness", response.prefix_fitness}};
  }
  return j;
}

void CachedEvaluator::LoadJson(const nlohmann::json& j) {
  cache_.clear();
  for (const auto& [key, value] : j.items()) {
    EvalResponse r;
    r.status = EvalStatus::kOk;
    r.fitness = value.at("fitness").get<double>();
    r.prefix_fitness = value.at("prefix_fitness").get<std::vector<double>>();
    cache_[key] = std::move(r);
  }
}

}  // namespace esrn
