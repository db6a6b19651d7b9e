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

// Run directory layout and persistence:
//
//   <dir>/checkpoint.json   full search state (see CheckpointToJson)
//   <dir>/history.jsonl     one GenerationRecord per line
//   <dir>/pareto.csv        objectives export of {H, E}
//
// All files are replaced atomically (write to a temp file, then rename).

#ifndef ESRN_CHECKPOINT_H_
#define ESRN_CHECKPOINT_H_

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>

#include "esrn/config.h"
#include "esrn/evaluator.h"
#include "esrn/evolution.h"
#include "json.hpp"

namespace esrn {

inline constexpr int kCheckpointVersion = 1;
inline constexpr char kCheckpointFile[] = "checkpoint.json";
inline constexpr char kHistoryFile[] = "history.jsonl";
inline constexpr char kParetoFile[] = "pareto.csv";

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& contents);

// Keys: version, config, evaluator, generation, population, elitism, credit,
// cache, rng, history. cache may be null.
nlohmann::json CheckpointToJson(const SearchState& state,
                                const EvaluatorConfig& evaluator,
                                const CachedEvaluator* cache);

struct LoadedCheckpoint {
  RunConfig run;
  SearchState state;
  nlohmann::json cache;
};

// Throws CheckpointError on unreadable, corrupt or version-mismatched input.
LoadedCheckpoint CheckpointFromJson(const nlohmann::json& j);
LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& dir);

std::string SerializeCheckpoint(const nlohmann::json& checkpoint);
std::string HistoryJsonl(std::span<const GenerationRecord> history);

// Header "genome,psnr,params,flops,multi_adds,front,crowding"; rows sorted by
// front, then psnr descending. Duplicate genomes are exported once.
std::string ParetoCsv(std::span<const Individual> archive);

// Writes checkpoint.json, history.jsonl and pareto.csv into dir.
void SaveRun(const std::filesystem::path& dir, const SearchState& state,
             const EvaluatorConfig& evaluator, const CachedEvaluator* cache);

// Individuals exported by the pareto command: {H, E} of the checkpoint.
std::vector<Individual> ArchiveOf(const SearchState& state);

}  // namespace esrn

#endif  // ESRN_CHECKPOINT_H_
