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

// Entry points behind the `esrn` command line. Each returns a process exit
// code: 0 ok, 2 config/parse error, 3 evaluator spawn error, 4 checkpoint
// error (1 for anything unexpected).

#ifndef ESRN_COMMANDS_H_
#define ESRN_COMMANDS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "esrn/config.h"
#include "esrn/evaluator.h"

namespace esrn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSpawn = 3;
inline constexpr int kExitCheckpoint = 4;

// Builds the configured backend. Throws EvaluatorSpawnError or ConfigError.
std::unique_ptr<Evaluator> MakeEvaluator(const EvaluatorConfig& config);

struct SearchCommandOptions {
  std::optional<std::string> config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> mutation;
  std::optional<int64_t> max_params;
  std::optional<int64_t> max_flops;
  std::optional<int> generations;
  std::optional<int> scale;
  std::optional<std::string> out_dir;
  std::optional<std::string> evaluator_command;
  // Stop (with a checkpoint) once this generation is complete.
  std::optional<int> stop_after;
};

int CmdSearch(const SearchCommandOptions& options, std::ostream& out,
              std::ostream& err);

struct CostCommandOptions {
  std::string genome;
  std::string hr = "1280x720";
  int scale = 2;
  bool baseline = false;
};

int CmdCost(const CostCommandOptions& options, std::ostream& out,
            std::ostream& err);

int CmdResume(const std::string& dir, std::optional<int> stop_after,
              std::ostream& out, std::ostream& err);

int CmdPareto(const std::string& dir, const std::string& out_path,
              std::ostream& out, std::ostream& err);

}  // namespace esrn

#endif  // ESRN_COMMANDS_H_
