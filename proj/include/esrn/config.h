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

// Run manifests. A TOML file mirrors SearchConfig:
//
//   seed = 1
//   generations = 40
//   lambda = 16
//   mutation_rate = 0.2
//   elitism = 8
//   mode = "constrained"        # or "pareto"
//   mutation = "guided"         # or "random"
//   scale = 2
//   budget = 10
//   floor_fitness = 28.0
//   output_dir = "runs/x2"
//
//   [resolution]
//   hr_width = 1280
//   hr_height = 720
//
//   [constraints]               # optional
//   max_params = 1014000
//   max_flops = 456800000000
//
//   [evaluator]
//   backend = "surrogate"       # or "external"
//   command = "python -m esrn_trainer --synthetic"
//   timeout_seconds = 1800
//
// Every key is optional; unknown keys are rejected.

#ifndef ESRN_CONFIG_H_
#define ESRN_CONFIG_H_

#include <string>
#include <string_view>

#include "esrn/evolution.h"
#include "json.hpp"

namespace esrn {

struct EvaluatorConfig {
  std::string backend = "surrogate";
  std::string command;
  double timeout_seconds = 1800.0;

  bool operator==(const EvaluatorConfig&) const = default;
};

struct RunConfig {
  SearchConfig search;
  EvaluatorConfig evaluator;
  std::string output_dir = "esrn_run";
};

// Throws ConfigError with the offending key in the message.
RunConfig ParseRunConfig(std::string_view toml_text);
RunConfig LoadRunConfig(const std::string& path);

// If ESRN_EVALUATOR is set, switches to the external backend with that
// command line.
void ApplyEnvironment(RunConfig& config);

nlohmann::json ToJson(const EvaluatorConfig& config);
EvaluatorConfig EvaluatorConfigFromJson(const nlohmann::json& j);

}  // namespace esrn

#endif  // ESRN_CONFIG_H_
