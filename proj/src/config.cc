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

#include "esrn/config.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "toml.hpp"

namespace esrn {

namespace {

void RejectUnknown(const toml::table& table, const std::set<std::string>& known,
                   const std::string& prefix) {
  for (const auto& [key, node] : table) {
    const std::string name(key.str());
    if (known.count(name) == 0) {
      throw ConfigError(prefix + name + ": unknown key");
    }
  }
}

template <typename T>
void Read(const toml::table& table, const char* key, const std::string& prefix,
          T& out) {
  const toml::node* node = table.get(key);
  if (node == nullptr) return;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) {
      out = *v;
      return;
    }
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node->value<std::string>()) {
      out = *v;
      return;
    }
  } else {
    if (node->is_integer()) {
      const int64_t v = *node->value<int64_t>();
      if constexpr (std::is_unsigned_v<T>) {
        if (v < 0) throw ConfigError(prefix + key + ": must be non-negative");
      }
      out = static_cast<T>(v);
      return;
    }
  }
  throw ConfigError(prefix + key + ": wrong type");
}

const toml::table* Section(const toml::table& root, const char* name) {
  const toml::node* node = root.get(name);
  if (node == nullptr) return nullptr;
  if (!node->is_table()) throw ConfigError(std::string(name) + ": expected a table");
  return node->as_table();
}

}  // namespace

RunConfig ParseRunConfig(std::string_view toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " at line "
       << e.source().begin.line;
    throw ConfigError(os.str());
  }
  RejectUnknown(root,
                {"seed", "generations", "lambda", "mutation_rate", "elitism",
                 "mode", "mutation", "scale", "budget", "floor_fitness",
                 "output_dir", "resolution", "constraints", "evaluator"},
                "");

  RunConfig rc;
  SearchConfig& s = rc.search;
  Read(root, "seed", "", s.seed);
  Read(root, "generations", "", s.generations);
  Read(root, "lambda", "", s.lambda);
  Read(root, "mutation_rate", "", s.mutation_rate);
  Read(root, "elitism", "", s.elitism);
  Read(root, "scale", "", s.resolution.scale);
  Read(root, "budget", "", s.budget);
  Read(root, "floor_fitness", "", s.floor_fitness);
  Read(root, "output_dir", "", rc.output_dir);
  std::string mode = ObjectiveModeName(s.mode);
  Read(root, "mode", "", mode);
  s.mode = ParseObjectiveMode(mode);
  std::string mutation = MutationModeName(s.mutation);
  Read(root, "mutation", "", mutation);
  s.mutation = ParseMutationMode(mutation);

  if (const toml::table* res = Section(root, "resolution")) {
    RejectUnknown(*res, {"hr_width", "hr_height"}, "resolution.");
    Read(*res, "hr_width", "resolution.", s.resolution.hr_width);
    Read(*res, "hr_height", "resolution.", s.resolution.hr_height);
  }
  if (const toml::table* cons = Section(root, "constraints")) {
    RejectUnknown(*cons, {"max_params", "max_flops"}, "constraints.");
    if (!cons->contains("max_params") || !cons->contains("max_flops")) {
      throw ConfigError(
          "constraints: both max_params and max_flops are required");
    }
    ConstraintSpec c;
    Read(*cons, "max_params", "constraints.", c.w_net);
    Read(*cons, "max_flops", "constraints.", c.v_net);
    s.constraints = c;
  }
  if (const toml::table* ev = Section(root, "evaluator")) {
    RejectUnknown(*ev, {"backend", "command", "timeout_seconds"}, "evaluator.");
    Read(*ev, "backend", "evaluator.", rc.evaluator.backend);
    Read(*ev, "command", "evaluator.", rc.evaluator.command);
    Read(*ev, "timeout_seconds", "evaluator.", rc.evaluator.timeout_seconds);
  }
  if (rc.evaluator.backend != "surrogate" && rc.evaluator.backend != "external") {
    throw ConfigError("evaluator.backend: expected 'surrogate' or 'external'");
  }
  if (!(rc.evaluator.timeout_seconds > 0.0)) {
    throw ConfigError("evaluator.timeout_seconds: must be > 0");
  }
  return rc;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseRunConfig(buffer.str());
}

void ApplyEnvironment(RunConfig& config) {
  if (const char* cmd = std::getenv("ESRN_EVALUATOR"); cmd != nullptr && *cmd) {
    config.evaluator.backend = "external";
    config.evaluator.command = cmd;
  }
}

nlohmann::json ToJson(const EvaluatorConfig& c) {
  return {{"backend", c.backend},
          {"command", c.command},
          {"timeout_seconds", c.timeout_seconds}};
}

EvaluatorConfig EvaluatorConfigFromJson(const nlohmann::json& j) {
  EvaluatorConfig c;
  c.backend = j.at("backend").get<std::string>();
  c.command = j.at("command").get<std::string>();
  c.timeout_seconds = j.at("timeout_seconds").get<double>();
  return c;
}

}  // namespace esrn
