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

#include "esrn/commands.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <regex>

#include "esrn/checkpoint.h"
#include "esrn/cost_model.h"
#include "esrn/external_evaluator.h"

namespace esrn {

namespace {

namespace fs = std::filesystem;

// Runs (or continues) a search, checkpointing after every generation.
int Drive(SearchState& state, const RunConfig& run, const fs::path& dir,
          bool fresh, std::optional<int> stop_after, std::ostream& out,
          std::ostream& err) {
  std::unique_ptr<Evaluator> backend;
  try {
    backend = MakeEvaluator(run.evaluator);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EvaluatorSpawnError& e) {
    err << "error: evaluator spawn failed: " << e.what() << "\n";
    return kExitSpawn;
  }
  CachedEvaluator cached(*backend);
  auto save = [&](const SearchState& s) {
    SaveRun(dir, s, run.evaluator, &cached);
  };

  if (fresh) {
    state = InitializeSearch(run.search, cached);
    save(state);
  }
  ContinueSearch(state, cached, save, stop_after);

  const auto& last = state.history.back();
  out << "generation " << last.gen << "/" << state.config.generations
      << " best " << last.best << " " << last.best_genome << "\n";
  if (state.Done()) {
    for (const auto& elite : CurrentElitism(state)) {
      out << "elite " << elite.text << " psnr=" << elite.fitness
          << " params=" << elite.cost.params << " flops=" << elite.cost.flops
          << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

std::unique_ptr<Evaluator> MakeEvaluator(const EvaluatorConfig& config) {
  if (config.backend == "surrogate") {
    return std::make_unique<SurrogateEvaluator>();
  }
  if (config.backend == "external") {
    if (config.command.empty()) {
      throw ConfigError(
          "evaluator.command: required for the external backend (or set "
          "ESRN_EVALUATOR)");
    }
    ExternalEvaluatorOptions opts;
    opts.command = config.command;
    opts.timeout = std::chrono::milliseconds(
        static_cast<int64_t>(config.timeout_seconds * 1000.0));
    return std::make_unique<ExternalEvaluator>(opts);
  }
  throw ConfigError("evaluator.backend: unknown backend '" + config.backend +
                    "'");
}

int CmdSearch(const SearchCommandOptions& o, std::ostream& out,
              std::ostream& err) {
  RunConfig run;
  try {
    if (!o.config_path) throw ConfigError("--config: required");
    run = LoadRunConfig(*o.config_path);
    SearchConfig& s = run.search;
    if (o.seed) s.seed = *o.seed;
    if (o.mode) s.mode = ParseObjectiveMode(*o.mode);
    if (o.mutation) s.mutation = ParseMutationMode(*o.mutation);
    if (o.generations) s.generations = *o.generations;
    if (o.scale) s.resolution.scale = *o.scale;
    if (o.max_params || o.max_flops) {
      if (!o.max_params || !o.max_flops) {
        throw ConfigError(
            "constraints: --max-params and --max-flops must be given together");
      }
      s.constraints = ConstraintSpec{*o.max_params, *o.max_flops};
    }
    if (o.out_dir) run.output_dir = *o.out_dir;
    ApplyEnvironment(run);
    if (o.evaluator_command) {
      run.evaluator.backend = "external";
      run.evaluator.command = *o.evaluator_command;
    }
    s.Validate();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    SearchState state;
    return Drive(state, run, run.output_dir, true, o.stop_after, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int CmdCost(const CostCommandOptions& o, std::ostream& out, std::ostream& err) {
  std::smatch m;
  static const std::regex kHr(R"((\d+)x(\d+))");
  if (!std::regex_match(o.hr, m, kHr)) {
    err << "error: --hr expects WxH, got '" << o.hr << "'\n";
    return kExitConfig;
  }
  try {
    const ResolutionSpec res =
        ResolutionSpec::Make(std::stoi(m[1]), std::stoi(m[2]), o.scale);
    if (o.baseline) {
      err << "warning: light RDN baseline (4 blocks, 6 layers, growth 32) "
             "with this tool's head/fusion/tail; the published 1017K / "
             "235.6G figures use an unspecified head/tail width\n";
      out << ToJson(BaselineRdnCost(res), res).dump() << "\n";
      return kExitOk;
    }
    Genome genome = DecodeText(o.genome, o.scale);
    const ValidationResult v = Validate(genome);
    if (!v.ok()) {
      for (const auto& violation : v.violations) {
        err << "error: " << violation << "\n";
      }
      return kExitConfig;
    }
    out << ToJson(NetworkCost(genome, res), res).dump() << "\n";
    return kExitOk;
  } catch (const GenomeParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int CmdResume(const std::string& dir, std::optional<int> stop_after,
              std::ostream& out, std::ostream& err) {
  LoadedCheckpoint lc;
  try {
    lc = LoadCheckpoint(dir);
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckpoint;
  }
  if (lc.state.Done()) {
    out << "search already complete at generation "
        << lc.state.population.generation << "\n";
    return kExitOk;
  }
  ApplyEnvironment(lc.run);
  try {
    // The cache only short-circuits evaluations; reload it so resumed runs
    // issue the same backend calls as uninterrupted ones.
    std::unique_ptr<Evaluator> backend;
    try {
      backend = MakeEvaluator(lc.run.evaluator);
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const EvaluatorSpawnError& e) {
      err << "error: evaluator spawn failed: " << e.what() << "\n";
      return kExitSpawn;
    }
    CachedEvaluator cached(*backend);
    if (!lc.cache.is_null()) cached.LoadJson(lc.cache);
    auto save = [&](const SearchState& s) {
      SaveRun(dir, s, lc.run.evaluator, &cached);
    };
    ContinueSearch(lc.state, cached, save, stop_after);
    const auto& last = lc.state.history.back();
    out << "generation " << last.gen << "/" << lc.state.config.generations
        << " best " << last.best << " " << last.best_genome << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int CmdPareto(const std::string& dir, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  LoadedCheckpoint lc;
  try {
    lc = LoadCheckpoint(dir);
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckpoint;
  }
  try {
    WriteFileAtomic(out_path, ParetoCsv(ArchiveOf(lc.state)));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  out << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace esrn
