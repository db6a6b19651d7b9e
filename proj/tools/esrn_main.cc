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

// esrn: command-line driver for the architecture search.
//
//   esrn search --config run.toml [--seed N] [--mode constrained|pareto] ...
//   esrn cost GENOME [--hr 1280x720] [--scale 2]
//   esrn cost --baseline
//   esrn resume DIR [--stop-after G]
//   esrn pareto DIR [--out pareto.csv]

#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "esrn/commands.h"

namespace {

template <typename T>
std::optional<T> IfSet(const CLI::Option* opt, const T& value) {
  return opt->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_logger_st("esrn");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %l: %v");

  CLI::App app{"Credit-guided evolutionary search for super-resolution networks"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // search
  auto* search = app.add_subcommand("search", "Run a search from a TOML config");
  std::string config_path, mode, mutation, out_dir, evaluator;
  uint64_t seed = 0;
  int64_t max_params = 0, max_flops = 0;
  int generations = 0, scale_override = 0, stop_after = 0;
  auto* o_config = search->add_option("--config", config_path, "TOML run config");
  auto* o_seed = search->add_option("--seed", seed, "Override seed");
  auto* o_mode = search->add_option("--mode", mode, "constrained | pareto");
  auto* o_max_params =
      search->add_option("--max-params", max_params, "Parameter cap (strict)");
  auto* o_max_flops =
      search->add_option("--max-flops", max_flops, "FLOPs cap (strict)");
  auto* o_generations =
      search->add_option("--generations", generations, "Override generations");
  auto* o_mutation =
      search->add_option("--mutation", mutation, "guided | random");
  auto* o_scale = search->add_option("--scale", scale_override, "2, 3 or 4");
  auto* o_out = search->add_option("--out", out_dir, "Run directory");
  auto* o_eval = search->add_option("--evaluator", evaluator,
                                    "External evaluator command line");
  auto* o_stop = search->add_option("--stop-after", stop_after,
                                    "Checkpoint and exit after generation G");

  // cost
  auto* cost = app.add_subcommand("cost", "Print the analytic cost of a genome");
  esrn::CostCommandOptions cost_opts;
  cost->add_option("genome", cost_opts.genome, "Genome text");
  cost->add_option("--hr", cost_opts.hr, "HR resolution WxH")
      ->capture_default_str();
  cost->add_option("--scale", cost_opts.scale, "Upscaling factor")
      ->capture_default_str();
  cost->add_flag("--baseline", cost_opts.baseline,
                 "Cost of the light RDN reference instead of GENOME");

  // resume
  auto* resume = app.add_subcommand("resume", "Continue a checkpointed run");
  std::string resume_dir;
  int resume_stop = 0;
  resume->add_option("dir", resume_dir, "Run directory")->required();
  auto* o_resume_stop = resume->add_option(
      "--stop-after", resume_stop, "Checkpoint and exit after generation G");

  // pareto
  auto* pareto = app.add_subcommand("pareto", "Export the Pareto archive as CSV");
  std::string pareto_dir, pareto_out;
  pareto->add_option("dir", pareto_dir, "Run directory")->required();
  auto* o_pareto_out = pareto->add_option("--out", pareto_out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? esrn::kExitOk : esrn::kExitConfig;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  if (search->parsed()) {
    esrn::SearchCommandOptions o;
    o.config_path = IfSet(o_config, config_path);
    o.seed = IfSet(o_seed, seed);
    o.mode = IfSet(o_mode, mode);
    o.mutation = IfSet(o_mutation, mutation);
    o.max_params = IfSet(o_max_params, max_params);
    o.max_flops = IfSet(o_max_flops, max_flops);
    o.generations = IfSet(o_generations, generations);
    o.scale = IfSet(o_scale, scale_override);
    o.out_dir = IfSet(o_out, out_dir);
    o.evaluator_command = IfSet(o_eval, evaluator);
    o.stop_after = IfSet(o_stop, stop_after);
    return esrn::CmdSearch(o, std::cout, std::cerr);
  }
  if (cost->parsed()) {
    if (cost_opts.genome.empty() && !cost_opts.baseline) {
      std::cerr << "error: cost needs a GENOME or --baseline\n";
      return esrn::kExitConfig;
    }
    return esrn::CmdCost(cost_opts, std::cout, std::cerr);
  }
  if (resume->parsed()) {
    return esrn::CmdResume(resume_dir, IfSet(o_resume_stop, resume_stop),
                           std::cout, std::cerr);
  }
  const std::string out_path = o_pareto_out->count() > 0
                                   ? pareto_out
                                   : pareto_dir + "/pareto.csv";
  return esrn::CmdPareto(pareto_dir, out_path, std::cout, std::cerr);
}
