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


// Config parsing, checkpoints and the esrn command line.

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "esrn/checkpoint.h"
#include "esrn/commands.h"
#include "esrn/config.h"
#include "esrn/objectives.h"
#include "test_support.h"

#ifndef ESRN_CLI
#error "ESRN_CLI must name the esrn binary"
#endif

namespace esrn {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

std::string SmallConfig(const fs::path& out_dir, int generations = 6) {
  return "seed = 1\n"
         "generations = " + std::to_string(generations) + "\n"
         "output_dir = \"" + out_dir.string() + "\"\n"
         "[resolution]\nhr_width = 640\nhr_height = 360\n";
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the esrn binary with the given arguments (already shell-quoted).
Run Esrn(const std::string& args, const TempDir& scratch,
         const std::string& env = "") {
  const fs::path out = scratch.path() / "stdout.txt";
  const fs::path err = scratch.path() / "stderr.txt";
  const std::string cmd = env + " '" + std::string(ESRN_CLI) + "' " + args +
                          " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = ReadFile(out);
  r.err = ReadFile(err);
  return r;
}

std::vector<std::vector<std::string>> CsvRows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST_CASE("toml config with every key") {
  const RunConfig rc = ParseRunConfig(R"(
seed = 11
generations = 12
lambda = 8
mutation_rate = 0.3
elitism = 4
mode = "pareto"
mutation = "random"
scale = 3
budget = 5
floor_fitness = 27.0
output_dir = "runs/x3"

[resolution]
hr_width = 960
hr_height = 540

[constraints]
max_params = 1014000
max_flops = 456800000000

[evaluator]
backend = "external"
command = "python -m trainer"
timeout_seconds = 60
)");
  const SearchConfig& s = rc.search;
  CHECK(s.seed == 11);
  CHECK(s.generations == 12);
  CHECK(s.lambda == 8);
  CHECK(s.mutation_rate == 0.3);
  CHECK(s.elitism == 4);
  CHECK(s.mode == ObjectiveMode::kPareto);
  CHECK(s.mutation == MutationMode::kRandom);
  CHECK(s.scale() == 3);
  CHECK(s.budget == 5);
  CHECK(s.floor_fitness == 27.0);
  CHECK(s.resolution.hr_width == 960);
  CHECK(s.resolution.hr_height == 540);
  REQUIRE(s.constraints.has_value());
  CHECK(s.constraints->w_net == 1014000);
  CHECK(s.constraints->v_net == 456800000000);
  CHECK(rc.output_dir == "runs/x3");
  CHECK(rc.evaluator.backend == "external");
  CHECK(rc.evaluator.command == "python -m trainer");
  CHECK(rc.evaluator.timeout_seconds == 60.0);
  CHECK_NOTHROW(s.Validate());
}

TEST_CASE("empty config keeps the defaults") {
  const RunConfig rc = ParseRunConfig("");
  CHECK(rc.search.generations == 40);
  CHECK(rc.search.lambda == 16);
  CHECK(rc.search.mutation_rate == 0.2);
  CHECK(rc.search.elitism == 8);
  CHECK(rc.search.scale() == 2);
  CHECK_FALSE(rc.search.constraints.has_value());
  CHECK(rc.evaluator.backend == "surrogate");
}

TEST_CASE("config errors name the key") {
  auto error_of = [](const std::string& text) -> std::string {
    try {
      ParseRunConfig(text);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(error_of("sead = 1").find("sead: unknown key") != std::string::npos);
  CHECK(error_of("[resolution]\nwidth = 3").find("resolution.width") !=
        std::string::npos);
  CHECK(error_of("[extra]\na = 1").find("extra") != std::string::npos);
  CHECK(error_of("lambda = \"many\"").find("lambda: wrong type") !=
        std::string::npos);
  CHECK(error_of("seed = -1").find("seed") != std::string::npos);
  CHECK(error_of("mode = \"nsga\"").find("nsga") != std::string::npos);
  CHECK(error_of("[constraints]\nmax_params = 5").find("constraints") !=
        std::string::npos);
  CHECK(error_of("[evaluator]\nbackend = \"gpu\"").find("evaluator.backend") !=
        std::string::npos);
  CHECK(error_of("seed = = 1").find("line 1") != std::string::npos);
  CHECK_THROWS_AS(LoadRunConfig("/nonexistent/run.toml"), ConfigError);
}

TEST_CASE("ESRN_EVALUATOR selects the external backend") {
  RunConfig rc;
  unsetenv("ESRN_EVALUATOR");
  ApplyEnvironment(rc);
  CHECK(rc.evaluator.backend == "surrogate");
  setenv("ESRN_EVALUATOR", "my-trainer --fast", 1);
  ApplyEnvironment(rc);
  unsetenv("ESRN_EVALUATOR");
  CHECK(rc.evaluator.backend == "external");
  CHECK(rc.evaluator.command == "my-trainer --fast");
}

TEST_CASE("evaluator factory") {
  EvaluatorConfig surrogate;
  CHECK(MakeEvaluator(surrogate) != nullptr);
  EvaluatorConfig no_command;
  no_command.backend = "external";
  CHECK_THROWS_AS(MakeEvaluator(no_command), ConfigError);
  EvaluatorConfig unknown;
  unknown.backend = "cloud";
  CHECK_THROWS_AS(MakeEvaluator(unknown), ConfigError);
  EvaluatorConfig config{"surrogate", "", 10.0};
  CHECK(EvaluatorConfigFromJson(ToJson(config)) == config);
}

TEST_CASE("pareto csv format") {
  const std::string header =
      "genome,psnr,params,flops,multi_adds,front,crowding\n";
  CHECK(ParetoCsv({}) == header);

  SearchConfig cfg;
  cfg.generations = 3;
  cfg.mode = ObjectiveMode::kPareto;
  SurrogateEvaluator eval;
  SearchState state = InitializeSearch(cfg, eval);
  ContinueSearch(state, eval);
  const auto archive = ArchiveOf(state);
  const std::string csv = ParetoCsv(archive);
  CHECK(csv.rfind(header, 0) == 0);

  const auto rows = CsvRows(csv);
  std::vector<ObjectiveVector> front0;
  int last_front = 0;
  double last_psnr = 1e9;
  for (const auto& row : rows) {
    REQUIRE(row.size() == 7);
    const int front = std::stoi(row[5]);
    const double psnr = std::stod(row[1]);
    CHECK(front >= last_front);
    if (front == last_front) CHECK(psnr <= last_psnr);
    last_front = front;
    last_psnr = psnr;
    CHECK(std::stoll(row[4]) * 2 == std::stoll(row[3]));
    if (front == 0) {
      front0.push_back({psnr, std::stoll(row[2]), std::stoll(row[3])});
    }
  }
  REQUIRE_FALSE(front0.empty());
  for (const auto& a : front0) {
    for (const auto& b : front0) CHECK_FALSE(Dominates(a, b));
  }
  // Elites also appear among the children sometimes; each genome once.
  CHECK(rows.size() == Deduplicate(archive).size());
}

TEST_CASE("checkpoint save, load, save is byte-identical") {
  TempDir dir("esrn_ckpt");
  const fs::path cfg = dir.path() / "run.toml";
  WriteFile(cfg, SmallConfig(dir.path() / "run"));
  SearchCommandOptions o;
  o.config_path = cfg.string();
  std::ostringstream out, err;
  REQUIRE(CmdSearch(o, out, err) == kExitOk);

  const fs::path run = dir.path() / "run";
  const std::string saved = ReadFile(run / kCheckpointFile);
  const LoadedCheckpoint lc = LoadCheckpoint(run);
  CHECK(lc.state.population.generation == 6);
  CHECK(lc.state.Done());
  CHECK(lc.run.evaluator.backend == "surrogate");

  SurrogateEvaluator backend;
  CachedEvaluator cache(backend);
  cache.LoadJson(lc.cache);
  CHECK(cache.size() > 0);
  CHECK(SerializeCheckpoint(CheckpointToJson(lc.state, lc.run.evaluator,
                                             &cache)) == saved);

  // The restored random source continues the same stream.
  const nlohmann::json j = nlohmann::json::parse(saved);
  for (const char* key : {"version", "config", "evaluator", "generation",
                          "population", "elitism", "credit", "cache", "rng",
                          "history"}) {
    CHECK(j.contains(key));
  }
  CHECK(ReadFile(run / kHistoryFile) == HistoryJsonl(lc.state.history));
}

TEST_CASE("checkpoint errors exit with code 4") {
  TempDir dir("esrn_badckpt");
  std::ostringstream out, err;
  CHECK(CmdResume((dir.path() / "missing").string(), std::nullopt, out, err) ==
        kExitCheckpoint);

  WriteFile(dir.path() / kCheckpointFile, "{\"version\": 1, \"config\": ");
  CHECK(CmdResume(dir.path().string(), std::nullopt, out, err) ==
        kExitCheckpoint);
  CHECK_THROWS_AS(LoadCheckpoint(dir.path()), CheckpointError);

  // A real checkpoint with the wrong version.
  const fs::path cfg = dir.path() / "run.toml";
  WriteFile(cfg, SmallConfig(dir.path() / "run", 2));
  SearchCommandOptions o;
  o.config_path = cfg.string();
  REQUIRE(CmdSearch(o, out, err) == kExitOk);
  nlohmann::json j =
      nlohmann::json::parse(ReadFile(dir.path() / "run" / kCheckpointFile));
  j["version"] = kCheckpointVersion + 1;
  WriteFile(dir.path() / "run" / kCheckpointFile, j.dump());
  std::ostringstream err2;
  CHECK(CmdResume((dir.path() / "run").string(), std::nullopt, out, err2) ==
        kExitCheckpoint);
  CHECK(err2.str().find("version") != std::string::npos);
  CHECK(CmdPareto((dir.path() / "run").string(),
                  (dir.path() / "p.csv").string(), out, err) ==
        kExitCheckpoint);
}

TEST_CASE("resume continues exactly where the run stopped") {
  TempDir dir("esrn_resume");
  const fs::path cfg = dir.path() / "run.toml";
  WriteFile(cfg, SmallConfig(dir.path() / "control", 10));
  std::ostringstream out, err;

  SearchCommandOptions control;
  control.config_path = cfg.string();
  REQUIRE(CmdSearch(control, out, err) == kExitOk);

  SearchCommandOptions split = control;
  split.out_dir = (dir.path() / "split").string();
  split.stop_after = 4;
  REQUIRE(CmdSearch(split, out, err) == kExitOk);
  CHECK(LoadCheckpoint(*split.out_dir).state.population.generation == 4);
  REQUIRE(CmdResume(*split.out_dir, 7, out, err) == kExitOk);
  CHECK(LoadCheckpoint(*split.out_dir).state.population.generation == 7);
  REQUIRE(CmdResume(*split.out_dir, std::nullopt, out, err) == kExitOk);

  CHECK(ReadFile(dir.path() / "split" / kHistoryFile) ==
        ReadFile(dir.path() / "control" / kHistoryFile));
  CHECK(ReadFile(dir.path() / "split" / kParetoFile) ==
        ReadFile(dir.path() / "control" / kParetoFile));
  CHECK(ReadFile(dir.path() / "split" / kCheckpointFile) ==
        ReadFile(dir.path() / "control" / kCheckpointFile));

  // Resuming a finished run changes nothing.
  const std::string before = ReadFile(dir.path() / "split" / kCheckpointFile);
  std::ostringstream done;
  CHECK(CmdResume(*split.out_dir, std::nullopt, done, err) == kExitOk);
  CHECK(done.str().find("already complete") != std::string::npos);
  CHECK(ReadFile(dir.path() / "split" / kCheckpointFile) == before);
}

TEST_CASE("atomic writes leave no temporary files") {
  TempDir dir("esrn_atomic");
  WriteFileAtomic(dir.path() / "a.txt", "first\n");
  WriteFileAtomic(dir.path() / "a.txt", "second\n");
  CHECK(ReadFile(dir.path() / "a.txt") == "second\n");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) {
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("cli: search is reproducible and writes the run directory") {
  TempDir dir("esrn_cli_search");
  const fs::path cfg = dir.path() / "run.toml";
  WriteFile(cfg, SmallConfig(dir.path() / "unused", 5));
  const std::string base = "search --config '" + cfg.string() + "' --seed 1";
  const Run a = Esrn(base + " --out '" + (dir.path() / "a").string() + "'", dir);
  const Run b = Esrn(base + " --out '" + (dir.path() / "b").string() + "'", dir);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out.find("generation 5/5") != std::string::npos);
  for (const char* f : {kCheckpointFile, kHistoryFile, kParetoFile}) {
    CHECK(fs::exists(dir.path() / "a" / f));
  }
  const std::string history = ReadFile(dir.path() / "a" / kHistoryFile);
  CHECK(history == ReadFile(dir.path() / "b" / kHistoryFile));
  CHECK(std::count(history.begin(), history.end(), '\n') == 6);

  // The pareto command reproduces the exported CSV.
  const fs::path csv = dir.path() / "export.csv";
  const Run p = Esrn("pareto '" + (dir.path() / "a").string() + "' --out '" +
                         csv.string() + "'",
                     dir);
  CHECK(p.code == 0);
  CHECK(ReadFile(csv) == ReadFile(dir.path() / "a" / kParetoFile));
}

TEST_CASE("cli: constrained search keeps every elite under the caps") {
  TempDir dir("esrn_cli_caps");
  const fs::path cfg = dir.path() / "run.toml";
  WriteFile(cfg, SmallConfig(dir.path() / "run", 20));
  // The reference caps; flops scaled from 720p to this 640x360 config.
  const int64_t max_params = 1014000;
  const int64_t max_flops = 456800000000 / 4;
  const Run r = Esrn("search --config '" + cfg.string() +
                         "' --mode constrained --max-params " +
                         std::to_string(max_params) + " --max-flops " +
                         std::to_string(max_flops),
                     dir);
  REQUIRE(r.code == 0);
  const LoadedCheckpoint lc = LoadCheckpoint(dir.path() / "run");
  const auto cs = ConstraintSpec::Make(max_params, max_flops);
  const auto elites = CurrentElitism(lc.state);
  CHECK(elites.size() == 8);
  for (const auto& e : elites) CHECK(cs.Feasible(e.objectives()));
}

TEST_CASE("cli: exit codes") {
  TempDir dir("esrn_cli_codes");
  const fs::path cfg = dir.path() / "run.toml";
  WriteFile(cfg, SmallConfig(dir.path() / "run", 2));

  CHECK(Esrn("search", dir).code == kExitConfig);
  CHECK(Esrn("search --config '/nonexistent/run.toml'", dir).code ==
        kExitConfig);
  CHECK(Esrn("search --config '" + cfg.string() + "' --mode sideways", dir)
            .code == kExitConfig);
  CHECK(Esrn("search --config '" + cfg.string() + "' --max-params 10", dir)
            .code == kExitConfig);
  CHECK(Esrn("frobnicate", dir).code == kExitConfig);

  const Run spawn = Esrn("search --config '" + cfg.string() +
                             "' --evaluator /nonexistent/trainer",
                         dir);
  CHECK(spawn.code == kExitSpawn);
  CHECK(spawn.err.find("spawn") != std::string::npos);

  CHECK(Esrn("resume '" + (dir.path() / "nothing").string() + "'", dir).code ==
        kExitCheckpoint);
  CHECK(Esrn("pareto '" + (dir.path() / "nothing").string() + "'", dir).code ==
        kExitCheckpoint);
}

TEST_CASE("cli: cost") {
  TempDir dir("esrn_cli_cost");
  std::string genome;
  for (int i = 0; i < 20; ++i) {
    if (i > 0) genome += "-";
    genome += i < 5 ? "1S4g16o16r1" : "0S4g16o16r1";
  }
  const Run small = Esrn("cost " + genome, dir);
  REQUIRE(small.code == 0);
  const auto j = nlohmann::json::parse(small.out);
  CHECK(j.at("params") == 217200);
  CHECK(j.at("flops") == 100351180800LL);
  CHECK(j.at("multi_adds") == 50175590400LL);

  const Run big = Esrn("cost " + genome + " --hr 2560x1440", dir);
  REQUIRE(big.code == 0);
  const auto jb = nlohmann::json::parse(big.out);
  CHECK(jb.at("params") == j.at("params"));
  CHECK(jb.at("flops").get<int64_t>() == 4 * j.at("flops").get<int64_t>());

  const Run base = Esrn("cost --baseline", dir);
  CHECK(base.code == 0);
  CHECK(base.err.find("warning") != std::string::npos);
  CHECK(nlohmann::json::parse(base.out).at("per_block").size() == 4);

  CHECK(Esrn("cost 1S4g16o16r1-1X4g16o16r1", dir).code == kExitConfig);
  CHECK(Esrn("cost 1S4g16o16r1", dir).code == kExitConfig);  // too short
  CHECK(Esrn("cost " + genome + " --hr 1280by720", dir).code == kExitConfig);
  CHECK(Esrn("cost " + genome + " --hr 1281x720", dir).code == kExitConfig);
  CHECK(Esrn("cost", dir).code == kExitConfig);
}

TEST_CASE("cli: ESRN_EVALUATOR runs the search through a child process") {
  TempDir dir("esrn_cli_env");
  const fs::path cfg = dir.path() / "run.toml";
  WriteFile(cfg, SmallConfig(dir.path() / "unused", 3));
  const std::string args = "search --config '" + cfg.string() + "' --out ";
  const Run direct = Esrn(args + "'" + (dir.path() / "direct").string() + "'",
                          dir);
  const Run piped = Esrn(
      args + "'" + (dir.path() / "piped").string() + "'", dir,
      std::string("ESRN_EVALUATOR='") + ESRN_FAKE_EVALUATOR + " normal'");
  REQUIRE(direct.code == 0);
  REQUIRE(piped.code == 0);
  // The fake answers with surrogate values, so the runs agree.
  CHECK(ReadFile(dir.path() / "piped" / kHistoryFile) ==
        ReadFile(dir.path() / "direct" / kHistoryFile));
  CHECK(LoadCheckpoint(dir.path() / "piped").run.evaluator.backend ==
        "external");

  const Run broken = Esrn(args + "'" + (dir.path() / "broken").string() + "'",
                          dir, "ESRN_EVALUATOR=/nonexistent/trainer");
  CHECK(broken.code == kExitSpawn);
}

}  // namespace
}  // namespace esrn
