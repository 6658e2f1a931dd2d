// Copyright 2026 The TMQL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tmql/bench.h"
#include "tmql/dp_oracle.h"
#include "tmql/errors.h"
#include "tmql/io.h"
#include "tmql/learners.h"
#include "tmql/markov_game.h"

namespace tmql::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flags shared by every subcommand. Unset optionals leave config values alone.
struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int verbosity = 0;
};

struct TrainFlags {
  std::string game;
  std::string solution;
  std::optional<std::string> algo;
  std::optional<double> theta_c;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> iterations;
  bool aligned = false;
};

struct BenchFlags {
  std::optional<std::uint64_t> episodes;
  std::optional<std::uint64_t> iterations;
  std::optional<std::string> algo;
  std::optional<double> theta_c;
  std::optional<std::string> mode;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> trace_every;
};

json LoadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  json j = ReadJsonFile(path);
  if (!j.is_object()) throw ParseError("config '" + path + "' must be a JSON object");
  return j;
}

// Relative paths inside a config file are taken relative to that file.
std::string ResolveAgainst(const std::string& config_path,
                           const std::string& path) {
  if (path.empty() || config_path.empty() || fs::path(path).is_absolute()) {
    return path;
  }
  return (fs::path(config_path).parent_path() / path).lexically_normal().string();
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputUnwritable("cannot create '" + dir + "': " + ec.message());
}

int CmdGen(const CommonFlags& flags, const json& overrides) {
  json j = LoadConfig(flags.config_path);
  for (const auto& [key, value] : overrides.items()) j[key] = value;
  GeneratorConfig config = j.get<GeneratorConfig>();
  if (flags.seed) config.seed = *flags.seed;
  config.Validate();
  const std::string out = flags.out.empty() ? "game.json" : flags.out;

  const MarkovGame game = GenerateRandom(config);
  const ValidationReport report = Validate(game);
  if (!report.ok()) throw InvalidGame(report.Summary());
  SaveGame(game, out);
  std::cout << "wrote " << out << "\n"
            << "states=" << game.n_states() << " actions=" << game.n_actions_a()
            << "x" << game.n_actions_b() << " discount=" << game.discount()
            << "\n"
            << "min_self_loop=" << game.MinSelfLoop() << "\n"
            << "r_max=" << game.MaxAbsReward() << "\n";
  return kOk;
}

int CmdSolve(const CommonFlags& flags, const std::string& game_flag,
             std::optional<double> tol_flag,
             std::optional<std::size_t> sweeps_flag) {
  const json j = LoadConfig(flags.config_path);
  std::string game_path =
      game_flag.empty() ? ResolveAgainst(flags.config_path, j.value("game", ""))
                        : game_flag;
  const double tol = tol_flag.value_or(j.value("tolerance", kDefaultOracleTolerance));
  const std::size_t max_sweeps =
      sweeps_flag.value_or(j.value("max_sweeps", std::size_t{10000}));
  if (game_path.empty()) throw UsageError("solve needs a game file (--game)");
  if (!(tol > 0.0)) throw UsageError("tolerance must be positive");
  const std::string out = flags.out.empty() ? "solution.json" : flags.out;

  const MarkovGame game = LoadGame(game_path);
  std::optional<ShapleyResult> solved;
  try {
    solved = ShapleySolve(game, tol, max_sweeps);
  } catch (const NotConverged& e) {
    std::cerr << "not converged: residual=" << e.residual() << "\n";
    return kNotConverged;
  }
  const ShapleyResult& result = *solved;
  // Independent re-check of the delivered table.
  const double recheck = SupDistance(BellmanApply(game, result.q, 1e-10), result.q);
  const ValueFunction y_star = OptimalValues(result.q, 1e-10);
  const PolicyPair policies = ExtractPolicies(result.q, 1e-10);

  json doc = {{"format", "tmql-solution"},
              {"version", 1},
              {"game", game_path},
              {"tolerance", tol},
              {"residual", result.residual},
              {"residual_recheck", recheck},
              {"sweeps", result.sweeps},
              {"q_star", QTableToJson(result.q)},
              {"y_star", y_star.values},
              {"policies", PoliciesToJson(policies)}};
  WriteJsonFile(out, doc);

  std::cout << "wrote " << out << "\n"
            << "sweeps=" << result.sweeps << "\n"
            << "residual=" << result.residual << "\n"
            << "residual_recheck=" << recheck << "\n";
  std::cout << "y_star=";
  for (std::size_t i = 0; i < y_star.values.size(); ++i) {
    std::cout << (i ? "," : "") << y_star.values[i];
  }
  std::cout << "\n";
  if (recheck > tol) {
    std::cerr << "residual re-check " << recheck << " exceeds tolerance " << tol << "\n";
    return kNotConverged;
  }
  return kOk;
}

ValueFunction LoadYStar(const std::string& path) {
  const json doc = ReadJsonFile(path);
  if (doc.value("format", "") != "tmql-solution") {
    throw ParseError("'" + path + "' is not a tmql-solution document");
  }
  return ValueFunction{RequireField<std::vector<double>>(doc, "y_star")};
}

int CmdTrain(const CommonFlags& flags, const TrainFlags& tf) {
  json j = LoadConfig(flags.config_path);
  const std::string game_path =
      tf.game.empty() ? ResolveAgainst(flags.config_path, j.value("game", ""))
                      : tf.game;
  const std::string solution_path =
      tf.solution.empty()
          ? ResolveAgainst(flags.config_path, j.value("solution", ""))
          : tf.solution;
  if (game_path.empty()) throw UsageError("train needs a game file (--game)");

  EpisodeConfig ep;
  ep.algorithm = ParseAlgorithm(tf.algo.value_or(j.value("algorithm", "TMQL")));
  if (j.contains("step_size")) ep.step_size = StepSizeFromJson(j.at("step_size"));
  if (j.contains("theta")) ep.theta = ThetaFromJson(j.at("theta"));
  if (tf.theta_c) ep.theta = ThetaSchedule::Harmonic(*tf.theta_c);
  if (ep.algorithm == Algorithm::kMql) ep.theta = ThetaSchedule::Zero();
  ep.iterations = tf.iterations.value_or(j.value("iterations", std::uint64_t{1000}));
  ep.mode = ParseSampleMode(tf.mode.value_or(j.value("mode", "restart")));
  ep.aligned_stream = tf.aligned || j.value("aligned_stream", false);
  ep.error_every = j.value("error_every", std::uint64_t{0});
  ep.val_tol = j.value("val_tol", kDefaultTolerance);
  const std::uint64_t seed = flags.seed.value_or(j.value("seed", std::uint64_t{0}));
  if (ep.iterations < 1) throw UsageError("iterations must be at least 1");

  const MarkovGame game = LoadGame(game_path);
  QTable q0(game.shape(), j.value("q0_constant", 0.0));
  if (j.contains("q0_file")) {
    q0 = QTableFromJson(
        ReadJsonFile(ResolveAgainst(flags.config_path, j.at("q0_file").get<std::string>())));
  }
  std::optional<ValueFunction> y_star;
  if (!solution_path.empty()) y_star = LoadYStar(solution_path);
  if (ep.error_every > 0 && !y_star) {
    throw UsageError("error_every needs a solution file (--solution)");
  }
  const std::string out_dir = flags.out.empty() ? "train_out" : flags.out;

  json effective = {{"game", game_path},
                    {"solution", solution_path},
                    {"algorithm", ToString(ep.algorithm)},
                    {"step_size", ep.step_size},
                    {"theta", ep.theta},
                    {"iterations", ep.iterations},
                    {"mode", ToString(ep.mode)},
                    {"aligned_stream", ep.aligned_stream},
                    {"error_every", ep.error_every},
                    {"val_tol", ep.val_tol},
                    {"seed", seed}};

  // Checks ||Q0|| <= R_max / (1 - alpha) before anything is written.
  const EpisodeResult result =
      RunEpisode(game, ep, BehaviorPolicy::Uniform(game.shape()), q0, Rng(seed),
                 y_star ? &*y_star : nullptr);

  EnsureDirectory(out_dir);
  json q_doc = QTableToJson(result.q);
  q_doc["config"] = effective;
  WriteJsonFile((fs::path(out_dir) / "q_final.json").string(), q_doc);
  WriteTextFile((fs::path(out_dir) / "trace.csv").string(), result.trace.ToCsv());
  WriteJsonFile((fs::path(out_dir) / "effective_config.json").string(), effective);

  std::cout << "wrote " << out_dir << "/q_final.json and trace.csv\n"
            << "algorithm=" << ToString(ep.algorithm)
            << " iterations=" << ep.iterations << " seed=" << seed << "\n";
  if (y_star) {
    std::cout.precision(17);
    std::cout << "final_error=" << EpisodeError(*y_star, result.q, ep.val_tol)
              << "\n";
  }
  return kOk;
}

int CmdBench(const CommonFlags& flags, const BenchFlags& bf) {
  json j = LoadConfig(flags.config_path);
  ExperimentConfig config = j.get<ExperimentConfig>();
  if (config.game_file) {
    config.game_file = ResolveAgainst(flags.config_path, *config.game_file);
  }
  if (flags.seed) config.base_seed = *flags.seed;
  if (bf.episodes) config.episodes = *bf.episodes;
  if (bf.iterations) config.iterations = *bf.iterations;
  if (bf.mode) config.mode = ParseSampleMode(*bf.mode);
  if (bf.threads) config.threads = *bf.threads;
  if (bf.trace_every) config.trace_every = *bf.trace_every;
  if (bf.algo) {
    const auto names = SplitList(*bf.algo);
    if (config.algorithms.empty()) {
      for (const auto& name : names) {
        AlgorithmSpec spec;
        spec.algorithm = ParseAlgorithm(name);
        spec.label = ToString(spec.algorithm);
        if (spec.algorithm == Algorithm::kMql) spec.theta = ThetaSchedule::Zero();
        config.algorithms.push_back(spec);
      }
    } else {
      std::vector<AlgorithmSpec> kept;
      for (const auto& spec : config.algorithms) {
        for (const auto& name : names) {
          if (ParseAlgorithm(name) == spec.algorithm) {
            kept.push_back(spec);
            break;
          }
        }
      }
      config.algorithms = kept;
    }
  }
  if (bf.theta_c) {
    for (auto& spec : config.algorithms) {
      if (spec.algorithm == Algorithm::kTmql) {
        spec.theta = ThetaSchedule::Harmonic(*bf.theta_c);
      }
    }
  }
  config.Validate();
  const std::string out_dir = flags.out.empty() ? "bench_out" : flags.out;

  const ExperimentReport report = RunExperiment(config);
  const auto written =
      EmitReport(report, out_dir, {ReportFormat::kCsv, ReportFormat::kJson});
  std::cout << SummaryTable(report);
  if (flags.verbosity > 0) {
    for (const auto& path : written) std::cout << "wrote " << path << "\n";
  }
  return kOk;
}

void AddCommon(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--seed", flags.seed, "Seed override");
  cmd->add_option("--out", flags.out, "Output file or directory");
  cmd->add_flag("-v,--verbose", flags.verbosity, "More output");
}

}  // namespace

int Run(const std::vector<std::string>& args) {
  CLI::App app{"Two-step minimax Q-learning toolkit for zero-sum Markov games",
               "tmql"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* gen = app.add_subcommand("gen", "Generate a random Markov game");
  AddCommon(gen, flags);
  std::optional<std::size_t> states, actions;
  std::optional<double> discount, self_loop, floor;
  gen->add_option("--states", states, "Number of states");
  gen->add_option("--actions", actions, "Actions per player");
  gen->add_option("--discount", discount, "Discount factor");
  gen->add_option("--self-loop-min", self_loop, "Minimum p(i|i,a,b)");
  gen->add_option("--ergodic-floor", floor, "Minimum mass on every successor");

  auto* solve = app.add_subcommand("solve", "Solve a game by Shapley iteration");
  AddCommon(solve, flags);
  std::string solve_game;
  std::optional<double> tol;
  std::optional<std::size_t> max_sweeps;
  solve->add_option("--game", solve_game, "Game file");
  solve->add_option("--tol", tol, "Sup-norm distance to Q* to certify");
  solve->add_option("--max-sweeps", max_sweeps, "Sweep cap");

  auto* train = app.add_subcommand("train", "Run one learner episode");
  AddCommon(train, flags);
  TrainFlags tf;
  train->add_option("--game", tf.game, "Game file");
  train->add_option("--solution", tf.solution, "Solution file with Y*");
  train->add_option("--algo", tf.algo, "MQL or TMQL");
  train->add_option("--theta-c", tf.theta_c, "theta_n = c / (n + c)");
  train->add_option("--mode", tf.mode, "restart or trajectory");
  train->add_option("--iterations", tf.iterations, "Updates per episode");
  train->add_flag("--aligned", tf.aligned,
                  "MQL draws two-step samples (stream aligned with TMQL)");

  auto* bench = app.add_subcommand("bench", "Run a multi-episode comparison");
  AddCommon(bench, flags);
  BenchFlags bf;
  bench->add_option("--episodes", bf.episodes, "Episodes per algorithm");
  bench->add_option("--iterations", bf.iterations, "Updates per episode");
  bench->add_option("--algo", bf.algo, "Comma-separated algorithms");
  bench->add_option("--theta-c", bf.theta_c, "theta_n = c / (n + c) for TMQL");
  bench->add_option("--mode", bf.mode, "restart or trajectory");
  bench->add_option("--threads", bf.threads, "Worker threads");
  bench->add_option("--trace-every", bf.trace_every,
                    "Record mean error every k iterations");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (gen->parsed()) {
      json overrides = json::object();
      if (states) overrides["n_states"] = *states;
      if (actions) {
        overrides["n_actions_a"] = *actions;
        overrides["n_actions_b"] = *actions;
      }
      if (discount) overrides["discount"] = *discount;
      if (self_loop) overrides["self_loop_min"] = *self_loop;
      if (floor) overrides["ergodic_floor"] = *floor;
      return CmdGen(flags, overrides);
    }
    if (solve->parsed()) return CmdSolve(flags, solve_game, tol, max_sweeps);
    if (train->parsed()) return CmdTrain(flags, tf);
    if (bench->parsed()) return CmdBench(flags, bf);
  } catch (const NotConverged& e) {
    std::cerr << "NotConverged: " << e.what() << " (residual " << e.residual()
              << ")\n";
    return kNotConverged;
  } catch (const OutputUnwritable& e) {
    std::cerr << "OutputUnwritable: " << e.what() << "\n";
    return kIoError;
  } catch (const ConfigInfeasible& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidGame& e) {
    std::cerr << "invalid game: " << e.what() << "\n";
    return kConfigError;
  } catch (const DegenerateBehavior& e) {
    std::cerr << "DegenerateBehavior: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace tmql::cli
