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

#include "tmql/bench.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>

#include "tmql/errors.h"
#include "tmql/io.h"

namespace tmql {
namespace {

struct GameInstance {
  MarkovGame game;
  ValueFunction y_star;
  double residual;
};

GameInstance PrepareGame(MarkovGame game, const ExperimentConfig& config) {
  ShapleyResult oracle = ShapleySolve(game, config.oracle_tolerance);
  ValueFunction y_star = OptimalValues(oracle.q, 1e-10);
  return {std::move(game), std::move(y_star), oracle.residual};
}

std::string Number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json AlgorithmSpecJson(const AlgorithmSpec& spec) {
  return {{"label", spec.label},
          {"algorithm", ToString(spec.algorithm)},
          {"step_size", spec.step_size},
          {"theta", spec.theta}};
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (generator.has_value() == game_file.has_value()) {
    throw UsageError("experiment needs exactly one of 'generator' or 'game_file'");
  }
  if (generator) generator->Validate();
  if (game_mode == GameMode::kFresh && !generator) {
    throw UsageError("fresh game mode requires a generator");
  }
  if (algorithms.empty()) throw UsageError("algorithm list is empty");
  if (episodes < 1) throw UsageError("episodes must be at least 1");
  if (iterations < 1) throw UsageError("iterations must be at least 1");
  if (!(oracle_tolerance > 0.0)) {
    throw UsageError("oracle_tolerance must be positive");
  }
  if (!(val_tol > 0.0)) throw UsageError("val_tol must be positive");
  if (threads < 1) throw UsageError("threads must be at least 1");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json::object();
  if (c.generator) j["generator"] = *c.generator;
  if (c.game_file) j["game_file"] = *c.game_file;
  j["algorithms"] = nlohmann::json::array();
  for (const auto& spec : c.algorithms) {
    j["algorithms"].push_back(AlgorithmSpecJson(spec));
  }
  j["iterations"] = c.iterations;
  j["episodes"] = c.episodes;
  j["oracle_tolerance"] = c.oracle_tolerance;
  j["base_seed"] = c.base_seed;
  j["mode"] = ToString(c.mode);
  j["game_mode"] = c.game_mode == GameMode::kFixed ? "fixed" : "fresh";
  j["trace_every"] = c.trace_every;
  j["threads"] = c.threads;
  j["val_tol"] = c.val_tol;
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ParseError("experiment config must be an object");
  try {
    ExperimentConfig d;
    c = d;
    if (j.contains("generator")) {
      c.generator = j.at("generator").get<GeneratorConfig>();
    }
    if (j.contains("game_file")) {
      c.game_file = j.at("game_file").get<std::string>();
    }
    if (j.contains("algorithms")) {
      for (const auto& a : j.at("algorithms")) {
        AlgorithmSpec spec;
        spec.algorithm = ParseAlgorithm(RequireField<std::string>(a, "algorithm"));
        spec.label = a.value("label", ToString(spec.algorithm));
        if (a.contains("step_size")) {
          spec.step_size = StepSizeFromJson(a.at("step_size"));
        }
        if (a.contains("theta")) spec.theta = ThetaFromJson(a.at("theta"));
        if (spec.algorithm == Algorithm::kMql) spec.theta = ThetaSchedule::Zero();
        c.algorithms.push_back(spec);
      }
    }
    c.iterations = j.value("iterations", d.iterations);
    c.episodes = j.value("episodes", d.episodes);
    c.oracle_tolerance = j.value("oracle_tolerance", d.oracle_tolerance);
    c.base_seed = j.value("base_seed", d.base_seed);
    c.mode = ParseSampleMode(j.value("mode", ToString(d.mode)));
    const std::string game_mode = j.value("game_mode", "fixed");
    if (game_mode == "fixed") {
      c.game_mode = GameMode::kFixed;
    } else if (game_mode == "fresh") {
      c.game_mode = GameMode::kFresh;
    } else {
      throw ParseError("unknown game_mode '" + game_mode + "'");
    }
    c.trace_every = j.value("trace_every", d.trace_every);
    c.threads = j.value("threads", d.threads);
    c.val_tol = j.value("val_tol", d.val_tol);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
}

double EpisodeError(const ValueFunction& y_star, const QTable& q,
                    double val_tol) {
  return ValueError(y_star, q, val_tol);
}

ExperimentReport RunExperiment(const ExperimentConfig& config) {
  config.Validate();

  std::vector<GameInstance> games;
  if (config.game_mode == GameMode::kFixed) {
    games.push_back(PrepareGame(config.generator ? GenerateRandom(*config.generator)
                                                 : LoadGame(*config.game_file),
                                config));
  } else {
    for (std::uint64_t k = 0; k < config.episodes; ++k) {
      GeneratorConfig g = *config.generator;
      g.seed += k;
      games.push_back(PrepareGame(GenerateRandom(g), config));
    }
  }

  const std::size_t n_algos = config.algorithms.size();
  const std::uint64_t n_episodes = config.episodes;
  ExperimentReport report;
  report.config = config;
  report.game_mode = config.game_mode == GameMode::kFixed ? "fixed" : "fresh";
  for (const auto& g : games) {
    report.oracle_residual = std::max(report.oracle_residual, g.residual);
  }
  report.algorithms.resize(n_algos);

  std::vector<std::vector<std::vector<double>>> traces(
      n_algos, std::vector<std::vector<double>>(n_episodes));
  for (std::size_t a = 0; a < n_algos; ++a) {
    auto& r = report.algorithms[a];
    r.label = config.algorithms[a].label.empty()
                  ? ToString(config.algorithms[a].algorithm)
                  : config.algorithms[a].label;
    r.errors.assign(n_episodes, 0.0);
    r.times.assign(n_episodes, 0.0);
    r.seeds.resize(n_episodes);
    for (std::uint64_t k = 0; k < n_episodes; ++k) r.seeds[k] = config.base_seed + k;
  }

  // Each task writes only its own slots, so the schedule cannot affect the
  // results.
  const std::size_t n_tasks = n_algos * n_episodes;
  std::atomic<std::size_t> next_task{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    while (!failed) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= n_tasks) return;
      const std::size_t a = task / n_episodes;
      const std::uint64_t k = task % n_episodes;
      try {
        const GameInstance& inst =
            games[config.game_mode == GameMode::kFixed ? 0 : k];
        const AlgorithmSpec& spec = config.algorithms[a];
        EpisodeConfig ep;
        ep.algorithm = spec.algorithm;
        ep.step_size = spec.step_size;
        ep.theta = spec.theta;
        ep.iterations = config.iterations;
        ep.mode = config.mode;
        ep.error_every = config.trace_every;
        ep.val_tol = config.val_tol;
        const BehaviorPolicy behavior = BehaviorPolicy::Uniform(inst.game.shape());
        const QTable q0(inst.game.shape());

        const auto start = std::chrono::steady_clock::now();
        EpisodeResult result = RunEpisode(inst.game, ep, behavior, q0,
                                          Rng(config.base_seed + k), &inst.y_star);
        const auto stop = std::chrono::steady_clock::now();

        auto& r = report.algorithms[a];
        r.times[k] = std::chrono::duration<double>(stop - start).count();
        r.errors[k] = EpisodeError(inst.y_star, result.q, config.val_tol);
        traces[a][k] = std::move(result.trace.error);
        if (k == 0) r.trace_iterations = std::move(result.trace.error_iteration);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(config.threads, n_tasks);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  double smallest_error = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n_algos; ++a) {
    auto& r = report.algorithms[a];
    const double n = static_cast<double>(n_episodes);
    double sum = 0.0;
    for (double e : r.errors) sum += e;
    r.average_error = sum / n;
    double sq = 0.0;
    for (double e : r.errors) sq += (e - r.average_error) * (e - r.average_error);
    r.error_std = n_episodes > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
    double time_sum = 0.0;
    for (double t : r.times) time_sum += t;
    r.average_time_seconds = time_sum / n;
    for (double e : r.errors) smallest_error = std::min(smallest_error, e);

    r.mean_trace.assign(r.trace_iterations.size(), 0.0);
    for (std::size_t t = 0; t < r.trace_iterations.size(); ++t) {
      double s = 0.0;
      for (std::uint64_t k = 0; k < n_episodes; ++k) s += traces[a][k][t];
      r.mean_trace[t] = s / n;
    }
  }
  report.oracle_warning = report.oracle_residual > smallest_error / 10.0;
  return report;
}

nlohmann::json ReportToJson(const ExperimentReport& report) {
  nlohmann::json algos = nlohmann::json::array();
  for (const auto& r : report.algorithms) {
    algos.push_back({{"label", r.label},
                     {"average_error", r.average_error},
                     {"error_std", r.error_std},
                     {"average_time_seconds", r.average_time_seconds},
                     {"seeds", r.seeds},
                     {"errors", r.errors},
                     {"times", r.times},
                     {"trace_iterations", r.trace_iterations},
                     {"mean_trace", r.mean_trace}});
  }
  return {{"format", "tmql-experiment-report"},
          {"version", 1},
          {"config", report.config},
          {"game_mode", report.game_mode},
          {"oracle_residual", report.oracle_residual},
          {"oracle_warning", report.oracle_warning},
          {"algorithms", algos}};
}

ExperimentReport ReportFromJson(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "tmql-experiment-report") {
    throw ParseError("not a tmql-experiment-report document");
  }
  ExperimentReport report;
  report.config = j.contains("config") ? j.at("config") : nlohmann::json();
  report.game_mode = RequireField<std::string>(j, "game_mode");
  report.oracle_residual = RequireField<double>(j, "oracle_residual");
  report.oracle_warning = RequireField<bool>(j, "oracle_warning");
  for (const auto& a : RequireField<nlohmann::json>(j, "algorithms")) {
    AlgorithmReport r;
    r.label = RequireField<std::string>(a, "label");
    r.average_error = RequireField<double>(a, "average_error");
    r.error_std = RequireField<double>(a, "error_std");
    r.average_time_seconds = RequireField<double>(a, "average_time_seconds");
    r.seeds = RequireField<std::vector<std::uint64_t>>(a, "seeds");
    r.errors = RequireField<std::vector<double>>(a, "errors");
    r.times = RequireField<std::vector<double>>(a, "times");
    r.trace_iterations =
        RequireField<std::vector<std::uint64_t>>(a, "trace_iterations");
    r.mean_trace = RequireField<std::vector<double>>(a, "mean_trace");
    report.algorithms.push_back(std::move(r));
  }
  return report;
}

std::string ReportToCsv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "algorithm,episode,seed,error,time_s\n";
  for (const auto& r : report.algorithms) {
    for (std::size_t k = 0; k < r.errors.size(); ++k) {
      out << r.label << ',' << k << ',' << r.seeds[k] << ','
          << Number(r.errors[k]) << ',' << Number(r.times[k]) << '\n';
    }
  }
  for (const auto& r : report.algorithms) {
    out << r.label << ",mean,," << Number(r.average_error) << ','
        << Number(r.average_time_seconds) << '\n';
  }
  return out.str();
}

std::string SummaryTable(const ExperimentReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-24s %16s %14s %16s\n", "Algorithm",
                "Average Error", "Error Std", "Average Time (s)");
  out << line;
  for (const auto& r : report.algorithms) {
    std::snprintf(line, sizeof(line), "%-24s %16.4f %14.4f %16.4f\n",
                  r.label.c_str(), r.average_error, r.error_std,
                  r.average_time_seconds);
    out << line;
  }
  if (report.oracle_warning) {
    out << "warning: oracle residual " << report.oracle_residual
        << " is not 10x below the smallest learner error\n";
  }
  return out.str();
}

std::string TraceToCsv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "iteration";
  for (const auto& r : report.algorithms) out << ',' << r.label;
  out << '\n';
  if (report.algorithms.empty()) return out.str();
  const auto& iters = report.algorithms.front().trace_iterations;
  for (std::size_t t = 0; t < iters.size(); ++t) {
    out << iters[t];
    for (const auto& r : report.algorithms) out << ',' << Number(r.mean_trace[t]);
    out << '\n';
  }
  return out.str();
}

std::vector<std::string> EmitReport(const ExperimentReport& report,
                                    const std::string& out_dir,
                                    const std::set<ReportFormat>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw OutputUnwritable("cannot create '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);
  std::vector<std::string> written;
  if (formats.count(ReportFormat::kCsv)) {
    written.push_back((dir / "report.csv").string());
    WriteTextFile(written.back(), ReportToCsv(report));
    if (!report.algorithms.empty() &&
        !report.algorithms.front().trace_iterations.empty()) {
      written.push_back((dir / "trace.csv").string());
      WriteTextFile(written.back(), TraceToCsv(report));
    }
  }
  if (formats.count(ReportFormat::kJson)) {
    written.push_back((dir / "report.json").string());
    WriteJsonFile(written.back(), ReportToJson(report));
  }
  return written;
}

}  // namespace tmql
