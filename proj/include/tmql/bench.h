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

// Multi-episode comparison harness. Each episode runs a learner from
// Q_0 = 0 and scores the final table by ||Y* - val[Q(.)]||_2; a report holds
// per-episode errors and wall-clock times and their averages.

#ifndef TMQL_BENCH_H_
#define TMQL_BENCH_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmql/dp_oracle.h"
#include "tmql/learners.h"
#include "tmql/markov_game.h"

namespace tmql {

struct AlgorithmSpec {
  std::string label;  // defaults to the algorithm name
  Algorithm algorithm = Algorithm::kTmql;
  StepSizeSchedule step_size = StepSizeSchedule::Polynomial();
  ThetaSchedule theta = ThetaSchedule::Harmonic(80.0);

  bool operator==(const AlgorithmSpec&) const = default;
};

// kFixed: one game shared by every episode. kFresh: episode k plays a game
// generated with seed generator.seed + k.
enum class GameMode { kFixed, kFresh };

struct ExperimentConfig {
  // Exactly one game source.
  std::optional<GeneratorConfig> generator;
  std::optional<std::string> game_file;

  std::vector<AlgorithmSpec> algorithms;
  std::uint64_t iterations = 1000;
  std::uint64_t episodes = 50;
  double oracle_tolerance = kDefaultOracleTolerance;
  // Episode k of every algorithm uses learner seed base_seed + k.
  std::uint64_t base_seed = 0;
  SampleMode mode = SampleMode::kRestart;
  GameMode game_mode = GameMode::kFixed;
  // Average the value error every k iterations across episodes (0 = off).
  // Trace evaluation is included in the measured episode time.
  std::uint64_t trace_every = 0;
  std::size_t threads = 1;
  double val_tol = kDefaultTolerance;

  // Throws UsageError / ConfigInfeasible.
  void Validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
// Relative game_file paths are kept as written.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct AlgorithmReport {
  std::string label;
  double average_error = 0.0;
  double error_std = 0.0;
  double average_time_seconds = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> errors;
  std::vector<double> times;
  // Episode-averaged value error at trace_iterations.
  std::vector<std::uint64_t> trace_iterations;
  std::vector<double> mean_trace;

  bool operator==(const AlgorithmReport&) const = default;
};

struct ExperimentReport {
  nlohmann::json config;
  std::string game_mode;
  // Largest final Shapley residual over the oracle solves.
  double oracle_residual = 0.0;
  // Set when oracle_residual > (smallest learner error) / 10.
  bool oracle_warning = false;
  std::vector<AlgorithmReport> algorithms;

  bool operator==(const ExperimentReport&) const = default;
};

// ||Y* - val[Q(.)]||_2
double EpisodeError(const ValueFunction& y_star, const QTable& q,
                    double val_tol = kDefaultTolerance);

ExperimentReport RunExperiment(const ExperimentConfig& config);

nlohmann::json ReportToJson(const ExperimentReport& report);
ExperimentReport ReportFromJson(const nlohmann::json& j);

// One row per (algorithm, episode) then one "mean" row per algorithm.
std::string ReportToCsv(const ExperimentReport& report);
// Fixed-width algorithm / average error / average time table.
std::string SummaryTable(const ExperimentReport& report);
// iteration column then one mean-error column per algorithm.
std::string TraceToCsv(const ExperimentReport& report);

enum class ReportFormat { kCsv, kJson };

// Writes report.csv / report.json (and trace.csv when traced) into out_dir,
// creating it if needed. Returns the written paths.
std::vector<std::string> EmitReport(const ExperimentReport& report,
                                    const std::string& out_dir,
                                    const std::set<ReportFormat>& formats);

}  // namespace tmql

#endif  // TMQL_BENCH_H_
