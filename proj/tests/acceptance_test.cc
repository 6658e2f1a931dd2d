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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "oracles.h"
#include "tmql/bench.h"
#include "tmql/dp_oracle.h"
#include "tmql/errors.h"
#include "tmql/io.h"
#include "tmql/learners.h"
#include "tmql/markov_game.h"
#include "tmql/matrix_game.h"

namespace tmql {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

MarkovGame Generate(std::size_t states, std::size_t actions, double alpha, std::uint64_t seed,
                    double self_loop = 0.0, double reward_lo = -1.0) {
  GeneratorConfig g;
  g.n_states = states;
  g.n_actions_a = actions;
  g.n_actions_b = actions;
  g.discount = alpha;
  g.self_loop_min = self_loop;
  g.reward_lo = reward_lo;
  g.seed = seed;
  return GenerateRandom(g);
}

Outcome MatrixSolver() {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  const double pennies = Val(PayoffMatrix{{1, -1}, {-1, 1}});
  const double rps = Val(PayoffMatrix{{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
  out.pass = std::abs(pennies) <= 1e-9 && std::abs(rps) <= 1e-9;

  Rng rng(2024);
  double worst_i = 0.0, worst_ii = 0.0, worst_gap = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const testing::Dense m = testing::RandomMatrix(5, 5, rng);
    const testing::Dense n = testing::RandomMatrix(5, 5, rng);
    const auto sm = SolveMatrixGame(PayoffView(m.v, 5, 5));
    const auto sn = SolveMatrixGame(PayoffView(n.v, 5, 5));
    double dist = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < 25; ++k) {
      dist = std::max(dist, std::abs(m.v[k] - n.v[k]));
      norm = std::max(norm, std::abs(m.v[k]));
    }
    worst_i = std::max(worst_i, std::abs(sm.value - sn.value) - dist);
    worst_ii = std::max(worst_ii, std::abs(sm.value) - norm);
    worst_gap = std::max({worst_gap, sm.certificate_gap, sn.certificate_gap});
  }
  const double elapsed = Seconds(start);
  out.pass = out.pass && worst_i <= 2e-9 && worst_ii <= 2e-9 && worst_gap <= 1e-9 && elapsed < 5.0;
  out.detail = Fmt("pennies=%.1e rps=%.1e", pennies, rps) +
               Fmt(" lemma_i_excess=%.1e lemma_ii_excess=%.1e max_gap=%.1e time=%.2fs", worst_i,
                   worst_ii, worst_gap, elapsed);
  return out;
}

Outcome Oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(77);
  double worst_closed = 0.0;
  for (int t = 0; t < 100; ++t) {
    const testing::Dense r = testing::RandomMatrix(3, 3, rng);
    const auto eq = testing::SupportEnumeration(r);
    if (!eq) continue;
    const double alpha = 0.1 + 0.8 * UniformDouble(rng);
    const MarkovGame game({1, 3, 3}, std::vector<double>(9, 1.0), r.v, alpha);
    const ShapleyResult s = ShapleySolve(game, 1e-10);
    worst_closed = std::max(worst_closed,
                            std::abs(OptimalValues(s.q).values[0] - eq->value / (1 - alpha)));
  }

  const MarkovGame game = Generate(5, 4, 0.6, 5);
  double worst_ratio = 0.0;
  for (int t = 0; t < 100; ++t) {
    QTable q(game.shape()), p(game.shape());
    for (std::size_t k = 0; k < q.values().size(); ++k) {
      q[k] = 10 * UniformDouble(rng) - 5;
      p[k] = 10 * UniformDouble(rng) - 5;
    }
    const double ratio = SupDistance(BellmanApply(game, q), BellmanApply(game, p)) / SupDistance(q, p);
    worst_ratio = std::max(worst_ratio, ratio);
  }

  const double tol = 1e-8;
  const ShapleyResult s = ShapleySolve(game, tol);
  const double recheck = SupDistance(BellmanApply(game, s.q, 1e-11), s.q);
  const double elapsed = Seconds(start);

  Outcome out;
  out.pass = worst_closed <= 1e-8 && worst_ratio <= 0.6 + 1e-9 && recheck <= tol && elapsed < 30.0;
  out.detail = Fmt("closed_form_err=%.1e contraction=%.12f recheck=%.1e time=%.2fs", worst_closed,
                   worst_ratio, recheck, elapsed);
  return out;
}

Outcome Reduction() {
  const MarkovGame game = Generate(10, 5, 0.6, 31);
  EpisodeConfig tmql;
  tmql.algorithm = Algorithm::kTmql;
  tmql.theta = ThetaSchedule::Zero();
  tmql.iterations = 10000;
  EpisodeConfig mql = tmql;
  mql.algorithm = Algorithm::kMql;
  mql.aligned_stream = true;
  const BehaviorPolicy uniform = BehaviorPolicy::Uniform(game.shape());
  const auto a = RunEpisode(game, tmql, uniform, QTable(game.shape()), Rng(99));
  const auto b = RunEpisode(game, mql, uniform, QTable(game.shape()), Rng(99));
  std::size_t differing = 0;
  for (std::size_t k = 0; k < a.q.values().size(); ++k) differing += a.q[k] != b.q[k];
  return {a.q == b.q, "steps=10000 differing_entries=" + std::to_string(differing)};
}

Outcome Boundedness() {
  const MarkovGame game = Generate(10, 5, 0.6, 42);
  const ThetaSchedule theta = ThetaSchedule::Harmonic(80.0);
  const StepSizeSchedule beta = StepSizeSchedule::Polynomial();
  const BehaviorPolicy uniform = BehaviorPolicy::Uniform(game.shape());
  LearnerState state = MakeLearnerState(game, QTable(game.shape()), Rng(0), false);
  Rng rng(7);
  const std::uint64_t steps = 1000000;
  std::uint64_t violations = 0, closed_violations = 0;
  double max_norm = 0.0, worst_ratio = 0.0;
  std::size_t current = SampleIndex(std::vector<double>(game.n_states(), 1.0 / game.n_states()), rng);
  for (std::uint64_t n = 0; n < steps; ++n) {
    const TwoStepSample s = SampleTwoStep(game, current, uniform, rng);
    const double b = beta(state.step, state.visits[state.q.Index(s.state_i, s.action_a, s.action_b)] + 1);
    TmqlStep(game, state, s, b, theta(state.step));
    current = s.state_k;
    const double norm = state.q.SupNorm();
    max_norm = std::max(max_norm, norm);
    worst_ratio = std::max(worst_ratio, norm / state.bound);
    if (norm > state.bound + 1e-6 * state.bound) ++violations;
  }
  const double closed = Lemma3Bound(game, theta, beta, steps);
  if (max_norm > closed + 1e-6 * closed) ++closed_violations;
  Outcome out;
  out.pass = violations == 0 && closed_violations == 0;
  out.detail = "violations=" + std::to_string(violations) + "/" + std::to_string(steps) +
               Fmt(" max_norm=%.4f realized_bound=%.4f max_norm/bound=%.4f closed_form_bound=%.3e",
                   max_norm, state.bound, worst_ratio, closed);
  return out;
}

Outcome DeskConvergence() {
  const auto start = std::chrono::steady_clock::now();
  const MarkovGame game = Generate(3, 2, 0.6, 3);
  const ValueFunction y = OptimalValues(ShapleySolve(game, 1e-12).q);
  EpisodeConfig config;
  config.algorithm = Algorithm::kTmql;
  config.iterations = 200000;
  config.error_every = 10000;
  config.check_bound = false;
  const BehaviorPolicy uniform = BehaviorPolicy::Uniform(game.shape());
  int improved = 0;
  double mean_final = 0.0, worst_final = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = RunEpisode(game, config, uniform, QTable(game.shape()), Rng(seed), &y);
    const double early = r.trace.error.front();
    const double final_error = r.trace.error.back();
    improved += final_error < early;
    mean_final += final_error / 50.0;
    worst_final = std::max(worst_final, final_error);
  }
  const double elapsed = Seconds(start);
  Outcome out;
  out.pass = mean_final < 0.05 && improved >= 45 && elapsed < 300.0;
  out.detail = "improved=" + std::to_string(improved) + "/50" +
               Fmt(" mean_final_error=%.4f worst_final_error=%.4f time=%.1fs", mean_final,
                   worst_final, elapsed);
  return out;
}

ExperimentConfig TableConfig(std::size_t states, bool restricted, double reward_lo,
                             std::uint64_t trace_every = 0) {
  GeneratorConfig g;
  g.n_states = states;
  g.n_actions_a = 5;
  g.n_actions_b = 5;
  g.discount = 0.6;
  g.reward_lo = reward_lo;
  g.self_loop_min = restricted ? 0.05 : 0.0;
  g.seed = 1000 + states;
  ExperimentConfig c;
  c.generator = g;
  AlgorithmSpec mql;
  mql.label = "MQL";
  mql.algorithm = Algorithm::kMql;
  mql.theta = ThetaSchedule::Zero();
  AlgorithmSpec tmql;
  tmql.label = "TMQL";
  tmql.theta = ThetaSchedule::Harmonic(restricted ? 80.0 : 100.0);
  c.algorithms = {mql, tmql};
  c.iterations = 1000;
  c.episodes = 50;
  c.trace_every = trace_every;
  return c;
}

Outcome Ordering() {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  std::ostringstream detail;
  for (bool restricted : {true, false}) {
    for (std::size_t states : {10, 20, 50}) {
      const ExperimentReport r = RunExperiment(TableConfig(states, restricted, 0.0));
      const double mql = r.algorithms[0].average_error;
      const double tmql = r.algorithms[1].average_error;
      out.pass = out.pass && tmql < mql;
      detail << (restricted ? "d>0" : "d=0") << " S=" << states
             << Fmt(" mql=%.4f tmql=%.4f; ", mql, tmql);
    }
  }
  const double elapsed = Seconds(start);
  out.pass = out.pass && elapsed < 600.0;
  detail << Fmt("time=%.1fs", elapsed);
  out.detail = detail.str();
  return out;
}

// Same protocol with rewards drawn from [-1, 1]; reported, not graded.
std::string SymmetricRewardOrdering() {
  std::ostringstream detail;
  int wins = 0;
  for (bool restricted : {true, false}) {
    for (std::size_t states : {10, 20, 50}) {
      const ExperimentReport r = RunExperiment(TableConfig(states, restricted, -1.0));
      const double mql = r.algorithms[0].average_error;
      const double tmql = r.algorithms[1].average_error;
      wins += tmql < mql;
      detail << (restricted ? "d>0" : "d=0") << " S=" << states
             << Fmt(" mql=%.4f tmql=%.4f; ", mql, tmql);
    }
  }
  return "tmql_lower=" + std::to_string(wins) + "/6 " + detail.str();
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome Determinism() {
  ExperimentConfig c = TableConfig(10, true, 0.0, 100);
  c.episodes = 10;
  const ExperimentReport a = RunExperiment(c);
  c.threads = 2;
  const ExperimentReport b = RunExperiment(c);
  bool bench_same = true;
  for (std::size_t k = 0; k < a.algorithms.size(); ++k) {
    bench_same = bench_same && a.algorithms[k].errors == b.algorithms[k].errors &&
                 a.algorithms[k].mean_trace == b.algorithms[k].mean_trace;
  }

  const auto dir = std::filesystem::temp_directory_path() / "tmql_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string game = (dir / "game.json").string();
  const std::string solution = (dir / "solution.json").string();
  std::ostringstream sink;
  std::streambuf* saved = std::cout.rdbuf(sink.rdbuf());
  int rc = cli::Run({"tmql", "gen", "--seed", "6", "--out", game});
  rc |= cli::Run({"tmql", "solve", "--game", game, "--out", solution});
  const std::string bench_config = (dir / "bench.json").string();
  WriteJsonFile(bench_config, {{"game_file", "game.json"}, {"iterations", 500}, {"episodes", 5}});
  for (const char* run : {"run1", "run2"}) {
    rc |= cli::Run({"tmql", "train", "--game", game, "--solution", solution, "--seed", "13",
                    "--iterations", "2000", "--out", (dir / run).string()});
    rc |= cli::Run({"tmql", "bench", "--config", bench_config, "--algo", "MQL,TMQL", "--out",
                    (dir / run / "bench").string()});
  }
  std::cout.rdbuf(saved);
  const bool train_same =
      rc == 0 && Slurp(dir / "run1/q_final.json") == Slurp(dir / "run2/q_final.json") &&
      Slurp(dir / "run1/trace.csv") == Slurp(dir / "run2/trace.csv") &&
      ReportFromJson(ReadJsonFile((dir / "run1/bench/report.json").string())).algorithms[1].errors ==
          ReportFromJson(ReadJsonFile((dir / "run2/bench/report.json").string())).algorithms[1].errors;
  std::filesystem::remove_all(dir);
  return {bench_same && train_same, std::string("bench_repeat=") + (bench_same ? "identical" : "differs") +
                                        " train_repeat=" + (train_same ? "identical" : "differs")};
}

Outcome TraceMonotone() {
  const ExperimentReport r = RunExperiment(TableConfig(10, true, 0.0, 1));
  Outcome out;
  std::ostringstream detail;
  for (const auto& a : r.algorithms) {
    std::vector<double> windows;
    for (std::size_t w = 0; w + 50 <= a.mean_trace.size(); w += 50) {
      double s = 0.0;
      for (std::size_t t = w; t < w + 50; ++t) s += a.mean_trace[t];
      windows.push_back(s / 50.0);
    }
    std::size_t increases = 0;
    for (std::size_t w = 1; w < windows.size(); ++w) increases += windows[w] > windows[w - 1];
    out.pass = out.pass && windows.size() == 20 && increases == 0;
    detail << a.label << ": windows=" << windows.size() << " increases=" << increases
           << Fmt(" first=%.4f last=%.4f; ", windows.front(), windows.back());
  }
  out.detail = detail.str();
  return out;
}

}  // namespace
}  // namespace tmql

int main() {
  using Criterion = std::pair<const char*, std::function<tmql::Outcome()>>;
  const std::vector<Criterion> criteria = {
      {"matrix game solver exactness", tmql::MatrixSolver},
      {"oracle correctness", tmql::Oracle},
      {"theta=0 reduces to single-step learner", tmql::Reduction},
      {"iterate boundedness", tmql::Boundedness},
      {"convergence on a 3-state game", tmql::DeskConvergence},
      {"TMQL below MQL at 10/20/50 states", tmql::Ordering},
      {"determinism of bench and train", tmql::Determinism},
      {"smoothed error traces non-increasing", tmql::TraceMonotone},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    tmql::Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += !outcome.pass;
    std::printf("[%s] criterion %zu: %s: %s\n", outcome.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first, outcome.detail.c_str());
    std::fflush(stdout);
    if (k + 1 == 6) {
      std::printf("[INFO] criterion 6 with rewards in [-1, 1]: %s\n",
                  tmql::SymmetricRewardOrdering().c_str());
      std::fflush(stdout);
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
