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

// Tabular minimax Q-learning (single-step) and two-step minimax Q-learning.
//
// The two-step update for a sample (i, a, b, r1, j, c, d, r2, k) is
//   Q(i,a,b) <- (1 - beta) Q(i,a,b)
//               + beta (r1 + alpha val[Q(j)] + alpha theta (r2 + alpha val[Q(k)]))
// and reduces exactly to the single-step update when theta == 0.

#ifndef TMQL_LEARNERS_H_
#define TMQL_LEARNERS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmql/dp_oracle.h"
#include "tmql/markov_game.h"

namespace tmql {

#ifdef NDEBUG
inline constexpr bool kCheckBoundByDefault = false;
#else
inline constexpr bool kCheckBoundByDefault = true;
#endif

// Learning rates beta, always clipped to [0, 1].
//   polynomial: c / visits(i,a,b)^omega, omega in (0.5, 1]
//   harmonic:   c / (n + 1) on the global step n
//   constant:   c
class StepSizeSchedule {
 public:
  enum class Kind { kPolynomial, kHarmonic, kConstant };

  static StepSizeSchedule Polynomial(double c = 1.0, double omega = 0.85);
  static StepSizeSchedule Harmonic(double c = 1.0);
  static StepSizeSchedule Constant(double c);

  // `step` is the 0-based global iteration; `visits` counts visits to the
  // updated triplet including the current one.
  double operator()(std::uint64_t step, std::uint64_t visits) const;
  // Largest value emitted at global step n over all visit histories.
  double WorstCase(std::uint64_t step) const;
  // Sum beta = inf and sum beta^2 < inf along every infinitely visited pair.
  bool SatisfiesRobbinsMonro() const;

  Kind kind() const { return kind_; }
  double numerator() const { return c_; }
  double exponent() const { return omega_; }

  bool operator==(const StepSizeSchedule&) const = default;

 private:
  StepSizeSchedule(Kind kind, double c, double omega)
      : kind_(kind), c_(c), omega_(omega) {}
  Kind kind_;
  double c_;
  double omega_;
};

// theta_n = c / (n + c) on the 0-based global step, or identically zero.
class ThetaSchedule {
 public:
  enum class Kind { kZero, kHarmonic };

  static ThetaSchedule Zero();
  static ThetaSchedule Harmonic(double c);

  double operator()(std::uint64_t step) const {
    return kind_ == Kind::kZero ? 0.0 : c_ / (static_cast<double>(step) + c_);
  }
  Kind kind() const { return kind_; }
  double parameter() const { return c_; }

  bool operator==(const ThetaSchedule&) const = default;

 private:
  ThetaSchedule(Kind kind, double c) : kind_(kind), c_(c) {}
  Kind kind_;
  double c_;
};

void to_json(nlohmann::json& j, const StepSizeSchedule& s);
StepSizeSchedule StepSizeFromJson(const nlohmann::json& j);
void to_json(nlohmann::json& j, const ThetaSchedule& s);
ThetaSchedule ThetaFromJson(const nlohmann::json& j);

// Boundedness constant for two-step iterates started inside the
// R_max / (1 - alpha) ball:
//   R_max / (1 - alpha) * (1 + alpha theta_0) * prod_{i=1}^{horizon}
//   (1 + beta_i theta_i alpha^2)
// with beta_i replaced by the schedule's worst case at step i.
double Lemma3Bound(double r_max, double discount, const ThetaSchedule& theta,
                   const StepSizeSchedule& beta, std::uint64_t horizon);
double Lemma3Bound(const MarkovGame& game, const ThetaSchedule& theta,
                   const StepSizeSchedule& beta, std::uint64_t horizon);

struct LearnerState {
  QTable q;
  std::vector<std::uint64_t> visits;
  std::uint64_t step = 0;
  // R_max / (1 - alpha): the admissible radius of Q_0.
  double initial_radius = 0.0;
  // The boundedness constant evaluated on the realized (beta_n, theta_n)
  // sequence; every iterate must satisfy ||Q_n|| <= bound.
  double bound = 0.0;
  bool check_bound = kCheckBoundByDefault;
  Rng rng;
  std::size_t current_state = 0;
};

// Throws UsageError if ||q0|| exceeds R_max / (1 - alpha) or shapes differ.
LearnerState MakeLearnerState(const MarkovGame& game, QTable q0, Rng rng,
                              bool check_bound = kCheckBoundByDefault);

// Single-step minimax Q update on (i, a, b, r1, j).
void MqlStep(const MarkovGame& game, LearnerState& state,
             const OneStepSample& sample, double beta,
             double val_tol = kDefaultTolerance);

// Two-step update. With check_bound set, throws BoundViolation if the
// updated entry exceeds bound * (1 + 1e-6).
void TmqlStep(const MarkovGame& game, LearnerState& state,
              const TwoStepSample& sample, double beta, double theta,
              double val_tol = kDefaultTolerance);

enum class Algorithm { kMql, kTmql };
enum class SampleMode { kTrajectory, kRestart };

std::string ToString(Algorithm algorithm);
std::string ToString(SampleMode mode);
Algorithm ParseAlgorithm(const std::string& name);
SampleMode ParseSampleMode(const std::string& name);

struct EpisodeConfig {
  Algorithm algorithm = Algorithm::kTmql;
  StepSizeSchedule step_size = StepSizeSchedule::Polynomial();
  ThetaSchedule theta = ThetaSchedule::Harmonic(80.0);
  std::uint64_t iterations = 1000;
  SampleMode mode = SampleMode::kRestart;
  // MQL draws full two-step samples and uses their first leg, so its random
  // stream lines up with a two-step learner on the same seed.
  bool aligned_stream = false;
  // Record the value error every k iterations (0 disables; needs y_star).
  std::uint64_t error_every = 0;
  double val_tol = kDefaultTolerance;
  bool check_bound = kCheckBoundByDefault;
};

struct StepTrace {
  // |Q_{n+1} - Q_n|_inf for every iteration.
  std::vector<double> delta;
  std::vector<std::uint64_t> error_iteration;
  std::vector<double> error;

  // Columns: iteration, sup_norm_delta, error (blank when not sampled).
  std::string ToCsv() const;
};

struct EpisodeResult {
  QTable q;
  StepTrace trace;
  // Realized boundedness constant after the last step.
  double bound = 0.0;
  // Largest ||Q_n|| seen along the run.
  double max_norm = 0.0;
};

// Runs `iterations` updates from q0. Trajectory mode continues the chain from
// the last sampled state (k for two-step samples, j for one-step samples);
// restart mode draws each start state uniformly.
EpisodeResult RunEpisode(const MarkovGame& game, const EpisodeConfig& config,
                         const BehaviorPolicy& behavior, const QTable& q0,
                         Rng rng, const ValueFunction* y_star = nullptr);

}  // namespace tmql

#endif  // TMQL_LEARNERS_H_
