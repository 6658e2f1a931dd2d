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

#include "tmql/learners.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <utility>

#include "tmql/errors.h"

namespace tmql {
namespace {

constexpr double kBoundSlack = 1e-6;

void CheckSample(const GameShape& shape, std::size_t i, std::size_t a,
                 std::size_t b, std::size_t next) {
  if (i >= shape.n_states || next >= shape.n_states ||
      a >= shape.n_actions_a || b >= shape.n_actions_b) {
    throw UsageError("sample index out of range");
  }
}

void CheckUnitInterval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw UsageError(std::string(name) + " must lie in [0, 1]");
  }
}

// Writes the new entry and advances counters and the realized bound.
void Commit(LearnerState& state, const MarkovGame& game, std::size_t index,
            double value, double beta, double theta) {
  state.q[index] = value;
  ++state.visits[index];
  const double alpha = game.discount();
  if (state.step == 0) {
    state.bound = state.initial_radius * (1.0 + alpha * theta);
  } else {
    state.bound *= 1.0 + beta * theta * alpha * alpha;
  }
  ++state.step;
  if (state.check_bound &&
      std::abs(value) > state.bound + std::max(kBoundSlack * state.bound, 1e-12)) {
    std::ostringstream msg;
    msg << "iterate " << state.step << ": |Q| = " << std::abs(value)
        << " exceeds bound " << state.bound;
    throw BoundViolation(msg.str());
  }
}

}  // namespace

StepSizeSchedule StepSizeSchedule::Polynomial(double c, double omega) {
  if (!(c > 0.0) || !(omega > 0.5 && omega <= 1.0)) {
    throw UsageError("polynomial step size needs c > 0 and omega in (0.5, 1]");
  }
  return StepSizeSchedule(Kind::kPolynomial, c, omega);
}

StepSizeSchedule StepSizeSchedule::Harmonic(double c) {
  if (!(c > 0.0)) throw UsageError("harmonic step size needs c > 0");
  return StepSizeSchedule(Kind::kHarmonic, c, 1.0);
}

StepSizeSchedule StepSizeSchedule::Constant(double c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw UsageError("constant step size must lie in [0, 1]");
  }
  return StepSizeSchedule(Kind::kConstant, c, 0.0);
}

double StepSizeSchedule::operator()(std::uint64_t step,
                                    std::uint64_t visits) const {
  switch (kind_) {
    case Kind::kPolynomial:
      return std::min(
          1.0, c_ / std::pow(static_cast<double>(std::max<std::uint64_t>(visits, 1)),
                             omega_));
    case Kind::kHarmonic:
      return std::min(1.0, c_ / (static_cast<double>(step) + 1.0));
    case Kind::kConstant:
      return c_;
  }
  return 0.0;
}

double StepSizeSchedule::WorstCase(std::uint64_t step) const {
  // A per-pair schedule can be on its first visit at any global step.
  return kind_ == Kind::kPolynomial ? std::min(1.0, c_) : (*this)(step, 1);
}

bool StepSizeSchedule::SatisfiesRobbinsMonro() const {
  return kind_ != Kind::kConstant;
}

ThetaSchedule ThetaSchedule::Zero() { return ThetaSchedule(Kind::kZero, 0.0); }

ThetaSchedule ThetaSchedule::Harmonic(double c) {
  if (!(c > 0.0)) throw UsageError("theta schedule needs c > 0");
  return ThetaSchedule(Kind::kHarmonic, c);
}

void to_json(nlohmann::json& j, const StepSizeSchedule& s) {
  switch (s.kind()) {
    case StepSizeSchedule::Kind::kPolynomial:
      j = {{"kind", "polynomial"}, {"c", s.numerator()}, {"omega", s.exponent()}};
      break;
    case StepSizeSchedule::Kind::kHarmonic:
      j = {{"kind", "harmonic"}, {"c", s.numerator()}};
      break;
    case StepSizeSchedule::Kind::kConstant:
      j = {{"kind", "constant"}, {"c", s.numerator()}};
      break;
  }
}

StepSizeSchedule StepSizeFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("step_size must be an object");
  try {
    const std::string kind = j.value("kind", "polynomial");
    if (kind == "polynomial") {
      return StepSizeSchedule::Polynomial(j.value("c", 1.0), j.value("omega", 0.85));
    } else if (kind == "harmonic") {
      return StepSizeSchedule::Harmonic(j.value("c", 1.0));
    } else if (kind == "constant") {
      if (!j.contains("c")) throw ParseError("constant step size needs 'c'");
      return StepSizeSchedule::Constant(j.at("c").get<double>());
    } else {
      throw ParseError("unknown step_size kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("step_size: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const ThetaSchedule& s) {
  if (s.kind() == ThetaSchedule::Kind::kZero) {
    j = {{"kind", "zero"}};
  } else {
    j = {{"kind", "harmonic"}, {"c", s.parameter()}};
  }
}

ThetaSchedule ThetaFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("theta must be an object");
  try {
    const std::string kind = j.value("kind", "harmonic");
    if (kind == "zero") {
      return ThetaSchedule::Zero();
    } else if (kind == "harmonic") {
      return ThetaSchedule::Harmonic(j.value("c", 80.0));
    } else {
      throw ParseError("unknown theta kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("theta: ") + e.what());
  }
}

double Lemma3Bound(double r_max, double discount, const ThetaSchedule& theta,
                   const StepSizeSchedule& beta, std::uint64_t horizon) {
  if (horizon < 1) throw UsageError("horizon must be at least 1");
  const double a2 = discount * discount;
  double log_product = 0.0;
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    log_product += std::log1p(beta.WorstCase(n) * theta(n) * a2);
  }
  return r_max / (1.0 - discount) * (1.0 + discount * theta(0)) *
         std::exp(log_product);
}

double Lemma3Bound(const MarkovGame& game, const ThetaSchedule& theta,
                   const StepSizeSchedule& beta, std::uint64_t horizon) {
  return Lemma3Bound(game.MaxAbsReward(), game.discount(), theta, beta,
                     horizon);
}

LearnerState MakeLearnerState(const MarkovGame& game, QTable q0, Rng rng,
                              bool check_bound) {
  if (!(q0.shape() == game.shape())) {
    throw UsageError("initial Q-table shape does not match the game");
  }
  if (!q0.AllFinite()) throw UsageError("initial Q-table has non-finite entries");
  const double radius = game.MaxAbsReward() / (1.0 - game.discount());
  if (q0.SupNorm() > radius * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "precondition violated: ||Q0|| = " << q0.SupNorm()
        << " exceeds R_max / (1 - alpha) = " << radius;
    throw UsageError(msg.str());
  }
  LearnerState state{std::move(q0), {}, 0, radius, radius, check_bound,
                     std::move(rng), 0};
  state.visits.assign(game.shape().triplets(), 0);
  return state;
}

void MqlStep(const MarkovGame& game, LearnerState& state,
             const OneStepSample& sample, double beta, double val_tol) {
  CheckUnitInterval(beta, "beta");
  CheckSample(game.shape(), sample.state_i, sample.action_a, sample.action_b,
              sample.state_j);
  const std::size_t index =
      state.q.Index(sample.state_i, sample.action_a, sample.action_b);
  const double alpha = game.discount();
  const double target =
      sample.reward_1 + alpha * Val(state.q.StateMatrix(sample.state_j), val_tol);
  Commit(state, game, index, (1.0 - beta) * state.q[index] + beta * target,
         beta, 0.0);
}

void TmqlStep(const MarkovGame& game, LearnerState& state,
              const TwoStepSample& sample, double beta, double theta,
              double val_tol) {
  CheckUnitInterval(beta, "beta");
  CheckUnitInterval(theta, "theta");
  CheckSample(game.shape(), sample.state_i, sample.action_a, sample.action_b,
              sample.state_j);
  CheckSample(game.shape(), sample.state_j, sample.action_c, sample.action_d,
              sample.state_k);
  const std::size_t index =
      state.q.Index(sample.state_i, sample.action_a, sample.action_b);
  const double alpha = game.discount();
  double target =
      sample.reward_1 + alpha * Val(state.q.StateMatrix(sample.state_j), val_tol);
  // theta == 0 must reproduce the single-step update bit for bit.
  if (theta != 0.0) {
    target += alpha * theta *
              (sample.reward_2 +
               alpha * Val(state.q.StateMatrix(sample.state_k), val_tol));
  }
  Commit(state, game, index, (1.0 - beta) * state.q[index] + beta * target,
         beta, theta);
}

std::string ToString(Algorithm algorithm) {
  return algorithm == Algorithm::kMql ? "MQL" : "TMQL";
}

std::string ToString(SampleMode mode) {
  return mode == SampleMode::kRestart ? "restart" : "trajectory";
}

Algorithm ParseAlgorithm(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "mql") return Algorithm::kMql;
  if (lower == "tmql") return Algorithm::kTmql;
  throw UsageError("unknown algorithm '" + name + "' (expected MQL or TMQL)");
}

SampleMode ParseSampleMode(const std::string& name) {
  if (name == "restart") return SampleMode::kRestart;
  if (name == "trajectory") return SampleMode::kTrajectory;
  throw UsageError("unknown mode '" + name + "' (expected restart or trajectory)");
}

std::string StepTrace::ToCsv() const {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,sup_norm_delta,error\n";
  std::size_t e = 0;
  for (std::size_t n = 0; n < delta.size(); ++n) {
    out << n + 1 << ',' << delta[n] << ',';
    if (e < error_iteration.size() && error_iteration[e] == n + 1) {
      out << error[e++];
    }
    out << '\n';
  }
  return out.str();
}

EpisodeResult RunEpisode(const MarkovGame& game, const EpisodeConfig& config,
                         const BehaviorPolicy& behavior, const QTable& q0,
                         Rng rng, const ValueFunction* y_star) {
  if (config.iterations < 1) throw UsageError("iterations must be at least 1");
  if (config.error_every > 0 && y_star == nullptr) {
    throw UsageError("error trace requested without an optimal value function");
  }
  if (!(behavior.shape() == game.shape())) {
    throw UsageError("behavior policy shape does not match the game");
  }
  LearnerState state = MakeLearnerState(game, q0, std::move(rng),
                                        config.check_bound);
  const std::size_t n_states = game.n_states();
  const auto uniform_state = [&]() {
    return std::min(n_states - 1,
                    static_cast<std::size_t>(UniformDouble(state.rng) *
                                             static_cast<double>(n_states)));
  };
  state.current_state = uniform_state();

  EpisodeResult result{QTable(game.shape()), {}, 0.0, q0.SupNorm()};
  result.trace.delta.reserve(config.iterations);
  const bool two_step =
      config.algorithm == Algorithm::kTmql || config.aligned_stream;

  for (std::uint64_t n = 0; n < config.iterations; ++n) {
    if (config.mode == SampleMode::kRestart && n > 0) {
      state.current_state = uniform_state();
    }
    std::size_t index;
    double before;
    if (two_step) {
      const TwoStepSample s =
          SampleTwoStep(game, state.current_state, behavior, state.rng);
      index = state.q.Index(s.state_i, s.action_a, s.action_b);
      before = state.q[index];
      const double beta = config.step_size(state.step, state.visits[index] + 1);
      if (config.algorithm == Algorithm::kTmql) {
        TmqlStep(game, state, s, beta, config.theta(state.step), config.val_tol);
      } else {
        MqlStep(game, state, s.FirstLeg(), beta, config.val_tol);
      }
      state.current_state = s.state_k;
    } else {
      const OneStepSample s =
          SampleOneStep(game, state.current_state, behavior, state.rng);
      index = state.q.Index(s.state_i, s.action_a, s.action_b);
      before = state.q[index];
      const double beta = config.step_size(state.step, state.visits[index] + 1);
      MqlStep(game, state, s, beta, config.val_tol);
      state.current_state = s.state_j;
    }
    result.trace.delta.push_back(std::abs(state.q[index] - before));
    result.max_norm = std::max(result.max_norm, std::abs(state.q[index]));
    if (config.error_every > 0 && (n + 1) % config.error_every == 0) {
      result.trace.error_iteration.push_back(n + 1);
      result.trace.error.push_back(ValueError(*y_star, state.q, config.val_tol));
    }
  }
  result.q = std::move(state.q);
  result.bound = state.bound;
  return result;
}

}  // namespace tmql
