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

#include "tmql/markov_game.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "tmql/errors.h"
#include "tmql/io.h"

namespace tmql {
namespace {

constexpr const char* kGameFormat = "tmql-markov-game";
constexpr int kFormatVersion = 1;

void CheckShape(const GameShape& shape) {
  if (shape.n_states == 0 || shape.n_actions_a == 0 ||
      shape.n_actions_b == 0) {
    throw UsageError("game needs at least one state and one action per player");
  }
}

std::vector<double> CheckedDistribution(std::vector<double> probs,
                                        const char* who) {
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw UsageError(std::string(who) + " has a negative or non-finite probability");
    }
    if (p == 0.0) {
      throw DegenerateBehavior(std::string(who) +
                               " assigns zero probability to an action");
    }
    total += p;
  }
  if (probs.empty() || std::abs(total - 1.0) > 1e-9) {
    throw UsageError(std::string(who) + " does not sum to one");
  }
  return probs;
}

}  // namespace

double UniformDouble(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t SampleIndex(std::span<const double> probs, Rng& rng) {
  const double u = UniformDouble(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    cumulative += probs[k];
    last_positive = k;
    if (u < cumulative) return k;
  }
  // Only reachable when the row sums to slightly less than one.
  return last_positive;
}

double GeneratorConfig::EffectiveErgodicFloor() const {
  if (ergodic_floor) return *ergodic_floor;
  return n_states > 0 ? 1e-3 / static_cast<double>(n_states) : 0.0;
}

void GeneratorConfig::Validate() const {
  CheckShape({n_states, n_actions_a, n_actions_b});
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw UsageError("discount must lie in [0, 1)");
  }
  if (!std::isfinite(reward_lo) || !std::isfinite(reward_hi) ||
      reward_lo > reward_hi) {
    throw UsageError("reward_range must be a finite interval [lo, hi]");
  }
  const double floor = EffectiveErgodicFloor();
  if (!(floor >= 0.0) || !(self_loop_min >= 0.0) || self_loop_min > 1.0) {
    throw UsageError("ergodic_floor and self_loop_min must be in [0, 1]");
  }
  if (floor * static_cast<double>(n_states) + self_loop_min > 1.0) {
    std::ostringstream msg;
    msg << "ConfigInfeasible: ergodic_floor * n_states + self_loop_min = "
        << floor * static_cast<double>(n_states) + self_loop_min
        << " exceeds 1";
    throw ConfigInfeasible(msg.str());
  }
}

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = nlohmann::json{
      {"n_states", c.n_states},
      {"n_actions_a", c.n_actions_a},
      {"n_actions_b", c.n_actions_b},
      {"discount", c.discount},
      {"reward_range", {c.reward_lo, c.reward_hi}},
      {"self_loop_min", c.self_loop_min},
      {"ergodic_floor", c.ergodic_floor ? nlohmann::json(*c.ergodic_floor)
                                        : nlohmann::json(nullptr)},
      {"seed", c.seed},
  };
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  if (!j.is_object()) throw ParseError("generator config must be an object");
  try {
    GeneratorConfig d;
    c.n_states = j.value("n_states", d.n_states);
    c.n_actions_a = j.value("n_actions_a", d.n_actions_a);
    c.n_actions_b = j.value("n_actions_b", d.n_actions_b);
    c.discount = j.value("discount", d.discount);
    if (j.contains("reward_range")) {
      const auto range = j.at("reward_range").get<std::vector<double>>();
      if (range.size() != 2) throw ParseError("reward_range needs two values");
      c.reward_lo = range[0];
      c.reward_hi = range[1];
    } else {
      c.reward_lo = d.reward_lo;
      c.reward_hi = d.reward_hi;
    }
    c.self_loop_min = j.value("self_loop_min", d.self_loop_min);
    if (j.contains("ergodic_floor") && !j.at("ergodic_floor").is_null()) {
      c.ergodic_floor = j.at("ergodic_floor").get<double>();
    } else {
      c.ergodic_floor.reset();
    }
    c.seed = j.value("seed", d.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("generator config: ") + e.what());
  }
}

MarkovGame::MarkovGame(GameShape shape, std::vector<double> transition,
                       std::vector<double> reward, double discount)
    : shape_(shape),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      discount_(discount) {
  CheckShape(shape_);
  if (transition_.size() != shape_.triplets() * shape_.n_states) {
    throw UsageError("transition tensor size does not match the game shape");
  }
  if (reward_.size() != shape_.triplets()) {
    throw UsageError("reward tensor size does not match the game shape");
  }
}

PayoffView MarkovGame::RewardMatrix(std::size_t i) const {
  const std::size_t block = shape_.n_actions_a * shape_.n_actions_b;
  return PayoffView(std::span<const double>(reward_).subspan(i * block, block),
                    shape_.n_actions_a, shape_.n_actions_b);
}

double MarkovGame::MaxAbsReward() const {
  double m = 0.0;
  for (double r : reward_) m = std::max(m, std::abs(r));
  return m;
}

double MarkovGame::MinSelfLoop() const {
  double m = 1.0;
  for (std::size_t i = 0; i < n_states(); ++i) {
    for (std::size_t a = 0; a < n_actions_a(); ++a) {
      for (std::size_t b = 0; b < n_actions_b(); ++b) {
        m = std::min(m, transition(i, a, b, i));
      }
    }
  }
  return m;
}

std::string ValidationReport::Summary() const {
  if (ok()) return "valid";
  std::ostringstream out;
  out << issues.size() << " issue(s):";
  for (const auto& issue : issues) out << "\n  " << issue.message;
  return out.str();
}

ValidationReport Validate(const MarkovGame& game) {
  ValidationReport report;
  if (!(game.discount() >= 0.0 && game.discount() < 1.0)) {
    std::ostringstream msg;
    msg << "discount " << game.discount() << " outside [0, 1)";
    report.issues.push_back(
        {ValidationIssue::Kind::kDiscount, 0, 0, 0, msg.str()});
  }
  for (std::size_t i = 0; i < game.n_states(); ++i) {
    for (std::size_t a = 0; a < game.n_actions_a(); ++a) {
      for (std::size_t b = 0; b < game.n_actions_b(); ++b) {
        const auto row = game.TransitionRow(i, a, b);
        double total = 0.0;
        bool negative = false;
        for (double p : row) {
          if (!(p >= 0.0)) negative = true;  // also catches NaN
          total += p;
        }
        if (negative || !(std::abs(total - 1.0) <= kRowSumTolerance)) {
          std::ostringstream msg;
          msg << "transition row (" << i << "," << a << "," << b
              << ") sums to " << total
              << (negative ? " and has a negative entry" : "");
          report.issues.push_back(
              {ValidationIssue::Kind::kTransitionRow, i, a, b, msg.str()});
        }
        if (!std::isfinite(game.reward(i, a, b))) {
          std::ostringstream msg;
          msg << "reward (" << i << "," << a << "," << b << ") is not finite";
          report.issues.push_back(
              {ValidationIssue::Kind::kReward, i, a, b, msg.str()});
        }
      }
    }
  }
  return report;
}

MarkovGame GenerateRandom(const GeneratorConfig& config) {
  config.Validate();
  const GameShape shape{config.n_states, config.n_actions_a,
                        config.n_actions_b};
  const std::size_t n = shape.n_states;
  const double floor = config.EffectiveErgodicFloor();
  const double free_mass =
      1.0 - floor * static_cast<double>(n) - config.self_loop_min;

  Rng rng(config.seed);
  std::vector<double> transition(shape.triplets() * n);
  std::vector<double> weights(n);
  for (std::size_t t = 0; t < shape.triplets(); ++t) {
    const std::size_t i = t / (shape.n_actions_a * shape.n_actions_b);
    double total = 0.0;
    for (double& w : weights) {
      w = -std::log1p(-UniformDouble(rng));
      total += w;
    }
    double* row = &transition[t * n];
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = free_mass * (weights[j] / total) + floor;
    }
    row[i] += config.self_loop_min;
  }

  std::vector<double> reward(shape.triplets());
  const double span = config.reward_hi - config.reward_lo;
  for (double& r : reward) r = config.reward_lo + span * UniformDouble(rng);

  MarkovGame game(shape, std::move(transition), std::move(reward),
                  config.discount);
  game.set_provenance(config);
  return game;
}

BehaviorPolicy::BehaviorPolicy(GameShape shape,
                               std::vector<std::vector<double>> player1,
                               std::vector<std::vector<double>> player2)
    : shape_(shape) {
  CheckShape(shape_);
  if (player1.size() != shape.n_states || player2.size() != shape.n_states) {
    throw UsageError("behavior policy needs one distribution per state");
  }
  player1_.reserve(shape.n_states);
  player2_.reserve(shape.n_states);
  for (std::size_t i = 0; i < shape.n_states; ++i) {
    if (player1[i].size() != shape.n_actions_a ||
        player2[i].size() != shape.n_actions_b) {
      throw UsageError("behavior distribution has the wrong action count");
    }
    player1_.push_back(CheckedDistribution(std::move(player1[i]), "player 1"));
    player2_.push_back(CheckedDistribution(std::move(player2[i]), "player 2"));
  }
}

BehaviorPolicy BehaviorPolicy::Uniform(const GameShape& shape) {
  CheckShape(shape);
  return BehaviorPolicy(
      shape,
      std::vector<std::vector<double>>(
          shape.n_states,
          std::vector<double>(shape.n_actions_a,
                              1.0 / static_cast<double>(shape.n_actions_a))),
      std::vector<std::vector<double>>(
          shape.n_states,
          std::vector<double>(shape.n_actions_b,
                              1.0 / static_cast<double>(shape.n_actions_b))));
}

Transition SampleTransition(const MarkovGame& game, std::size_t i,
                            std::size_t a, std::size_t b, Rng& rng) {
  return {SampleIndex(game.TransitionRow(i, a, b), rng), game.reward(i, a, b)};
}

OneStepSample SampleOneStep(const MarkovGame& game, std::size_t i,
                            const BehaviorPolicy& behavior, Rng& rng) {
  if (!(behavior.shape() == game.shape())) {
    throw UsageError("behavior policy shape does not match the game");
  }
  const std::size_t a = SampleIndex(behavior.Player1(i), rng);
  const std::size_t b = SampleIndex(behavior.Player2(i), rng);
  const Transition step = SampleTransition(game, i, a, b, rng);
  return {i, a, b, step.reward, step.next_state};
}

TwoStepSample SampleTwoStep(const MarkovGame& game, std::size_t i,
                            const BehaviorPolicy& behavior, Rng& rng) {
  const OneStepSample first = SampleOneStep(game, i, behavior, rng);
  const OneStepSample second = SampleOneStep(game, first.state_j, behavior, rng);
  return {first.state_i,   first.action_a,  first.action_b,
          first.reward_1,  first.state_j,   second.action_a,
          second.action_b, second.reward_1, second.state_j};
}

nlohmann::json GameToJson(const MarkovGame& game) {
  nlohmann::json j;
  j["format"] = kGameFormat;
  j["version"] = kFormatVersion;
  j["shape"] = {{"n_states", game.n_states()},
                {"n_actions_a", game.n_actions_a()},
                {"n_actions_b", game.n_actions_b()}};
  j["layout"] = {{"transition", "row-major (i, a, b, j)"},
                 {"reward", "row-major (i, a, b)"}};
  j["discount"] = game.discount();
  j["transition"] = game.transition_tensor();
  j["reward"] = game.reward_tensor();
  if (game.provenance()) {
    j["provenance"] = {
        {"prng", kRngName},
        {"seeding",
         "engine seeded with config.seed; per (i,a,b) row-major: n_states "
         "Exp(1) weights from -log1p(-u), u = (draw >> 11) * 2^-53; then "
         "rewards lo + (hi - lo) * u in the same order"},
        {"generator", *game.provenance()},
    };
  } else {
    j["provenance"] = nullptr;
  }
  return j;
}

MarkovGame GameFromJson(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != kGameFormat) {
    throw ParseError(std::string("not a ") + kGameFormat + " document");
  }
  const auto& shape_json = j.contains("shape") ? j.at("shape") : nlohmann::json();
  const GameShape shape{RequireField<std::size_t>(shape_json, "n_states"),
                        RequireField<std::size_t>(shape_json, "n_actions_a"),
                        RequireField<std::size_t>(shape_json, "n_actions_b")};
  MarkovGame game(shape, RequireField<std::vector<double>>(j, "transition"),
                  RequireField<std::vector<double>>(j, "reward"),
                  RequireField<double>(j, "discount"));
  if (j.contains("provenance") && j.at("provenance").is_object() &&
      j.at("provenance").contains("generator")) {
    game.set_provenance(j.at("provenance").at("generator").get<GeneratorConfig>());
  }
  const ValidationReport report = Validate(game);
  if (!report.ok()) throw InvalidGame("game failed validation: " + report.Summary());
  return game;
}

void SaveGame(const MarkovGame& game, const std::string& path) {
  WriteJsonFile(path, GameToJson(game));
}

MarkovGame LoadGame(const std::string& path) {
  return GameFromJson(ReadJsonFile(path));
}

}  // namespace tmql
