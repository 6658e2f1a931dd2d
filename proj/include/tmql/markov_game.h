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

// Finite discounted two-player zero-sum Markov games: storage, validation,
// seeded random generation, and trajectory sampling.

#ifndef TMQL_MARKOV_GAME_H_
#define TMQL_MARKOV_GAME_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmql/matrix_game.h"

namespace tmql {

// All randomness flows through this engine. Doubles are built from the top
// 53 bits of one draw, so streams are identical across standard libraries.
using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "mt19937_64";

// Uniform on [0, 1).
double UniformDouble(Rng& rng);
// Index drawn from an (unnormalized-tolerant) probability vector by
// inverse-CDF search. Never returns an index with zero probability.
std::size_t SampleIndex(std::span<const double> probs, Rng& rng);

struct GameShape {
  std::size_t n_states = 0;
  std::size_t n_actions_a = 0;
  std::size_t n_actions_b = 0;

  std::size_t triplets() const { return n_states * n_actions_a * n_actions_b; }
  bool operator==(const GameShape&) const = default;
};

struct GeneratorConfig {
  std::size_t n_states = 10;
  std::size_t n_actions_a = 5;
  std::size_t n_actions_b = 5;
  double discount = 0.6;
  double reward_lo = -1.0;
  double reward_hi = 1.0;
  // Minimum p(i|i,a,b); 0 leaves self-loops unrestricted.
  double self_loop_min = 0.0;
  // Minimum mass on every successor; nullopt means 1e-3 / n_states.
  std::optional<double> ergodic_floor;
  std::uint64_t seed = 0;

  double EffectiveErgodicFloor() const;
  // Throws UsageError on malformed fields and ConfigInfeasible when
  // ergodic_floor * n_states + self_loop_min > 1.
  void Validate() const;

  bool operator==(const GeneratorConfig&) const = default;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);

// Immutable game (S, A, B, p, r, alpha). Transition probabilities are stored
// row-major over (i, a, b, j) and rewards over (i, a, b). The constructor only
// checks tensor sizes; use Validate() for the probabilistic invariants.
class MarkovGame {
 public:
  MarkovGame(GameShape shape, std::vector<double> transition,
             std::vector<double> reward, double discount);

  const GameShape& shape() const { return shape_; }
  std::size_t n_states() const { return shape_.n_states; }
  std::size_t n_actions_a() const { return shape_.n_actions_a; }
  std::size_t n_actions_b() const { return shape_.n_actions_b; }
  double discount() const { return discount_; }

  std::size_t TripletIndex(std::size_t i, std::size_t a, std::size_t b) const {
    return (i * shape_.n_actions_a + a) * shape_.n_actions_b + b;
  }
  std::span<const double> TransitionRow(std::size_t i, std::size_t a,
                                        std::size_t b) const {
    return std::span<const double>(transition_).subspan(
        TripletIndex(i, a, b) * shape_.n_states, shape_.n_states);
  }
  double transition(std::size_t i, std::size_t a, std::size_t b,
                    std::size_t j) const {
    return transition_[TripletIndex(i, a, b) * shape_.n_states + j];
  }
  double reward(std::size_t i, std::size_t a, std::size_t b) const {
    return reward_[TripletIndex(i, a, b)];
  }
  // Reward matrix of state i, rows indexed by player 1's action.
  PayoffView RewardMatrix(std::size_t i) const;

  const std::vector<double>& transition_tensor() const { return transition_; }
  const std::vector<double>& reward_tensor() const { return reward_; }

  // R_max = max |r(i,a,b)|
  double MaxAbsReward() const;
  // min over (i,a,b) of p(i|i,a,b)
  double MinSelfLoop() const;

  // Generator settings echoed into the game file, if any.
  const std::optional<GeneratorConfig>& provenance() const {
    return provenance_;
  }
  void set_provenance(GeneratorConfig config) { provenance_ = config; }

 private:
  GameShape shape_;
  std::vector<double> transition_;
  std::vector<double> reward_;
  double discount_;
  std::optional<GeneratorConfig> provenance_;
};

struct ValidationIssue {
  enum class Kind { kTransitionRow, kDiscount, kReward };
  Kind kind;
  // Offending triplet for row and reward issues.
  std::size_t state = 0;
  std::size_t action_a = 0;
  std::size_t action_b = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string Summary() const;
};

// Row sums must be 1 within this tolerance.
inline constexpr double kRowSumTolerance = 1e-12;

ValidationReport Validate(const MarkovGame& game);

// Deterministic in the config: for each (i,a,b) in row-major order, draws
// n_states Exp(1) weights, then all rewards in the same order.
MarkovGame GenerateRandom(const GeneratorConfig& config);

// Per-state independent action distributions for both players.
class BehaviorPolicy {
 public:
  // Throws DegenerateBehavior if any action has zero probability, and
  // UsageError on malformed distributions.
  BehaviorPolicy(GameShape shape, std::vector<std::vector<double>> player1,
                 std::vector<std::vector<double>> player2);

  static BehaviorPolicy Uniform(const GameShape& shape);

  const GameShape& shape() const { return shape_; }
  std::span<const double> Player1(std::size_t state) const {
    return player1_[state];
  }
  std::span<const double> Player2(std::size_t state) const {
    return player2_[state];
  }

 private:
  GameShape shape_;
  std::vector<std::vector<double>> player1_;
  std::vector<std::vector<double>> player2_;
};

struct Transition {
  std::size_t next_state;
  double reward;
};

Transition SampleTransition(const MarkovGame& game, std::size_t i,
                            std::size_t a, std::size_t b, Rng& rng);

// The (i, a, b, r(i,a,b), j) prefix of a two-step sample.
struct OneStepSample {
  std::size_t state_i;
  std::size_t action_a;
  std::size_t action_b;
  double reward_1;
  std::size_t state_j;
};

struct TwoStepSample {
  std::size_t state_i;
  std::size_t action_a;
  std::size_t action_b;
  double reward_1;
  std::size_t state_j;
  std::size_t action_c;
  std::size_t action_d;
  double reward_2;
  std::size_t state_k;

  OneStepSample FirstLeg() const {
    return {state_i, action_a, action_b, reward_1, state_j};
  }
  bool operator==(const TwoStepSample&) const = default;
};

OneStepSample SampleOneStep(const MarkovGame& game, std::size_t i,
                            const BehaviorPolicy& behavior, Rng& rng);
TwoStepSample SampleTwoStep(const MarkovGame& game, std::size_t i,
                            const BehaviorPolicy& behavior, Rng& rng);

// JSON game file. Loading re-validates and throws InvalidGame on failure.
nlohmann::json GameToJson(const MarkovGame& game);
MarkovGame GameFromJson(const nlohmann::json& j);
void SaveGame(const MarkovGame& game, const std::string& path);
MarkovGame LoadGame(const std::string& path);

}  // namespace tmql

#endif  // TMQL_MARKOV_GAME_H_
