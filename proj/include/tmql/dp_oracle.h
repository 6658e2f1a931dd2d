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

// Ground truth for Markov games: the minimax Bellman operator
//   (HQ)(i,a,b) = r(i,a,b) + alpha * sum_j p(j|i,a,b) val[Q(j)],
// Shapley value iteration to its fixed point Q*, and the derived value
// function and optimal stationary policies.

#ifndef TMQL_DP_ORACLE_H_
#define TMQL_DP_ORACLE_H_

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmql/markov_game.h"
#include "tmql/matrix_game.h"

namespace tmql {

class QTable {
 public:
  explicit QTable(GameShape shape, double fill = 0.0);
  QTable(GameShape shape, std::vector<double> values);

  const GameShape& shape() const { return shape_; }
  std::size_t Index(std::size_t i, std::size_t a, std::size_t b) const {
    return (i * shape_.n_actions_a + a) * shape_.n_actions_b + b;
  }
  double& operator()(std::size_t i, std::size_t a, std::size_t b) {
    return values_[Index(i, a, b)];
  }
  double operator()(std::size_t i, std::size_t a, std::size_t b) const {
    return values_[Index(i, a, b)];
  }
  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  // Q(i) as an |A| x |B| payoff matrix.
  PayoffView StateMatrix(std::size_t i) const;

  const std::vector<double>& values() const { return values_; }
  double SupNorm() const;
  bool AllFinite() const;

  bool operator==(const QTable&) const = default;

 private:
  GameShape shape_;
  std::vector<double> values_;
};

double SupDistance(const QTable& lhs, const QTable& rhs);

struct ValueFunction {
  std::vector<double> values;
  bool operator==(const ValueFunction&) const = default;
};

struct PolicyPair {
  std::vector<MixedStrategy> player1;  // per state, over A
  std::vector<MixedStrategy> player2;  // per state, over B
};

// Input Q is left untouched. Throws UsageError on shape mismatch.
QTable BellmanApply(const MarkovGame& game, const QTable& q,
                    double tol = kDefaultTolerance);

struct ShapleyResult {
  QTable q;
  // ||HQ_n - Q_n|| at the accepted sweep; the returned table is HQ_n.
  double residual = 0.0;
  std::size_t sweeps = 0;
  std::vector<double> residual_history;
};

inline constexpr double kDefaultOracleTolerance = 1e-8;

// Value iteration from Q_0 = 0. Stops once
//   ||HQ - Q|| <= tol_fixed_point * min(1, (1 - alpha) / (2 alpha)),
// which puts the returned table within tol_fixed_point of Q* in sup-norm.
// Throws NotConverged (carrying the residual) after max_sweeps.
ShapleyResult ShapleySolve(const MarkovGame& game,
                           double tol_fixed_point = kDefaultOracleTolerance,
                           std::size_t max_sweeps = 10000,
                           double val_tol = 1e-10);

// Residual threshold used by ShapleySolve.
double ShapleyStoppingThreshold(double discount, double tol_fixed_point);

ValueFunction OptimalValues(const QTable& q, double tol = kDefaultTolerance);
PolicyPair ExtractPolicies(const QTable& q, double tol = kDefaultTolerance);

// Euclidean norm of y_star - val[Q(.)].
double ValueError(const ValueFunction& y_star, const QTable& q,
                  double tol = kDefaultTolerance);

nlohmann::json QTableToJson(const QTable& q);
QTable QTableFromJson(const nlohmann::json& j);
nlohmann::json PoliciesToJson(const PolicyPair& policies);

}  // namespace tmql

#endif  // TMQL_DP_ORACLE_H_
