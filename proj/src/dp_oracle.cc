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

#include "tmql/dp_oracle.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "tmql/errors.h"
#include "tmql/io.h"

namespace tmql {
namespace {

void CheckSameShape(const GameShape& lhs, const GameShape& rhs) {
  if (!(lhs == rhs)) throw UsageError("Q-table shape does not match the game");
}

nlohmann::json ShapeJson(const GameShape& shape) {
  return {{"n_states", shape.n_states},
          {"n_actions_a", shape.n_actions_a},
          {"n_actions_b", shape.n_actions_b}};
}

}  // namespace

QTable::QTable(GameShape shape, double fill)
    : shape_(shape), values_(shape.triplets(), fill) {
  if (shape.triplets() == 0) throw UsageError("empty Q-table shape");
}

QTable::QTable(GameShape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  if (shape.triplets() == 0 || values_.size() != shape.triplets()) {
    throw UsageError("Q-table values do not match its shape");
  }
}

PayoffView QTable::StateMatrix(std::size_t i) const {
  const std::size_t block = shape_.n_actions_a * shape_.n_actions_b;
  return PayoffView(std::span<const double>(values_).subspan(i * block, block),
                    shape_.n_actions_a, shape_.n_actions_b);
}

double QTable::SupNorm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool QTable::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double SupDistance(const QTable& lhs, const QTable& rhs) {
  CheckSameShape(lhs.shape(), rhs.shape());
  double m = 0.0;
  for (std::size_t k = 0; k < lhs.values().size(); ++k) {
    m = std::max(m, std::abs(lhs[k] - rhs[k]));
  }
  return m;
}

QTable BellmanApply(const MarkovGame& game, const QTable& q, double tol) {
  CheckSameShape(game.shape(), q.shape());
  const ValueFunction next = OptimalValues(q, tol);
  const double alpha = game.discount();
  QTable out(q.shape());
  for (std::size_t i = 0; i < game.n_states(); ++i) {
    for (std::size_t a = 0; a < game.n_actions_a(); ++a) {
      for (std::size_t b = 0; b < game.n_actions_b(); ++b) {
        const auto row = game.TransitionRow(i, a, b);
        double expected = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
          expected += row[j] * next.values[j];
        }
        out(i, a, b) = game.reward(i, a, b) + alpha * expected;
      }
    }
  }
  return out;
}

double ShapleyStoppingThreshold(double discount, double tol_fixed_point) {
  if (discount <= 0.0) return tol_fixed_point;
  return tol_fixed_point * std::min(1.0, (1.0 - discount) / (2.0 * discount));
}

ShapleyResult ShapleySolve(const MarkovGame& game, double tol_fixed_point,
                           std::size_t max_sweeps, double val_tol) {
  if (!(tol_fixed_point > 0.0)) {
    throw UsageError("fixed-point tolerance must be positive");
  }
  const double threshold =
      ShapleyStoppingThreshold(game.discount(), tol_fixed_point);
  ShapleyResult result{QTable(game.shape()), 0.0, 0, {}};
  double residual = 0.0;
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    QTable next = BellmanApply(game, result.q, val_tol);
    residual = SupDistance(next, result.q);
    result.q = std::move(next);
    result.sweeps = sweep;
    result.residual_history.push_back(residual);
    if (residual <= threshold) {
      result.residual = residual;
      return result;
    }
  }
  std::ostringstream msg;
  msg << "Shapley iteration did not converge in " << max_sweeps
      << " sweeps; residual " << residual << " > " << threshold;
  throw NotConverged(msg.str(), residual);
}

ValueFunction OptimalValues(const QTable& q, double tol) {
  ValueFunction y;
  y.values.reserve(q.shape().n_states);
  for (std::size_t i = 0; i < q.shape().n_states; ++i) {
    y.values.push_back(Val(q.StateMatrix(i), tol));
  }
  return y;
}

PolicyPair ExtractPolicies(const QTable& q, double tol) {
  PolicyPair policies;
  for (std::size_t i = 0; i < q.shape().n_states; ++i) {
    MatrixGameSolution s = SolveMatrixGame(q.StateMatrix(i), tol);
    policies.player1.push_back(std::move(s.max_strategy));
    policies.player2.push_back(std::move(s.min_strategy));
  }
  return policies;
}

double ValueError(const ValueFunction& y_star, const QTable& q, double tol) {
  if (y_star.values.size() != q.shape().n_states) {
    throw UsageError("value function length does not match the Q-table");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < y_star.values.size(); ++i) {
    const double d = y_star.values[i] - Val(q.StateMatrix(i), tol);
    sum += d * d;
  }
  return std::sqrt(sum);
}

nlohmann::json QTableToJson(const QTable& q) {
  return {{"format", "tmql-q-table"},
          {"version", 1},
          {"shape", ShapeJson(q.shape())},
          {"layout", "row-major (i, a, b)"},
          {"values", q.values()}};
}

QTable QTableFromJson(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "tmql-q-table") {
    throw ParseError("not a tmql-q-table document");
  }
  const auto& s = j.contains("shape") ? j.at("shape") : nlohmann::json();
  const GameShape shape{RequireField<std::size_t>(s, "n_states"),
                        RequireField<std::size_t>(s, "n_actions_a"),
                        RequireField<std::size_t>(s, "n_actions_b")};
  auto values = RequireField<std::vector<double>>(j, "values");
  if (values.size() != shape.triplets()) {
    throw ParseError("q-table value count does not match its shape");
  }
  return QTable(shape, std::move(values));
}

nlohmann::json PoliciesToJson(const PolicyPair& policies) {
  nlohmann::json p1 = nlohmann::json::array();
  nlohmann::json p2 = nlohmann::json::array();
  for (const auto& s : policies.player1) p1.push_back(s.weights);
  for (const auto& s : policies.player2) p2.push_back(s.weights);
  return {{"player1", p1}, {"player2", p2}};
}

}  // namespace tmql
