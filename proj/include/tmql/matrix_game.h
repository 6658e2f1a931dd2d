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

// Exact values and optimal mixed strategies of finite two-player zero-sum
// matrix games. The row player maximizes, the column player minimizes.

#ifndef TMQL_MATRIX_GAME_H_
#define TMQL_MATRIX_GAME_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tmql {

inline constexpr double kDefaultTolerance = 1e-9;

// Non-owning row-major view of a payoff matrix.
class PayoffView {
 public:
  PayoffView(std::span<const double> entries, std::size_t rows,
             std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t row, std::size_t col) const {
    return entries_[row * cols_ + col];
  }
  std::span<const double> entries() const { return entries_; }

  // max |m_ab|
  double SupNorm() const;

 private:
  std::span<const double> entries_;
  std::size_t rows_;
  std::size_t cols_;
};

class PayoffMatrix {
 public:
  PayoffMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  PayoffMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  PayoffMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t row, std::size_t col) {
    return entries_[row * cols_ + col];
  }
  double operator()(std::size_t row, std::size_t col) const {
    return entries_[row * cols_ + col];
  }
  const std::vector<double>& entries() const { return entries_; }

  PayoffView view() const { return PayoffView(entries_, rows_, cols_); }
  operator PayoffView() const { return view(); }  // NOLINT

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

struct MixedStrategy {
  std::vector<double> weights;

  // Weights in [0,1] summing to one within `tol`.
  bool IsDistribution(double tol = kDefaultTolerance) const;
  bool operator==(const MixedStrategy&) const = default;
};

struct MatrixGameSolution {
  double value = 0.0;
  MixedStrategy max_strategy;  // over rows
  MixedStrategy min_strategy;  // over columns
  // Minimizer's guaranteed ceiling minus maximizer's guaranteed floor.
  double certificate_gap = 0.0;
};

// Solves the game by a dense primal simplex on the positively shifted
// normal form
//   maximize sum(w)  s.t.  (M + s) w <= 1,  w >= 0,
// whose optimum is 1 / (val[M] + s). The column strategy is w / sum(w); the
// row strategy is read from the simplex multipliers of the same tableau.
//
// Throws NonFiniteEntry for NaN/inf entries, UsageError for tol <= 0, and
// SolverFailure when the pivot cap is hit or the returned strategies fail to
// certify the value within tol * max(1, ||M||).
MatrixGameSolution SolveMatrixGame(PayoffView m,
                                   double tol = kDefaultTolerance);

// SolveMatrixGame(m, tol).value
double Val(PayoffView m, double tol = kDefaultTolerance);

// Worst payoff of the row strategy x against any pure column.
double SecurityFloor(PayoffView m, std::span<const double> x);
// Worst payoff (for the minimizer) of column strategy y against any pure row.
double SecurityCeiling(PayoffView m, std::span<const double> y);

}  // namespace tmql

#endif  // TMQL_MATRIX_GAME_H_
