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

#include "tmql/matrix_game.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tmql/errors.h"

namespace tmql {
namespace {

constexpr double kPivotEps = 1e-11;

// Dantzig pivots allowed per (rows + cols) before switching to Bland's rule,
// and the absolute pivot cap per (rows + cols).
constexpr std::size_t kDantzigBudget = 50;
constexpr std::size_t kPivotCap = 2000;

void CheckFinite(PayoffView m) {
  for (std::size_t k = 0; k < m.entries().size(); ++k) {
    if (!std::isfinite(m.entries()[k])) {
      throw NonFiniteEntry("payoff entry (" + std::to_string(k / m.cols()) +
                           "," + std::to_string(k % m.cols()) +
                           ") is not finite");
    }
  }
}

// Clamps round-off negatives and rescales onto the simplex.
void Normalize(std::vector<double>& w) {
  double total = 0.0;
  for (double& v : w) {
    v = std::max(v, 0.0);
    total += v;
  }
  if (total <= 0.0) {
    throw SolverFailure("simplex returned an empty strategy");
  }
  for (double& v : w) v /= total;
}

// Dense tableau for: maximize sum(w) s.t. A w <= 1, w >= 0, with A > 0.
// Reused across calls on the same thread to keep the learner hot loop free
// of allocations.
struct Tableau {
  std::size_t rows = 0;
  std::size_t cols = 0;   // structural variables
  std::size_t width = 0;  // cols + rows slacks + rhs
  std::vector<double> cells;
  std::vector<double> reduced;  // reduced costs; last entry is -objective
  std::vector<std::size_t> basis;

  double& at(std::size_t r, std::size_t c) { return cells[r * width + c]; }
  double rhs(std::size_t r) const { return cells[r * width + width - 1]; }

  void Reset(PayoffView m, double shift) {
    rows = m.rows();
    cols = m.cols();
    width = cols + rows + 1;
    cells.assign(rows * width, 0.0);
    reduced.assign(width, 0.0);
    basis.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) at(r, c) = m(r, c) + shift;
      at(r, cols + r) = 1.0;
      at(r, width - 1) = 1.0;
      basis[r] = cols + r;
    }
    std::fill(reduced.begin(), reduced.begin() + cols, 1.0);
  }

  void Pivot(std::size_t row, std::size_t col) {
    double* prow = &cells[row * width];
    const double inv = 1.0 / prow[col];
    for (std::size_t c = 0; c < width; ++c) prow[c] *= inv;
    prow[col] = 1.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == row) continue;
      double* other = &cells[r * width];
      const double f = other[col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) other[c] -= f * prow[c];
      other[col] = 0.0;
    }
    const double f = reduced[col];
    for (std::size_t c = 0; c < width; ++c) reduced[c] -= f * prow[c];
    reduced[col] = 0.0;
    basis[row] = col;
  }

  std::size_t EnteringDantzig() const {
    std::size_t best = width;
    double best_cost = kPivotEps;
    for (std::size_t c = 0; c + 1 < width; ++c) {
      if (reduced[c] > best_cost) {
        best_cost = reduced[c];
        best = c;
      }
    }
    return best;
  }

  std::size_t EnteringBland() const {
    for (std::size_t c = 0; c + 1 < width; ++c) {
      if (reduced[c] > kPivotEps) return c;
    }
    return width;
  }

  // Minimum-ratio row; ties go to the smallest basic variable index.
  std::size_t Leaving(std::size_t col) {
    std::size_t best = rows;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = at(r, col);
      if (a <= kPivotEps) continue;
      const double ratio = rhs(r) / a;
      if (best == rows) {
        best = r;
        best_ratio = ratio;
        continue;
      }
      const double band = 1e-14 * std::max(1.0, best_ratio);
      if (ratio < best_ratio - band ||
          (ratio <= best_ratio + band && basis[r] < basis[best])) {
        best = r;
        best_ratio = std::min(ratio, best_ratio);
      }
    }
    return best;
  }
};

}  // namespace

PayoffView::PayoffView(std::span<const double> entries, std::size_t rows,
                       std::size_t cols)
    : entries_(entries), rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) {
    throw UsageError("payoff matrix must have at least one row and column");
  }
  if (entries.size() != rows * cols) {
    throw UsageError("payoff entry count does not match its shape");
  }
}

double PayoffView::SupNorm() const {
  double norm = 0.0;
  for (double v : entries_) norm = std::max(norm, std::abs(v));
  return norm;
}

PayoffMatrix::PayoffMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    throw UsageError("payoff matrix must have at least one row and column");
  }
}

PayoffMatrix::PayoffMatrix(std::size_t rows, std::size_t cols,
                           std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows == 0 || cols == 0 || entries_.size() != rows * cols) {
    throw UsageError("payoff matrix shape does not match its entries");
  }
}

PayoffMatrix::PayoffMatrix(
    std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  if (rows_ == 0 || cols_ == 0) {
    throw UsageError("payoff matrix must have at least one row and column");
  }
  entries_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw UsageError("ragged payoff matrix");
    entries_.insert(entries_.end(), row.begin(), row.end());
  }
}

bool MixedStrategy::IsDistribution(double tol) const {
  if (weights.empty()) return false;
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) return false;
    total += w;
  }
  return std::abs(total - 1.0) <= tol;
}

double SecurityFloor(PayoffView m, std::span<const double> x) {
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < m.cols(); ++b) {
    double payoff = 0.0;
    for (std::size_t a = 0; a < m.rows(); ++a) payoff += x[a] * m(a, b);
    floor = std::min(floor, payoff);
  }
  return floor;
}

double SecurityCeiling(PayoffView m, std::span<const double> y) {
  double ceiling = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m.rows(); ++a) {
    double payoff = 0.0;
    for (std::size_t b = 0; b < m.cols(); ++b) payoff += m(a, b) * y[b];
    ceiling = std::max(ceiling, payoff);
  }
  return ceiling;
}

MatrixGameSolution SolveMatrixGame(PayoffView m, double tol) {
  if (!(tol > 0.0)) throw UsageError("solver tolerance must be positive");
  CheckFinite(m);

  const auto [lo, hi] = std::minmax_element(m.entries().begin(),
                                            m.entries().end());
  // Every shifted entry is >= 1, so the LP is bounded and the origin is a
  // feasible starting basis.
  const double shift = 1.0 - *lo;
  (void)hi;

  thread_local Tableau t;
  t.Reset(m, shift);

  const std::size_t scale = m.rows() + m.cols();
  const std::size_t dantzig_budget = kDantzigBudget * scale;
  const std::size_t cap = kPivotCap * scale;
  std::size_t pivots = 0;
  while (true) {
    const std::size_t col = pivots < dantzig_budget ? t.EnteringDantzig()
                                                    : t.EnteringBland();
    if (col == t.width) break;
    const std::size_t row = t.Leaving(col);
    if (row == t.rows) {
      throw SolverFailure("matrix game LP reported unbounded");
    }
    t.Pivot(row, col);
    if (++pivots > cap) {
      throw SolverFailure("simplex pivot cap reached (" +
                          std::to_string(cap) + " pivots)");
    }
  }

  MatrixGameSolution solution;
  std::vector<double>& y = solution.min_strategy.weights;
  std::vector<double>& x = solution.max_strategy.weights;
  y.assign(m.cols(), 0.0);
  x.assign(m.rows(), 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < t.rows; ++r) {
    if (t.basis[r] < t.cols) {
      y[t.basis[r]] = t.rhs(r);
      total += t.rhs(r);
    }
  }
  if (!(total > 0.0)) throw SolverFailure("degenerate simplex optimum");
  for (std::size_t a = 0; a < m.rows(); ++a) x[a] = -t.reduced[t.cols + a];
  Normalize(y);
  Normalize(x);

  solution.value = 1.0 / total - shift;

  const double floor = SecurityFloor(m, x);
  const double ceiling = SecurityCeiling(m, y);
  solution.certificate_gap = std::max(0.0, ceiling - floor);
  const double slack = tol * std::max(1.0, m.SupNorm());
  if (solution.certificate_gap > slack || floor < solution.value - slack ||
      ceiling > solution.value + slack) {
    throw SolverFailure("matrix game certificate failed: gap " +
                        std::to_string(solution.certificate_gap));
  }
  return solution;
}

double Val(PayoffView m, double tol) { return SolveMatrixGame(m, tol).value; }

}  // namespace tmql
