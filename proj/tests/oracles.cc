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

#include "oracles.h"

#include <algorithm>
#include <cmath>

namespace tmql::testing {
namespace {

// Solves A z = rhs in place (A is n x n row-major). False if singular.
bool Solve(std::vector<double> a, std::vector<double>& rhs, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (std::abs(a[pivot * n + col]) < 1e-12) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(rhs[col], rhs[pivot]);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t r = 0; r < n; ++r) rhs[r] /= a[r * n + r];
  return true;
}

void Subsets(std::size_t n, std::size_t k, std::vector<std::vector<std::size_t>>& out) {
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + k, true);
  do {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i) if (mask[i]) s.push_back(i);
    out.push_back(s);
  } while (std::prev_permutation(mask.begin(), mask.end()));
}

// Strategy over `support` making the opponent indifferent on `other`.
// transpose=false: row player mixing, columns indifferent.
bool Indifference(const Dense& m, const std::vector<std::size_t>& support,
                  const std::vector<std::size_t>& other, bool transpose,
                  std::vector<double>& weights, double& value) {
  const std::size_t k = support.size();
  const std::size_t n = k + 1;
  std::vector<double> a(n * n, 0.0), rhs(n, 0.0);
  for (std::size_t e = 0; e < k; ++e) {
    for (std::size_t s = 0; s < k; ++s) {
      a[e * n + s] = transpose ? m(other[e], support[s]) : m(support[s], other[e]);
    }
    a[e * n + k] = -1.0;
  }
  for (std::size_t s = 0; s < k; ++s) a[k * n + s] = 1.0;
  rhs[k] = 1.0;
  if (!Solve(a, rhs, n)) return false;
  weights.assign(transpose ? m.cols : m.rows, 0.0);
  for (std::size_t s = 0; s < k; ++s) weights[support[s]] = rhs[s];
  value = rhs[k];
  return true;
}

}  // namespace

double TwoByTwoValue(double m11, double m12, double m21, double m22) {
  const double maximin = std::max(std::min(m11, m12), std::min(m21, m22));
  const double minimax = std::min(std::max(m11, m21), std::max(m12, m22));
  if (maximin == minimax) return maximin;
  return (m11 * m22 - m12 * m21) / (m11 + m22 - m12 - m21);
}

std::optional<EnumeratedEquilibrium> SupportEnumeration(const Dense& m,
                                                        double eps) {
  const std::size_t kmax = std::min(m.rows, m.cols);
  for (std::size_t k = 1; k <= kmax; ++k) {
    std::vector<std::vector<std::size_t>> row_sets, col_sets;
    Subsets(m.rows, k, row_sets);
    Subsets(m.cols, k, col_sets);
    for (const auto& rows : row_sets) {
      for (const auto& cols : col_sets) {
        std::vector<double> x, y;
        double vx, vy;
        if (!Indifference(m, rows, cols, false, x, vx)) continue;
        if (!Indifference(m, cols, rows, true, y, vy)) continue;
        if (std::any_of(x.begin(), x.end(), [&](double w) { return w < -eps; }) ||
            std::any_of(y.begin(), y.end(), [&](double w) { return w < -eps; })) {
          continue;
        }
        bool ok = std::abs(vx - vy) <= eps;
        for (std::size_t b = 0; ok && b < m.cols; ++b) {
          double p = 0.0;
          for (std::size_t a = 0; a < m.rows; ++a) p += x[a] * m(a, b);
          ok = p >= vx - eps;
        }
        for (std::size_t a = 0; ok && a < m.rows; ++a) {
          double p = 0.0;
          for (std::size_t b = 0; b < m.cols; ++b) p += m(a, b) * y[b];
          ok = p <= vy + eps;
        }
        if (ok) return EnumeratedEquilibrium{vx, x, y};
      }
    }
  }
  return std::nullopt;
}

std::vector<double> BellmanBySums(const MarkovGame& game,
                                  const std::vector<double>& state_values) {
  std::vector<double> out;
  for (std::size_t i = 0; i < game.n_states(); ++i) {
    for (std::size_t a = 0; a < game.n_actions_a(); ++a) {
      for (std::size_t b = 0; b < game.n_actions_b(); ++b) {
        double sum = 0.0;
        for (std::size_t j = 0; j < game.n_states(); ++j) {
          sum += game.transition(i, a, b, j) * state_values[j];
        }
        out.push_back(game.reward(i, a, b) + game.discount() * sum);
      }
    }
  }
  return out;
}

double DirectProductBound(double r_max, double alpha,
                          double (*theta)(std::uint64_t),
                          double (*beta)(std::uint64_t), std::uint64_t horizon) {
  double product = 1.0;
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    product *= 1.0 + beta(n) * theta(n) * alpha * alpha;
  }
  return r_max / (1.0 - alpha) * (1.0 + alpha * theta(0)) * product;
}

Dense RandomMatrix(std::size_t rows, std::size_t cols, Rng& rng, double lo,
                   double hi) {
  Dense d{rows, cols, std::vector<double>(rows * cols)};
  for (double& v : d.v) v = lo + (hi - lo) * UniformDouble(rng);
  return d;
}

}  // namespace tmql::testing
