// Copyright 2026 The Folio Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>

#include "folio/transport.hpp"

namespace folio {

double interval_spacing(const FiniteMMSpace& grid) {
  if (!grid.coords || grid.coords->kind != CoordKind::interval || grid.coords->data.cols() != 1)
    throw GeometryError("interval grid required");
  const auto x = grid.coords->data.col(0);
  const Index n = x.size();
  if (n < 2) throw GeometryError("interval grid needs at least two nodes");
  const double h = (x(n - 1) - x(0)) / static_cast<double>(n - 1);
  if (!(h > 0)) throw GeometryError("interval grid must be increasing");
  for (Index i = 1; i < n; ++i)
    if (std::abs((x(i) - x(i - 1)) - h) > 1e-9 * h) throw GeometryError("interval grid is not uniform");
  return h;
}

namespace {

// Walks the common refinement of the two cumulative-mass partitions of
// (0, 1]. For each piece, visit(mass, q0a, q0b, q1a, q1b) receives the
// endpoints of both quantile functions of the cell-uniform lifts.
template <typename Visit>
void walk_quantiles(const Eigen::Ref<const Vec>& x, double h, const ProbVector& mu0, const ProbVector& mu1,
                    Visit&& visit) {
  const Index n = x.size();
  auto next_cell = [&](const ProbVector& mu, Index i) {
    while (i < n && !(mu(i) > 0)) ++i;
    return i;
  };
  Index i = next_cell(mu0, 0), j = next_cell(mu1, 0);
  double used0 = 0, used1 = 0;  // mass already consumed inside the current cells
  while (i < n && j < n) {
    const double left0 = mu0(i) - used0, left1 = mu1(j) - used1;
    const double w = std::min(left0, left1);
    if (w > 0) {
      const double a0 = x(i) - 0.5 * h + h * used0 / mu0(i);
      const double b0 = x(i) - 0.5 * h + h * std::min(1.0, (used0 + w) / mu0(i));
      const double a1 = x(j) - 0.5 * h + h * used1 / mu1(j);
      const double b1 = x(j) - 0.5 * h + h * std::min(1.0, (used1 + w) / mu1(j));
      visit(w, a0, b0, a1, b1);
    }
    used0 += w;
    used1 += w;
    if (left0 <= left1) {
      i = next_cell(mu0, i + 1);
      used0 = 0;
    }
    if (left1 <= left0) {
      j = next_cell(mu1, j + 1);
      used1 = 0;
    }
  }
}

void check_pair(const FiniteMMSpace& grid, const ProbVector& mu0, const ProbVector& mu1) {
  if (mu0.size() != grid.size() || mu1.size() != grid.size())
    throw StructuralError("interval measures must live on the grid");
  if ((mu0.array() < 0).any() || (mu1.array() < 0).any()) throw DomainError("measures must be non-negative");
  if (std::abs(mu0.sum() - mu1.sum()) > kProbTol) throw UnbalancedError("interval measures differ in mass");
}

}  // namespace

ProbVector displacement_interpolate_1d(const FiniteMMSpace& grid, const ProbVector& mu0, const ProbVector& mu1,
                                       double t) {
  const double h = interval_spacing(grid);
  check_pair(grid, mu0, mu1);
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("displacement_interpolate_1d: t must lie in [0, 1]");
  if (t == 0.0) return mu0;
  if (t == 1.0) return mu1;

  const auto x = grid.coords->data.col(0);
  const Index n = grid.size();
  const double origin = x(0) - 0.5 * h;
  ProbVector out = ProbVector::Zero(n);

  auto deposit = [&](double mass, double lo, double hi) {
    const double s0 = (lo - origin) / h, s1 = (hi - origin) / h;
    if (!(s1 - s0 > 1e-14)) {
      const Index k = std::clamp<Index>(static_cast<Index>(std::floor(0.5 * (s0 + s1))), 0, n - 1);
      out(k) += mass;
      return;
    }
    const Index k0 = std::clamp<Index>(static_cast<Index>(std::floor(s0)), 0, n - 1);
    const Index k1 = std::clamp<Index>(static_cast<Index>(std::floor(s1)), 0, n - 1);
    const double density = mass / (s1 - s0);
    for (Index k = k0; k <= k1; ++k) {
      const double lo_k = (k == k0) ? s0 : static_cast<double>(k);
      const double hi_k = (k == k1) ? s1 : static_cast<double>(k + 1);
      if (hi_k > lo_k) out(k) += density * (hi_k - lo_k);
    }
  };

  walk_quantiles(x, h, mu0, mu1, [&](double w, double a0, double b0, double a1, double b1) {
    deposit(w, (1 - t) * a0 + t * a1, (1 - t) * b0 + t * b1);
  });

  const double target = (1 - t) * mu0.sum() + t * mu1.sum();
  const double got = out.sum();
  if (got > 0) out *= target / got;
  return out;
}

double cell_wasserstein2_1d(const FiniteMMSpace& grid, const ProbVector& mu0, const ProbVector& mu1) {
  const double h = interval_spacing(grid);
  check_pair(grid, mu0, mu1);
  const auto x = grid.coords->data.col(0);
  double acc = 0;
  walk_quantiles(x, h, mu0, mu1, [&](double w, double a0, double b0, double a1, double b1) {
    const double alpha = a0 - a1, beta = b0 - b1;
    acc += w * (alpha * alpha + alpha * beta + beta * beta) / 3.0;
  });
  return std::sqrt(std::max(acc, 0.0));
}

}  // namespace folio
