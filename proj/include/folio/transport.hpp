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

#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "folio/core.hpp"

namespace folio {

struct FoliationBundle;

enum class PlanKind { exact, entropic };

/// Coupling of two probability vectors together with its transport cost.
struct TransportPlan {
  Mat pi;
  /// sum pi(i,j) * dist(i,j)^exponent
  double cost = 0;
  double exponent = 1;
  PlanKind kind = PlanKind::exact;
  /// Regularization strength of an entropic plan; zero for exact plans.
  double epsilon = 0;
  /// <pi, C> + epsilon * sum pi (log pi - 1), entropic plans only.
  double entropic_objective = 0;
  /// Largest absolute deviation of row/column sums from the marginals.
  double marginal_residual = 0;
  long iterations = 0;

  /// cost^(1/exponent), i.e. W_p when the plan is optimal.
  double distance() const { return std::pow(std::max(cost, 0.0), 1.0 / exponent); }
};

/// Atoms lighter than this are pruned before solving.
inline constexpr double kPruneMass = 1e-15;

/// Exact optimal plan for the cost d^p (network simplex on the support).
TransportPlan solve_ot(const FiniteMMSpace& space, const ProbVector& mu, const ProbVector& nu, double p);

/// Exact plan for an explicit ground-cost matrix (rows: mu, columns: nu).
/// The returned cost is <pi, cost>, exponent is left at 1.
TransportPlan solve_ot_matrix(const Mat& cost, const ProbVector& mu, const ProbVector& nu);

struct SinkhornOptions {
  double epsilon = 1e-2;
  long max_iter = 100000;
  /// Marginal residual (max norm) at which iteration stops.
  double tol = 1e-9;
};

/// Log-domain Sinkhorn iterations followed by a rounding step onto the
/// transportation polytope, so the returned plan is exactly feasible and its
/// raw cost upper-bounds the optimum. Throws ConvergenceError on max_iter.
TransportPlan sinkhorn(const FiniteMMSpace& space, const ProbVector& mu, const ProbVector& nu, double p,
                       const SinkhornOptions& opts);

/// W_p(mu, nu) through solve_ot.
double wasserstein(const FiniteMMSpace& space, const ProbVector& mu, const ProbVector& nu, double p);

/// W_p on an interval grid via the monotone coupling; agrees with solve_ot on
/// the line. Throws GeometryError unless the space carries interval coords.
double wasserstein_1d(const FiniteMMSpace& space, const ProbVector& mu, const ProbVector& nu, double p);

/// (p_* mu)[y] = sum over p(i) = y of mu[i].
ProbVector pushforward(const Partition& map, const ProbVector& mu);

/// Quantile (monotone) interpolation between mu0 and mu1 at time t on a
/// uniform interval grid. Each atom is spread uniformly over its grid cell,
/// the continuous McCann interpolant is formed and the result is binned back
/// onto the cells by length. t = 0 and t = 1 return the endpoints verbatim.
ProbVector displacement_interpolate_1d(const FiniteMMSpace& grid, const ProbVector& mu0, const ProbVector& mu1,
                                       double t);

/// W_2 between the cell-uniform lifts of two grid measures; the geodesic that
/// displacement_interpolate_1d follows has exactly this length.
double cell_wasserstein2_1d(const FiniteMMSpace& grid, const ProbVector& mu0, const ProbVector& mu1);

/// Uniform spacing of an interval grid; throws GeometryError otherwise.
double interval_spacing(const FiniteMMSpace& grid);

struct PlanRealization {
  bool ok = true;
  /// Worst support entry (row, column in the total space) and its defect.
  Index worst_i = -1;
  Index worst_j = -1;
  double defect = 0;
};

/// Checks that every support entry of a plan between the fibers over y0 and
/// y1 joins points exactly d*(y0, y1) apart. Entries lighter than mass_tol
/// are ignored. Throws DomainError when the plan marginals are not the fiber
/// measures.
PlanRealization check_plan_realizes_quotient(const TransportPlan& plan, const FiniteMMSpace& space,
                                             const FoliationBundle& bundle, Index y0, Index y1, double tol,
                                             double mass_tol = 1e-12);

}  // namespace folio
