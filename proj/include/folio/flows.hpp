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

#include <array>
#include <cstdint>
#include <vector>

#include "folio/core.hpp"
#include "folio/spectral.hpp"

namespace folio {

/// Floor applied to densities before square roots and logarithms.
inline constexpr double kDensityFloor = 1e-14;

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<DensityVector> densities;
  std::vector<double> entropy;
  std::vector<double> slope;
  std::vector<double> mass;
  /// Number of density entries raised to kDensityFloor while evaluating traces.
  std::size_t clipped = 0;
};

struct HeatFlowOptions {
  /// Graphs of at least this size are stepped with Crank-Nicolson.
  Index dense_limit = 3000;
  /// Target local truncation error per Crank-Nicolson step.
  double step_tol = 1e-8;
  bool record_traces = true;
};

/// rho_t = exp(-t L) rho_0 at each requested time (ascending, starting at 0
/// or later). Dense graphs use the spectral decomposition; large graphs use
/// Crank-Nicolson steps, halving the step whenever a density drops below
/// -1e-12. Throws StabilityError if halving cannot restore positivity.
FlowTrajectory heat_flow(const GraphOperator& g, const DensityVector& rho0, const std::vector<double>& times,
                         const HeatFlowOptions& opts = {});

/// Ent(rho m) = sum m_i rho_i log rho_i, floored at kDensityFloor.
double density_entropy(const GraphOperator& g, const DensityVector& rho, std::size_t* clipped = nullptr);

/// Descending slope of the entropy, sqrt(8 Ch_2(sqrt(rho))).
double entropy_slope(const GraphOperator& g, const DensityVector& rho, std::size_t* clipped = nullptr);

/// One-sided check of the slope: max over candidate measures nu of
///   ((Ent(mu) - Ent(nu)) / W_2(mu, nu) + K/2 W_2(mu, nu))^+,
/// with W_2 computed exactly on the space.
double slope_lower_bound_probe(const FiniteMMSpace& space, const ProbVector& mu,
                               const std::vector<ProbVector>& candidates, double k);

struct EdeInterval {
  double s = 0, t = 0;
  double entropy_drop = 0;
  double dissipation = 0;
  double mismatch = 0;
};

struct EdeReport {
  std::vector<EdeInterval> intervals;
  double total_drop = 0;
  double total_dissipation = 0;
  /// |drop - dissipation| / max(|drop|, |dissipation|) over the whole
  /// trajectory; 0 when both are at the rounding level of the entropy.
  double mismatch = 0;
  double max_interval_mismatch = 0;
  bool entropy_non_increasing = true;
};

/// Compares Ent(rho_s) - Ent(rho_t) with the trapezoidal integral of the
/// squared slope between consecutive recorded times.
EdeReport ede_audit(const GraphOperator& g, const FlowTrajectory& traj);

struct ConvexityTrial {
  double w2 = 0;
  std::array<double, 3> defects{};
  double max_defect = 0;
};

struct ConvexityReport {
  double k = 0;
  double h = 0;
  double slack = 0;
  double max_defect = 0;
  bool passed = false;
  std::vector<ConvexityTrial> trials;
};

/// Random smooth probability measure on an interval grid: the grid weight
/// tilted by a Gaussian bump with a low-frequency cosine perturbation.
ProbVector random_smooth_measure(const FiniteMMSpace& grid, std::uint64_t seed);

/// K-convexity defect at t of the displacement interpolation:
///   Ent(mu_t) - (1-t) Ent(mu_0) - t Ent(mu_1) + K/2 t(1-t) W_2^2.
double convexity_defect(const FiniteMMSpace& grid, const ProbVector& mu0, const ProbVector& mu1, double t,
                        double k);

/// For each trial draws two smooth measures, evaluates the defect at
/// t = 1/4, 1/2, 3/4 and passes iff the maximum stays below slack_constant*h.
ConvexityReport k_convexity_audit(const FiniteMMSpace& grid, double k, int trials, std::uint64_t seed,
                                  double slack_constant = 5.0);

}  // namespace folio
