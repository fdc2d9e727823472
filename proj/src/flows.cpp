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

#include "folio/flows.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "folio/parallel.hpp"
#include "folio/transport.hpp"

namespace folio {

namespace {

constexpr double kNegativeTol = 1e-12;

Vec floored(const Vec& rho, std::size_t* clipped) {
  Vec r = rho;
  for (Index i = 0; i < r.size(); ++i)
    if (r(i) < kDensityFloor) {
      r(i) = kDensityFloor;
      if (clipped) ++*clipped;
    }
  return r;
}

void check_times(const std::vector<double>& times) {
  if (times.empty()) throw DomainError("heat_flow: no times requested");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0) || !std::isfinite(times[k])) throw DomainError("heat_flow: times must be finite and >= 0");
    if (k > 0 && times[k] < times[k - 1]) throw DomainError("heat_flow: times must be ascending");
  }
}

void check_positive(const Vec& rho, double t) {
  const double low = rho.minCoeff();
  if (low < -kNegativeTol)
    throw StabilityError("heat_flow: density " + std::to_string(low) + " at t = " + std::to_string(t));
}

std::vector<DensityVector> dense_flow(const GraphOperator& g, const DensityVector& rho0,
                                      const std::vector<double>& times) {
  SpectrumOptions so;
  so.vectors = true;
  so.dense_limit = std::numeric_limits<Index>::max();
  const Spectrum s = laplacian_spectrum(g, so);
  const Mat& v = *s.eigenvectors;
  const Vec coeff = v.transpose() * g.vertex_measure.cwiseProduct(rho0);
  std::vector<DensityVector> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t == 0) {
      out.push_back(rho0);
      continue;
    }
    const Vec decay = (-t * s.eigenvalues.array()).exp().matrix();
    out.push_back(v * decay.cwiseProduct(coeff));
    check_positive(out.back(), t);
  }
  return out;
}

class CrankNicolson {
 public:
  explicit CrankNicolson(const GraphOperator& g) : m_(g.vertex_measure), k_(g.stiffness()) {}

  // One step of (M + dt/2 K) x' = (M - dt/2 K) x.
  Vec step(const Vec& x, double dt) {
    if (dt != dt_) factor(dt);
    const Vec rhs = m_.cwiseProduct(x) - 0.5 * dt * (k_ * x);
    return solver_.solve(rhs);
  }

 private:
  void factor(double dt) {
    SpMat a = 0.5 * dt * k_;
    for (Index i = 0; i < m_.size(); ++i) a.coeffRef(i, i) += m_(i);
    solver_.compute(a);
    if (solver_.info() != Eigen::Success) throw StabilityError("heat_flow: factorization failed");
    dt_ = dt;
  }

  Vec m_;
  SpMat k_;
  double dt_ = -1;
  Eigen::SimplicialLDLT<SpMat> solver_;
};

std::vector<DensityVector> stepped_flow(const GraphOperator& g, const DensityVector& rho0,
                                        const std::vector<double>& times, double step_tol) {
  const SpMat k = g.stiffness();
  const Vec inv_m = g.vertex_measure.cwiseInverse();
  auto apply_l = [&](const Vec& x) -> Vec { return inv_m.cwiseProduct(k * x); };
  // Local error of one step is about dt^3 / 12 * |L^3 rho|.
  const double third = apply_l(apply_l(apply_l(rho0))).lpNorm<Eigen::Infinity>();
  const double horizon = times.back();
  double dt_base = third > 0 ? std::cbrt(12.0 * step_tol / third) : horizon;
  dt_base = std::max(dt_base, horizon * 1e-6);

  CrankNicolson cn(g);
  std::vector<DensityVector> out;
  out.reserve(times.size());
  Vec x = rho0;
  double now = 0;
  for (double target : times) {
    while (now < target) {
      double dt = std::min(dt_base, target - now);
      Vec next;
      for (int halving = 0;; ++halving) {
        next = cn.step(x, dt);
        if (next.minCoeff() >= -kNegativeTol) break;
        if (halving == 40) check_positive(next, now + dt);
        dt *= 0.5;
      }
      x = std::move(next);
      now = (target - now <= dt) ? target : now + dt;
    }
    out.push_back(target == 0 ? rho0 : x);
  }
  return out;
}

}  // namespace

double density_entropy(const GraphOperator& g, const DensityVector& rho, std::size_t* clipped) {
  const Vec r = floored(rho, clipped);
  return g.vertex_measure.dot(r.cwiseProduct(r.array().log().matrix()));
}

double entropy_slope(const GraphOperator& g, const DensityVector& rho, std::size_t* clipped) {
  const Vec root = floored(rho, clipped).cwiseSqrt();
  return std::sqrt(std::max(0.0, 8.0 * dirichlet_energy_q(g, root, 2.0)));
}

FlowTrajectory heat_flow(const GraphOperator& g, const DensityVector& rho0, const std::vector<double>& times,
                         const HeatFlowOptions& opts) {
  if (rho0.size() != g.size()) throw StructuralError("heat_flow: density size does not match graph");
  check_times(times);
  if (std::abs(rho0.dot(g.vertex_measure) - 1.0) > kDensityTol)
    throw DomainError("heat_flow: initial density does not integrate to 1");
  if (rho0.minCoeff() < -kNegativeTol) throw DomainError("heat_flow: negative initial density");
  if (!is_connected(g.conductance)) throw DomainError("heat_flow: graph is disconnected");

  FlowTrajectory traj;
  traj.times = times;
  traj.densities = g.size() < opts.dense_limit ? dense_flow(g, rho0, times)
                                               : stepped_flow(g, rho0, times, opts.step_tol);
  if (opts.record_traces) {
    for (const auto& rho : traj.densities) {
      traj.entropy.push_back(density_entropy(g, rho, &traj.clipped));
      traj.slope.push_back(entropy_slope(g, rho, &traj.clipped));
      traj.mass.push_back(rho.dot(g.vertex_measure));
    }
  }
  return traj;
}

double slope_lower_bound_probe(const FiniteMMSpace& space, const ProbVector& mu,
                               const std::vector<ProbVector>& candidates, double k) {
  require_probability(mu, space.size(), "slope_lower_bound_probe: mu");
  const double ent_mu = relative_entropy(mu, space);
  double best = 0;
  for (const auto& nu : candidates) {
    require_probability(nu, space.size(), "slope_lower_bound_probe: candidate");
    const double w = wasserstein(space, mu, nu, 2.0);
    if (!(w > 0)) continue;
    best = std::max(best, (ent_mu - relative_entropy(nu, space)) / w + 0.5 * k * w);
  }
  return best;
}

EdeReport ede_audit(const GraphOperator& g, const FlowTrajectory& traj) {
  const std::size_t n = traj.times.size();
  if (traj.densities.size() != n) throw StructuralError("ede_audit: trajectory is inconsistent");
  std::vector<double> ent = traj.entropy, slope = traj.slope;
  if (ent.size() != n || slope.size() != n) {
    ent.clear();
    slope.clear();
    for (const auto& rho : traj.densities) {
      ent.push_back(density_entropy(g, rho));
      slope.push_back(entropy_slope(g, rho));
    }
  }
  // Drops at the rounding level of the entropy count as zero.
  const double floor = n > 0 ? 1e-13 * std::max(1.0, std::abs(ent[0])) : 0.0;
  auto ratio = [floor](double drop, double diss) {
    const double scale = std::max(std::abs(drop), std::abs(diss));
    return scale > floor ? std::abs(drop - diss) / scale : 0.0;
  };

  EdeReport report;
  for (std::size_t k = 1; k < n; ++k) {
    EdeInterval iv;
    iv.s = traj.times[k - 1];
    iv.t = traj.times[k];
    iv.entropy_drop = ent[k - 1] - ent[k];
    iv.dissipation = 0.5 * (iv.t - iv.s) * (slope[k - 1] * slope[k - 1] + slope[k] * slope[k]);
    iv.mismatch = ratio(iv.entropy_drop, iv.dissipation);
    // Rounding allows drops of a few ulps of the entropy itself.
    if (iv.entropy_drop < -1e-13 * std::max(1.0, std::abs(ent[k]))) report.entropy_non_increasing = false;
    report.total_drop += iv.entropy_drop;
    report.total_dissipation += iv.dissipation;
    report.max_interval_mismatch = std::max(report.max_interval_mismatch, iv.mismatch);
    report.intervals.push_back(iv);
  }
  report.mismatch = ratio(report.total_drop, report.total_dissipation);
  return report;
}

ProbVector random_smooth_measure(const FiniteMMSpace& grid, std::uint64_t seed) {
  interval_spacing(grid);
  const Vec x = grid.coords->data.col(0);
  const double lo = x.minCoeff(), len = x.maxCoeff() - lo;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double centre = lo + len * (0.3 + 0.4 * unit(rng));
  const double width = len * (0.05 + 0.1 * unit(rng));
  std::array<double, 3> amp{}, phase{};
  for (int k = 0; k < 3; ++k) {
    amp[k] = 0.6 * unit(rng) - 0.3;
    phase[k] = 2 * std::numbers::pi * unit(rng);
  }
  Vec logp(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double z = (x(i) - centre) / width;
    double v = -0.5 * z * z + std::log(grid.weight(i));
    for (int k = 0; k < 3; ++k) v += amp[k] * std::cos((k + 1) * std::numbers::pi * (x(i) - lo) / len + phase[k]);
    logp(i) = v;
  }
  ProbVector p = (logp.array() - logp.maxCoeff()).exp().matrix();
  return p / p.sum();
}

double convexity_defect(const FiniteMMSpace& grid, const ProbVector& mu0, const ProbVector& mu1, double t,
                        double k) {
  const ProbVector mid = displacement_interpolate_1d(grid, mu0, mu1, t);
  const double w = cell_wasserstein2_1d(grid, mu0, mu1);
  return relative_entropy(mid, grid) - (1 - t) * relative_entropy(mu0, grid) - t * relative_entropy(mu1, grid) +
         0.5 * k * t * (1 - t) * w * w;
}

ConvexityReport k_convexity_audit(const FiniteMMSpace& grid, double k, int trials, std::uint64_t seed,
                                  double slack_constant) {
  if (trials <= 0) throw DomainError("k_convexity_audit: trials must be positive");
  ConvexityReport report;
  report.k = k;
  report.h = interval_spacing(grid);
  report.slack = slack_constant * report.h;
  report.trials.resize(static_cast<std::size_t>(trials));
  constexpr std::array<double, 3> kTimes{0.25, 0.5, 0.75};
  parallel_for(report.trials.size(), [&](std::size_t r) {
    const ProbVector mu0 = random_smooth_measure(grid, splitmix64(seed + 2 * r));
    const ProbVector mu1 = random_smooth_measure(grid, splitmix64(seed + 2 * r + 1));
    ConvexityTrial& trial = report.trials[r];
    trial.w2 = cell_wasserstein2_1d(grid, mu0, mu1);
    trial.max_defect = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < kTimes.size(); ++j) {
      trial.defects[j] = convexity_defect(grid, mu0, mu1, kTimes[j], k);
      trial.max_defect = std::max(trial.max_defect, trial.defects[j]);
    }
  });
  report.max_defect = -std::numeric_limits<double>::infinity();
  for (const auto& trial : report.trials) report.max_defect = std::max(report.max_defect, trial.max_defect);
  report.passed = report.max_defect <= report.slack;
  return report;
}

}  // namespace folio
