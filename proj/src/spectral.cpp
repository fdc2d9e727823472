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

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>

#include "folio/parallel.hpp"
#include "folio/spectral.hpp"

namespace folio {

Vec local_slope(const GraphOperator& g, const Vec& f) {
  if (f.size() != g.size()) throw StructuralError("local_slope: function size does not match the graph");
  Vec s2 = Vec::Zero(g.size());
  for (Index k = 0; k < g.conductance.outerSize(); ++k)
    for (SpMat::InnerIterator it(g.conductance, k); it; ++it) {
      const double diff = f(it.row()) - f(it.col());
      s2(it.row()) += it.value() * diff * diff;
    }
  return (0.5 * s2.cwiseQuotient(g.vertex_measure)).cwiseSqrt();
}

double dirichlet_energy_q(const GraphOperator& g, const Vec& f, double q) {
  if (!(q > 1.0)) throw DomainError("dirichlet_energy_q: q must exceed 1");
  const Vec s = local_slope(g, f);
  if (q == 2.0) return 0.5 * g.vertex_measure.dot(s.cwiseAbs2());
  return g.vertex_measure.dot(s.array().pow(q).matrix()) / q;
}

Vec dirichlet_energy_gradient(const GraphOperator& g, const Vec& f, double q) {
  if (!(q > 1.0)) throw DomainError("dirichlet_energy_gradient: q must exceed 1");
  const Vec s = local_slope(g, f);
  // s^(q-2), with 0 where the slope vanishes (every difference there is zero).
  Vec sp(g.size());
  for (Index i = 0; i < g.size(); ++i) sp(i) = s(i) > 0 ? std::pow(s(i), q - 2.0) : 0.0;
  Vec grad = Vec::Zero(g.size());
  for (Index k = 0; k < g.conductance.outerSize(); ++k)
    for (SpMat::InnerIterator it(g.conductance, k); it; ++it) {
      const Index i = it.row(), j = it.col();
      grad(i) += 0.5 * it.value() * (f(i) - f(j)) * (sp(i) + sp(j));
    }
  return grad;
}

namespace {

SpMat similarity(const GraphOperator& g) {
  const Vec inv_sqrt = g.vertex_measure.cwiseSqrt().cwiseInverse();
  SpMat s = inv_sqrt.asDiagonal() * g.stiffness() * inv_sqrt.asDiagonal();
  return 0.5 * (s + SpMat(s.transpose()));
}

std::vector<Index> cluster_sizes(const Vec& values, double tol) {
  std::vector<Index> out(static_cast<std::size_t>(values.size()), 1);
  Index start = 0;
  for (Index i = 1; i <= values.size(); ++i) {
    const bool split = i == values.size() ||
                       values(i) - values(i - 1) > tol * std::max(1.0, std::abs(values(i)));
    if (split) {
      for (Index k = start; k < i; ++k) out[static_cast<std::size_t>(k)] = i - start;
      start = i;
    }
  }
  return out;
}

Spectrum dense_spectrum(const GraphOperator& g, const SpectrumOptions& opts) {
  const Mat s = Mat(similarity(g));
  Eigen::SelfAdjointEigenSolver<Mat> solver(s, opts.vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("laplacian_spectrum: dense eigensolver failed", 0.0);
  const Index n = g.size();
  const Index k = opts.count < 0 ? n : std::min(opts.count, n);
  Spectrum out;
  out.eigenvalues = solver.eigenvalues().head(k);
  out.complete = k == n;
  if (opts.vectors) {
    const Vec inv_sqrt = g.vertex_measure.cwiseSqrt().cwiseInverse();
    out.eigenvectors = inv_sqrt.asDiagonal() * solver.eigenvectors().leftCols(k);
  }
  return out;
}

// Shift-invert block subspace iteration with Rayleigh-Ritz on the sparse
// similarity matrix; converges to the `count` smallest eigenpairs.
Spectrum iterative_spectrum(const GraphOperator& g, const SpectrumOptions& opts) {
  const Index n = g.size();
  if (opts.count < 0) throw DomainError("laplacian_spectrum: iterative path needs an eigenvalue count");
  const Index k = std::min(opts.count, n);
  const Index block = std::min(n, k + std::max<Index>(10, k));
  const SpMat s = similarity(g);
  const double shift = 1e-6 * s.diagonal().mean();
  SpMat shifted = s;
  for (Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<SpMat> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw ConvergenceError("laplacian_spectrum: factorization failed", 0.0);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Mat x(n, block);
  for (Index j = 0; j < block; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = normal(rng);

  Vec theta;
  Mat ritz;
  double worst = std::numeric_limits<double>::infinity();
  for (long it = 0; it < opts.max_iter; ++it) {
    Mat y = ldlt.solve(x);
    Eigen::HouseholderQR<Mat> qr(y);
    const Mat q = qr.householderQ() * Mat::Identity(n, block);
    const Mat sq = s * q;
    const Mat h = q.transpose() * sq;
    Eigen::SelfAdjointEigenSolver<Mat> small(0.5 * (h + h.transpose()));
    theta = small.eigenvalues();
    ritz = q * small.eigenvectors();
    const Mat res = sq * small.eigenvectors() - ritz * theta.asDiagonal();
    worst = 0;
    for (Index j = 0; j < k; ++j) worst = std::max(worst, res.col(j).norm() / std::max(1.0, std::abs(theta(j))));
    x = ritz;
    if (worst <= opts.residual_tol) break;
  }
  if (worst > opts.residual_tol)
    throw ConvergenceError("laplacian_spectrum: subspace iteration did not converge", worst);

  Spectrum out;
  out.eigenvalues = theta.head(k);
  out.complete = k == n;
  if (opts.vectors) out.eigenvectors = g.vertex_measure.cwiseSqrt().cwiseInverse().asDiagonal() * ritz.leftCols(k);
  return out;
}

}  // namespace

Spectrum laplacian_spectrum(const GraphOperator& g, const SpectrumOptions& opts) {
  if (g.size() == 0) throw StructuralError("laplacian_spectrum: empty graph");
  Spectrum out = g.size() < opts.dense_limit ? dense_spectrum(g, opts) : iterative_spectrum(g, opts);
  // The constant mode is exact; clamp rounding noise around it.
  for (Index i = 0; i < out.eigenvalues.size(); ++i)
    if (out.eigenvalues(i) < 0) out.eigenvalues(i) = 0.0;
  out.multiplicities = cluster_sizes(out.eigenvalues, opts.cluster_tol);
  return out;
}

std::pair<double, double> centered_lq_deviation(const Vec& f, const Vec& m, double q) {
  if (q == 2.0) {
    const double a = f.dot(m) / m.sum();
    return {m.dot((f.array() - a).square().matrix()), a};
  }
  // The derivative of a -> sum m |f - a|^q is increasing; bisect its root.
  auto slope = [&](double a) {
    double acc = 0;
    for (Index i = 0; i < f.size(); ++i) {
      const double d = f(i) - a;
      acc -= m(i) * std::copysign(std::pow(std::abs(d), q - 1.0), d);
    }
    return acc;
  };
  double lo = f.minCoeff(), hi = f.maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi) + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0 ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);
  return {m.dot((f.array() - a).abs().pow(q).matrix()), a};
}

double gap_ratio(const GraphOperator& g, const Vec& f, double q) {
  const auto [c, a] = centered_lq_deviation(f, g.vertex_measure, q);
  (void)a;
  if (!(c > 0)) throw DomainError("gap_ratio: f is constant");
  return q * dirichlet_energy_q(g, f, q) / c;
}

namespace {

struct RestartOutcome {
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
  Vec f;
};

// Ratio and its gradient at f; f is assumed normalized (c_q(f) = 1).
double ratio_and_gradient(const GraphOperator& g, const Vec& f, double q, Vec& grad) {
  const Vec& m = g.vertex_measure;
  const auto [c, a] = centered_lq_deviation(f, m, q);
  const double e = dirichlet_energy_q(g, f, q);
  const Vec ge = dirichlet_energy_gradient(g, f, q);
  Vec gc(f.size());
  for (Index i = 0; i < f.size(); ++i) {
    const double d = f(i) - a;
    gc(i) = q * m(i) * std::copysign(std::pow(std::abs(d), q - 1.0), d);
  }
  grad = q * (ge * c - e * gc) / (c * c);
  return q * e / c;
}

Vec normalized(const Vec& f, const Vec& m, double q) {
  const auto [c, a] = centered_lq_deviation(f, m, q);
  return (f.array() - a).matrix() / std::pow(c, 1.0 / q);
}

RestartOutcome descend(const GraphOperator& g, double q, std::uint64_t seed, const GapOptions& opts) {
  const Vec& m = g.vertex_measure;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vec f(g.size());
  for (Index i = 0; i < f.size(); ++i) f(i) = normal(rng);
  f.array() -= f.dot(m) / m.sum();
  f = normalized(f, m, q);

  RestartOutcome out;
  Vec grad, trial_grad;
  double value = ratio_and_gradient(g, f, q, grad);
  double step = 1.0;
  int stalls = 0;
  for (long it = 0; it < opts.max_iter; ++it) {
    // Steepest descent in L^2(m): direction -M^{-1} grad.
    const Vec dir = -grad.cwiseQuotient(m);
    const double slope = grad.dot(dir);
    const double gnorm = std::sqrt(-slope);
    if (gnorm <= opts.grad_tol * std::max(1.0, value)) {
      out.converged = true;
      break;
    }
    double t = step;
    Vec trial;
    double trial_value = value;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = normalized(f + t * dir, m, q);
      trial_value = ratio_and_gradient(g, trial, q, trial_grad);
      if (trial_value <= value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      out.converged = gnorm <= 1e-6 * std::max(1.0, value);
      break;
    }
    // Barzilai-Borwein proposal for the next trial step.
    const Vec sdiff = trial - f;
    const Vec ydiff = trial_grad - grad;
    const double sy = sdiff.dot(ydiff);
    step = sy > 0 ? sdiff.cwiseProduct(m).dot(sdiff) / sy : 2.0 * t;
    step = std::clamp(step, 1e-12, 1e12);
    stalls = (value - trial_value <= 1e-16 * std::abs(value)) ? stalls + 1 : 0;
    f = trial;
    grad = trial_grad;
    value = trial_value;
    if (stalls >= 50) {
      out.converged = true;
      break;
    }
  }
  out.value = value;
  out.f = f;
  return out;
}

}  // namespace

GapResult spectral_gap_q(const GraphOperator& g, double q, const GapOptions& opts) {
  if (!(q > 1.0)) throw DomainError("spectral_gap_q: q must exceed 1");
  if (g.size() < 2) throw DomainError("spectral_gap_q: graph needs two vertices");
  GapResult result;
  if (q == 2.0) {
    SpectrumOptions so;
    so.count = 2;
    so.vectors = true;
    so.seed = opts.seed;
    const Spectrum s = laplacian_spectrum(g, so);
    result.value = s.eigenvalues(1);
    result.minimizer = s.eigenvectors->col(1);
    result.converged_restarts = 1;
    return result;
  }
  const int restarts = std::max(1, opts.restarts);
  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(restarts));
  parallel_for(outcomes.size(), [&](std::size_t r) {
    outcomes[r] = descend(g, q, splitmix64(opts.seed + r), opts);
  });
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t best = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const double v = outcomes[r].value;
    result.restart_values.push_back(v);
    if (outcomes[r].converged) ++result.converged_restarts;
    if (v < lo) {
      lo = v;
      best = r;
    }
    hi = std::max(hi, v);
  }
  if (result.converged_restarts == 0 || !std::isfinite(lo))
    throw OptimizationError("spectral_gap_q: every restart stagnated before converging (best " +
                            std::to_string(lo) + ", spread " + std::to_string(hi - lo) + ")");
  result.value = lo;
  result.spread = hi - lo;
  result.minimizer = outcomes[best].f;
  return result;
}

ContainmentReport containment_check(const Spectrum& total, const Spectrum& quotient, double tol) {
  ContainmentReport report;
  report.tol = tol;
  if (total.eigenvalues.size() == 0) throw DomainError("containment_check: empty total spectrum");
  const double top = total.eigenvalues.maxCoeff();
  for (Index i = 0; i < quotient.eigenvalues.size(); ++i) {
    const double lam = quotient.eigenvalues(i);
    if (!total.complete && lam > top + tol) {
      ++report.skipped;
      continue;
    }
    Index near = 0;
    (total.eigenvalues.array() - lam).abs().minCoeff(&near);
    ContainmentRow row{lam, total.eigenvalues(near), std::abs(total.eigenvalues(near) - lam)};
    report.max_gap = std::max(report.max_gap, row.gap);
    report.rows.push_back(row);
  }
  report.passed = report.max_gap <= tol;
  return report;
}

}  // namespace folio
