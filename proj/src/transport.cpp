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

#include "folio/transport.hpp"

#include <algorithm>
#include <numeric>

#include "folio/foliation.hpp"
#include "network_simplex.hpp"

namespace folio {

namespace {

void check_marginals(const ProbVector& mu, const ProbVector& nu, Index n, const char* who) {
  if (mu.size() != n || nu.size() != n)
    throw StructuralError(std::string(who) + ": marginals must live on the space");
  if (!mu.allFinite() || !nu.allFinite() || (mu.array() < 0).any() || (nu.array() < 0).any())
    throw DomainError(std::string(who) + ": marginals must be finite and non-negative");
  const double gap = std::abs(mu.sum() - nu.sum());
  if (gap > kProbTol)
    throw UnbalancedError(std::string(who) + ": source and target masses differ by " + std::to_string(gap));
}

std::vector<Index> support_of(const ProbVector& p) {
  std::vector<Index> s;
  for (Index i = 0; i < p.size(); ++i)
    if (p(i) >= kPruneMass) s.push_back(i);
  return s;
}

double powered(double d, double p) {
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

Vec gather(const ProbVector& p, const std::vector<Index>& idx) {
  Vec out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Index>(k)) = p(idx[k]);
  return out;
}

double marginal_residual(const Mat& pi, const ProbVector& mu, const ProbVector& nu) {
  const double r = (pi.rowwise().sum() - mu).cwiseAbs().maxCoeff();
  const double c = (pi.colwise().sum().transpose() - nu).cwiseAbs().maxCoeff();
  return std::max(r, c);
}

double log_sum_exp(const Eigen::Ref<const Vec>& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace

TransportPlan solve_ot_matrix(const Mat& cost, const ProbVector& mu, const ProbVector& nu) {
  if (cost.rows() != mu.size() || cost.cols() != nu.size())
    throw StructuralError("solve_ot: cost matrix shape does not match marginals");
  if (!mu.allFinite() || !nu.allFinite() || (mu.array() < 0).any() || (nu.array() < 0).any())
    throw DomainError("solve_ot: marginals must be finite and non-negative");
  const double gap = std::abs(mu.sum() - nu.sum());
  if (gap > kProbTol) throw UnbalancedError("solve_ot: source and target masses differ by " + std::to_string(gap));

  const auto rows = support_of(mu);
  const auto cols = support_of(nu);
  TransportPlan plan;
  plan.pi = Mat::Zero(mu.size(), nu.size());
  plan.kind = PlanKind::exact;
  if (rows.empty() || cols.empty()) return plan;

  detail::RowMat sub(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      sub(static_cast<Index>(a), static_cast<Index>(b)) = cost(rows[a], cols[b]);
  const auto sol = detail::network_simplex(gather(mu, rows), gather(nu, cols), sub);

  double total = 0;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const double f = sol.flow(static_cast<Index>(a), static_cast<Index>(b));
      if (f == 0.0) continue;
      plan.pi(rows[a], cols[b]) = f;
      total += f * sub(static_cast<Index>(a), static_cast<Index>(b));
    }
  plan.cost = total;
  plan.iterations = sol.pivots;
  plan.marginal_residual = marginal_residual(plan.pi, mu, nu);
  return plan;
}

TransportPlan solve_ot(const FiniteMMSpace& space, const ProbVector& mu, const ProbVector& nu, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("solve_ot: exponent must be a finite real >= 1");
  check_marginals(mu, nu, space.size(), "solve_ot");
  const auto rows = support_of(mu);
  const auto cols = support_of(nu);

  // Build the powered cost only on the supports.
  Mat cost = Mat::Zero(space.size(), space.size());
  for (Index b : cols)
    for (Index a : rows) cost(a, b) = powered(space.dist(a, b), p);
  TransportPlan plan = solve_ot_matrix(cost, mu, nu);
  plan.exponent = p;
  return plan;
}

double wasserstein(const FiniteMMSpace& space, const ProbVector& mu, const ProbVector& nu, double p) {
  return solve_ot(space, mu, nu, p).distance();
}

TransportPlan sinkhorn(const FiniteMMSpace& space, const ProbVector& mu, const ProbVector& nu, double p,
                       const SinkhornOptions& opts) {
  if (!(opts.epsilon > 0)) throw DomainError("sinkhorn: epsilon must be positive");
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("sinkhorn: exponent must be a finite real >= 1");
  check_marginals(mu, nu, space.size(), "sinkhorn");

  const auto rows = support_of(mu);
  const auto cols = support_of(nu);
  const Index m = static_cast<Index>(rows.size()), n = static_cast<Index>(cols.size());
  const Vec a = gather(mu, rows), b = gather(nu, cols);
  Mat c(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) c(i, j) = powered(space.dist(rows[i], cols[j]), p);

  const Vec loga = a.array().log(), logb = b.array().log();
  Vec f = Vec::Zero(m), g = Vec::Zero(n);
  Vec scratch;
  double eps = opts.epsilon;
  auto kernel_log = [&](Index i, Index j) { return (f(i) + g(j) - c(i, j)) / eps + loga(i) + logb(j); };

  // Alternating updates at the current eps until the row defect (columns are
  // exact after each g-update) drops below tol or the limit is hit.
  auto run = [&](double tol, long limit, long& count) {
    double residual = std::numeric_limits<double>::infinity();
    for (long it = 0; it < limit; ++it, ++count) {
      scratch.resize(n);
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) scratch(j) = logb(j) + (g(j) - c(i, j)) / eps;
        f(i) = -eps * log_sum_exp(scratch);
      }
      scratch.resize(m);
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) scratch(i) = loga(i) + (f(i) - c(i, j)) / eps;
        g(j) = -eps * log_sum_exp(scratch);
      }
      residual = 0;
      scratch.resize(n);
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) scratch(j) = kernel_log(i, j);
        residual = std::max(residual, std::abs(std::exp(log_sum_exp(scratch)) - a(i)));
      }
      if (residual <= tol) {
        ++count;
        break;
      }
    }
    return residual;
  };

  // Epsilon scaling: warm-start the potentials through coarser problems.
  long it = 0, warm = 0;
  const double top = c.size() > 0 ? c.maxCoeff() : 0.0;
  std::vector<double> stages;
  for (double e = top; e > opts.epsilon; e *= 0.5) stages.push_back(e);
  std::reverse(stages.begin(), stages.end());
  while (!stages.empty()) {
    eps = stages.back();
    stages.pop_back();
    run(std::max(opts.tol, 1e-6), 500, warm);
  }
  eps = opts.epsilon;
  const double residual = run(opts.tol, opts.max_iter, it);
  if (residual > opts.tol) throw ConvergenceError("sinkhorn: no convergence within max_iter", residual);

  Mat pi(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) pi(i, j) = std::exp(kernel_log(i, j));

  double entropic = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i)
      if (pi(i, j) > 0) entropic += pi(i, j) * c(i, j) + eps * pi(i, j) * (std::log(pi(i, j)) - 1.0);

  // Round onto the polytope: shrink rows, shrink columns, then add the
  // rank-one correction carrying the remaining row/column deficits.
  const Vec r = pi.rowwise().sum();
  for (Index i = 0; i < m; ++i)
    if (r(i) > a(i)) pi.row(i) *= a(i) / r(i);
  const Vec col = pi.colwise().sum().transpose();
  for (Index j = 0; j < n; ++j)
    if (col(j) > b(j)) pi.col(j) *= b(j) / col(j);
  const Vec err_r = (a - pi.rowwise().sum()).cwiseMax(0.0);
  const Vec err_c = (b - pi.colwise().sum().transpose()).cwiseMax(0.0);
  if (err_c.sum() > 0) pi += err_r * err_c.transpose() / err_c.sum();

  TransportPlan plan;
  plan.kind = PlanKind::entropic;
  plan.epsilon = eps;
  plan.exponent = p;
  plan.iterations = it + warm;
  plan.entropic_objective = entropic;
  plan.pi = Mat::Zero(space.size(), space.size());
  double cost = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) {
      plan.pi(rows[i], cols[j]) = pi(i, j);
      cost += pi(i, j) * c(i, j);
    }
  plan.cost = cost;
  plan.marginal_residual = marginal_residual(plan.pi, mu, nu);
  return plan;
}

double wasserstein_1d(const FiniteMMSpace& space, const ProbVector& mu, const ProbVector& nu, double p) {
  if (!space.coords || space.coords->kind != CoordKind::interval)
    throw GeometryError("wasserstein_1d: space has no interval coordinates");
  if (!(p >= 1.0)) throw DomainError("wasserstein_1d: exponent must be >= 1");
  check_marginals(mu, nu, space.size(), "wasserstein_1d");
  const Index n = space.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& x = space.coords->data;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return x(a, 0) < x(b, 0); });

  // North-west corner on sorted atoms is the monotone (optimal) coupling.
  std::size_t ia = 0, ib = 0;
  double ra = mu(order[0]), rb = nu(order[0]);
  double cost = 0;
  while (ia < order.size() && ib < order.size()) {
    const double moved = std::min(ra, rb);
    if (moved > 0) cost += moved * powered(space.dist(order[ia], order[ib]), p);
    ra -= moved;
    rb -= moved;
    if (ra <= 0 && ++ia < order.size()) ra = mu(order[ia]);
    if (rb <= 0 && ++ib < order.size()) rb = nu(order[ib]);
  }
  return std::pow(std::max(cost, 0.0), 1.0 / p);
}

ProbVector pushforward(const Partition& map, const ProbVector& mu) {
  if (mu.size() != map.size()) throw StructuralError("pushforward: measure and map sizes differ");
  ProbVector out = ProbVector::Zero(map.num_classes);
  for (Index i = 0; i < mu.size(); ++i) out(map.class_of[static_cast<std::size_t>(i)]) += mu(i);
  return out;
}

PlanRealization check_plan_realizes_quotient(const TransportPlan& plan, const FiniteMMSpace& space,
                                             const FoliationBundle& bundle, Index y0, Index y1, double tol,
                                             double mass_tol) {
  const Index n = space.size();
  if (plan.pi.rows() != n || plan.pi.cols() != n)
    throw StructuralError("check_plan_realizes_quotient: plan does not live on the space");
  if (y0 < 0 || y1 < 0 || y0 >= bundle.num_classes() || y1 >= bundle.num_classes())
    throw StructuralError("check_plan_realizes_quotient: class index out of range");
  const ProbVector f0 = bundle.fiber_measure(y0), f1 = bundle.fiber_measure(y1);
  if (marginal_residual(plan.pi, f0, f1) > 1e-9)
    throw DomainError("check_plan_realizes_quotient: plan marginals are not the fiber measures");

  const double dstar = bundle.quotient.dist(y0, y1);
  PlanRealization out;
  out.defect = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (plan.pi(i, j) <= mass_tol) continue;
      const double defect = std::abs(space.dist(i, j) - dstar);
      if (out.worst_i < 0 || defect > out.defect) {
        out.defect = defect;
        out.worst_i = i;
        out.worst_j = j;
      }
    }
  out.ok = out.defect <= tol;
  return out;
}

}  // namespace folio
