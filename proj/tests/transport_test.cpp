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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "folio/flows.hpp"
#include "folio/generators.hpp"
#include "folio/transport.hpp"
#include "oracles.hpp"

namespace folio {
namespace {

FiniteMMSpace two_points() {
  FiniteMMSpace s;
  s.labels = {"a", "b"};
  s.dist = Mat{{0, 1}, {1, 0}};
  s.weight = Vec{{0.5, 0.5}};
  return s;
}

Mat powered_cost(const FiniteMMSpace& s, double p) { return s.dist.array().pow(p).matrix(); }

TEST(SolveOt, DiracToDirac) {
  const auto s = random_metric_space(7, 2, 3);
  const auto plan = solve_ot(s, dirac(7, 2), dirac(7, 5), 2.0);
  EXPECT_EQ(plan.pi(2, 5), 1.0);
  EXPECT_EQ(plan.pi.sum(), 1.0);
  EXPECT_DOUBLE_EQ(plan.distance(), s.dist(2, 5));
  EXPECT_DOUBLE_EQ(wasserstein(s, dirac(7, 2), dirac(7, 5), 1.0), s.dist(2, 5));
}

TEST(SolveOt, TwoPointFamily) {
  const auto s = two_points();
  const Vec mu{{1.0, 0.0}}, nu{{0.5, 0.5}};
  // The only coupling is pi(a, a) = pi(a, b) = 1/2.
  EXPECT_NEAR(wasserstein(s, mu, nu, 2.0), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(wasserstein(s, mu, nu, 1.0), 0.5, 1e-15);
  const auto plan = solve_ot(s, mu, nu, 2.0);
  EXPECT_NEAR(plan.pi(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(plan.pi(0, 1), 0.5, 1e-15);
}

TEST(SolveOt, RejectsBadInput) {
  const auto s = two_points();
  EXPECT_THROW(solve_ot(s, Vec{{1.0, 0.0}}, Vec{{0.5, 0.6}}, 2.0), UnbalancedError);
  EXPECT_THROW(solve_ot(s, Vec{{1.0, 0.0}}, Vec{{0.5, 0.5}}, 0.5), DomainError);
  EXPECT_THROW(solve_ot(s, Vec{{1.0, 0.0, 0.0}}, Vec{{0.5, 0.5}}, 2.0), StructuralError);
}

TEST(SolveOt, PlanInvariants) {
  std::mt19937_64 rng(11);
  const auto s = random_metric_space(40, 2, 8);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec mu = oracle::random_probability(40, rng), nu = oracle::random_sparse_probability(40, rng);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const auto plan = solve_ot(s, mu, nu, p);
      EXPECT_GE(plan.pi.minCoeff(), 0.0);
      EXPECT_LE(plan.marginal_residual, 1e-12);
      EXPECT_LE((plan.pi.rowwise().sum() - mu).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((plan.pi.colwise().sum().transpose() - nu).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_NEAR(plan.cost, plan.pi.cwiseProduct(powered_cost(s, p)).sum(), 1e-10);
    }
  }
}

TEST(SolveOt, MatchesVertexEnumeration) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(1, 4);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = size(rng), n = size(rng);
    const auto s = random_metric_space(m + n, 2, 100 + trial);
    Vec mu = Vec::Zero(m + n), nu = Vec::Zero(m + n);
    mu.head(m) = oracle::random_probability(m, rng);
    nu.tail(n) = oracle::random_probability(n, rng);
    for (double p : {1.0, 2.0}) {
      const Mat c = powered_cost(s, p);
      const double expect = oracle::enumerate_transport(c.topLeftCorner(m, m + n).rightCols(n), mu.head(m), nu.tail(n));
      EXPECT_NEAR(solve_ot(s, mu, nu, p).cost, expect, 1e-12);
    }
  }
}

TEST(SolveOt, DegenerateMarginals) {
  // Equal partial sums force degenerate bases.
  Mat c(3, 3);
  c << 1, 2, 3, 2, 1, 2, 3, 2, 1;
  const Vec mu{{0.25, 0.5, 0.25}}, nu{{0.25, 0.5, 0.25}};
  const auto plan = solve_ot_matrix(c, mu, nu);
  EXPECT_NEAR(plan.cost, oracle::enumerate_transport(c, mu, nu), 1e-15);
  EXPECT_NEAR(plan.cost, 1.0, 1e-15);
}

TEST(SolveOt, PermutationEquivariance) {
  std::mt19937_64 rng(5);
  const auto s = random_metric_space(25, 3, 6);
  std::vector<Index> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto t = permute(s, perm);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec mu = oracle::random_probability(25, rng), nu = oracle::random_probability(25, rng);
    Vec pmu(25), pnu(25);
    for (Index k = 0; k < 25; ++k) {
      pmu(k) = mu(perm[static_cast<std::size_t>(k)]);
      pnu(k) = nu(perm[static_cast<std::size_t>(k)]);
    }
    EXPECT_NEAR(solve_ot(s, mu, nu, 2.0).cost, solve_ot(t, pmu, pnu, 2.0).cost, 1e-13);
  }
}

TEST(Wasserstein, MetricProperties) {
  std::mt19937_64 rng(7);
  const auto s = random_metric_space(30, 2, 12);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec a = oracle::random_probability(30, rng), b = oracle::random_sparse_probability(30, rng),
              c = oracle::random_probability(30, rng);
    for (double p : {1.0, 2.0, 3.0}) {
      EXPECT_EQ(wasserstein(s, a, a, p), 0.0);
      const double ab = wasserstein(s, a, b, p), ba = wasserstein(s, b, a, p);
      EXPECT_NEAR(ab, ba, 1e-12);
      EXPECT_GT(ab, 0.0);
      EXPECT_LE(wasserstein(s, a, c, p), ab + wasserstein(s, b, c, p) + 1e-9);
    }
  }
}

TEST(Wasserstein, OneDimensionalAgreesWithSimplex) {
  std::mt19937_64 rng(3);
  const auto g = flat_interval(30, -1, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec mu = oracle::random_sparse_probability(30, rng), nu = oracle::random_probability(30, rng);
    for (double p : {1.0, 2.0, 2.5})
      EXPECT_NEAR(wasserstein_1d(g, mu, nu, p), wasserstein(g, mu, nu, p), 1e-12);
  }
  EXPECT_THROW(wasserstein_1d(random_metric_space(4, 2, 1), uniform(4), uniform(4), 2.0), GeometryError);
}

TEST(Sinkhorn, SelfTransportIsCheap) {
  std::mt19937_64 rng(2);
  const auto s = random_metric_space(20, 2, 4);
  const Vec mu = oracle::random_probability(20, rng);
  const auto plan = sinkhorn(s, mu, mu, 1.0, {1e-3, 200000, 1e-6});
  EXPECT_LE(plan.cost, 1e-2 * s.diameter());
  EXPECT_EQ(plan.kind, PlanKind::entropic);
  // Rounding makes the returned plan feasible regardless of the stopping residual.
  EXPECT_LE(plan.marginal_residual, 1e-15);
}

TEST(Sinkhorn, TwoPointInstance) {
  const auto plan = sinkhorn(two_points(), Vec{{1.0, 0.0}}, Vec{{0.5, 0.5}}, 2.0, {1e-4, 100000, 1e-12});
  EXPECT_NEAR(plan.cost, 0.5, 1e-3);
}

TEST(Sinkhorn, MarginalsAndLowerBound) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = random_metric_space(50, 2, 40 + trial);
    const Vec mu = oracle::random_probability(50, rng), nu = oracle::random_probability(50, rng);
    for (double eps : {0.05, 0.01}) {
      const SinkhornOptions opts{eps, 100000, 1e-9};
      const auto plan = sinkhorn(s, mu, nu, 2.0, opts);
      EXPECT_LE(plan.marginal_residual, opts.tol);
      EXPECT_GE(plan.pi.minCoeff(), 0.0);
      EXPECT_GE(plan.cost, solve_ot(s, mu, nu, 2.0).cost - 1e-12);
      EXPECT_GE(plan.entropic_objective, -1e9);
    }
  }
}

TEST(Sinkhorn, NonConvergenceCarriesResidual) {
  std::mt19937_64 rng(9);
  const auto s = random_metric_space(30, 2, 1);
  const Vec mu = oracle::random_probability(30, rng), nu = oracle::random_probability(30, rng);
  try {
    sinkhorn(s, mu, nu, 2.0, {1e-3, 2, 1e-14});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
  EXPECT_THROW(sinkhorn(s, mu, nu, 2.0, {0.0, 10, 1e-9}), DomainError);
}

TEST(Pushforward, Examples) {
  std::mt19937_64 rng(4);
  const Vec mu = oracle::random_probability(6, rng);
  EXPECT_EQ(pushforward(Partition::trivial(6), mu), mu);
  const Vec all = pushforward(Partition::single(6), mu);
  ASSERT_EQ(all.size(), 1);
  EXPECT_NEAR(all(0), 1.0, 1e-15);
  const Partition p = Partition::from_classes({{0, 5}, {1, 2, 3}, {4}}, 6);
  const Vec q = pushforward(p, mu);
  EXPECT_DOUBLE_EQ(q(0), mu(0) + mu(5));
  EXPECT_DOUBLE_EQ(q(2), mu(4));
}

TEST(Interpolation, Endpoints) {
  std::mt19937_64 rng(1);
  const auto g = flat_interval(40, 0, 1);
  const Vec a = oracle::random_probability(40, rng), b = oracle::random_sparse_probability(40, rng);
  EXPECT_EQ(displacement_interpolate_1d(g, a, b, 0.0), a);
  EXPECT_EQ(displacement_interpolate_1d(g, a, b, 1.0), b);
  EXPECT_THROW(displacement_interpolate_1d(g, a, b, 1.5), DomainError);
  EXPECT_THROW(displacement_interpolate_1d(random_metric_space(40, 1, 2), a, b, 0.5), GeometryError);
}

TEST(Interpolation, DiracMidpoint) {
  const auto g = flat_interval(21, 0, 1);
  const Vec mid = displacement_interpolate_1d(g, dirac(21, 4), dirac(21, 16), 0.5);
  EXPECT_NEAR(mid(10), 1.0, 1e-14);
  EXPECT_NEAR(mid.sum(), 1.0, 1e-15);
  const Vec quarter = displacement_interpolate_1d(g, dirac(21, 4), dirac(21, 16), 0.25);
  EXPECT_NEAR(quarter(7), 1.0, 1e-14);
}

TEST(Interpolation, ConstantSpeedGeodesic) {
  const auto g = flat_interval(200, 0, 1);
  const double h = interval_spacing(g);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Vec a = random_smooth_measure(g, 2 * seed), b = random_smooth_measure(g, 2 * seed + 1);
    const double full = wasserstein(g, a, b, 2.0);
    for (double t : {0.25, 0.5, 0.75}) {
      const Vec m = displacement_interpolate_1d(g, a, b, t);
      EXPECT_TRUE(is_probability(m, 1e-12));
      EXPECT_NEAR(wasserstein(g, m, a, 2.0), t * full, h);
      EXPECT_NEAR(wasserstein(g, m, b, 2.0), (1 - t) * full, h);
      EXPECT_NEAR(cell_wasserstein2_1d(g, a, m), t * cell_wasserstein2_1d(g, a, b), h);
    }
  }
}

}  // namespace
}  // namespace folio
