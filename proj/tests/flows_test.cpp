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
#include <numbers>
#include <random>

#include "folio/errors.hpp"
#include "folio/flows.hpp"
#include "folio/foliation.hpp"
#include "folio/generators.hpp"
#include "folio/transport.hpp"
#include "oracles.hpp"

namespace folio {
namespace {

DensityVector cosine_density(const FiniteMMSpace& circle, double a) {
  const Index n = circle.size();
  DensityVector rho(n);
  for (Index i = 0; i < n; ++i) rho(i) = 1 + a * std::cos(2 * std::numbers::pi * static_cast<double>(i) / n);
  return rho / rho.dot(circle.weight);
}

DensityVector random_density(const Vec& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  DensityVector rho(m.size());
  for (Index i = 0; i < m.size(); ++i) rho(i) = u(rng);
  return rho / rho.dot(m);
}

struct ProductFixture {
  GraphOperator gy, gz, total;
  FoliationBundle bundle;
};

ProductFixture product_fixture() {
  FiniteMMSpace y = path(9, 0.5), z = cycle(7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (Index i = 0; i < 9; ++i) y.weight(i) = u(rng);
  y.weight /= y.weight.sum();
  ProductFixture f;
  f.gy = build_grid_graph(y);
  f.gz = build_grid_graph(z);
  f.total = product_graph(f.gy, f.gz);
  const auto fol = lq_product(y, z, 2.0);
  f.bundle = build_quotient(fol.space, fol.partition);
  return f;
}

TEST(HeatFlow, InitialTimeIsExact) {
  const auto g = build_grid_graph(cycle(64));
  const DensityVector rho = cosine_density(cycle(64), 0.5);
  const auto traj = heat_flow(g, rho, {0.0});
  EXPECT_EQ(traj.densities[0], rho);
}

TEST(HeatFlow, MassConservedAndDecayToConstant) {
  const auto s = cycle(64);
  const auto g = build_grid_graph(s);
  const auto lam1 = laplacian_spectrum(g).eigenvalues(1);
  const auto traj = heat_flow(g, cosine_density(s, 0.9), {0.0, 0.1, 1.0, 1e3 / lam1});
  for (double m : traj.mass) EXPECT_NEAR(m, 1.0, 1e-12);
  EXPECT_LE((traj.densities.back().array() - 1.0).abs().maxCoeff(), 1e-10);
  EXPECT_NEAR(traj.entropy.back(), 0.0, 1e-12);
}

TEST(HeatFlow, Semigroup) {
  const auto g = product_fixture().total;
  const DensityVector rho = random_density(g.vertex_measure, 4);
  for (double s : {0.05, 0.3})
    for (double t : {0.1, 0.7}) {
      const auto direct = heat_flow(g, rho, {s + t}).densities[0];
      const auto half = heat_flow(g, rho, {s}).densities[0];
      const auto twice = heat_flow(g, half, {t}).densities[0];
      EXPECT_LE((direct - twice).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(HeatFlow, CrankNicolsonMatchesSpectral) {
  const auto s = cycle(200);
  const auto g = build_grid_graph(s);
  const DensityVector rho = cosine_density(s, 0.5);
  HeatFlowOptions cn;
  cn.dense_limit = 10;
  const std::vector<double> times{0.0, 0.2, 1.0};
  const auto a = heat_flow(g, rho, times), b = heat_flow(g, rho, times, cn);
  for (std::size_t k = 0; k < times.size(); ++k)
    EXPECT_LE((a.densities[k] - b.densities[k]).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(HeatFlow, PositivityPreservedFromDirac) {
  const auto s = path(50, 0.1);
  const auto g = build_grid_graph(s);
  const DensityVector rho = density_of(dirac(50, 10), s.weight);
  HeatFlowOptions cn;
  cn.dense_limit = 10;
  const auto traj = heat_flow(g, rho, {0.0, 0.01, 0.5}, cn);
  for (const auto& d : traj.densities) EXPECT_GE(d.minCoeff(), -1e-12);
  for (std::size_t k = 1; k < traj.entropy.size(); ++k) EXPECT_LE(traj.entropy[k], traj.entropy[k - 1] + 1e-13);
}

TEST(HeatFlow, RejectsBadInput) {
  const auto s = cycle(16);
  const auto g = build_grid_graph(s);
  EXPECT_THROW(heat_flow(g, Vec::Ones(15), {0.0}), StructuralError);
  EXPECT_THROW(heat_flow(g, Vec::Constant(16, 2.0), {0.0}), DomainError);
  EXPECT_THROW(heat_flow(g, Vec::Ones(16), {1.0, 0.5}), DomainError);
  EXPECT_THROW(heat_flow(g, Vec::Ones(16), {-1.0}), DomainError);
}

TEST(HeatFlow, CommutesWithPullback) {
  const auto f = product_fixture();
  const DensityVector rho = random_density(f.gy.vertex_measure, 5);
  const std::vector<double> times{0.0, 0.05, 0.5, 2.0};
  const auto quot = heat_flow(f.gy, rho, times);
  const auto total = heat_flow(f.total, pullback_function(f.bundle, rho), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_LE((total.densities[k] - pullback_function(f.bundle, quot.densities[k])).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(total.entropy[k], quot.entropy[k], 1e-10);
    EXPECT_NEAR(total.slope[k], quot.slope[k], 1e-10);
  }
}

TEST(HeatFlow, PushforwardFollowsQuotientFlow) {
  const auto f = product_fixture();
  const DensityVector rho = random_density(f.total.vertex_measure, 6);
  const std::vector<double> times{0.0, 0.1, 1.0};
  const auto total = heat_flow(f.total, rho, times);
  const auto quot = heat_flow(f.gy, fiber_average(f.bundle, rho), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const ProbVector pushed = pushforward(f.bundle.partition, measure_of(total.densities[k], f.total.vertex_measure));
    EXPECT_LE((pushed - measure_of(quot.densities[k], f.gy.vertex_measure)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Slope, ZeroIffConstant) {
  const auto g = product_fixture().total;
  EXPECT_EQ(entropy_slope(g, Vec::Ones(g.size())), 0.0);
  EXPECT_GT(entropy_slope(g, random_density(g.vertex_measure, 7)), 1e-3);
}

TEST(Slope, FisherInformationUnderRefinement) {
  // Circle of length 2 pi with dx / (2 pi): slope^2 tends to the Fisher information.
  const double fisher = oracle::circle_fisher(0.5);
  double prev = 0;
  for (Index n : {128, 256, 512}) {
    const auto s = cycle(n);
    const double slope = entropy_slope(build_grid_graph(s), cosine_density(s, 0.5));
    EXPECT_NEAR(slope * slope, fisher, 0.01 * fisher);
    if (prev > 0) EXPECT_LE(std::abs(slope - prev) / prev, 0.02);
    prev = slope;
  }
}

TEST(Slope, EqualsFisherFormOnAnyGraph) {
  const auto g = product_fixture().total;
  const DensityVector rho = random_density(g.vertex_measure, 8);
  const double expected = std::sqrt(8 * dirichlet_energy_q(g, rho.cwiseSqrt(), 2.0));
  EXPECT_NEAR(entropy_slope(g, rho), expected, 1e-14 * expected);
}

TEST(Slope, PullbackInvariance) {
  const auto f = product_fixture();
  for (std::uint64_t seed : {9, 10, 11}) {
    const DensityVector rho = random_density(f.gy.vertex_measure, seed);
    EXPECT_NEAR(entropy_slope(f.total, pullback_function(f.bundle, rho)), entropy_slope(f.gy, rho), 1e-10);
  }
}

TEST(Slope, ProbeIsALowerBound) {
  // Interval grid fine enough for the continuum slope to be representative.
  const auto s = flat_interval(60, 0.0, 1.0);
  const auto g = build_grid_graph(s);
  std::vector<ProbVector> candidates;
  const ProbVector mu = random_smooth_measure(s, 12);
  for (std::uint64_t seed = 20; seed < 40; ++seed) candidates.push_back(random_smooth_measure(s, seed));
  for (double t : {0.01, 0.05}) candidates.push_back(measure_of(heat_flow(g, density_of(mu, s.weight), {t}).densities[0], s.weight));
  const double probe = slope_lower_bound_probe(s, mu, candidates, 0.0);
  const double slope = entropy_slope(g, density_of(mu, s.weight));
  EXPECT_GT(probe, 0.0);
  EXPECT_LE(probe, slope * 1.05);
}

TEST(Ede, StationaryIsZero) {
  const auto s = cycle(32);
  const auto traj = heat_flow(build_grid_graph(s), Vec::Ones(32), {0.0, 1.0, 2.0});
  const auto rep = ede_audit(build_grid_graph(s), traj);
  EXPECT_EQ(rep.mismatch, 0.0);
  EXPECT_TRUE(rep.entropy_non_increasing);
}

TEST(Ede, CircleBalance) {
  const auto s = cycle(512);
  const auto g = build_grid_graph(s);
  std::vector<double> times;
  for (int k = 0; k <= 200; ++k) times.push_back(0.01 * k);
  const auto traj = heat_flow(g, cosine_density(s, 0.9), times);
  const auto rep = ede_audit(g, traj);
  EXPECT_TRUE(rep.entropy_non_increasing);
  EXPECT_LE(rep.mismatch, 1e-3);
  EXPECT_EQ(rep.intervals.size(), 200u);
  EXPECT_NEAR(rep.total_drop, traj.entropy.front() - traj.entropy.back(), 1e-14);
}

TEST(Convexity, FlatIntervalAtZero) {
  const auto rep = k_convexity_audit(flat_interval(800, -4.0, 4.0), 0.0, 50, 7);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.trials.size(), 50u);
}

TEST(Convexity, QuotientIntervalAtOne) {
  const auto grid = interval_quotient(9, std::sqrt(8.0), 800);
  EXPECT_TRUE(k_convexity_audit(grid, 1.0, 50, 7).passed);
  EXPECT_FALSE(k_convexity_audit(grid, 1.2, 50, 7).passed);
}

TEST(Convexity, FlatIntervalAtTenFails) {
  const auto rep = k_convexity_audit(flat_interval(800, -4.0, 4.0), 10.0, 50, 7);
  EXPECT_FALSE(rep.passed);
  EXPECT_GT(rep.max_defect, rep.slack);
}

TEST(Convexity, TranslatedBumps) {
  // Entropy is constant along a translation, so the defect is K/2 t(1-t) W^2.
  // h = 1/128, so both centres are nodes and the shifts are whole cells.
  const auto grid = flat_interval(1025, 0.0, 8.0);
  const Vec x = grid.coords->data.col(0);
  auto bump = [&](double c) {
    ProbVector p = (-(x.array() - c).square() / (2 * 0.08)).exp().matrix();
    return ProbVector(p / p.sum());
  };
  const ProbVector mu0 = bump(2.0), mu1 = bump(6.0);
  EXPECT_NEAR(cell_wasserstein2_1d(grid, mu0, mu1), 4.0, 1e-9);
  for (double t : {0.25, 0.5, 0.75}) {
    EXPECT_NEAR(convexity_defect(grid, mu0, mu1, t, 0.0), 0.0, 1e-9);
    EXPECT_NEAR(convexity_defect(grid, mu0, mu1, t, 10.0), 5 * t * (1 - t) * 16, 1e-8);
  }
}

TEST(Convexity, RandomMeasuresAreDeterministic) {
  const auto grid = flat_interval(100, 0.0, 1.0);
  EXPECT_EQ(random_smooth_measure(grid, 3), random_smooth_measure(grid, 3));
  EXPECT_NE(random_smooth_measure(grid, 3), random_smooth_measure(grid, 4));
  EXPECT_NEAR(random_smooth_measure(grid, 3).sum(), 1.0, 1e-14);
}

}  // namespace
}  // namespace folio
