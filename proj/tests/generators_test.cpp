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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "folio/errors.hpp"
#include "folio/foliation.hpp"
#include "folio/generators.hpp"
#include "folio/transport.hpp"

namespace folio {
namespace {

constexpr double kPi = std::numbers::pi;

FiniteMMSpace two_point(double d, double a) {
  FiniteMMSpace s = path(2, d);
  s.weight = Vec{{a, 1 - a}};
  return s;
}

// Distance-preserving bijection test between two spaces given a relabeling.
void expect_isometric(const FiniteMMSpace& a, const FiniteMMSpace& b, const std::vector<Index>& to_b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (Index i = 0; i < a.size(); ++i) {
    const Index bi = to_b[static_cast<std::size_t>(i)];
    EXPECT_NEAR(a.weight(i), b.weight(bi), 1e-15);
    for (Index j = 0; j < a.size(); ++j) EXPECT_NEAR(a.dist(i, j), b.dist(bi, to_b[static_cast<std::size_t>(j)]), tol);
  }
}

TEST(Quantize, ExactSums) {
  const double q = quantum_of(10.0);
  EXPECT_EQ(q, std::ldexp(1.0, 4 - 40));
  const double x = quantize(0.1, 10.0);
  EXPECT_EQ(std::fmod(x, q), 0.0);
  EXPECT_LE(std::abs(x - 0.1), q);
  double acc = 0;
  for (int k = 0; k < 1000; ++k) acc += x;
  EXPECT_EQ(acc, 1000 * x);
}

TEST(Sphere, SquareOnTheCircle) {
  // Spacings are quantized to 40 bits of the circumference.
  const auto s = sphere_mesh(1, 1.0, 4, 0);
  EXPECT_NEAR(s.dist(0, 1), kPi / 2, 1e-11);
  EXPECT_NEAR(s.dist(0, 2), kPi, 1e-11);
  EXPECT_EQ(s.dist(0, 3), s.dist(0, 1));
  EXPECT_EQ(s.dist(0, 2), 2 * s.dist(0, 1));
  EXPECT_TRUE(validate_space(s).ok());
}

TEST(Sphere, DiameterBoundAndDeterminism) {
  for (double r : {0.5, 2.0}) {
    const auto s = sphere_mesh(2, r, 300, 4);
    EXPECT_LE(s.diameter(), kPi * r);
    EXPECT_TRUE(validate_space(s, {1e-12 * s.diameter()}).ok());
    EXPECT_NEAR(s.weight.sum(), 1.0, 1e-14);
    EXPECT_EQ(s.dist, sphere_mesh(2, r, 300, 4).dist);
    EXPECT_NE(s.dist, sphere_mesh(2, r, 300, 5).dist);
    for (Index i = 0; i < s.size(); ++i) EXPECT_NEAR(s.coords->data.row(i).norm(), r, 1e-12 * r);
  }
  EXPECT_THROW(sphere_mesh(2, 1.0, 3, 0), GenerationError);
  EXPECT_THROW(sphere_mesh(0, 1.0, 10, 0), GenerationError);
}

TEST(Sphere, BandPartition) {
  const auto mesh = sphere_mesh(2, 1.0, 400, 6);
  const auto one = sphere_distance_partition(mesh, 1);
  EXPECT_EQ(one.num_classes, 1);
  const auto p = sphere_distance_partition(mesh, 8);
  check_partition(p, mesh.size());
  // Bands are ordered by the distance to the base point.
  for (Index i = 0; i < mesh.size(); ++i)
    for (Index j = 0; j < mesh.size(); ++j)
      if (p.class_of[static_cast<std::size_t>(i)] < p.class_of[static_cast<std::size_t>(j)])
        EXPECT_LT(mesh.dist(mesh.base, i), mesh.dist(mesh.base, j));
}

TEST(Sphere, BandMassesFollowCosineDensity) {
  // Analytic band masses on S^2: (sin b - sin a) / 2 on [a, b]. Total
  // variation is used because polar bands hold only ~25 samples.
  const auto mesh = sphere_mesh(2, 1.0, 4000, 1);
  const auto p = sphere_distance_partition(mesh, 20);
  ASSERT_EQ(p.num_classes, 20);
  std::vector<double> mass(20, 0.0);
  for (Index i = 0; i < mesh.size(); ++i) mass[static_cast<std::size_t>(p.class_of[static_cast<std::size_t>(i)])] += mesh.weight(i);
  double l1 = 0;
  for (int b = 0; b < 20; ++b) {
    const double a = -kPi / 2 + kPi * b / 20, c = a + kPi / 20;
    l1 += std::abs(mass[static_cast<std::size_t>(b)] - 0.5 * (std::sin(c) - std::sin(a)));
  }
  EXPECT_LE(l1, 0.1);
}

TEST(IntervalQuotient, SymmetricAndNormalized) {
  for (int n : {2, 9, 64}) {
    const auto s = interval_quotient(n, std::sqrt(n - 1.0), 301);
    EXPECT_NEAR(s.weight.sum(), 1.0, 1e-14);
    const Index m = s.size();
    for (Index i = 0; i < m; ++i) {
      EXPECT_NEAR(s.weight(i), s.weight(m - 1 - i), 1e-15);
      EXPECT_NEAR(s.coords->data(i, 0), -s.coords->data(m - 1 - i, 0), 1e-12);
    }
    EXPECT_EQ(s.weight.maxCoeff(), s.weight(s.base));
    EXPECT_LE(s.coords->data.col(0).cwiseAbs().maxCoeff(), kPi * std::sqrt(n - 1.0) / 2);
    EXPECT_TRUE(validate_space(s).ok());
  }
  EXPECT_EQ(interval_quotient(2, 1.0, 100).size(), 100);
}

TEST(IntervalQuotient, ConvergesToGaussianDensity) {
  const auto s = interval_quotient(256, std::sqrt(255.0), 500);
  const double h = s.dist(0, 1), peak = 1 / std::sqrt(2 * kPi);
  double sup = 0;
  for (Index i = 0; i < s.size(); ++i) {
    const double t = s.coords->data(i, 0);
    sup = std::max(sup, std::abs(s.weight(i) / h - peak * std::exp(-0.5 * t * t)));
  }
  EXPECT_LE(sup, 0.01 * peak);
}

TEST(GaussianLine, ShapeAndTail) {
  const auto s = gaussian_line(1.0, 500, 6.0);
  EXPECT_EQ(s.size(), 500);
  EXPECT_NEAR(s.weight.sum(), 1.0, 1e-14);
  for (Index i = 0; i < 500; ++i) EXPECT_NEAR(s.weight(i), s.weight(499 - i), 1e-16);
  EXPECT_EQ(s.weight.maxCoeff(), s.weight(249));
  EXPECT_NEAR(s.coords->data(499, 0), 6.0, 1e-9);
  EXPECT_LE(gaussian_tail_mass(6.0), 1e-8);
  EXPECT_NEAR(gaussian_tail_mass(1.0), 0.31731050786291415, 1e-15);
  const auto wide = gaussian_line(4.0, 100, 5.0);
  EXPECT_NEAR(wide.coords->data(99, 0), 10.0, 1e-9);
  EXPECT_THROW(gaussian_line(1.0, 100, 3.0), GenerationError);
}

TEST(Product, MaxMetric) {
  const auto y = random_metric_space(4, 2, 7), z = random_metric_space(3, 2, 8);
  const auto p = lq_product(y, z, kInfinity);
  for (Index a = 0; a < 4; ++a)
    for (Index b = 0; b < 3; ++b)
      for (Index c = 0; c < 4; ++c)
        for (Index d = 0; d < 3; ++d) EXPECT_EQ(p.space.dist(a * 3 + b, c * 3 + d), std::max(y.dist(a, c), z.dist(b, d)));
}

TEST(Product, TwoPointHandTable) {
  // Y = {0, 3}, Z = {0, 4}; points (0,0), (0,4), (3,0), (3,4).
  const auto y = two_point(3.0, 0.25), z = two_point(4.0, 0.5);
  const Mat l1{{0, 4, 3, 7}, {4, 0, 7, 3}, {3, 7, 0, 4}, {7, 3, 4, 0}};
  const Mat l2{{0, 4, 3, 5}, {4, 0, 5, 3}, {3, 5, 0, 4}, {5, 3, 4, 0}};
  const Mat linf{{0, 4, 3, 4}, {4, 0, 4, 3}, {3, 4, 0, 4}, {4, 3, 4, 0}};
  EXPECT_EQ(lq_product(y, z, 1.0).space.dist, l1);
  EXPECT_EQ(lq_product(y, z, 2.0).space.dist, l2);
  EXPECT_EQ(lq_product(y, z, kInfinity).space.dist, linf);
  const auto p = lq_product(y, z, 2.0);
  EXPECT_EQ(p.space.weight, (Vec{{0.125, 0.125, 0.375, 0.375}}));
  EXPECT_EQ(p.partition.class_of, (std::vector<Index>{0, 0, 1, 1}));
  EXPECT_EQ(p.space.labels[3], "(1,1)");
}

TEST(Product, SymmetricAndAssociative) {
  const auto a = random_metric_space(3, 1, 9), b = random_metric_space(4, 2, 10), c = random_metric_space(2, 2, 11);
  for (double q : {1.0, 2.0, 3.0, kInfinity}) {
    const double tol = 1e-12;
    std::vector<Index> swap(12);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 4; ++j) swap[static_cast<std::size_t>(i * 4 + j)] = j * 3 + i;
    expect_isometric(lq_product(a, b, q).space, lq_product(b, a, q).space, swap, tol);
    std::vector<Index> same(24);
    for (Index i = 0; i < 24; ++i) same[static_cast<std::size_t>(i)] = i;
    expect_isometric(lq_product(lq_product(a, b, q).space, c, q).space, lq_product(a, lq_product(b, c, q).space, q).space,
                     same, tol);
  }
}

TEST(Product, CertifiesAsFoliation) {
  const auto y = random_metric_space(5, 2, 12), z = random_metric_space(4, 2, 13);
  for (double q : {1.0, 2.0, kInfinity}) {
    const auto p = lq_product(y, z, q);
    const auto rep = check_mm_foliation(build_quotient(p.space, p.partition), {.tol = 1e-12});
    EXPECT_TRUE(rep.passed) << q;
  }
}

TEST(Warped, UnitWarpRecoversEuclideanProduct) {
  const auto y = flat_interval(11, 0.0, 1.0), z = flat_interval(11, 0.0, 1.0);
  const auto w = warped_product(y, z, Vec::Ones(11), Vec::Ones(11));
  const auto l2 = lq_product(y, z, 2.0);
  ASSERT_EQ(w.space.size(), 121);
  const double h = 0.1;
  EXPECT_LE((w.space.dist - l2.space.dist).cwiseAbs().maxCoeff(), 2 * h);
  EXPECT_GE((w.space.dist - l2.space.dist).minCoeff(), -1e-11);
  EXPECT_LE((w.space.weight - l2.space.weight).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(validate_space(w.space).ok());
}

TEST(Warped, SphereLikeSpaceIsAFoliation) {
  const auto y = flat_interval(21, -kPi / 2, kPi / 2), z = cycle(16);
  Vec wd(21);
  for (Index i = 1; i < 20; ++i) wd(i) = std::cos(y.coords->data(i, 0));
  wd(0) = wd(20) = 0.0;
  const auto w = warped_product(y, z, wd, wd);
  // The end fibers have w_m = 0 and drop out.
  EXPECT_EQ(w.space.size(), 19 * 16);
  EXPECT_EQ(w.partition.num_classes, 19);
  EXPECT_TRUE(validate_space(w.space).ok());
  const auto bundle = build_quotient(w.space, w.partition);
  const double h = interval_spacing(y);
  EXPECT_TRUE(check_mm_foliation(bundle, {.tol = h}).passed);
  for (Index a = 0; a < 19; ++a)
    for (Index b = 0; b < 19; ++b) EXPECT_NEAR(bundle.quotient.dist(a, b), y.dist(a + 1, b + 1), 1e-10);
}

TEST(Warped, CollapsedFiberAndDisconnection) {
  const auto y = flat_interval(5, 0.0, 1.0), z = cycle(6);
  const Vec wd{{0.0, 0.5, 1.0, 0.5, 0.0}};
  const auto w = warped_product(y, z, wd, Vec::Ones(5));
  EXPECT_EQ(w.space.size(), 1 + 6 + 6 + 6 + 1);
  EXPECT_EQ(w.partition.num_classes, 5);
  EXPECT_TRUE(validate_space(w.space).ok());
  EXPECT_THROW(warped_product(y, z, Vec::Ones(5), Vec{{1.0, 1.0, 0.0, 1.0, 1.0}}), GenerationError);
  EXPECT_THROW(warped_product(y, z, Vec::Ones(4), Vec::Ones(5)), GenerationError);
}

TEST(Group, RotationReflectionIdentity) {
  const auto c = cycle(8);
  std::vector<Index> rot(8), id(8);
  for (Index i = 0; i < 8; ++i) {
    rot[static_cast<std::size_t>(i)] = (i + 1) % 8;
    id[static_cast<std::size_t>(i)] = i;
  }
  EXPECT_EQ(group_quotient(c, {rot}).num_classes, 1);
  const auto trivial = group_quotient(c, {id});
  EXPECT_EQ(trivial.num_classes, 8);
  for (Index i = 0; i < 8; ++i) EXPECT_EQ(trivial.class_of[static_cast<std::size_t>(i)], i);

  const auto grid = interval_quotient(4, 2.0, 21);
  const Index n = grid.size();
  std::vector<Index> flip(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) flip[static_cast<std::size_t>(i)] = n - 1 - i;
  const auto orbits = group_quotient(grid, {flip});
  EXPECT_EQ(orbits.num_classes, (n + 1) / 2);
  for (const auto& cls : orbits.classes()) {
    ASSERT_LE(cls.size(), 2u);
    if (cls.size() == 2) EXPECT_EQ(cls[0] + cls[1], n - 1);
  }
  EXPECT_TRUE(check_mm_foliation(build_quotient(grid, orbits), {.tol = 1e-12}).passed);
}

TEST(Group, RejectsNonIsometries) {
  const auto grid = flat_interval(6, 0.0, 1.0);
  EXPECT_THROW(group_quotient(grid, {{1, 0, 2, 3, 4, 5}}), GenerationError);
  EXPECT_THROW(group_quotient(grid, {{0, 1, 2}}), GenerationError);
  EXPECT_THROW(group_quotient(grid, {{0, 0, 2, 3, 4, 5}}), GenerationError);
  auto skew = grid;
  skew.weight = Vec{{0.1, 0.2, 0.2, 0.2, 0.2, 0.1}};
  EXPECT_NO_THROW(group_quotient(skew, {{5, 4, 3, 2, 1, 0}}));
  skew.weight = Vec{{0.15, 0.15, 0.2, 0.2, 0.2, 0.1}};
  try {
    group_quotient(skew, {{5, 4, 3, 2, 1, 0}});
    FAIL() << "expected GenerationError";
  } catch (const GenerationError& e) {
    EXPECT_NE(std::string(e.what()).find("weight"), std::string::npos) << e.what();
  }
}

TEST(Generators, AllOutputsValidate) {
  std::vector<FiniteMMSpace> strict{cycle(12), path(7, 0.3), flat_interval(40, -1.0, 2.0), sphere_mesh(1, 2.0, 9, 0),
                                     interval_quotient(9, std::sqrt(8.0), 200), gaussian_line(2.0, 100, 5.0),
                                     random_metric_space(30, 3, 14), lq_product(path(4), cycle(5), 1.0).space,
                                     lq_product(path(4), cycle(5), kInfinity).space};
  for (const auto& s : strict) {
    const auto rep = validate_space(s);
    EXPECT_TRUE(rep.ok()) << (rep.ok() ? "" : to_string(rep.violations[0].axiom));
  }
  std::vector<FiniteMMSpace> lenient{sphere_mesh(2, 1.0, 200, 1), sphere_mesh(3, 1.5, 200, 2),
                                      lq_product(path(4), random_metric_space(5, 2, 3), 2.0).space,
                                      lq_product(path(4), cycle(5), 3.0).space};
  for (const auto& s : lenient) EXPECT_TRUE(validate_space(s, {1e-12 * s.diameter()}).ok());
}

TEST(Generators, Deterministic) {
  EXPECT_EQ(random_metric_space(20, 2, 5).dist, random_metric_space(20, 2, 5).dist);
  EXPECT_EQ(random_metric_space(20, 2, 5).weight, random_metric_space(20, 2, 5).weight);
  EXPECT_NE(random_metric_space(20, 2, 5).dist, random_metric_space(20, 2, 6).dist);
  EXPECT_EQ(interval_quotient(9, 3.0, 100).weight, interval_quotient(9, 3.0, 100).weight);
}

}  // namespace
}  // namespace folio
