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
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "folio/errors.hpp"

namespace folio {

using Index = Eigen::Index;

/// Normalization tolerance for probability vectors.
inline constexpr double kProbTol = 1e-12;
/// Normalization tolerance for densities against a measure.
inline constexpr double kDensityTol = 1e-10;

enum class CoordKind { sphere, euclidean, interval };

std::string_view to_string(CoordKind kind);
CoordKind coord_kind_from_string(std::string_view name);

/// Optional embedding used by generators and geometry-specific routines.
/// One row per point: ambient coordinates for spheres and point clouds, a
/// single column for interval grids.
template <typename Scalar>
struct Coords {
  CoordKind kind = CoordKind::euclidean;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> data;
};

/// Finite metric measure space (X, d, m, x̄) with a dense distance matrix.
template <typename Scalar>
struct MMSpace {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<std::string> labels;
  Matrix dist;
  Vector weight;
  Index base = 0;
  std::optional<Coords<Scalar>> coords;

  Index size() const { return weight.size(); }
  Scalar diameter() const { return size() == 0 ? Scalar(0) : dist.maxCoeff(); }
};

using FiniteMMSpace = MMSpace<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Probability vector on the points of a space.
using ProbVector = Eigen::VectorXd;
/// Density against the weight of a space: sum(rho .* weight) == 1.
using DensityVector = Eigen::VectorXd;

/// Assignment of each point to a class, the map p : X -> Y.
struct Partition {
  std::vector<Index> class_of;
  Index num_classes = 0;

  Index size() const { return static_cast<Index>(class_of.size()); }
  /// Member indices of every class, in increasing point order.
  std::vector<std::vector<Index>> classes() const;
  static Partition from_classes(const std::vector<std::vector<Index>>& classes, Index n);
  static Partition trivial(Index n);
  static Partition single(Index n);
};

/// Checks totality and non-emptiness; throws PartitionError.
void check_partition(const Partition& partition, Index n);

// ---------------------------------------------------------------------------
// Validation

enum class Axiom {
  non_finite,
  nonzero_diagonal,
  asymmetric,
  non_positive_distance,
  triangle,
  non_positive_weight,
  unnormalized,
};

std::string_view to_string(Axiom axiom);

struct Violation {
  Axiom axiom;
  /// Worst offender: one, two or three point indices depending on the axiom.
  std::vector<Index> indices;
  double defect = 0;
  /// Number of offending entries (pairs, triples or points).
  std::size_t count = 0;
};

struct ValidationOptions {
  /// Slack allowed in d(i,k) <= d(i,j) + d(j,k). Zero is strict mode.
  double triangle_tol = 0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool lenient = false;
  double triangle_tol = 0;

  bool ok() const { return violations.empty(); }
  const Violation* find(Axiom axiom) const {
    for (const auto& v : violations)
      if (v.axiom == axiom) return &v;
    return nullptr;
  }
};

namespace detail {

template <typename Scalar>
void note(std::optional<Violation>& slot, Axiom axiom, std::vector<Index> idx, Scalar defect) {
  if (!slot) {
    slot = Violation{axiom, std::move(idx), static_cast<double>(defect), 1};
    return;
  }
  ++slot->count;
  if (static_cast<double>(defect) > slot->defect) {
    slot->defect = static_cast<double>(defect);
    slot->indices = std::move(idx);
  }
}

}  // namespace detail

/// Checks every axiom of a finite metric measure space and reports the worst
/// offender per axiom. Throws StructuralError when shapes disagree.
template <typename Scalar>
ValidationReport validate_space(const MMSpace<Scalar>& space, const ValidationOptions& opts = {}) {
  const Index n = space.weight.size();
  if (static_cast<Index>(space.labels.size()) != n || space.dist.rows() != n ||
      space.dist.cols() != n)
    throw StructuralError("validate_space: labels, dist and weight sizes disagree");
  if (n == 0) throw StructuralError("validate_space: empty space");
  if (space.base < 0 || space.base >= n) throw StructuralError("validate_space: base out of range");
  if (space.coords && space.coords->data.rows() != n)
    throw StructuralError("validate_space: coordinate rows do not match point count");

  std::optional<Violation> non_finite, diag, asym, nonpos, tri, wpos, wsum;
  const auto& d = space.dist;

  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (!std::isfinite(static_cast<double>(d(i, j))))
        detail::note(non_finite, Axiom::non_finite, {i, j}, std::numeric_limits<double>::infinity());
  for (Index i = 0; i < n; ++i)
    if (!std::isfinite(static_cast<double>(space.weight(i))))
      detail::note(non_finite, Axiom::non_finite, {i}, std::numeric_limits<double>::infinity());

  ValidationReport report;
  report.lenient = opts.triangle_tol > 0;
  report.triangle_tol = opts.triangle_tol;
  if (non_finite) {
    report.violations.push_back(*non_finite);
    return report;
  }

  for (Index i = 0; i < n; ++i) {
    if (d(i, i) != Scalar(0)) detail::note(diag, Axiom::nonzero_diagonal, {i}, std::abs(d(i, i)));
    for (Index j = i + 1; j < n; ++j) {
      if (d(i, j) != d(j, i)) detail::note(asym, Axiom::asymmetric, {i, j}, std::abs(d(i, j) - d(j, i)));
      const Scalar low = std::min(d(i, j), d(j, i));
      if (low <= Scalar(0)) detail::note(nonpos, Axiom::non_positive_distance, {i, j}, -low);
    }
  }

  // d(i,k) - d(i,j) - d(j,k) for fixed j, vectorized over (i,k).
  using Matrix = typename MMSpace<Scalar>::Matrix;
  Matrix excess(n, n);
  for (Index j = 0; j < n; ++j) {
    excess.noalias() = d;
    excess.colwise() -= d.col(j);
    excess.rowwise() -= d.row(j);
    Index bi = 0, bk = 0;
    const Scalar worst = excess.maxCoeff(&bi, &bk);
    if (worst > Scalar(opts.triangle_tol)) {
      const auto hits = (excess.array() > Scalar(opts.triangle_tol)).count();
      detail::note(tri, Axiom::triangle, {bi, j, bk}, worst);
      tri->count += static_cast<std::size_t>(hits) - 1;
    }
  }

  Scalar total(0);
  for (Index i = 0; i < n; ++i) {
    total += space.weight(i);
    if (space.weight(i) <= Scalar(0)) detail::note(wpos, Axiom::non_positive_weight, {i}, -space.weight(i));
  }
  if (std::abs(static_cast<double>(total) - 1.0) > kProbTol)
    detail::note(wsum, Axiom::unnormalized, {}, std::abs(total - Scalar(1)));

  for (auto* slot : {&diag, &asym, &nonpos, &tri, &wpos, &wsum})
    if (*slot) report.violations.push_back(**slot);
  return report;
}

/// Throws DomainError naming the first violation unless the space is valid.
void require_valid(const FiniteMMSpace& space, const ValidationOptions& opts = {});

// ---------------------------------------------------------------------------
// Measures

/// Sum of weight(i) * exp(-c^2 d(base, i)^2). Always finite on a finite space.
template <typename Scalar>
Scalar vg_integral(const MMSpace<Scalar>& space, Scalar c) {
  if (!(c > Scalar(0))) throw DomainError("vg_integral: c must be positive");
  const auto r = space.dist.row(space.base).transpose().array();
  return (space.weight.array() * (-(c * c) * r.square()).exp()).sum();
}

/// Relative entropy sum mu_i log(mu_i / w_i) with 0 log 0 = 0.
template <typename DerivedMu, typename DerivedW>
typename DerivedMu::Scalar relative_entropy(const Eigen::MatrixBase<DerivedMu>& mu,
                                            const Eigen::MatrixBase<DerivedW>& weight) {
  using Scalar = typename DerivedMu::Scalar;
  if (mu.size() != weight.size()) throw StructuralError("relative_entropy: size mismatch");
  Scalar acc(0);
  for (Index i = 0; i < mu.size(); ++i)
    if (mu(i) > Scalar(0)) acc += mu(i) * std::log(mu(i) / weight(i));
  return acc;
}

template <typename Derived>
typename Derived::Scalar relative_entropy(const Eigen::MatrixBase<Derived>& mu, const FiniteMMSpace& space) {
  return relative_entropy(mu, space.weight);
}

/// True when p is non-negative and sums to one within tol.
template <typename Derived>
bool is_probability(const Eigen::MatrixBase<Derived>& p, double tol = kProbTol) {
  return p.size() > 0 && (p.array() >= 0).all() && std::abs(p.sum() - 1.0) <= tol;
}

/// Throws DomainError unless p is a probability vector of length n.
void require_probability(const Vec& p, Index n, std::string_view what);

/// Density of mu against weight: rho = mu ./ weight.
inline DensityVector density_of(const ProbVector& mu, const Vec& weight) {
  return mu.cwiseQuotient(weight);
}

/// Measure of a density: mu = rho .* weight.
inline ProbVector measure_of(const DensityVector& rho, const Vec& weight) {
  return rho.cwiseProduct(weight);
}

/// Integral of f against weight.
template <typename Derived>
double integrate(const Eigen::MatrixBase<Derived>& f, const Vec& weight) {
  return f.dot(weight);
}

/// Dirac mass at index i on n points.
inline ProbVector dirac(Index n, Index i) {
  ProbVector p = ProbVector::Zero(n);
  p(i) = 1.0;
  return p;
}

/// Uniform probability vector on n points.
inline ProbVector uniform(Index n) { return ProbVector::Constant(n, 1.0 / static_cast<double>(n)); }

/// Default labels "0", "1", ...
std::vector<std::string> index_labels(Index n);

/// Same space with points reordered: new point k is old point perm[k].
FiniteMMSpace permute(const FiniteMMSpace& space, const std::vector<Index>& perm);

}  // namespace folio
