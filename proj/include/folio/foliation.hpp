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
#include <limits>
#include <optional>
#include <vector>

#include "folio/core.hpp"

namespace folio {

enum class Certification { none, metric_foliation, mm_foliation };

std::string_view to_string(Certification c);

/// Fiber measure mu_y: a probability vector carried by one class.
struct FiberMeasure {
  std::vector<Index> support;
  Vec mass;
};

/// A partition of a space together with its quotient (X*, d*, m*) and the
/// disintegration {mu_y}. Immutable once built; certification upgrades
/// produce a new value.
struct FoliationBundle {
  FiniteMMSpace total;
  Partition partition;
  FiniteMMSpace quotient;
  std::vector<FiberMeasure> fibers;

  Certification certification = Certification::none;
  /// Tolerance recorded with the certificate.
  double certified_tol = 0;
  /// False when d* breaks the triangle inequality (the partition is then not
  /// a metric foliation); quotient_triangle_defect holds the worst excess.
  bool quotient_metric_valid = true;
  double quotient_triangle_defect = 0;

  Index num_classes() const { return partition.num_classes; }
  /// mu_y as a dense probability vector on the total space.
  ProbVector fiber_measure(Index y) const;
};

/// mu_y[x] = m(x) / m(p^{-1}(y)) on the class of y, zero elsewhere.
std::vector<FiberMeasure> disintegrate(const FiniteMMSpace& space, const Partition& partition);

/// d*(y, y') = min distance between the classes, m* = p_* m, base = class of
/// the total base point. Never throws on a bad quotient metric; it flags it.
FoliationBundle build_quotient(const FiniteMMSpace& space, const Partition& partition);

/// Per class-pair record of a certification sweep.
struct PairRecord {
  Index y0 = 0, y1 = 0;
  double dstar = 0;
  /// Worst |d(x, F') - d*(F, F')| over x in either class.
  double metric_defect = 0;
  Index metric_worst_point = -1;
  /// W_2(mu_y0, mu_y1) and |W_2 - d*|; NaN when not evaluated.
  double w2 = std::numeric_limits<double>::quiet_NaN();
  double w2_defect = std::numeric_limits<double>::quiet_NaN();
};

struct FoliationReport {
  bool passed = false;
  double tol = 0;
  Certification level = Certification::none;
  /// All class pairs were checked (false in sampled mode).
  bool exhaustive = true;
  std::vector<PairRecord> pairs;

  double max_metric_defect = 0;
  /// Worst point x and the class pair (F containing x, F') it was measured against.
  Index worst_point = -1;
  Index worst_class = -1;
  Index worst_other_class = -1;

  double max_w2_defect = 0;
  /// Worst |W_q(mu_y, mu_y') - d*| for q = 1, 2, 3, filled once the W_2
  /// clause passes. Diagnostic only; it does not affect `passed`.
  std::optional<std::array<double, 3>> wq_defects;
};

/// Passes iff |d(x, F') - d*(F, F')| <= tol for every x in F and class pair.
FoliationReport check_metric_foliation(const FoliationBundle& bundle, double tol);

struct MMFoliationOptions {
  double tol = 1e-9;
  /// Above this many classes, or when pair_budget is set, a seeded sample of
  /// pairs is checked and the report is marked non-exhaustive.
  Index sampled_above = 300;
  std::optional<std::size_t> pair_budget;
  std::uint64_t seed = 0;
};

/// Metric-foliation check plus |W_2(mu_y, mu_y') - d*(y, y')| <= tol on every
/// pair; on success also records the W_1 and W_3 defects.
FoliationReport check_mm_foliation(const FoliationBundle& bundle, const MMFoliationOptions& opts);

/// Copy of the bundle stamped with the report's certification level.
FoliationBundle certified(FoliationBundle bundle, const FoliationReport& report);

/// (p^* nu)[x] = nu(p(x)) mu_{p(x)}[x].
ProbVector pullback_measure(const FoliationBundle& bundle, const ProbVector& nu);

/// (p^* f)[x] = f[p(x)].
Vec pullback_function(const FoliationBundle& bundle, const Vec& f);

/// g[y] = sum_x mu_y[x] f[x].
Vec fiber_average(const FoliationBundle& bundle, const Vec& f);

}  // namespace folio
