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

#include "folio/foliation.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "folio/parallel.hpp"
#include "folio/transport.hpp"

namespace folio {

std::string_view to_string(Certification c) {
  switch (c) {
    case Certification::none: return "none";
    case Certification::metric_foliation: return "metric_foliation";
    case Certification::mm_foliation: return "mm_foliation";
  }
  return "unknown";
}

ProbVector FoliationBundle::fiber_measure(Index y) const {
  ProbVector out = ProbVector::Zero(total.size());
  const auto& f = fibers.at(static_cast<std::size_t>(y));
  for (std::size_t k = 0; k < f.support.size(); ++k) out(f.support[k]) = f.mass(static_cast<Index>(k));
  return out;
}

std::vector<FiberMeasure> disintegrate(const FiniteMMSpace& space, const Partition& partition) {
  check_partition(partition, space.size());
  std::vector<FiberMeasure> fibers(static_cast<std::size_t>(partition.num_classes));
  for (Index i = 0; i < space.size(); ++i)
    fibers[static_cast<std::size_t>(partition.class_of[static_cast<std::size_t>(i)])].support.push_back(i);
  for (auto& f : fibers) {
    f.mass.resize(static_cast<Index>(f.support.size()));
    double total = 0;
    for (Index i : f.support) total += space.weight(i);
    for (std::size_t k = 0; k < f.support.size(); ++k) f.mass(static_cast<Index>(k)) = space.weight(f.support[k]) / total;
  }
  return fibers;
}

namespace {

// near(x, y) = min over x' in class y of d(x, x').
Mat point_to_class(const FiniteMMSpace& space, const Partition& partition) {
  const Index n = space.size(), k = partition.num_classes;
  Mat near = Mat::Constant(n, k, std::numeric_limits<double>::infinity());
  for (Index j = 0; j < n; ++j) {
    const Index cj = partition.class_of[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) near(i, cj) = std::min(near(i, cj), space.dist(i, j));
  }
  return near;
}

}  // namespace

FoliationBundle build_quotient(const FiniteMMSpace& space, const Partition& partition) {
  check_partition(partition, space.size());
  const Index k = partition.num_classes;
  FoliationBundle bundle;
  bundle.total = space;
  bundle.partition = partition;
  bundle.fibers = disintegrate(space, partition);

  const Mat near = point_to_class(space, partition);
  FiniteMMSpace& q = bundle.quotient;
  q.dist = Mat::Constant(k, k, std::numeric_limits<double>::infinity());
  q.weight = pushforward(partition, space.weight);
  for (Index i = 0; i < space.size(); ++i) {
    const Index ci = partition.class_of[static_cast<std::size_t>(i)];
    for (Index y = 0; y < k; ++y) q.dist(ci, y) = std::min(q.dist(ci, y), near(i, y));
  }
  for (Index y = 0; y < k; ++y) q.dist(y, y) = 0.0;
  // Symmetric by construction up to min-order; enforce bitwise symmetry.
  for (Index a = 0; a < k; ++a)
    for (Index b = a + 1; b < k; ++b) q.dist(b, a) = q.dist(a, b) = std::min(q.dist(a, b), q.dist(b, a));

  q.base = partition.class_of[static_cast<std::size_t>(space.base)];
  q.labels.reserve(static_cast<std::size_t>(k));
  const auto members = partition.classes();
  for (Index y = 0; y < k; ++y) {
    if (members[static_cast<std::size_t>(y)].size() == 1)
      q.labels.push_back(space.labels[static_cast<std::size_t>(members[static_cast<std::size_t>(y)][0])]);
    else
      q.labels.push_back("[" + std::to_string(y) + "]");
  }

  double worst = 0;
  for (Index j = 0; j < k; ++j) {
    Mat excess = q.dist;
    excess.colwise() -= q.dist.col(j);
    excess.rowwise() -= q.dist.row(j);
    worst = std::max(worst, excess.maxCoeff());
  }
  bundle.quotient_triangle_defect = worst;
  bundle.quotient_metric_valid = worst <= 0.0;
  return bundle;
}

namespace {

FoliationReport metric_sweep(const FoliationBundle& bundle, double tol, const std::vector<std::pair<Index, Index>>& pairs) {
  const auto& space = bundle.total;
  const auto& partition = bundle.partition;
  const Mat near = point_to_class(space, partition);
  const auto& dstar = bundle.quotient.dist;

  FoliationReport report;
  report.tol = tol;
  report.pairs.reserve(pairs.size());
  std::vector<std::size_t> slot(static_cast<std::size_t>(bundle.num_classes() * bundle.num_classes()), SIZE_MAX);
  for (const auto& [a, b] : pairs) {
    PairRecord rec;
    rec.y0 = a;
    rec.y1 = b;
    rec.dstar = dstar(a, b);
    slot[static_cast<std::size_t>(a * bundle.num_classes() + b)] = report.pairs.size();
    slot[static_cast<std::size_t>(b * bundle.num_classes() + a)] = report.pairs.size();
    report.pairs.push_back(rec);
  }
  for (Index x = 0; x < space.size(); ++x) {
    const Index cx = partition.class_of[static_cast<std::size_t>(x)];
    for (Index y = 0; y < bundle.num_classes(); ++y) {
      if (y == cx) continue;
      const std::size_t s = slot[static_cast<std::size_t>(cx * bundle.num_classes() + y)];
      if (s == SIZE_MAX) continue;
      const double defect = std::abs(near(x, y) - dstar(cx, y));
      auto& rec = report.pairs[s];
      if (rec.metric_worst_point < 0 || defect > rec.metric_defect) {
        rec.metric_defect = defect;
        rec.metric_worst_point = x;
      }
      if (report.worst_point < 0 || defect > report.max_metric_defect) {
        report.max_metric_defect = defect;
        report.worst_point = x;
        report.worst_class = cx;
        report.worst_other_class = y;
      }
    }
  }
  report.passed = report.max_metric_defect <= tol;
  report.level = report.passed ? Certification::metric_foliation : Certification::none;
  return report;
}

std::vector<std::pair<Index, Index>> all_pairs(Index k) {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(static_cast<std::size_t>(k * (k - 1) / 2));
  for (Index a = 0; a < k; ++a)
    for (Index b = a + 1; b < k; ++b) out.emplace_back(a, b);
  return out;
}

double fiber_wasserstein(const FoliationBundle& bundle, Index y0, Index y1, double q) {
  const auto& f0 = bundle.fibers[static_cast<std::size_t>(y0)];
  const auto& f1 = bundle.fibers[static_cast<std::size_t>(y1)];
  Mat cost(static_cast<Index>(f0.support.size()), static_cast<Index>(f1.support.size()));
  for (Index b = 0; b < cost.cols(); ++b)
    for (Index a = 0; a < cost.rows(); ++a) {
      const double d = bundle.total.dist(f0.support[static_cast<std::size_t>(a)], f1.support[static_cast<std::size_t>(b)]);
      cost(a, b) = q == 1.0 ? d : (q == 2.0 ? d * d : std::pow(d, q));
    }
  const double c = solve_ot_matrix(cost, f0.mass, f1.mass).cost;
  return std::pow(std::max(c, 0.0), 1.0 / q);
}

}  // namespace

FoliationReport check_metric_foliation(const FoliationBundle& bundle, double tol) {
  return metric_sweep(bundle, tol, all_pairs(bundle.num_classes()));
}

FoliationReport check_mm_foliation(const FoliationBundle& bundle, const MMFoliationOptions& opts) {
  const Index k = bundle.num_classes();
  std::vector<std::pair<Index, Index>> pairs;
  bool exhaustive = true;
  if (k > opts.sampled_above || opts.pair_budget) {
    const std::size_t total = static_cast<std::size_t>(k * (k - 1) / 2);
    const std::size_t budget = std::min(total, opts.pair_budget.value_or(static_cast<std::size_t>(4 * k)));
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<Index> pick(0, k - 1);
    std::set<std::pair<Index, Index>> chosen;
    while (chosen.size() < budget) {
      Index a = pick(rng), b = pick(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      chosen.emplace(a, b);
    }
    pairs.assign(chosen.begin(), chosen.end());
    exhaustive = budget == total;
  } else {
    pairs = all_pairs(k);
  }

  FoliationReport report = metric_sweep(bundle, opts.tol, pairs);
  report.exhaustive = exhaustive;
  const bool metric_ok = report.passed;

  std::vector<double> w2(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t s) { w2[s] = fiber_wasserstein(bundle, pairs[s].first, pairs[s].second, 2.0); });
  report.max_w2_defect = 0;
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    auto& rec = report.pairs[s];
    rec.w2 = w2[s];
    rec.w2_defect = std::abs(w2[s] - rec.dstar);
    report.max_w2_defect = std::max(report.max_w2_defect, rec.w2_defect);
  }
  report.passed = metric_ok && report.max_w2_defect <= opts.tol;

  if (report.passed) {
    std::array<double, 3> worst{0, 0, 0};
    const std::array<double, 3> exps{1.0, 2.0, 3.0};
    for (std::size_t e = 0; e < exps.size(); ++e) {
      if (exps[e] == 2.0) {
        worst[e] = report.max_w2_defect;
        continue;
      }
      std::vector<double> d(pairs.size());
      parallel_for(pairs.size(), [&](std::size_t s) {
        d[s] = std::abs(fiber_wasserstein(bundle, pairs[s].first, pairs[s].second, exps[e]) - report.pairs[s].dstar);
      });
      worst[e] = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
    }
    report.wq_defects = worst;
  }
  report.level = report.passed ? Certification::mm_foliation
                               : (metric_ok ? Certification::metric_foliation : Certification::none);
  return report;
}

FoliationBundle certified(FoliationBundle bundle, const FoliationReport& report) {
  if (static_cast<int>(report.level) > static_cast<int>(bundle.certification) ||
      (report.level == bundle.certification && report.level != Certification::none)) {
    bundle.certification = report.level;
    bundle.certified_tol = report.tol;
  }
  return bundle;
}

ProbVector pullback_measure(const FoliationBundle& bundle, const ProbVector& nu) {
  if (nu.size() != bundle.num_classes()) throw StructuralError("pullback_measure: nu must live on the quotient");
  ProbVector out = ProbVector::Zero(bundle.total.size());
  for (Index y = 0; y < bundle.num_classes(); ++y) {
    const auto& f = bundle.fibers[static_cast<std::size_t>(y)];
    for (std::size_t k = 0; k < f.support.size(); ++k) out(f.support[k]) = nu(y) * f.mass(static_cast<Index>(k));
  }
  return out;
}

Vec pullback_function(const FoliationBundle& bundle, const Vec& f) {
  if (f.size() != bundle.num_classes()) throw StructuralError("pullback_function: f must live on the quotient");
  Vec out(bundle.total.size());
  for (Index x = 0; x < out.size(); ++x) out(x) = f(bundle.partition.class_of[static_cast<std::size_t>(x)]);
  return out;
}

Vec fiber_average(const FoliationBundle& bundle, const Vec& f) {
  if (f.size() != bundle.total.size()) throw StructuralError("fiber_average: f must live on the total space");
  Vec out = Vec::Zero(bundle.num_classes());
  for (Index y = 0; y < bundle.num_classes(); ++y) {
    const auto& fib = bundle.fibers[static_cast<std::size_t>(y)];
    double acc = 0;
    for (std::size_t k = 0; k < fib.support.size(); ++k) acc += fib.mass(static_cast<Index>(k)) * f(fib.support[k]);
    out(y) = acc;
  }
  return out;
}

}  // namespace folio
