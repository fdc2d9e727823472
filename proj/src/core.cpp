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

#include "folio/core.hpp"

#include <numeric>
#include <sstream>

namespace folio {

std::string_view to_string(CoordKind kind) {
  switch (kind) {
    case CoordKind::sphere: return "sphere";
    case CoordKind::euclidean: return "euclidean";
    case CoordKind::interval: return "interval";
  }
  return "unknown";
}

CoordKind coord_kind_from_string(std::string_view name) {
  if (name == "sphere") return CoordKind::sphere;
  if (name == "euclidean") return CoordKind::euclidean;
  if (name == "interval") return CoordKind::interval;
  throw StructuralError("unknown coordinate kind '" + std::string(name) + "'");
}

std::string_view to_string(Axiom axiom) {
  switch (axiom) {
    case Axiom::non_finite: return "non_finite";
    case Axiom::nonzero_diagonal: return "nonzero_diagonal";
    case Axiom::asymmetric: return "asymmetric";
    case Axiom::non_positive_distance: return "non_positive_distance";
    case Axiom::triangle: return "triangle";
    case Axiom::non_positive_weight: return "non_positive_weight";
    case Axiom::unnormalized: return "unnormalized";
  }
  return "unknown";
}

std::vector<std::vector<Index>> Partition::classes() const {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(num_classes));
  for (Index i = 0; i < size(); ++i) out[static_cast<std::size_t>(class_of[i])].push_back(i);
  return out;
}

Partition Partition::from_classes(const std::vector<std::vector<Index>>& classes, Index n) {
  Partition p;
  p.class_of.assign(static_cast<std::size_t>(n), -1);
  p.num_classes = static_cast<Index>(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes[c].empty()) throw PartitionError("partition class " + std::to_string(c) + " is empty");
    for (Index i : classes[c]) {
      if (i < 0 || i >= n) throw PartitionError("partition index " + std::to_string(i) + " out of range");
      if (p.class_of[static_cast<std::size_t>(i)] != -1)
        throw PartitionError("point " + std::to_string(i) + " appears in two classes");
      p.class_of[static_cast<std::size_t>(i)] = static_cast<Index>(c);
    }
  }
  for (Index i = 0; i < n; ++i)
    if (p.class_of[static_cast<std::size_t>(i)] == -1)
      throw PartitionError("point " + std::to_string(i) + " is in no class");
  return p;
}

Partition Partition::trivial(Index n) {
  Partition p;
  p.class_of.resize(static_cast<std::size_t>(n));
  std::iota(p.class_of.begin(), p.class_of.end(), Index{0});
  p.num_classes = n;
  return p;
}

Partition Partition::single(Index n) {
  Partition p;
  p.class_of.assign(static_cast<std::size_t>(n), 0);
  p.num_classes = n > 0 ? 1 : 0;
  return p;
}

void check_partition(const Partition& partition, Index n) {
  if (partition.size() != n)
    throw PartitionError("partition covers " + std::to_string(partition.size()) + " points, space has " +
                         std::to_string(n));
  std::vector<Index> count(static_cast<std::size_t>(partition.num_classes), 0);
  for (Index c : partition.class_of) {
    if (c < 0 || c >= partition.num_classes) throw PartitionError("class index out of range");
    ++count[static_cast<std::size_t>(c)];
  }
  for (std::size_t c = 0; c < count.size(); ++c)
    if (count[c] == 0) throw PartitionError("partition class " + std::to_string(c) + " is empty");
}

void require_valid(const FiniteMMSpace& space, const ValidationOptions& opts) {
  const auto report = validate_space(space, opts);
  if (report.ok()) return;
  const auto& v = report.violations.front();
  std::ostringstream os;
  os << "invalid space: " << to_string(v.axiom) << " at (";
  for (std::size_t k = 0; k < v.indices.size(); ++k) os << (k ? "," : "") << v.indices[k];
  os << "), defect " << v.defect;
  throw DomainError(os.str());
}

void require_probability(const Vec& p, Index n, std::string_view what) {
  if (p.size() != n)
    throw StructuralError(std::string(what) + ": expected " + std::to_string(n) + " entries, got " +
                          std::to_string(p.size()));
  if (!p.allFinite() || (p.array() < 0).any())
    throw DomainError(std::string(what) + ": entries must be finite and non-negative");
  if (std::abs(p.sum() - 1.0) > kProbTol)
    throw DomainError(std::string(what) + ": mass " + std::to_string(p.sum()) + " is not 1");
}

std::vector<std::string> index_labels(Index n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

FiniteMMSpace permute(const FiniteMMSpace& space, const std::vector<Index>& perm) {
  const Index n = space.size();
  FiniteMMSpace out;
  out.dist.resize(n, n);
  out.weight.resize(n);
  out.labels.resize(static_cast<std::size_t>(n));
  Index new_base = 0;
  for (Index a = 0; a < n; ++a) {
    const Index pa = perm[static_cast<std::size_t>(a)];
    out.weight(a) = space.weight(pa);
    out.labels[static_cast<std::size_t>(a)] = space.labels[static_cast<std::size_t>(pa)];
    if (pa == space.base) new_base = a;
    for (Index b = 0; b < n; ++b) out.dist(a, b) = space.dist(pa, perm[static_cast<std::size_t>(b)]);
  }
  out.base = new_base;
  if (space.coords) {
    Coords<double> c{space.coords->kind, Mat(n, space.coords->data.cols())};
    for (Index a = 0; a < n; ++a) c.data.row(a) = space.coords->data.row(perm[static_cast<std::size_t>(a)]);
    out.coords = std::move(c);
  }
  return out;
}

}  // namespace folio
