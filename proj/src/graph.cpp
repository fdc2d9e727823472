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

#include <cmath>
#include <numbers>
#include <queue>

#include "folio/spectral.hpp"
#include "folio/transport.hpp"

namespace folio {

SpMat GraphOperator::stiffness() const {
  const Vec degree = conductance * Vec::Ones(size());
  SpMat k = -conductance;
  for (Index i = 0; i < size(); ++i) k.coeffRef(i, i) += degree(i);
  k.makeCompressed();
  return k;
}

bool is_connected(const SpMat& conductance) {
  const Index n = conductance.rows();
  if (n == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  Index reached = 1;
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    for (SpMat::InnerIterator it(conductance, v); it; ++it) {
      if (it.value() > 0 && !seen[static_cast<std::size_t>(it.index())]) {
        seen[static_cast<std::size_t>(it.index())] = 1;
        ++reached;
        stack.push_back(it.index());
      }
    }
  }
  return reached == n;
}

GraphOperator make_graph(Vec vertex_measure, SpMat conductance, GraphProvenance provenance, double bandwidth) {
  const Index n = vertex_measure.size();
  if (conductance.rows() != n || conductance.cols() != n)
    throw StructuralError("make_graph: conductance shape does not match the vertex measure");
  if (!vertex_measure.allFinite() || (vertex_measure.array() <= 0).any())
    throw DomainError("make_graph: vertex measure must be finite and strictly positive");
  conductance.prune(0.0);
  conductance.makeCompressed();
  for (Index k = 0; k < conductance.outerSize(); ++k)
    for (SpMat::InnerIterator it(conductance, k); it; ++it) {
      if (!std::isfinite(it.value()) || it.value() < 0) throw DomainError("make_graph: negative conductance");
      if (it.row() == it.col()) throw DomainError("make_graph: conductance has a nonzero diagonal");
    }
  if ((SpMat(conductance.transpose()) - conductance).norm() != 0.0)
    throw DomainError("make_graph: conductance is not symmetric");
  if (!is_connected(conductance)) throw DomainError("make_graph: graph is disconnected");
  GraphOperator g;
  g.vertex_measure = std::move(vertex_measure);
  g.conductance = std::move(conductance);
  g.provenance = provenance;
  g.bandwidth = bandwidth;
  return g;
}

GraphOperator build_kernel_graph(const FiniteMMSpace& space, double bandwidth, const KernelScaling& scaling) {
  if (!(bandwidth > 0) || !std::isfinite(bandwidth)) throw DomainError("build_kernel_graph: bandwidth must be positive");
  const Index n = space.size();
  double scale = 1.0 / (2.0 * bandwidth);
  if (scaling.dimension > 0 && !scaling.density_corrected) {
    if (!(scaling.volume > 0)) throw DomainError("build_kernel_graph: calibration needs a positive volume");
    scale *= 2.0 * scaling.volume / std::pow(4.0 * std::numbers::pi * bandwidth, 0.5 * scaling.dimension);
  }
  auto kernel = [&](Index i, Index j) {
    const double d = space.dist(i, j);
    return std::exp(-d * d / (4.0 * bandwidth));
  };
  // Density correction: q_i estimates the sampling density (up to a constant)
  // and the vertex measure becomes the normalized volume share m_i / q_i.
  Vec q = Vec::Ones(n), vertex = space.weight;
  if (scaling.density_corrected) {
    // The self term is left out: it is an O(1/(N t^(d/2))) upward bias.
    q = Vec::Zero(n);
    for (Index j = 0; j < n; ++j)
      for (Index i = j + 1; i < n; ++i) {
        const double k = kernel(i, j);
        q(i) += space.weight(j) * k;
        q(j) += space.weight(i) * k;
      }
    for (Index i = 0; i < n; ++i)
      if (!(q(i) > 0)) q(i) = space.weight(i);  // isolated; caught below
    vertex = space.weight.cwiseQuotient(q);
    const double s = vertex.sum();
    vertex /= s;
    scale = 1.0 / (s * bandwidth);
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n * (n - 1)));
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double w = space.weight(i) * space.weight(j) * kernel(i, j) / (q(i) * q(j)) * scale;
      if (w > 0) {
        trip.emplace_back(i, j, w);
        trip.emplace_back(j, i, w);
      }
    }
  SpMat w(n, n);
  w.setFromTriplets(trip.begin(), trip.end());
  if (!is_connected(w)) {
    // Bottleneck edge of a minimum spanning tree (Prim on the dense metric).
    std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    best[0] = 0;
    double bottleneck = 0;
    for (Index step = 0; step < n; ++step) {
      Index v = -1;
      for (Index i = 0; i < n; ++i)
        if (!in[static_cast<std::size_t>(i)] && (v < 0 || best[static_cast<std::size_t>(i)] < best[static_cast<std::size_t>(v)])) v = i;
      in[static_cast<std::size_t>(v)] = 1;
      bottleneck = std::max(bottleneck, best[static_cast<std::size_t>(v)]);
      for (Index i = 0; i < n; ++i)
        if (!in[static_cast<std::size_t>(i)]) best[static_cast<std::size_t>(i)] = std::min(best[static_cast<std::size_t>(i)], space.dist(v, i));
    }
    const double suggested = bottleneck * bottleneck / (4.0 * 600.0);
    throw BandwidthError("build_kernel_graph: graph disconnected at bandwidth " + std::to_string(bandwidth) +
                             "; try at least " + std::to_string(suggested),
                         suggested);
  }
  return make_graph(std::move(vertex), std::move(w), GraphProvenance::kernel, bandwidth);
}

GraphOperator build_grid_graph(const FiniteMMSpace& space) {
  const Index n = space.size();
  if (!space.coords) throw GeometryError("build_grid_graph: space has no coordinates");
  std::vector<Eigen::Triplet<double>> trip;
  auto edge = [&](Index i, Index j, double h) {
    const double w = 0.5 * (space.weight(i) + space.weight(j)) / (h * h);
    trip.emplace_back(i, j, w);
    trip.emplace_back(j, i, w);
  };
  if (space.coords->kind == CoordKind::interval) {
    const double h = interval_spacing(space);
    for (Index i = 0; i + 1 < n; ++i) edge(i, i + 1, h);
  } else if (space.coords->kind == CoordKind::sphere && space.coords->data.cols() == 2 && n >= 3) {
    const double h = space.dist(0, 1);
    for (Index i = 0; i < n; ++i)
      if (std::abs(space.dist(i, (i + 1) % n) - h) > 1e-9 * h)
        throw GeometryError("build_grid_graph: circle points are not a regular polygon in order");
    for (Index i = 0; i < n; ++i) edge(i, (i + 1) % n, h);
  } else {
    throw GeometryError("build_grid_graph: needs an interval grid or a regular circle");
  }
  SpMat w(n, n);
  w.setFromTriplets(trip.begin(), trip.end());
  return make_graph(space.weight, std::move(w));
}

GraphOperator product_graph(const GraphOperator& gy, const GraphOperator& gz) {
  const Index ny = gy.size(), nz = gz.size();
  Vec m(ny * nz);
  for (Index y = 0; y < ny; ++y)
    for (Index z = 0; z < nz; ++z) m(y * nz + z) = gy.vertex_measure(y) * gz.vertex_measure(z);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(gy.conductance.nonZeros() * nz + gz.conductance.nonZeros() * ny));
  for (Index k = 0; k < gy.conductance.outerSize(); ++k)
    for (SpMat::InnerIterator it(gy.conductance, k); it; ++it)
      for (Index z = 0; z < nz; ++z)
        trip.emplace_back(it.row() * nz + z, it.col() * nz + z, it.value() * gz.vertex_measure(z));
  for (Index k = 0; k < gz.conductance.outerSize(); ++k)
    for (SpMat::InnerIterator it(gz.conductance, k); it; ++it)
      for (Index y = 0; y < ny; ++y)
        trip.emplace_back(y * nz + it.row(), y * nz + it.col(), gy.vertex_measure(y) * it.value());
  SpMat w(ny * nz, ny * nz);
  w.setFromTriplets(trip.begin(), trip.end());
  return make_graph(std::move(m), std::move(w));
}

GraphOperator quotient_graph(const GraphOperator& g, const Partition& partition) {
  check_partition(partition, g.size());
  const Index k = partition.num_classes;
  Vec m = Vec::Zero(k);
  for (Index i = 0; i < g.size(); ++i) m(partition.class_of[static_cast<std::size_t>(i)]) += g.vertex_measure(i);
  std::vector<Eigen::Triplet<double>> trip;
  for (Index c = 0; c < g.conductance.outerSize(); ++c)
    for (SpMat::InnerIterator it(g.conductance, c); it; ++it) {
      const Index a = partition.class_of[static_cast<std::size_t>(it.row())];
      const Index b = partition.class_of[static_cast<std::size_t>(it.col())];
      if (a != b) trip.emplace_back(a, b, it.value());
    }
  SpMat w(k, k);
  w.setFromTriplets(trip.begin(), trip.end());
  // Duplicate sums may round differently per triangle; symmetrize exactly.
  SpMat sym = 0.5 * (w + SpMat(w.transpose()));
  return make_graph(std::move(m), std::move(sym));
}

}  // namespace folio
