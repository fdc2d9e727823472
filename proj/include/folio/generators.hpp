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

#include <cstdint>
#include <limits>
#include <vector>

#include "folio/core.hpp"

namespace folio {

/// A generated space together with its canonical partition.
struct FoliatedSpace {
  FiniteMMSpace space;
  Partition partition;
};

/// Rounds x to a multiple of 2^(e - bits) where 2^e bounds scale. Sums of a
/// few thousand such values are exact, so metrics assembled from quantized
/// lengths satisfy the triangle inequality without rounding defects.
double quantize(double x, double scale, int bits = 40);

/// The step used by quantize.
double quantum_of(double scale, int bits = 40);

/// Regular N-gon on the circle of circumference `circumference`: arc
/// distances h * min(k, N - k) with a quantized spacing h, uniform weight,
/// planar coordinates. N >= 3.
FiniteMMSpace cycle(Index n, double circumference = 2.0 * 3.14159265358979323846);

/// Path graph metric on N nodes, spacing h, uniform weight, interval coords.
FiniteMMSpace path(Index n, double spacing = 1.0);

/// Uniform interval grid of B nodes spanning [a, b] with uniform weight.
FiniteMMSpace flat_interval(Index b_nodes, double a, double b);

/// Points of S^n(r): an exact regular N-gon for n = 1, seeded uniform samples
/// for n >= 2. Geodesic distance r * angle(u, v) with the angle evaluated as
/// 2 asin(|u - v| / 2) on unit vectors; uniform weight; base is the first
/// point; coords hold the ambient points.
FiniteMMSpace sphere_mesh(int n, double r, Index points, std::uint64_t seed);

/// Bins mesh points by d(x, base) - pi r / 2 into `bands` equal-width bands
/// over [-pi r / 2, pi r / 2]; empty bands are dropped and the rest renumbered.
Partition sphere_distance_partition(const FiniteMMSpace& mesh, Index bands);

/// Cell-centred grid of B nodes on [-pi r / 2, pi r / 2] with weights
/// proportional to cos^(n-1)(t / r), evaluated in the log domain. Nodes whose
/// weight falls below 1e-20 of the peak are trimmed (symmetrically); keeping
/// them would only add Laplacian rows of size ~ m_(i+1) / (m_i h^2) that ruin
/// the eigensolver's absolute accuracy. Base is the centre node.
FiniteMMSpace interval_quotient(int n, double r, Index b_nodes);

/// Grid of B nodes on [-cutoff sigma, cutoff sigma] (endpoints included)
/// with renormalized Gaussian weights. Requires cutoff >= 4.
FiniteMMSpace gaussian_line(double variance, Index b_nodes, double cutoff);

/// Mass of the standard Gaussian outside [-cutoff, cutoff].
double gaussian_tail_mass(double cutoff);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Y x Z with the l_q combination of the factor metrics (q = kInfinity for
/// the max metric), product weights, and the partition by Y. Point (y, z)
/// has index y * |Z| + z.
FoliatedSpace lq_product(const FiniteMMSpace& y, const FiniteMMSpace& z, double q);

struct WarpOptions {
  /// Neighbour offsets up to this radius (in grid steps) become edges.
  int stencil = 4;
  /// Simpson panels per edge for the length integral.
  int panels = 8;
};

/// Discrete warped product Y x_w Z. Y must be an interval grid, Z an
/// interval grid or a regular circle from cycle(). Vertices are restricted to
/// w_m > 0 and fibers with w_d = 0 collapse to one vertex. Edge lengths
/// integrate sqrt(dt^2 + w_d(t)^2 ds^2) along straight grid segments (w_d
/// linearly interpolated), quantized; distances are shortest paths. Weights
/// are proportional to w_m(y) m_Y(y) m_Z(z). Throws GenerationError when the
/// support is disconnected.
FoliatedSpace warped_product(const FiniteMMSpace& y, const FiniteMMSpace& z, const Vec& w_d, const Vec& w_m,
                             const WarpOptions& opts = {});

/// Orbits of the group generated by permutations that must preserve dist and
/// weight exactly; throws GenerationError naming the first violated pair.
/// Classes are numbered by their smallest member.
Partition group_quotient(const FiniteMMSpace& space, const std::vector<std::vector<Index>>& generators);

/// Random metric near the Euclidean one of `dim`-dimensional uniform points:
/// quantized distances closed under shortest paths, random positive weights.
FiniteMMSpace random_metric_space(Index n, int dim, std::uint64_t seed);

}  // namespace folio
