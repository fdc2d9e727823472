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

#include "folio/generators.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>

#include "folio/parallel.hpp"
#include "folio/transport.hpp"

namespace folio {

namespace {

constexpr double kPi = std::numbers::pi;

// Interval grid t_i = centre + (i - (B-1)/2) h with distances |i - j| h.
FiniteMMSpace interval_grid(Index b_nodes, double centre, double h, Vec weight) {
  FiniteMMSpace s;
  s.labels = index_labels(b_nodes);
  s.dist.resize(b_nodes, b_nodes);
  for (Index j = 0; j < b_nodes; ++j)
    for (Index i = 0; i < b_nodes; ++i) s.dist(i, j) = static_cast<double>(std::abs(i - j)) * h;
  Coords<double> c{CoordKind::interval, Mat(b_nodes, 1)};
  for (Index i = 0; i < b_nodes; ++i) c.data(i, 0) = centre + (static_cast<double>(i) - 0.5 * static_cast<double>(b_nodes - 1)) * h;
  s.coords = std::move(c);
  s.weight = std::move(weight);
  s.base = (b_nodes - 1) / 2;
  return s;
}

// Weights proportional to exp(logw), trimmed where the relative weight drops
// below `floor_ratio`; returns the kept index range.
std::pair<Index, Index> normalize_log_weights(const Vec& logw, double floor_ratio, Vec& out) {
  const double top = logw.maxCoeff();
  const double cut = std::log(floor_ratio);
  Index lo = 0, hi = logw.size();
  while (lo < hi && logw(lo) - top < cut) ++lo;
  while (hi > lo && logw(hi - 1) - top < cut) --hi;
  out = (logw.segment(lo, hi - lo).array() - top).exp().matrix();
  out /= out.sum();
  return {lo, hi};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw GenerationError(what);
}

}  // namespace

double quantum_of(double scale, int bits) {
  if (!(scale > 0) || !std::isfinite(scale)) throw DomainError("quantize: scale must be positive");
  int e = 0;
  std::frexp(scale, &e);
  return std::ldexp(1.0, e - bits);
}

double quantize(double x, double scale, int bits) {
  const double quantum = quantum_of(scale, bits);
  return std::round(x / quantum) * quantum;
}

FiniteMMSpace cycle(Index n, double circumference) {
  require(n >= 3, "cycle: need at least 3 points");
  require(circumference > 0, "cycle: circumference must be positive");
  const double h = quantize(circumference / static_cast<double>(n), circumference);
  const double radius = circumference / (2 * kPi);
  FiniteMMSpace s;
  s.labels = index_labels(n);
  s.dist.resize(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Index k = std::abs(i - j);
      s.dist(i, j) = static_cast<double>(std::min(k, n - k)) * h;
    }
  Coords<double> c{CoordKind::sphere, Mat(n, 2)};
  for (Index i = 0; i < n; ++i) {
    const double a = 2 * kPi * static_cast<double>(i) / static_cast<double>(n);
    c.data(i, 0) = radius * std::cos(a);
    c.data(i, 1) = radius * std::sin(a);
  }
  s.coords = std::move(c);
  s.weight = uniform(n);
  return s;
}

FiniteMMSpace path(Index n, double spacing) {
  require(n >= 2, "path: need at least 2 points");
  require(spacing > 0, "path: spacing must be positive");
  const double h = quantize(spacing, spacing);
  FiniteMMSpace s = interval_grid(n, 0.5 * static_cast<double>(n - 1) * h, h, uniform(n));
  s.base = 0;
  return s;
}

FiniteMMSpace flat_interval(Index b_nodes, double a, double b) {
  require(b_nodes >= 2, "flat_interval: need at least 2 nodes");
  require(b > a, "flat_interval: empty interval");
  const double scale = std::max(std::abs(a), std::abs(b));
  const double h = quantize((b - a) / static_cast<double>(b_nodes - 1), b - a);
  return interval_grid(b_nodes, quantize(0.5 * (a + b), scale), h, uniform(b_nodes));
}

FiniteMMSpace sphere_mesh(int n, double r, Index points, std::uint64_t seed) {
  require(n >= 1, "sphere_mesh: dimension must be at least 1");
  require(r > 0, "sphere_mesh: radius must be positive");
  require(points >= n + 2, "sphere_mesh: need at least n + 2 points");
  if (n == 1) return cycle(points, 2 * kPi * r);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Mat u(points, n + 1);
  for (Index i = 0; i < points; ++i) {
    for (int k = 0; k <= n; ++k) u(i, k) = normal(rng);
    const double len = u.row(i).norm();
    if (len == 0) {
      --i;
      continue;
    }
    u.row(i) /= len;
  }
  FiniteMMSpace s;
  s.labels = index_labels(points);
  s.dist = Mat::Zero(points, points);
  for (Index j = 0; j < points; ++j)
    for (Index i = j + 1; i < points; ++i) {
      const double chord = (u.row(i) - u.row(j)).norm();
      const double d = r * 2.0 * std::asin(std::min(1.0, 0.5 * chord));
      s.dist(i, j) = d;
      s.dist(j, i) = d;
    }
  s.coords = Coords<double>{CoordKind::sphere, r * u};
  s.weight = uniform(points);
  return s;
}

Partition sphere_distance_partition(const FiniteMMSpace& mesh, Index bands) {
  if (!mesh.coords || mesh.coords->kind != CoordKind::sphere)
    throw GeometryError("sphere_distance_partition: sphere coordinates required");
  require(bands >= 1, "sphere_distance_partition: bands must be positive");
  const double r = mesh.coords->data.row(mesh.base).norm();
  const double width = kPi * r / static_cast<double>(bands);
  std::vector<Index> band(static_cast<std::size_t>(mesh.size()));
  std::vector<Index> used(static_cast<std::size_t>(bands), -1);
  for (Index i = 0; i < mesh.size(); ++i) {
    const double p = mesh.dist(mesh.base, i) - 0.5 * kPi * r;
    const auto b = static_cast<Index>(std::floor((p + 0.5 * kPi * r) / width));
    band[static_cast<std::size_t>(i)] = std::clamp<Index>(b, 0, bands - 1);
    used[static_cast<std::size_t>(band[static_cast<std::size_t>(i)])] = 0;
  }
  Index next = 0;
  for (auto& u : used)
    if (u == 0) u = next++;
  Partition p;
  p.num_classes = next;
  p.class_of.reserve(band.size());
  for (Index b : band) p.class_of.push_back(used[static_cast<std::size_t>(b)]);
  return p;
}

FiniteMMSpace interval_quotient(int n, double r, Index b_nodes) {
  require(n >= 2, "interval_quotient: n must be at least 2");
  require(r > 0, "interval_quotient: radius must be positive");
  require(b_nodes >= 3, "interval_quotient: need at least 3 nodes");
  const double h = quantize(kPi * r / static_cast<double>(b_nodes), kPi * r);
  Vec logw(b_nodes);
  for (Index i = 0; i < b_nodes; ++i) {
    const double t = std::abs(static_cast<double>(i) - 0.5 * static_cast<double>(b_nodes - 1)) * h;
    logw(i) = static_cast<double>(n - 1) * std::log(std::cos(t / r));
  }
  Vec w;
  const auto [lo, hi] = normalize_log_weights(logw, 1e-20, w);
  require(hi - lo >= 2, "interval_quotient: fewer than two nodes carry weight");
  // Trimming is symmetric, so the kept grid stays centred at 0.
  return interval_grid(hi - lo, 0.0, h, std::move(w));
}

FiniteMMSpace gaussian_line(double variance, Index b_nodes, double cutoff) {
  require(variance > 0, "gaussian_line: variance must be positive");
  require(b_nodes >= 2, "gaussian_line: need at least 2 nodes");
  require(cutoff >= 4, "gaussian_line: cutoff must be at least 4 standard deviations");
  const double sigma = std::sqrt(variance);
  const double h = quantize(2 * cutoff * sigma / static_cast<double>(b_nodes - 1), cutoff * sigma);
  Vec logw(b_nodes);
  for (Index i = 0; i < b_nodes; ++i) {
    const double t = std::abs(static_cast<double>(i) - 0.5 * static_cast<double>(b_nodes - 1)) * h;
    logw(i) = -t * t / (2 * variance);
  }
  Vec w;
  normalize_log_weights(logw, 0.0, w);
  return interval_grid(b_nodes, 0.0, h, std::move(w));
}

double gaussian_tail_mass(double cutoff) { return std::erfc(cutoff / std::numbers::sqrt2); }

FoliatedSpace lq_product(const FiniteMMSpace& y, const FiniteMMSpace& z, double q) {
  require(q >= 1, "lq_product: q must be at least 1");
  const Index ny = y.size(), nz = z.size(), n = ny * nz;
  FoliatedSpace out;
  auto& s = out.space;
  s.labels.reserve(static_cast<std::size_t>(n));
  s.weight.resize(n);
  for (Index a = 0; a < ny; ++a)
    for (Index b = 0; b < nz; ++b) {
      s.labels.push_back("(" + y.labels[static_cast<std::size_t>(a)] + "," + z.labels[static_cast<std::size_t>(b)] + ")");
      s.weight(a * nz + b) = y.weight(a) * z.weight(b);
    }
  auto combine = [q](double dy, double dz) {
    if (q == kInfinity) return std::max(dy, dz);
    if (q == 1) return dy + dz;
    if (q == 2) return std::hypot(dy, dz);
    return std::pow(std::pow(dy, q) + std::pow(dz, q), 1.0 / q);
  };
  s.dist.resize(n, n);
  for (Index a2 = 0; a2 < ny; ++a2)
    for (Index b2 = 0; b2 < nz; ++b2)
      for (Index a1 = 0; a1 < ny; ++a1)
        for (Index b1 = 0; b1 < nz; ++b1) s.dist(a1 * nz + b1, a2 * nz + b2) = combine(y.dist(a1, a2), z.dist(b1, b2));
  s.base = y.base * nz + z.base;
  out.partition.num_classes = ny;
  out.partition.class_of.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out.partition.class_of[static_cast<std::size_t>(i)] = i / nz;
  return out;
}

FoliatedSpace warped_product(const FiniteMMSpace& y, const FiniteMMSpace& z, const Vec& w_d, const Vec& w_m,
                             const WarpOptions& opts) {
  const double hy = [&] {
    try {
      return interval_spacing(y);
    } catch (const GeometryError&) {
      throw GeometryError("warped_product: Y must be an interval grid");
    }
  }();
  const Index ny = y.size(), nz = z.size();
  bool wrap = false;
  double hz = 0;
  if (z.coords && z.coords->kind == CoordKind::interval) {
    hz = interval_spacing(z);
  } else if (z.coords && z.coords->kind == CoordKind::sphere && z.coords->data.cols() == 2 && nz >= 3) {
    hz = z.dist(0, 1);
    for (Index j = 0; j < nz; ++j)
      if (z.dist(j, (j + 1) % nz) != hz) throw GeometryError("warped_product: Z circle is not regular");
    wrap = true;
  } else {
    throw GeometryError("warped_product: Z must be an interval grid or a regular circle");
  }
  require(w_d.size() == ny && w_m.size() == ny, "warped_product: warping tables must have one entry per Y point");
  require(w_d.allFinite() && w_m.allFinite(), "warped_product: warping tables must be finite");
  require((w_d.array() >= 0).all() && (w_m.array() >= 0).all(), "warped_product: warping tables must be >= 0");
  require((w_m.array() > 0).any(), "warped_product: w_m vanishes identically");
  require(opts.stencil >= 1 && opts.panels >= 2 && opts.panels % 2 == 0, "warped_product: bad stencil or panels");

  // Vertex numbering: one vertex per collapsed fiber, |Z| otherwise.
  std::vector<Index> first(static_cast<std::size_t>(ny), -1);
  FoliatedSpace out;
  auto& s = out.space;
  std::vector<double> raw_weight;
  Index nv = 0, nclass = 0;
  for (Index a = 0; a < ny; ++a) {
    if (!(w_m(a) > 0)) continue;
    first[static_cast<std::size_t>(a)] = nv;
    const std::string& ly = y.labels[static_cast<std::size_t>(a)];
    if (w_d(a) == 0) {
      s.labels.push_back("(" + ly + ",*)");
      raw_weight.push_back(w_m(a) * y.weight(a) * z.weight.sum());
      out.partition.class_of.push_back(nclass);
      ++nv;
    } else {
      for (Index b = 0; b < nz; ++b) {
        s.labels.push_back("(" + ly + "," + z.labels[static_cast<std::size_t>(b)] + ")");
        raw_weight.push_back(w_m(a) * y.weight(a) * z.weight(b));
        out.partition.class_of.push_back(nclass);
      }
      nv += nz;
    }
    ++nclass;
  }
  out.partition.num_classes = nclass;
  auto vid = [&](Index a, Index b) {
    const Index f = first[static_cast<std::size_t>(a)];
    return w_d(a) == 0 ? f : f + b;
  };

  auto warp_at = [&](double pos) {
    const auto lo = std::clamp<Index>(static_cast<Index>(std::floor(pos)), 0, ny - 1);
    const Index hi = std::min(lo + 1, ny - 1);
    const double frac = pos - static_cast<double>(lo);
    return (1 - frac) * w_d(lo) + frac * w_d(hi);
  };
  // Length of the straight segment from Y index a (offset da >= 0) with Z offset db.
  auto segment = [&](Index a, Index da, Index db) {
    const double dt = static_cast<double>(da) * hy, ds = static_cast<double>(db) * hz;
    const int p = opts.panels;
    double acc = 0;
    for (int k = 0; k <= p; ++k) {
      const double tau = static_cast<double>(k) / p;
      const double wd = warp_at(static_cast<double>(a) + tau * static_cast<double>(da));
      const double f = std::sqrt(dt * dt + wd * wd * ds * ds);
      acc += (k == 0 || k == p ? 1.0 : (k % 2 ? 4.0 : 2.0)) * f;
    }
    return acc / (3.0 * p);
  };

  const double scale =
      static_cast<double>(ny) * hy + static_cast<double>(nz) * hz * std::max(1.0, w_d.maxCoeff());
  std::vector<std::unordered_map<Index, double>> adj(static_cast<std::size_t>(nv));
  auto add_edge = [&](Index u, Index v, double len) {
    if (u == v) return;
    const double q = std::max(quantize(len, scale), quantum_of(scale, 40));
    for (auto [p1, p2] : {std::pair{u, v}, std::pair{v, u}}) {
      auto [it, inserted] = adj[static_cast<std::size_t>(p1)].try_emplace(p2, q);
      if (!inserted) it->second = std::min(it->second, q);
    }
  };
  const Index k = opts.stencil;
  for (Index a = 0; a < ny; ++a) {
    if (first[static_cast<std::size_t>(a)] < 0) continue;
    for (Index da = 0; da <= k && a + da < ny; ++da) {
      // Segments never jump over a fiber outside the support.
      if (first[static_cast<std::size_t>(a + da)] < 0) break;
      for (Index db = -k; db <= k; ++db) {
        if (da == 0 && db <= 0) continue;
        const double len = segment(a, da, std::abs(db));
        for (Index b = 0; b < nz; ++b) {
          Index b2 = b + db;
          if (wrap) {
            b2 = ((b2 % nz) + nz) % nz;
          } else if (b2 < 0 || b2 >= nz) {
            continue;
          }
          add_edge(vid(a, b), vid(a + da, b2), len);
        }
      }
    }
  }

  s.dist.resize(nv, nv);
  std::vector<std::vector<std::pair<Index, double>>> flat(static_cast<std::size_t>(nv));
  for (Index u = 0; u < nv; ++u) {
    auto& row = flat[static_cast<std::size_t>(u)];
    row.assign(adj[static_cast<std::size_t>(u)].begin(), adj[static_cast<std::size_t>(u)].end());
    std::sort(row.begin(), row.end());
  }
  parallel_for(static_cast<std::size_t>(nv), [&](std::size_t src) {
    std::vector<double> d(static_cast<std::size_t>(nv), kInfinity);
    using Item = std::pair<double, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    d[src] = 0;
    heap.emplace(0.0, static_cast<Index>(src));
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > d[static_cast<std::size_t>(u)]) continue;
      for (const auto& [v, len] : flat[static_cast<std::size_t>(u)]) {
        const double cand = du + len;
        if (cand < d[static_cast<std::size_t>(v)]) {
          d[static_cast<std::size_t>(v)] = cand;
          heap.emplace(cand, v);
        }
      }
    }
    for (Index v = 0; v < nv; ++v) s.dist(static_cast<Index>(src), v) = d[static_cast<std::size_t>(v)];
  });
  if (!s.dist.allFinite()) throw GenerationError("warped_product: support of w_m is disconnected");

  s.weight = Eigen::Map<const Vec>(raw_weight.data(), nv);
  s.weight /= s.weight.sum();
  Index by = y.base;
  if (first[static_cast<std::size_t>(by)] < 0)
    for (by = 0; first[static_cast<std::size_t>(by)] < 0; ++by) {
    }
  s.base = vid(by, z.base);
  return out;
}

Partition group_quotient(const FiniteMMSpace& space, const std::vector<std::vector<Index>>& generators) {
  const Index n = space.size();
  for (std::size_t g = 0; g < generators.size(); ++g) {
    const auto& perm = generators[g];
    const std::string tag = "group_quotient: generator " + std::to_string(g);
    require(static_cast<Index>(perm.size()) == n, tag + " has the wrong length");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (Index v : perm) {
      require(v >= 0 && v < n && !seen[static_cast<std::size_t>(v)], tag + " is not a permutation");
      seen[static_cast<std::size_t>(v)] = 1;
    }
    for (Index i = 0; i < n; ++i) {
      const Index gi = perm[static_cast<std::size_t>(i)];
      require(space.weight(gi) == space.weight(i),
              tag + " does not preserve the weight at point " + std::to_string(i));
      for (Index j = i + 1; j < n; ++j)
        require(space.dist(gi, perm[static_cast<std::size_t>(j)]) == space.dist(i, j),
                tag + " is not an isometry on the pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }
  Partition p;
  p.class_of.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> stack;
  for (Index start = 0; start < n; ++start) {
    if (p.class_of[static_cast<std::size_t>(start)] >= 0) continue;
    const Index c = p.num_classes++;
    p.class_of[static_cast<std::size_t>(start)] = c;
    stack.push_back(start);
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const auto& perm : generators) {
        const Index v = perm[static_cast<std::size_t>(u)];
        if (p.class_of[static_cast<std::size_t>(v)] < 0) {
          p.class_of[static_cast<std::size_t>(v)] = c;
          stack.push_back(v);
        }
      }
    }
  }
  return p;
}

FiniteMMSpace random_metric_space(Index n, int dim, std::uint64_t seed) {
  require(n >= 1 && dim >= 1, "random_metric_space: need n >= 1 and dim >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Mat pts(n, dim);
  for (Index i = 0; i < n; ++i)
    for (int k = 0; k < dim; ++k) pts(i, k) = unit(rng);
  const double scale = std::sqrt(static_cast<double>(dim));
  const double quantum = quantum_of(scale, 30);
  FiniteMMSpace s;
  s.labels = index_labels(n);
  s.dist = Mat::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double d = std::max(quantize((pts.row(i) - pts.row(j)).norm(), scale, 30), quantum);
      s.dist(i, j) = d;
      s.dist(j, i) = d;
    }
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) s.dist(i, j) = std::min(s.dist(i, j), s.dist(i, k) + s.dist(k, j));
  s.weight.resize(n);
  for (Index i = 0; i < n; ++i) s.weight(i) = 0.5 + unit(rng);
  s.weight /= s.weight.sum();
  s.coords = Coords<double>{CoordKind::euclidean, pts};
  return s;
}

}  // namespace folio
