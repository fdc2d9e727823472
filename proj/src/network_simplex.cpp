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

#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "folio/errors.hpp"

namespace folio::detail {

namespace {

// Orientation of the tree arc joining a node to its parent.
enum Dir : signed char { kUp = 1, kDown = -1 };

class Solver {
 public:
  Solver(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand, const RowMat& cost)
      : m_(supply.size()),
        n_(demand.size()),
        cost_(cost),
        nodes_(m_ + n_ + 1),
        root_(m_ + n_),
        real_arcs_(m_ * n_) {
    double cmax = cost.size() ? cost.cwiseAbs().maxCoeff() : 0.0;
    // Dual potentials of a complete bipartite problem span at most cmax, so
    // artificial arcs priced at 2*cmax never carry flow at the optimum.
    art_cost_ = cmax > 0 ? 2.0 * cmax : 1.0;
    eps_ = 1e-15 * std::max(cmax, std::numeric_limits<double>::min()) *
           std::sqrt(static_cast<double>(nodes_));

    const long arcs = real_arcs_ + m_ + n_;
    flow_.assign(static_cast<std::size_t>(arcs), 0.0);
    parent_.assign(nodes_, -1);
    parc_.assign(nodes_, -1);
    dir_.assign(nodes_, kUp);
    depth_.assign(nodes_, 0);
    pi_.assign(nodes_, 0.0);
    first_child_.assign(nodes_, -1);
    next_sib_.assign(nodes_, -1);
    prev_sib_.assign(nodes_, -1);

    for (long v = 0; v < m_ + n_; ++v) {
      const long a = real_arcs_ + v;
      parent_[v] = root_;
      parc_[v] = a;
      depth_[v] = 1;
      if (v < m_) {
        dir_[v] = kUp;
        flow_[a] = supply(v);
        pi_[v] = -art_cost_;
      } else {
        dir_[v] = kDown;
        flow_[a] = demand(v - m_);
        pi_[v] = art_cost_;
      }
      link_child(root_, v);
    }
    block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(arcs))));
  }

  long run() {
    long pivots = 0;
    const long limit = 200 * (real_arcs_ + nodes_) + 100000;
    long entering;
    while ((entering = find_entering()) >= 0) {
      pivot(entering);
      if (++pivots > limit) throw ConvergenceError("network simplex: pivot limit exceeded", 0.0);
    }
    return pivots;
  }

  Eigen::MatrixXd plan() const {
    Eigen::MatrixXd out(m_, n_);
    for (long i = 0; i < m_; ++i)
      for (long j = 0; j < n_; ++j) out(i, j) = std::max(0.0, flow_[static_cast<std::size_t>(i * n_ + j)]);
    return out;
  }

 private:
  long src(long a) const { return a < real_arcs_ ? a / n_ : (a - real_arcs_ < m_ ? a - real_arcs_ : root_); }
  long tgt(long a) const {
    if (a < real_arcs_) return m_ + a % n_;
    const long v = a - real_arcs_;
    return v < m_ ? root_ : v;
  }
  double arc_cost(long a) const {
    return a < real_arcs_ ? cost_(a / n_, a % n_) : art_cost_;
  }

  void link_child(long p, long c) {
    prev_sib_[c] = -1;
    next_sib_[c] = first_child_[p];
    if (first_child_[p] >= 0) prev_sib_[first_child_[p]] = c;
    first_child_[p] = c;
  }

  void unlink_child(long c) {
    const long p = parent_[c];
    if (prev_sib_[c] >= 0) next_sib_[prev_sib_[c]] = next_sib_[c];
    else first_child_[p] = next_sib_[c];
    if (next_sib_[c] >= 0) prev_sib_[next_sib_[c]] = prev_sib_[c];
    prev_sib_[c] = next_sib_[c] = -1;
  }

  // Block search over real arcs (row-major walk), then artificial arcs.
  long find_entering() {
    const long total = real_arcs_ + m_ + n_;
    long best = -1;
    double best_rc = -eps_;
    long scanned_in_block = 0;
    for (long count = 0; count < total; ++count) {
      const long a = next_arc_;
      next_arc_ = (next_arc_ + 1 == total) ? 0 : next_arc_ + 1;
      double rc;
      if (a < real_arcs_) {
        const long i = a / n_, j = a - (a / n_) * n_;
        rc = cost_(i, j) + pi_[i] - pi_[m_ + j];
      } else {
        rc = art_cost_ + pi_[src(a)] - pi_[tgt(a)];
      }
      if (rc < best_rc) {
        best_rc = rc;
        best = a;
      }
      if (++scanned_in_block == block_) {
        if (best >= 0) return best;
        scanned_in_block = 0;
      }
    }
    return best;
  }

  void pivot(long e) {
    const long u = src(e), v = tgt(e);
    long a = u, b = v;
    while (a != b) {
      if (depth_[a] > depth_[b]) a = parent_[a];
      else if (depth_[b] > depth_[a]) b = parent_[b];
      else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    const long apex = a;

    upath_.clear();
    for (long w = u; w != apex; w = parent_[w]) upath_.push_back(w);
    vpath_.clear();
    for (long w = v; w != apex; w = parent_[w]) vpath_.push_back(w);

    // Cycle orientation: apex -> ... -> u -> v -> ... -> apex. Ties go to the
    // last blocking arc in that order, which keeps the tree strongly feasible.
    double delta = std::numeric_limits<double>::infinity();
    long leave = -1;
    bool leave_on_u = false;
    for (auto it = upath_.rbegin(); it != upath_.rend(); ++it) {
      const long w = *it;
      if (dir_[w] == kUp && flow_[parc_[w]] <= delta) {
        delta = flow_[parc_[w]];
        leave = w;
        leave_on_u = true;
      }
    }
    for (long w : vpath_) {
      if (dir_[w] == kDown && flow_[parc_[w]] <= delta) {
        delta = flow_[parc_[w]];
        leave = w;
        leave_on_u = false;
      }
    }
    if (leave < 0) throw ConvergenceError("network simplex: unbounded cycle", 0.0);

    if (delta > 0) {
      for (long w : upath_) flow_[parc_[w]] += (dir_[w] == kUp ? -delta : delta);
      for (long w : vpath_) flow_[parc_[w]] += (dir_[w] == kUp ? delta : -delta);
      flow_[e] += delta;
    }
    flow_[parc_[leave]] = 0.0;

    // Re-hang the subtree cut off by the leaving arc below the entering arc.
    long x = leave_on_u ? u : v;
    long new_parent = leave_on_u ? v : u;
    long new_arc = e;
    Dir new_dir = leave_on_u ? kUp : kDown;
    const long subtree_root = x;
    while (true) {
      const long old_parent = parent_[x];
      const long old_arc = parc_[x];
      const Dir old_dir = static_cast<Dir>(dir_[x]);
      unlink_child(x);
      parent_[x] = new_parent;
      parc_[x] = new_arc;
      dir_[x] = new_dir;
      link_child(new_parent, x);
      if (x == leave) break;
      new_parent = x;
      new_arc = old_arc;
      new_dir = old_dir == kUp ? kDown : kUp;
      x = old_parent;
    }
    refresh_subtree(subtree_root);
  }

  void refresh_subtree(long top) {
    stack_.clear();
    stack_.push_back(top);
    while (!stack_.empty()) {
      const long x = stack_.back();
      stack_.pop_back();
      const long p = parent_[x];
      depth_[x] = depth_[p] + 1;
      const double c = arc_cost(parc_[x]);
      pi_[x] = dir_[x] == kUp ? pi_[p] - c : pi_[p] + c;
      for (long ch = first_child_[x]; ch >= 0; ch = next_sib_[ch]) stack_.push_back(ch);
    }
  }

  long m_, n_;
  const RowMat& cost_;
  long nodes_, root_, real_arcs_;
  double art_cost_ = 1.0;
  double eps_ = 0.0;
  long block_ = 10;
  long next_arc_ = 0;

  std::vector<double> flow_;
  std::vector<long> parent_, parc_;
  std::vector<signed char> dir_;
  std::vector<long> depth_;
  std::vector<double> pi_;
  std::vector<long> first_child_, next_sib_, prev_sib_;
  std::vector<long> upath_, vpath_, stack_;
};

}  // namespace

TransportSolution network_simplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                  const RowMat& cost) {
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw StructuralError("network_simplex: cost matrix shape does not match marginals");
  if (supply.size() == 0 || demand.size() == 0) throw StructuralError("network_simplex: empty marginal");
  Solver solver(supply, demand, cost);
  TransportSolution out;
  out.pivots = solver.run();
  out.flow = solver.plan();
  return out;
}

}  // namespace folio::detail
