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

#include <Eigen/Sparse>
#include <cstdint>
#include <optional>
#include <vector>

#include "folio/core.hpp"

namespace folio {

using SpMat = Eigen::SparseMatrix<double>;

enum class GraphProvenance { explicit_graph, kernel };

/// Weighted graph (w, m): symmetric conductances with zero diagonal and a
/// strictly positive vertex measure. Defines the Laplacian
///   (L f)(i) = (1/m_i) sum_j w_ij (f_i - f_j),
/// self-adjoint in L^2(m).
struct GraphOperator {
  Vec vertex_measure;
  SpMat conductance;
  GraphProvenance provenance = GraphProvenance::explicit_graph;
  /// Kernel bandwidth t (kernel provenance only).
  double bandwidth = 0;

  Index size() const { return vertex_measure.size(); }
  /// K = D - W, so that L = M^{-1} K.
  SpMat stiffness() const;
};

/// Validates symmetry, non-negativity, zero diagonal, positive measure and
/// connectivity. Throws DomainError on violation.
GraphOperator make_graph(Vec vertex_measure, SpMat conductance,
                         GraphProvenance provenance = GraphProvenance::explicit_graph, double bandwidth = 0);

bool is_connected(const SpMat& conductance);

/// Optional continuum calibration for kernel graphs. With dimension d > 0 and
/// total volume V the conductances are multiplied by 2V / (4 pi t)^(d/2), so
/// L approximates the Laplace-Beltrami operator of a d-manifold of volume V
/// sampled by the space.
///
/// density_corrected instead divides the kernel by q_i q_j, where
/// q_i = sum_{j != i} m_j k_ij is a kernel density estimate, sets the vertex measure
/// to (m_i / q_i) / s with s = sum_j m_j / q_j, and uses the factor 1 / (s t).
/// This needs neither d nor V, cancels sampling-density fluctuations, and
/// coincides with the calibrated formula when the sampling is uniform.
struct KernelScaling {
  int dimension = 0;
  double volume = 0;
  bool density_corrected = false;
};

/// w_ij = m_i m_j exp(-d_ij^2 / (4t)) / (2t) (times the optional scaling),
/// vertex measure m. Throws BandwidthError carrying the smallest connecting
/// bandwidth.
GraphOperator build_kernel_graph(const FiniteMMSpace& space, double bandwidth, const KernelScaling& scaling = {});

/// Nearest-neighbour graph of an interval grid (chain) or a regular circle
/// (cycle): w = (m_i + m_j) / (2 h^2) on grid edges, vertex measure m. Its
/// Laplacian is the second-order discretization of -(1/rho)(rho f')'.
GraphOperator build_grid_graph(const FiniteMMSpace& space);

/// Kronecker-sum product: measure m_Y(y) m_Z(z), conductance
/// w_Y(y,y') m_Z(z) on Y-edges and m_Y(y) w_Z(z,z') on Z-edges. Vertex
/// (y, z) has index y * |Z| + z, so L = L_Y (x) I + I (x) L_Z.
GraphOperator product_graph(const GraphOperator& gy, const GraphOperator& gz);

/// Quotient graph: m* = p_* m, w*(y, y') = sum of w(x, x') over the classes.
GraphOperator quotient_graph(const GraphOperator& g, const Partition& partition);

/// Local slope |Df|(i) = sqrt( (1/2) sum_j (w_ij / m_i) (f_j - f_i)^2 ).
Vec local_slope(const GraphOperator& g, const Vec& f);

/// Discrete Cheeger energy (1/q) sum_i m_i |Df|(i)^q. At q = 2 this is
/// (1/2) <f, L f>_m = (1/4) sum_ij w_ij (f_i - f_j)^2.
double dirichlet_energy_q(const GraphOperator& g, const Vec& f, double q);

/// Gradient of dirichlet_energy_q with respect to f (Euclidean coordinates).
Vec dirichlet_energy_gradient(const GraphOperator& g, const Vec& f, double q);

struct Spectrum {
  /// Ascending eigenvalues of M^{-1}(D - W).
  Vec eigenvalues;
  /// Size of the cluster each eigenvalue belongs to.
  std::vector<Index> multiplicities;
  /// Columns are M-orthonormal eigenvectors when requested.
  std::optional<Mat> eigenvectors;
  /// True when every eigenvalue of the operator is present.
  bool complete = false;
};

struct SpectrumOptions {
  /// Number of smallest eigenvalues; -1 for all (dense path only).
  Index count = -1;
  bool vectors = false;
  /// Relative gap below which eigenvalues are grouped into one cluster.
  double cluster_tol = 1e-8;
  /// Graphs of at least this size use the sparse iterative solver.
  Index dense_limit = 3000;
  std::uint64_t seed = 0;
  double residual_tol = 1e-11;
  long max_iter = 2000;
};

/// Eigenvalues of (D - W) v = lambda M v via the symmetric similarity
/// M^{-1/2} (D - W) M^{-1/2}. Dense LAPACK-style solve below dense_limit,
/// shift-invert block subspace iteration with Rayleigh-Ritz above it.
/// Throws ConvergenceError with the worst residual on failure.
Spectrum laplacian_spectrum(const GraphOperator& g, const SpectrumOptions& opts = {});

/// min_a sum_i m_i |f_i - a|^q and its minimizer.
std::pair<double, double> centered_lq_deviation(const Vec& f, const Vec& m, double q);

struct GapOptions {
  std::uint64_t seed = 0;
  int restarts = 16;
  long max_iter = 20000;
  /// Relative gradient norm at which a restart counts as converged.
  double grad_tol = 1e-9;
};

struct GapResult {
  double value = 0;
  /// Best value per restart (empty for q = 2).
  std::vector<double> restart_values;
  double spread = 0;
  int converged_restarts = 0;
  Vec minimizer;
};

/// q-spectral gap inf q Ch_q(f) / c_q(f)^q. q = 2 returns lambda_1 of the
/// eigensolver; other q run projected gradient descent with backtracking from
/// `restarts` random starts and report the best value found.
GapResult spectral_gap_q(const GraphOperator& g, double q, const GapOptions& opts = {});

/// q * Ch_q(f) / c_q(f)^q for a non-constant f.
double gap_ratio(const GraphOperator& g, const Vec& f, double q);

struct ContainmentRow {
  double quotient_eigenvalue = 0;
  double nearest_total = 0;
  double gap = 0;
};

struct ContainmentReport {
  bool passed = false;
  double tol = 0;
  double max_gap = 0;
  std::vector<ContainmentRow> rows;
  /// Quotient eigenvalues above the computed range of the total spectrum.
  Index skipped = 0;
};

/// For each quotient eigenvalue, the nearest total eigenvalue and the gap.
/// Quotient eigenvalues beyond the largest computed total eigenvalue (+tol)
/// are skipped when the total spectrum is incomplete.
ContainmentReport containment_check(const Spectrum& total, const Spectrum& quotient, double tol);

}  // namespace folio
