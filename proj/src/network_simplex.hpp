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

namespace folio::detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TransportSolution {
  Eigen::MatrixXd flow;
  long pivots = 0;
};

/// Primal network simplex on the complete bipartite graph supply -> demand.
/// Strongly feasible spanning trees (Cunningham's leaving-arc rule) prevent
/// cycling; entering arcs come from block search pricing. Supplies and
/// demands must be strictly positive with equal totals up to rounding.
TransportSolution network_simplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                  const RowMat& cost);

}  // namespace folio::detail
