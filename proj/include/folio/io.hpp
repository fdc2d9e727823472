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

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "folio/core.hpp"
#include "folio/flows.hpp"
#include "folio/foliation.hpp"
#include "folio/generators.hpp"
#include "folio/spectral.hpp"
#include "folio/transport.hpp"

namespace folio {

using Json = nlohmann::json;

/// Shortest decimal form that round-trips the double ("%.17g" trimmed).
std::string format_double(double x);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Spaces: {"labels", "dist", "weight", "base", optional "coords": {"kind", "data"}}.
Json space_to_json(const FiniteMMSpace& space);
/// Throws StructuralError on malformed input or non-finite numbers.
FiniteMMSpace space_from_json(const Json& j);
FiniteMMSpace read_space(const std::filesystem::path& path);
void write_space(const std::filesystem::path& path, const FiniteMMSpace& space);

// Partitions: {"classes": [[i, ...], ...]}.
Json partition_to_json(const Partition& partition);
Partition partition_from_json(const Json& j, Index n);
Partition read_partition(const std::filesystem::path& path, Index n);

/// Probability vector from a JSON array (or {"mass": [...]}).
ProbVector vector_from_json(const Json& j);

Json validation_to_json(const ValidationReport& report, const FiniteMMSpace& space);

/// CSV "i,j,mass,dist" of the plan support.
std::string plan_csv(const TransportPlan& plan, const FiniteMMSpace& space);
/// Marginals, residuals and cost of a plan.
Json plan_sidecar(const TransportPlan& plan, const ProbVector& mu, const ProbVector& nu);

Json foliation_report_to_json(const FoliationReport& report);
/// CSV "y,y_prime,dstar,w2,defect" of the evaluated class pairs.
std::string pair_csv(const FoliationReport& report);

/// CSV "index,eigenvalue,multiplicity".
std::string spectrum_csv(const Spectrum& spectrum);
Json containment_to_json(const ContainmentReport& report);
Json gap_to_json(const GapResult& gap, double q);

/// CSV "t,entropy,slope,mass".
std::string trajectory_csv(const FlowTrajectory& traj);
Json ede_to_json(const EdeReport& report);
Json convexity_to_json(const ConvexityReport& report);

/// A generated space with its canonical partition when the generator has one.
struct GeneratedSpace {
  FiniteMMSpace space;
  std::optional<Partition> partition;
};

/// Builds a space from a generator spec such as
///   {"kind": "sphere_mesh", "n": 2, "r": 1, "N": 2000, "seed": 7, "bands": 20}
/// Kinds: sphere_mesh, interval_quotient, gaussian_line, flat_interval,
/// lq_product, warped_product, group_quotient, cycle, path, random_metric.
GeneratedSpace generate_from_json(const Json& spec);

}  // namespace folio
