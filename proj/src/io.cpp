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

#include "folio/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace folio {

namespace fs = std::filesystem;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

Json parse_file(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw StructuralError(path.string() + ": " + e.what());
  }
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw StructuralError(std::string(what) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw StructuralError(std::string(what) + ": non-finite number");
  return v;
}

Vec number_array(const Json& j, const char* what) {
  if (!j.is_array()) throw StructuralError(std::string(what) + ": expected an array");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], what);
  return v;
}

Mat number_matrix(const Json& j, const char* what) {
  if (!j.is_array()) throw StructuralError(std::string(what) + ": expected an array of rows");
  const auto rows = static_cast<Index>(j.size());
  Index cols = -1;
  Mat m;
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    const Vec v = row.is_array() ? number_array(row, what) : Vec::Constant(1, number(row, what));
    if (cols < 0) {
      cols = v.size();
      m.resize(rows, cols);
    }
    if (v.size() != cols) throw StructuralError(std::string(what) + ": ragged rows");
    m.row(r) = v.transpose();
  }
  if (cols < 0) m.resize(0, 0);
  return m;
}

Json vec_json(const Vec& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json mat_json(const Mat& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

}  // namespace

Json space_to_json(const FiniteMMSpace& space) {
  Json j;
  j["labels"] = space.labels;
  j["dist"] = mat_json(space.dist);
  j["weight"] = vec_json(space.weight);
  j["base"] = space.base;
  if (space.coords) {
    Json c;
    c["kind"] = std::string(to_string(space.coords->kind));
    c["data"] = mat_json(space.coords->data);
    j["coords"] = c;
  }
  return j;
}

FiniteMMSpace space_from_json(const Json& j) {
  if (!j.is_object()) throw StructuralError("space: expected an object");
  for (const char* key : {"dist", "weight"})
    if (!j.contains(key)) throw StructuralError(std::string("space: missing \"") + key + "\"");
  FiniteMMSpace s;
  s.dist = number_matrix(j["dist"], "space.dist");
  s.weight = number_array(j["weight"], "space.weight");
  const Index n = s.weight.size();
  if (j.contains("labels")) {
    if (!j["labels"].is_array()) throw StructuralError("space.labels: expected an array");
    for (const auto& l : j["labels"]) s.labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
  } else {
    s.labels = index_labels(n);
  }
  s.base = j.contains("base") ? j["base"].get<Index>() : 0;
  if (s.dist.rows() != n || s.dist.cols() != n || static_cast<Index>(s.labels.size()) != n)
    throw StructuralError("space: labels, dist and weight sizes disagree");
  if (s.base < 0 || s.base >= n) throw StructuralError("space: base out of range");
  if (j.contains("coords")) {
    const Json& c = j["coords"];
    if (!c.is_object() || !c.contains("kind") || !c.contains("data"))
      throw StructuralError("space.coords: expected {\"kind\", \"data\"}");
    try {
      s.coords = Coords<double>{coord_kind_from_string(c["kind"].get<std::string>()),
                                number_matrix(c["data"], "space.coords.data")};
    } catch (const DomainError& e) {
      throw StructuralError(e.what());
    }
    if (s.coords->data.rows() != n) throw StructuralError("space.coords: one row per point required");
  }
  return s;
}

FiniteMMSpace read_space(const fs::path& path) { return space_from_json(parse_file(path)); }

void write_space(const fs::path& path, const FiniteMMSpace& space) {
  write_atomic(path, space_to_json(space).dump() + "\n");
}

Json partition_to_json(const Partition& partition) {
  Json classes = Json::array();
  for (const auto& c : partition.classes()) classes.push_back(c);
  return Json{{"classes", classes}};
}

Partition partition_from_json(const Json& j, Index n) {
  if (!j.is_object() || !j.contains("classes") || !j["classes"].is_array())
    throw StructuralError("partition: expected {\"classes\": [[...], ...]}");
  std::vector<std::vector<Index>> classes;
  for (const auto& c : j["classes"]) {
    if (!c.is_array()) throw StructuralError("partition: each class must be an array");
    std::vector<Index> members;
    for (const auto& v : c) {
      if (!v.is_number_integer()) throw StructuralError("partition: members must be integers");
      members.push_back(v.get<Index>());
    }
    classes.push_back(std::move(members));
  }
  return Partition::from_classes(classes, n);
}

Partition read_partition(const fs::path& path, Index n) { return partition_from_json(parse_file(path), n); }

ProbVector vector_from_json(const Json& j) {
  if (j.is_object() && j.contains("mass")) return number_array(j["mass"], "mass");
  return number_array(j, "vector");
}

Json validation_to_json(const ValidationReport& report, const FiniteMMSpace& space) {
  Json out;
  out["ok"] = report.ok();
  out["lenient"] = report.lenient;
  out["triangle_tol"] = report.triangle_tol;
  Json list = Json::array();
  for (const auto& v : report.violations) {
    Json item;
    item["axiom"] = std::string(to_string(v.axiom));
    item["indices"] = v.indices;
    std::vector<std::string> labels;
    for (Index i : v.indices)
      if (i >= 0 && i < static_cast<Index>(space.labels.size())) labels.push_back(space.labels[static_cast<std::size_t>(i)]);
    item["labels"] = labels;
    item["defect"] = std::isfinite(v.defect) ? Json(v.defect) : Json("inf");
    item["count"] = v.count;
    list.push_back(item);
  }
  out["violations"] = list;
  return out;
}

std::string plan_csv(const TransportPlan& plan, const FiniteMMSpace& space) {
  std::string out = "i,j,mass,dist\n";
  for (Index i = 0; i < plan.pi.rows(); ++i)
    for (Index j = 0; j < plan.pi.cols(); ++j)
      if (plan.pi(i, j) > 0)
        out += std::to_string(i) + "," + std::to_string(j) + "," + format_double(plan.pi(i, j)) + "," +
               format_double(space.dist(i, j)) + "\n";
  return out;
}

Json plan_sidecar(const TransportPlan& plan, const ProbVector& mu, const ProbVector& nu) {
  Json j;
  j["mu"] = vec_json(mu);
  j["nu"] = vec_json(nu);
  j["row_residual"] = (plan.pi.rowwise().sum() - mu).lpNorm<Eigen::Infinity>();
  j["column_residual"] = (plan.pi.colwise().sum().transpose() - nu).lpNorm<Eigen::Infinity>();
  j["cost"] = plan.cost;
  j["exponent"] = plan.exponent;
  j["distance"] = plan.distance();
  j["kind"] = plan.kind == PlanKind::exact ? "exact" : "entropic";
  if (plan.kind == PlanKind::entropic) {
    j["epsilon"] = plan.epsilon;
    j["entropic_objective"] = plan.entropic_objective;
  }
  j["iterations"] = plan.iterations;
  return j;
}

namespace {

Json maybe(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json foliation_report_to_json(const FoliationReport& report) {
  Json j;
  j["passed"] = report.passed;
  j["tol"] = report.tol;
  j["level"] = std::string(to_string(report.level));
  j["exhaustive"] = report.exhaustive;
  j["pairs_checked"] = report.pairs.size();
  j["max_metric_defect"] = report.max_metric_defect;
  j["worst_point"] = report.worst_point;
  j["worst_class"] = report.worst_class;
  j["worst_other_class"] = report.worst_other_class;
  j["max_w2_defect"] = maybe(report.max_w2_defect);
  if (report.wq_defects) {
    j["w1_defect"] = (*report.wq_defects)[0];
    j["w2_defect"] = (*report.wq_defects)[1];
    j["w3_defect"] = (*report.wq_defects)[2];
  }
  return j;
}

std::string pair_csv(const FoliationReport& report) {
  std::string out = "y,y_prime,dstar,w2,defect\n";
  for (const auto& p : report.pairs)
    out += std::to_string(p.y0) + "," + std::to_string(p.y1) + "," + format_double(p.dstar) + "," +
           format_double(p.w2) + "," + format_double(p.w2_defect) + "\n";
  return out;
}

std::string spectrum_csv(const Spectrum& spectrum) {
  std::string out = "index,eigenvalue,multiplicity\n";
  for (Index k = 0; k < spectrum.eigenvalues.size(); ++k)
    out += std::to_string(k) + "," + format_double(spectrum.eigenvalues(k)) + "," +
           std::to_string(spectrum.multiplicities[static_cast<std::size_t>(k)]) + "\n";
  return out;
}

Json containment_to_json(const ContainmentReport& report) {
  Json j;
  j["passed"] = report.passed;
  j["tol"] = report.tol;
  j["max_gap"] = report.max_gap;
  j["skipped"] = report.skipped;
  Json rows = Json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"quotient", r.quotient_eigenvalue}, {"total", r.nearest_total}, {"gap", r.gap}});
  j["rows"] = rows;
  return j;
}

Json gap_to_json(const GapResult& gap, double q) {
  Json j;
  j["q"] = q;
  j["value"] = gap.value;
  j["restart_values"] = gap.restart_values;
  j["spread"] = gap.spread;
  j["converged_restarts"] = gap.converged_restarts;
  return j;
}

std::string trajectory_csv(const FlowTrajectory& traj) {
  std::string out = "t,entropy,slope,mass\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    out += format_double(traj.times[k]) + "," + format_double(traj.entropy[k]) + "," + format_double(traj.slope[k]) +
           "," + format_double(traj.mass[k]) + "\n";
  return out;
}

Json ede_to_json(const EdeReport& report) {
  Json j;
  j["total_drop"] = report.total_drop;
  j["total_dissipation"] = report.total_dissipation;
  j["mismatch"] = report.mismatch;
  j["max_interval_mismatch"] = report.max_interval_mismatch;
  j["entropy_non_increasing"] = report.entropy_non_increasing;
  Json rows = Json::array();
  for (const auto& iv : report.intervals)
    rows.push_back({{"s", iv.s}, {"t", iv.t}, {"drop", iv.entropy_drop}, {"dissipation", iv.dissipation},
                    {"mismatch", iv.mismatch}});
  j["intervals"] = rows;
  return j;
}

Json convexity_to_json(const ConvexityReport& report) {
  Json j;
  j["k"] = report.k;
  j["h"] = report.h;
  j["slack"] = report.slack;
  j["max_defect"] = report.max_defect;
  j["passed"] = report.passed;
  Json rows = Json::array();
  for (const auto& t : report.trials)
    rows.push_back({{"w2", t.w2}, {"defects", std::vector<double>(t.defects.begin(), t.defects.end())},
                    {"max_defect", t.max_defect}});
  j["trials"] = rows;
  return j;
}

namespace {

double get_num(const Json& spec, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!spec.contains(key)) {
    if (fallback) return *fallback;
    throw StructuralError(std::string("generator spec: missing \"") + key + "\"");
  }
  const Json& v = spec[key];
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInfinity;
    throw StructuralError(std::string("generator spec: \"") + key + "\" must be a number");
  }
  if (!v.is_number()) throw StructuralError(std::string("generator spec: \"") + key + "\" must be a number");
  return v.get<double>();
}

Index get_int(const Json& spec, const char* key, std::optional<Index> fallback = std::nullopt) {
  if (!spec.contains(key)) {
    if (fallback) return *fallback;
    throw StructuralError(std::string("generator spec: missing \"") + key + "\"");
  }
  if (!spec[key].is_number_integer())
    throw StructuralError(std::string("generator spec: \"") + key + "\" must be an integer");
  return spec[key].get<Index>();
}

std::vector<Index> named_permutation(const std::string& name, Index n) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (name == "reflection")
      perm[static_cast<std::size_t>(i)] = n - 1 - i;
    else if (name == "rotation")
      perm[static_cast<std::size_t>(i)] = (i + 1) % n;
    else
      throw StructuralError("generator spec: unknown permutation \"" + name + "\"");
  }
  return perm;
}

}  // namespace

GeneratedSpace generate_from_json(const Json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
    throw StructuralError("generator spec: expected an object with a \"kind\"");
  const auto kind = spec["kind"].get<std::string>();
  const auto seed = static_cast<std::uint64_t>(get_int(spec, "seed", 0));
  GeneratedSpace out;
  if (kind == "sphere_mesh") {
    out.space = sphere_mesh(static_cast<int>(get_int(spec, "n")), get_num(spec, "r", 1.0), get_int(spec, "N"), seed);
    if (spec.contains("bands")) out.partition = sphere_distance_partition(out.space, get_int(spec, "bands"));
  } else if (kind == "interval_quotient") {
    out.space = interval_quotient(static_cast<int>(get_int(spec, "n")), get_num(spec, "r"), get_int(spec, "B"));
  } else if (kind == "gaussian_line") {
    out.space = gaussian_line(get_num(spec, "variance", 1.0), get_int(spec, "B"), get_num(spec, "cutoff", 6.0));
  } else if (kind == "flat_interval") {
    out.space = flat_interval(get_int(spec, "B"), get_num(spec, "a", 0.0), get_num(spec, "b", 1.0));
  } else if (kind == "cycle") {
    out.space = cycle(get_int(spec, "N"), get_num(spec, "circumference", 2 * 3.14159265358979323846));
  } else if (kind == "path") {
    out.space = path(get_int(spec, "N"), get_num(spec, "spacing", 1.0));
  } else if (kind == "random_metric") {
    out.space = random_metric_space(get_int(spec, "N"), static_cast<int>(get_int(spec, "dim", 2)), seed);
  } else if (kind == "lq_product") {
    if (!spec.contains("Y") || !spec.contains("Z")) throw StructuralError("lq_product: needs \"Y\" and \"Z\"");
    auto r = lq_product(generate_from_json(spec["Y"]).space, generate_from_json(spec["Z"]).space,
                        get_num(spec, "q", 2.0));
    out.space = std::move(r.space);
    out.partition = std::move(r.partition);
  } else if (kind == "warped_product") {
    if (!spec.contains("Y") || !spec.contains("Z")) throw StructuralError("warped_product: needs \"Y\" and \"Z\"");
    const FiniteMMSpace y = generate_from_json(spec["Y"]).space;
    const FiniteMMSpace z = generate_from_json(spec["Z"]).space;
    Vec w_d, w_m;
    if (spec.contains("profile")) {
      const Json& p = spec["profile"];
      const double n = get_num(p, "n"), r = get_num(p, "r");
      if (!y.coords) throw GeometryError("warped_product: Y needs coordinates for a profile");
      const Vec t = y.coords->data.col(0);
      // cos(pi/2) is not exactly zero in floating point; snap the end fibers.
      w_d = (t.array() / r).cos().matrix();
      w_d = (w_d.array() < 1e-9).select(0.0, w_d);
      w_m = w_d.array().pow(n - 1).matrix();
    } else {
      if (!spec.contains("w_d") || !spec.contains("w_m"))
        throw StructuralError("warped_product: needs \"w_d\" and \"w_m\" tables or a \"profile\"");
      w_d = number_array(spec["w_d"], "w_d");
      w_m = number_array(spec["w_m"], "w_m");
    }
    WarpOptions opts;
    opts.stencil = static_cast<int>(get_int(spec, "stencil", opts.stencil));
    auto r = warped_product(y, z, w_d, w_m, opts);
    out.space = std::move(r.space);
    out.partition = std::move(r.partition);
  } else if (kind == "group_quotient") {
    if (!spec.contains("space") || !spec.contains("generators"))
      throw StructuralError("group_quotient: needs \"space\" and \"generators\"");
    out.space = generate_from_json(spec["space"]).space;
    std::vector<std::vector<Index>> gens;
    for (const auto& g : spec["generators"]) {
      if (g.is_string()) {
        gens.push_back(named_permutation(g.get<std::string>(), out.space.size()));
      } else {
        std::vector<Index> perm;
        for (const auto& v : g) perm.push_back(v.get<Index>());
        gens.push_back(std::move(perm));
      }
    }
    out.partition = group_quotient(out.space, gens);
  } else {
    throw StructuralError("generator spec: unknown kind \"" + kind + "\"");
  }
  return out;
}

}  // namespace folio
