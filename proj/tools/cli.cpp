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


#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "folio/errors.hpp"
#include "folio/flows.hpp"
#include "folio/foliation.hpp"
#include "folio/generators.hpp"
#include "folio/io.hpp"
#include "folio/spectral.hpp"
#include "folio/transport.hpp"

#ifndef FOLIO_VERSION
#define FOLIO_VERSION "0.0.0"
#endif

namespace folio::cli {
namespace {

namespace fs = std::filesystem;

// Options shared by all subcommands; not every command reads every field.
struct Options {
  std::string space, partition, config, out;
  std::optional<double> tol, q, bandwidth;
  std::optional<std::uint64_t> seed;
  std::optional<Index> bands;
  // Command-specific.
  std::string mu, nu, rho, level = "mm", kind, times, experiment;
  std::optional<double> epsilon, k, slack;
  Index count = -1;
  int restarts = 16, trials = 50;
  bool density_corrected = false;
  std::vector<int> n_list;
  std::optional<Index> b_nodes;
};

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

Json load_json(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw StructuralError(path + ": " + e.what());
  }
}

fs::path out_dir(const Options& o) { return o.out.empty() ? fs::path(".") : fs::path(o.out); }

void write_json(const fs::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

// The manifest is byte-identical for identical inputs; wall-clock data goes
// to the sidecar log.
void write_manifest(const fs::path& dir, const std::string& command, const Json& config,
                    const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& outputs) {
  Json m;
  m["tool"] = "folio";
  m["version"] = FOLIO_VERSION;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = "fnv1a64:" + hex(fnv1a(config.dump()));
  m["seeds"] = seeds;
  m["outputs"] = outputs;
  write_json(dir / "manifest.json", m);
}

void write_log(const fs::path& dir, const std::string& command, double seconds) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::ostringstream s;
  s << "finished " << command << " at " << stamp << " in " << seconds << " s\n";
  write_atomic(dir / "run.log", s.str());
}

FiniteMMSpace need_space(const Options& o) {
  if (o.space.empty()) throw StructuralError("--space is required");
  return read_space(o.space);
}

GraphOperator graph_for(const FiniteMMSpace& space, const Options& o) {
  if (o.bandwidth) {
    KernelScaling ks;
    ks.density_corrected = o.density_corrected;
    return build_kernel_graph(space, *o.bandwidth, ks);
  }
  return build_grid_graph(space);
}

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw StructuralError("--times: cannot parse \"" + item + "\"");
    }
  }
  if (out.empty()) throw StructuralError("--times: empty list");
  return out;
}

// 1 + a cos of the index phase: periodic on circles, half period on grids.
DensityVector cosine_density(const FiniteMMSpace& space, double a) {
  const Index n = space.size();
  const bool circle = space.coords && space.coords->kind == CoordKind::sphere;
  DensityVector rho(n);
  for (Index i = 0; i < n; ++i) {
    const double phase = circle ? 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n)
                                : std::numbers::pi * static_cast<double>(i) / static_cast<double>(std::max<Index>(1, n - 1));
    rho(i) = 1 + a * std::cos(phase);
  }
  return rho / rho.dot(space.weight);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_generate(const Options& o) {
  if (o.config.empty()) throw StructuralError("generate: --config is required");
  Json spec = load_json(o.config);
  if (o.seed) spec["seed"] = *o.seed;
  if (o.bands) spec["bands"] = *o.bands;
  const auto gen = generate_from_json(spec);
  const fs::path dir = out_dir(o);
  std::vector<std::string> outputs{"space.json"};
  write_space(dir / "space.json", gen.space);
  if (gen.partition) {
    write_json(dir / "partition.json", partition_to_json(*gen.partition));
    outputs.push_back("partition.json");
  }
  write_manifest(dir, "generate", spec, {static_cast<std::uint64_t>(spec.value("seed", 0))}, outputs);
  std::cout << "generated " << gen.space.size() << " points in " << (dir / "space.json").string() << "\n";
  return kOk;
}

int cmd_validate(const Options& o) {
  const auto space = need_space(o);
  ValidationOptions vo;
  if (o.tol) vo.triangle_tol = *o.tol;
  const auto report = validate_space(space, vo);
  const Json j = validation_to_json(report, space);
  if (o.out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_json(o.out, j);
  return report.ok() ? kOk : kCheckFailed;
}

int cmd_ot(const Options& o) {
  const auto space = need_space(o);
  if (o.mu.empty() || o.nu.empty()) throw StructuralError("ot: --mu and --nu are required");
  const ProbVector mu = vector_from_json(load_json(o.mu)), nu = vector_from_json(load_json(o.nu));
  const double p = o.q.value_or(2.0);
  TransportPlan plan;
  if (o.epsilon) {
    SinkhornOptions so;
    so.epsilon = *o.epsilon;
    if (o.tol) so.tol = *o.tol;
    plan = sinkhorn(space, mu, nu, p, so);
  } else {
    plan = solve_ot(space, mu, nu, p);
  }
  const fs::path dir = out_dir(o);
  write_atomic(dir / "plan.csv", plan_csv(plan, space));
  write_json(dir / "plan.json", plan_sidecar(plan, mu, nu));
  std::cout << "W_" << format_double(p) << " = " << format_double(plan.distance()) << "\n";
  return kOk;
}

int cmd_foliate(const Options& o) {
  const auto space = need_space(o);
  if (o.partition.empty()) throw StructuralError("foliate: --partition is required");
  const auto bundle = build_quotient(space, read_partition(o.partition, space.size()));
  const double tol = o.tol.value_or(1e-9);
  FoliationReport report;
  if (o.level == "metric") {
    report = check_metric_foliation(bundle, tol);
  } else if (o.level == "mm") {
    MMFoliationOptions mo;
    mo.tol = tol;
    mo.seed = o.seed.value_or(0);
    report = check_mm_foliation(bundle, mo);
  } else {
    throw StructuralError("foliate: --level must be metric or mm");
  }
  Json j = foliation_report_to_json(report);
  j["quotient_metric_valid"] = bundle.quotient_metric_valid;
  const fs::path dir = out_dir(o);
  write_json(dir / "certification.json", j);
  write_atomic(dir / "pairs.csv", pair_csv(report));
  write_space(dir / "quotient.json", bundle.quotient);
  std::cout << (report.passed ? "certified " : "not certified ") << to_string(report.level) << "\n";
  return report.passed ? kOk : kCheckFailed;
}

int cmd_spectrum(const Options& o) {
  const auto space = need_space(o);
  const auto g = graph_for(space, o);
  SpectrumOptions so;
  so.count = o.count;
  so.seed = o.seed.value_or(0);
  const auto total = laplacian_spectrum(g, so);
  const fs::path dir = out_dir(o);
  write_atomic(dir / "spectrum.csv", spectrum_csv(total));
  if (o.partition.empty()) return kOk;
  const auto quotient = laplacian_spectrum(quotient_graph(g, read_partition(o.partition, space.size())), so);
  write_atomic(dir / "quotient_spectrum.csv", spectrum_csv(quotient));
  const auto report = containment_check(total, quotient, o.tol.value_or(1e-8));
  write_json(dir / "containment.json", containment_to_json(report));
  return report.passed ? kOk : kCheckFailed;
}

int cmd_gap(const Options& o) {
  const auto space = need_space(o);
  const auto g = graph_for(space, o);
  GapOptions go;
  go.seed = o.seed.value_or(0);
  go.restarts = o.restarts;
  const double q = o.q.value_or(2.0);
  const auto gap = spectral_gap_q(g, q, go);
  const Json j = gap_to_json(gap, q);
  if (o.out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_json(o.out, j);
  return kOk;
}

int cmd_heat(const Options& o) {
  const auto space = need_space(o);
  const auto g = graph_for(space, o);
  const DensityVector rho = o.rho.empty() ? cosine_density(space, 0.5) : vector_from_json(load_json(o.rho));
  const auto traj = heat_flow(g, rho, parse_times(o.times.empty() ? "0,0.1,0.5,1" : o.times));
  const auto ede = ede_audit(g, traj);
  const fs::path dir = out_dir(o);
  write_atomic(dir / "trajectory.csv", trajectory_csv(traj));
  write_json(dir / "ede.json", ede_to_json(ede));
  return ede.entropy_non_increasing ? kOk : kCheckFailed;
}

int cmd_audit(const Options& o) {
  const auto space = need_space(o);
  const auto report = k_convexity_audit(space, o.k.value_or(0.0), o.trials, o.seed.value_or(0), o.slack.value_or(5.0));
  const Json j = convexity_to_json(report);
  if (o.out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_json(o.out, j);
  return report.passed ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// Experiments. Each merges --config (a JSON object) with flag overrides into
// one resolved config, which is what the manifest records.

Json space_spec(const Json& config, const char* key, Json fallback) {
  return config.contains(key) ? config[key] : std::move(fallback);
}

int exp_sphere_collapse(const Options& o, Json& config, std::vector<std::string>& outputs) {
  if (!o.n_list.empty()) config["n"] = o.n_list;
  if (o.b_nodes) config["B"] = *o.b_nodes;
  if (!config.contains("n")) config["n"] = std::vector<int>{4, 16, 64, 256};
  if (!config.contains("B")) config["B"] = 500;
  if (!config.contains("k")) config["k"] = 3;
  const auto ns = config["n"].get<std::vector<int>>();
  const Index b = config["B"].get<Index>();
  const int kmax = config["k"].get<int>();
  std::string csv = "n,k,eigenvalue,target,rel_error\n";
  double final_error = 0;
  for (int n : ns) {
    if (n < 2) throw DomainError("sphere-collapse: n must be at least 2");
    const auto g = build_grid_graph(interval_quotient(n, std::sqrt(n - 1.0), b));
    SpectrumOptions so;
    so.count = kmax + 1;
    const auto s = laplacian_spectrum(g, so);
    for (int k = 1; k <= kmax && k < s.eigenvalues.size(); ++k) {
      const double target = k * (1.0 + k / (n - 1.0));
      const double err = std::abs(s.eigenvalues(k) - target) / target;
      if (k == 1) final_error = err;
      csv += std::to_string(n) + "," + std::to_string(k) + "," + format_double(s.eigenvalues(k)) + "," +
             format_double(target) + "," + format_double(err) + "\n";
    }
  }
  write_atomic(out_dir(o) / "sphere_collapse.csv", csv);
  outputs.push_back("sphere_collapse.csv");
  if (o.tol) config["tol"] = *o.tol;
  return config.contains("tol") && final_error > config["tol"].get<double>() ? kCheckFailed : kOk;
}

int exp_spectral_containment(const Options& o, Json& config, std::vector<std::string>& outputs) {
  config["Y"] = space_spec(config, "Y", {{"kind", "interval_quotient"}, {"n", 9}, {"r", std::sqrt(8.0)}, {"B", 40}});
  config["Z"] = space_spec(config, "Z", {{"kind", "cycle"}, {"N", 12}});
  if (o.tol) config["tol"] = *o.tol;
  if (!config.contains("tol")) config["tol"] = 1e-8;
  const auto gy = build_grid_graph(generate_from_json(config["Y"]).space);
  const auto gz = build_grid_graph(generate_from_json(config["Z"]).space);
  const auto total = product_graph(gy, gz);
  Partition by_y;
  for (Index y = 0; y < gy.size(); ++y)
    for (Index z = 0; z < gz.size(); ++z) by_y.class_of.push_back(y);
  by_y.num_classes = gy.size();
  const auto st = laplacian_spectrum(total), sq = laplacian_spectrum(quotient_graph(total, by_y));
  const double tol = config["tol"].get<double>();
  const auto report = containment_check(st, sq, tol);
  Spectrum shifted = sq;
  shifted.eigenvalues.array() += 1.0;
  const auto control = containment_check(st, shifted, tol);
  Json j = containment_to_json(report);
  j["negative_control"] = {{"passed", control.passed}, {"max_gap", control.max_gap}};
  const fs::path dir = out_dir(o);
  write_atomic(dir / "total_spectrum.csv", spectrum_csv(st));
  write_atomic(dir / "quotient_spectrum.csv", spectrum_csv(sq));
  write_json(dir / "containment.json", j);
  outputs.insert(outputs.end(), {"total_spectrum.csv", "quotient_spectrum.csv", "containment.json"});
  return report.passed && !control.passed ? kOk : kCheckFailed;
}

int exp_foliation_certify(const Options& o, Json& config, std::vector<std::string>& outputs) {
  FiniteMMSpace space;
  Partition partition;
  if (!o.space.empty()) {
    if (o.partition.empty()) throw StructuralError("foliation-certify: --space needs --partition");
    space = read_space(o.space);
    partition = read_partition(o.partition, space.size());
    config["space_file_hash"] = "fnv1a64:" + hex(fnv1a(read_text(o.space)));
    config["partition_file_hash"] = "fnv1a64:" + hex(fnv1a(read_text(o.partition)));
  } else {
    config["space"] = space_spec(config, "space",
                                 {{"kind", "lq_product"}, {"q", 2}, {"Y", {{"kind", "path"}, {"N", 6}}},
                                  {"Z", {{"kind", "cycle"}, {"N", 5}}}});
    if (o.bands) config["space"]["bands"] = *o.bands;
    auto gen = generate_from_json(config["space"]);
    if (!gen.partition) throw StructuralError("foliation-certify: the generator has no canonical partition");
    space = std::move(gen.space);
    partition = std::move(*gen.partition);
  }
  if (o.tol) config["tol"] = *o.tol;
  if (!config.contains("tol")) config["tol"] = 1e-9;
  MMFoliationOptions mo;
  mo.tol = config["tol"].get<double>();
  mo.seed = o.seed.value_or(0);
  const auto bundle = build_quotient(space, partition);
  const auto report = check_mm_foliation(bundle, mo);
  const fs::path dir = out_dir(o);
  write_json(dir / "certification.json", foliation_report_to_json(report));
  write_atomic(dir / "pairs.csv", pair_csv(report));
  outputs.insert(outputs.end(), {"certification.json", "pairs.csv"});
  return report.passed ? kOk : kCheckFailed;
}

int exp_convexity_audit(const Options& o, Json& config, std::vector<std::string>& outputs) {
  config["space"] = space_spec(config, "space", {{"kind", "interval_quotient"}, {"n", 9}, {"r", std::sqrt(8.0)}, {"B", 800}});
  if (o.k) config["K"] = *o.k;
  if (o.slack) config["slack"] = *o.slack;
  if (!config.contains("K")) config["K"] = 1.0;
  if (!config.contains("slack")) config["slack"] = 5.0;
  if (!config.contains("trials")) config["trials"] = o.trials;
  const auto grid = generate_from_json(config["space"]).space;
  const auto report = k_convexity_audit(grid, config["K"].get<double>(), config["trials"].get<int>(),
                                        o.seed.value_or(0), config["slack"].get<double>());
  write_json(out_dir(o) / "convexity.json", convexity_to_json(report));
  outputs.push_back("convexity.json");
  return report.passed ? kOk : kCheckFailed;
}

int exp_ede_audit(const Options& o, Json& config, std::vector<std::string>& outputs) {
  config["space"] = space_spec(config, "space", {{"kind", "cycle"}, {"N", 512}});
  if (!config.contains("end")) config["end"] = 2.0;
  if (!config.contains("steps")) config["steps"] = 200;
  if (!config.contains("amplitude")) config["amplitude"] = 0.9;
  if (o.tol) config["tol"] = *o.tol;
  if (!config.contains("tol")) config["tol"] = 0.05;
  const auto space = generate_from_json(config["space"]).space;
  const auto g = graph_for(space, o);
  const int steps = config["steps"].get<int>();
  std::vector<double> times;
  for (int k = 0; k <= steps; ++k) times.push_back(config["end"].get<double>() * k / steps);
  const auto traj = heat_flow(g, cosine_density(space, config["amplitude"].get<double>()), times);
  const auto ede = ede_audit(g, traj);
  const fs::path dir = out_dir(o);
  write_atomic(dir / "trajectory.csv", trajectory_csv(traj));
  write_json(dir / "ede.json", ede_to_json(ede));
  outputs.insert(outputs.end(), {"trajectory.csv", "ede.json"});
  return ede.entropy_non_increasing && ede.mismatch <= config["tol"].get<double>() ? kOk : kCheckFailed;
}

int cmd_experiment(const Options& o) {
  Json config = o.config.empty() ? Json::object() : load_json(o.config);
  if (!config.is_object()) throw StructuralError("experiment: --config must hold a JSON object");
  std::vector<std::string> outputs;
  int code = kOk;
  const auto start = std::chrono::steady_clock::now();
  if (o.experiment == "sphere-collapse")
    code = exp_sphere_collapse(o, config, outputs);
  else if (o.experiment == "spectral-containment")
    code = exp_spectral_containment(o, config, outputs);
  else if (o.experiment == "foliation-certify")
    code = exp_foliation_certify(o, config, outputs);
  else if (o.experiment == "convexity-audit")
    code = exp_convexity_audit(o, config, outputs);
  else if (o.experiment == "ede-audit")
    code = exp_ede_audit(o, config, outputs);
  else
    throw StructuralError("unknown experiment \"" + o.experiment + "\"");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  config["experiment"] = o.experiment;
  write_manifest(out_dir(o), "experiment " + o.experiment, config, {o.seed.value_or(0)}, outputs);
  write_log(out_dir(o), "experiment " + o.experiment, seconds);
  std::cout << o.experiment << ": " << (code == kOk ? "pass" : "fail") << "\n";
  return code;
}

// ---------------------------------------------------------------------------

void common_flags(CLI::App* app, Options& o) {
  app->add_option("--space", o.space, "Space JSON file");
  app->add_option("--partition", o.partition, "Partition JSON file");
  app->add_option("--config", o.config, "Config or generator spec JSON file");
  app->add_option("--tol", o.tol, "Tolerance");
  app->add_option("--seed", o.seed, "Random seed");
  app->add_option("--out", o.out, "Output directory (or file for single reports)");
  app->add_option("--q", o.q, "Exponent");
  app->add_option("--bands", o.bands, "Number of distance bands");
  app->add_option("--bandwidth", o.bandwidth, "Kernel bandwidth t (kernel graph instead of grid graph)");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Finite metric measure spaces: transport, foliations, spectra and flows", "folio"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FOLIO_VERSION);
  Options o;

  auto* generate = app.add_subcommand("generate", "Generate a space from a JSON spec");
  auto* validate = app.add_subcommand("validate", "Check the metric measure space axioms");
  auto* ot = app.add_subcommand("ot", "Optimal transport between two measures");
  auto* foliate = app.add_subcommand("foliate", "Certify a partition as a (metric measure) foliation");
  auto* spectrum = app.add_subcommand("spectrum", "Laplacian spectrum and quotient containment");
  auto* gap = app.add_subcommand("gap", "q-spectral gap");
  auto* heat = app.add_subcommand("heat", "Heat flow with entropy and slope traces");
  auto* audit = app.add_subcommand("audit", "K-convexity audit of the entropy on an interval grid");
  auto* experiment = app.add_subcommand("experiment", "Run a named experiment");
  for (auto* sub : {generate, validate, ot, foliate, spectrum, gap, heat, audit, experiment}) common_flags(sub, o);

  ot->add_option("--mu", o.mu, "Source measure JSON")->required();
  ot->add_option("--nu", o.nu, "Target measure JSON")->required();
  ot->add_option("--epsilon", o.epsilon, "Entropic regularization (Sinkhorn)");
  foliate->add_option("--level", o.level, "metric or mm")->check(CLI::IsMember({"metric", "mm"}));
  for (auto* sub : {spectrum, gap, heat, experiment})
    sub->add_flag("--density-corrected", o.density_corrected, "Density-corrected kernel normalization");
  spectrum->add_option("--count", o.count, "Number of eigenvalues (-1 for all)");
  gap->add_option("--restarts", o.restarts, "Optimizer restarts for q != 2");
  heat->add_option("--rho", o.rho, "Initial density JSON");
  heat->add_option("--times", o.times, "Comma-separated output times");
  audit->add_option("--k", o.k, "Curvature bound K");
  audit->add_option("--trials", o.trials, "Number of random pairs");
  audit->add_option("--slack", o.slack, "Slack constant C (slack = C h)");
  experiment->add_option("id", o.experiment, "sphere-collapse | spectral-containment | foliation-certify | "
                                             "convexity-audit | ede-audit")
      ->required();
  experiment->add_option("--n", o.n_list, "Comma-separated dimensions")->delimiter(',');
  experiment->add_option("--B", o.b_nodes, "Grid nodes");
  experiment->add_option("--k", o.k, "Curvature bound K");
  experiment->add_option("--slack", o.slack, "Slack constant C");
  experiment->add_option("--trials", o.trials, "Number of random pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*generate) return cmd_generate(o);
    if (*validate) return cmd_validate(o);
    if (*ot) return cmd_ot(o);
    if (*foliate) return cmd_foliate(o);
    if (*spectrum) return cmd_spectrum(o);
    if (*gap) return cmd_gap(o);
    if (*heat) return cmd_heat(o);
    if (*audit) return cmd_audit(o);
    if (*experiment) return cmd_experiment(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kUsage;
}

}  // namespace folio::cli
