// Copyright 2026 The covlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "covlab/errors.hpp"
#include "covlab/harness.hpp"
#include "covlab/report.hpp"

namespace {

using namespace covlab;

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;

struct Globals {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_scale;
};

RunConfig load_config(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : RunConfig::load(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.tol_scale) c.scale_tolerances(*g.tol_scale);
  c.validate();
  return c;
}

void announce(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

int cmd_check(const Globals& g, CheckReport (*run)(const RunConfig&)) {
  const RunConfig c = load_config(g);
  const CheckReport r = run(c);
  std::cout << check_text(r);
  announce(write_check(resolve_out_dir(g.out, c), r));
  return r.pass() ? kPass : kCheckFailure;
}

int cmd_spinstat(const Globals& g) {
  const RunConfig c = load_config(g);
  const SpinStatReport r = run_spinstat(c);
  std::cout << r.to_text();
  announce(write_spinstat(resolve_out_dir(g.out, c), r));
  return r.confirmed() ? kPass : kCheckFailure;
}

int cmd_report(const Globals& g) {
  const RunConfig c = load_config(g);
  const auto path = resolve_out_dir(g.out, c) / "report.json";
  if (!std::filesystem::exists(path)) {
    std::cerr << "no report at " << path.string() << "; run `covlab spinstat` first\n";
    return kConfigError;
  }
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  const SpinStatReport r = spinstat_from_json(doc);
  std::cout << r.to_text();
  const std::string problem = recheck_report(doc);
  if (!problem.empty()) {
    std::cout << "recheck: INCONSISTENT: " << problem << "\n";
    return kCheckFailure;
  }
  std::cout << "recheck: every margin, stage and verdict follows from the recorded values\n";
  return r.confirmed() ? kPass : kCheckFailure;
}

int cmd_deform(const Globals& g) {
  const RunConfig c = load_config(g);
  const auto dir = resolve_out_dir(g.out, c);
  DeformRun run = run_deform(c);
  nlohmann::ordered_json j;
  j["config"] = c.to_json();
  j["gamma"] = run.deformation.gamma;
  j["clauses"] = nlohmann::ordered_json::array();
  std::cout << "deformation certificate\n";
  for (const auto& cl : run.certificate.clauses) {
    j["clauses"].push_back({{"clause", cl.clause}, {"pass", cl.pass}, {"margin", cl.margin}, {"detail", cl.detail}});
    std::cout << fmt::format("  clause {:<10} {}  {}\n", cl.clause, cl.pass ? "PASS" : "FAIL", cl.detail);
  }
  j["pass"] = run.certificate.all_pass();
  const DeformedSpacetime& d = run.deformation;
  const std::map<std::string, Region> regions = {
      {"U1", d.u[0]},     {"U2", d.u[1]},     {"U1_tilde", d.u_tilde[0]}, {"U2_tilde", d.u_tilde[1]},
      {"U1_hat", d.u_hat[0]}, {"U2_hat", d.u_hat[1]}, {"G", d.g},     {"G_hat", d.g_hat}};
  Eigen::VectorXd profile(d.lattice.size());
  for (int jj = 0; jj < d.lattice.nt; ++jj)
    for (int i = 0; i < d.lattice.nx; ++i)
      profile(d.lattice.index(jj, i)) = std::abs(d.model.scale(d.lattice.t(jj), d.lattice.x(i)) -
                                                 d.source.scale(d.lattice.t(jj), d.lattice.x(i))) + 1e-12;
  std::vector<std::pair<std::string, Region>> overlays(regions.begin(), regions.end());
  std::vector<std::filesystem::path> files{dir / "deform.json", dir / "atlas.svg", dir / "atlas.csv"};
  write_file(files[0], j.dump(2) + "\n");
  write_file(files[1], svg_heatmap(d.lattice, profile, overlays, "|a~ - a| with the region atlas"));
  write_file(files[2], regions_csv(d.lattice, regions));
  announce(files);
  std::cout << (run.certificate.all_pass() ? "certificate: PASS\n" : "certificate: FAIL\n");
  return run.certificate.all_pass() ? kPass : kCheckFailure;
}

int cmd_propagate(const Globals& g) {
  const RunConfig c = load_config(g);
  const auto dir = resolve_out_dir(g.out, c);
  const PropagateRun run = run_propagate(c);
  std::cout << check_text(run.check);
  auto files = write_check(dir, run.check);
  const std::vector<std::pair<std::string, Region>> src{{"supp f", run.source}};
  write_file(dir / "retarded.svg", svg_heatmap(run.lattice, run.retarded, src, "|E+ f|"));
  write_file(dir / "advanced.svg", svg_heatmap(run.lattice, run.advanced, src, "|E- f|"));
  files.push_back(dir / "retarded.svg");
  files.push_back(dir / "advanced.svg");
  announce(files);
  return run.check.pass() ? kPass : kCheckFailure;
}

int cmd_causal(const Globals& g, const std::string& queries) {
  const RunConfig c = load_config(g);
  std::string csv;
  if (queries == "-") {
    csv = causal_query_csv(c, std::cin);
  } else {
    std::ifstream in(queries);
    if (!in) throw ConfigError(fmt::format("cannot open query file '{}'", queries));
    csv = causal_query_csv(c, in);
  }
  const auto path = resolve_out_dir(g.out, c) / "causal.csv";
  write_file(path, csv);
  announce({path});
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covlab: locally covariant free fields on 1+1 lattices"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "INI run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory (overrides COVLAB_OUT_DIR and run.out_dir)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--tol-scale", g.tol_scale, "multiply tolerances (witness bounds are divided)");

  std::string queries = "-";
  auto* causal = app.add_subcommand("causal", "region queries: CSV of J+/J-/D+/D-/perp memberships");
  causal->add_option("--queries", queries, "query file ('-' reads stdin)");
  auto* deform = app.add_subcommand("deform", "build and certify the deformation");
  auto* propagate = app.add_subcommand("propagate", "retarded/advanced solves with support check and plots");
  auto* ccr = app.add_subcommand("ccr-check", "CCR on the truncated Fock space");
  auto* car = app.add_subcommand("car-check", "CAR on the self-dual representation");
  auto* functor = app.add_subcommand("functor-check", "category and functor laws, covariance, pairing transport");
  auto* spinstat = app.add_subcommand("spinstat", "spin-statistics pipeline");
  auto* report = app.add_subcommand("report", "render and re-check the last spinstat report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kConfigError;
  }

  try {
    if (*causal) return cmd_causal(g, queries);
    if (*deform) return cmd_deform(g);
    if (*propagate) return cmd_propagate(g);
    if (*ccr) return cmd_check(g, &run_ccr_check);
    if (*car) return cmd_check(g, &run_car_check);
    if (*functor) return cmd_check(g, &run_functor_check);
    if (*spinstat) return cmd_spinstat(g);
    if (*report) return cmd_report(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kCheckFailure;
  }
  std::cerr << app.help();
  return kConfigError;
}
