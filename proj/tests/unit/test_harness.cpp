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

#include <cstdlib>
#include <random>
#include <sstream>

#include <doctest.h>

#include "covlab/causal.hpp"
#include "covlab/errors.hpp"
#include "covlab/harness.hpp"
#include "covlab/report.hpp"
#include "covlab/scalarfield.hpp"

using namespace covlab;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return RunConfig::parse(in);
}

Eigen::MatrixXcd random_matrix(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = cplx(g(rng), g(rng));
  return m;
}

const SpinStatReport& default_report() {
  static const SpinStatReport r = run_spinstat(RunConfig{});
  return r;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const RunConfig c = RunConfig::load(COVLAB_SOURCE_DIR "/configs/default.cfg");
  const RunConfig d;
  CHECK(c.to_json() == d.to_json());
  CHECK(!c.t_sigma.has_value());

  const RunConfig e = parse("[lattice]\nnt = 101\nnx = 81\n[deformation]\nt_sigma = 1.5\nsabotage = shrink-hat\n");
  CHECK(e.nt == 101);
  CHECK(e.nx == 81);
  CHECK(e.t_sigma == doctest::Approx(1.5));
  CHECK(e.sabotage == Sabotage::ShrinkHat);

  CHECK_THROWS_AS(parse("[lattice]\nnq = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[nosuch]\nnt = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[lattice]\nnt = 40x\n"), ConfigError);
  CHECK_THROWS_AS(parse("[tolerances]\npairing = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("[tolerances]\nlocality = -1e-8\n"), ConfigError);
  CHECK_THROWS_AS(parse("[fields]\nscalar_mass = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("[deformation]\nsabotage = sometimes\n"), ConfigError);
  CHECK_THROWS_AS(parse("nt = 3\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/covlab.cfg"), ConfigError);

  RunConfig s;
  s.scale_tolerances(10.0);
  CHECK(s.tol_locality == doctest::Approx(1e-7));
  CHECK(s.tol_witness == doctest::Approx(1e-4));
  CHECK_THROWS_AS(s.scale_tolerances(0.0), ConfigError);
}

TEST_CASE("factor model commutes exactly and recovers factors") {
  std::mt19937 rng(7);
  const FactorModel m(3, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXcd a = random_matrix(3, rng), b = random_matrix(4, rng);
    CHECK(m.commutation_defect(a, b) == 0.0);
    const auto fa = m.left_factor(m.left(a));
    REQUIRE(fa.has_value());
    CHECK((*fa - a).cwiseAbs().maxCoeff() < 1e-12);
    const auto fb = m.right_factor(m.right(b));
    REQUIRE(fb.has_value());
    CHECK((*fb - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(!m.left_factor(m.right(b) + m.left(a)).has_value());
  }
  CHECK(m.expectation(Eigen::MatrixXcd::Identity(12, 12)) == doctest::Approx(1.0));
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
  bad(0, 0) = 1.0;
  CHECK_THROWS_AS(FactorModel(bad, Eigen::MatrixXcd::Identity(2, 2) / 2.0), ConfigError);
  CHECK_THROWS_AS(FactorModel(0, 2), ConfigError);
}

TEST_CASE("Schlieder check on tensor factors") {
  std::mt19937 rng(11);
  const FactorModel m(3, 3);
  const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(3, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXcd q = random_matrix(3, rng);
    CHECK(schlieder_check(m, m.left(zero), m.right(q)) == SchliederOutcome::FirstZero);
    const Eigen::VectorXcd u = random_matrix(3, rng).col(0), v = random_matrix(3, rng).col(0);
    const Eigen::MatrixXcd rank1 = u * v.adjoint();
    CHECK(schlieder_check(m, m.left(rank1), m.right(zero)) == SchliederOutcome::SecondZero);
    // Nonzero factors never multiply to zero, so the precondition fails.
    CHECK_THROWS_AS(schlieder_check(m, m.left(rank1), m.right(q)), DomainError);
  }
  const Eigen::MatrixXcd entangled = m.left(random_matrix(3, rng)) * m.right(random_matrix(3, rng));
  CHECK_THROWS_AS(schlieder_check(m, entangled, m.right(zero)), DomainError);
  CHECK_THROWS_AS(schlieder_check(m, m.left(zero), Eigen::MatrixXcd::Random(9, 9)), DomainError);
  CHECK(to_string(SchliederOutcome::SecondZero) == "A2_zero");
}

TEST_CASE("top spectral projection") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 3);
  h(0, 0) = 1.0;
  h(1, 1) = -3.0;
  h(2, 2) = 2.0;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(3, 3);
  p(1, 1) = 1.0;
  CHECK((top_spectral_projection(h) - p).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(top_spectral_projection(Eigen::MatrixXcd::Zero(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("default spin-statistics run") {
  const SpinStatReport& r = default_report();
  CHECK(r.verdict == kConfirmed);
  CHECK(r.verdict_integer == kConfirmed);
  CHECK(r.verdict_half_integer == kConfirmed);
  REQUIRE(r.stages.size() == 7);
  for (const auto& s : r.stages) {
    CHECK(s.pass);
    CHECK(!s.margins.empty());
  }
  const auto find = [&](int stage, const std::string& prefix) {
    for (const auto& m : r.stages[static_cast<std::size_t>(stage - 1)].margins)
      if (m.name.rfind(prefix, 0) == 0) return m;
    FAIL("missing margin " << prefix);
    return Margin{};
  };
  CHECK(find(4, "|kappa(f1, f2)|").value < 1e-8);
  CHECK(find(4, "|Re W(f1, f2)|").value > 1e-3);
  CHECK(find(6, "anticommutator").value < 1e-8);
  CHECK(find(6, "|[B(g1), B(g2)]|").value > 1e-3);
  CHECK(recheck_report(r.to_json()) == "");
  CHECK(r.to_json().dump() == run_spinstat(RunConfig{}).to_json().dump());
  REQUIRE(r.artifacts.lattice.has_value());
  CHECK(r.artifacts.propagator.size() == r.artifacts.lattice->size());
}

TEST_CASE("recheck detects tampering") {
  const auto doc = default_report().to_json();
  auto value = doc;
  value["stages"][3]["margins"][0]["value"] = 1.0;
  CHECK(recheck_report(value) != "");
  auto flag = doc;
  flag["stages"][2]["pass"] = false;
  CHECK(recheck_report(flag) != "");
  auto verdict = doc;
  verdict["verdict"]["half-integer"] = "failed at stage 6";
  CHECK(recheck_report(verdict) != "");
  auto missing = doc;
  missing.erase("verdict");
  CHECK(recheck_report(missing) != "");
  const SpinStatReport back = spinstat_from_json(doc);
  CHECK(back.to_json() == doc);
}

TEST_CASE("sabotaged deformation stops the pipeline at stage 2") {
  RunConfig c;
  c.sabotage = Sabotage::PocketCurvature;
  const SpinStatReport r = run_spinstat(c);
  CHECK(!r.confirmed());
  CHECK(!r.stages[1].pass);
  CHECK(r.verdict_integer.rfind("failed at stage 2 (clause c", 0) == 0);
  CHECK(r.verdict_half_integer.rfind("failed at stage 2 (clause c", 0) == 0);
  for (std::size_t k = 2; k < r.stages.size(); ++k) CHECK(r.stages[k].skipped);
  CHECK(recheck_report(r.to_json()) == "");
}

TEST_CASE("causal queries") {
  RunConfig c;
  c.nt = 41;
  c.nx = 41;
  std::istringstream q("# comment\nsite s 20 10\narc a 5 6 30 4  # trailing comment\n\ndiamond d 20 5 6 3\n");
  const std::string csv = causal_query_csv(c, q);
  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  const CausalGraph g(model, lat);
  const Region o = g.region({{20, 10}});
  const int expected = (g.future(o) | g.past(o)).count();
  int rows = 0, future_rows = 0;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "query,j,i,t,x,region,J+,J-,D+,D-,perp");
  while (std::getline(lines, line)) {
    if (line.rfind("s,", 0) != 0) continue;
    ++rows;
    std::istringstream cells(line);
    std::vector<std::string> f;
    for (std::string cell; std::getline(cells, cell, ',');) f.push_back(cell);
    REQUIRE(f.size() == 11);
    const int k = lat.index(std::stoi(f[1]), std::stoi(f[2]));
    CHECK((f[6] == "1") == g.future(o).contains(k));
    CHECK(f[10] == "0");
    future_rows += f[6] == "1";
  }
  CHECK(rows == expected);
  CHECK(future_rows == g.future(o).count());
  CHECK(csv.find("\na,") != std::string::npos);
  CHECK(csv.find("\nd,") != std::string::npos);
  std::istringstream bad1("cone x 1 2\n"), bad2("site x 1\n"), bad3("site x 1 2 3\n"), bad4("site x 999 1\n");
  CHECK_THROWS_AS(causal_query_csv(c, bad1), ConfigError);
  CHECK_THROWS_AS(causal_query_csv(c, bad2), ConfigError);
  CHECK_THROWS_AS(causal_query_csv(c, bad3), ConfigError);
  CHECK_THROWS_AS(causal_query_csv(c, bad4), ConfigError);
}

TEST_CASE("output directory resolution and writers") {
  RunConfig c;
  c.out_dir = "from-config";
  ::unsetenv(kOutDirEnv);
  CHECK(resolve_out_dir(std::nullopt, c) == "from-config");
  ::setenv(kOutDirEnv, "from-env", 1);
  CHECK(resolve_out_dir(std::nullopt, c) == "from-env");
  CHECK(resolve_out_dir(std::string("from-cli"), c) == "from-cli");
  ::unsetenv(kOutDirEnv);

  const Lattice lat = c.lattice(c.model());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(lat.size());
  v(lat.index(10, 10)) = 1.0;
  const std::string svg = svg_heatmap(lat, v, {{"O", Region::slab(lat, 0, 3)}}, "a < b");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("a &lt; b") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK_THROWS_AS(svg_heatmap(lat, Eigen::VectorXd::Zero(3), {}, "x"), DomainError);
  const std::string bars = svg_margin_bars({Margin::below("m", 1e-9, 1e-8), Margin::above("w", 0.0, 1.0)}, "t");
  CHECK(bars.find("#4daf4a") != std::string::npos);
  CHECK(bars.find("#e41a1c") != std::string::npos);
  Eigen::MatrixXcd m(1, 2);
  m << cplx(1.0, 0.0), cplx(0.5, -2.0);
  CHECK(matrix_csv(m) == "1+0i,0.5-2i\n");

  const auto dir = std::filesystem::temp_directory_path() / "covlab-test-writers";
  std::filesystem::remove_all(dir);
  CheckReport r;
  r.name = "demo";
  r.margins.push_back(Margin::below("x", 0.0, 1.0));
  const auto files = write_check(dir, r);
  REQUIRE(files.size() == 2);
  CHECK(nlohmann::ordered_json::parse(read_file(files[0]))["pass"] == true);
  std::filesystem::remove_all(dir);
}

TEST_CASE("margins") {
  CHECK(Margin::below("a", 1.0, 2.0).pass);
  CHECK(!Margin::below("a", 2.0, 2.0).pass);
  CHECK(Margin::above("a", 3.0, 2.0).pass);
  CHECK(!Margin::above("a", std::nan(""), 2.0).pass);
  CheckReport r;
  CHECK(!r.pass());
}
