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

#include <cmath>

#include <doctest.h>

#include "covlab/deformation.hpp"
#include "covlab/scalarfield.hpp"

using namespace covlab;

namespace {

struct Setup {
  MetricModel model = MetricModel::sandwich(SandwichParams{}, -2.0, 2.0, 8.0);
  Lattice lat = build_lattice(model, 401, 401);
  Site p1 = lat.nearest(1.6, 2.0);
  Site p2 = lat.nearest(1.6, 6.0);
  DeformationSpec spec = DeformationSpec::defaults(model, p1, p2);
};

}  // namespace

TEST_CASE("default slice times") {
  Setup s;
  CHECK(s.spec.t_sigma == doctest::Approx(1.4));
  CHECK(s.spec.t_sigma2 == doctest::Approx(1.0));
  CHECK(s.spec.t_sigma1 == doctest::Approx(0.6));
  const auto flat = MetricModel::minkowski(-2.0, 2.0, 8.0);
  const auto fs = DeformationSpec::defaults(flat, s.p1, s.p2);
  CHECK(fs.t_sigma == doctest::Approx(0.0));
  CHECK(fs.t_sigma2 == doctest::Approx(-0.4));
  CHECK(fs.t_sigma1 == doctest::Approx(-0.8));
}

TEST_CASE("sandwich deformation is certified") {
  Setup s;
  const auto d = build_deformation(s.model, s.lat, s.spec);
  const auto cert = certify(d);
  for (const auto& c : cert.clauses) {
    INFO(c.clause << ": " << c.detail);
    CHECK(c.pass);
  }
  CHECK(cert.all_pass());
  CHECK(cert.failed().empty());
  CHECK(cert.clause("a").margin == 0.0);
  CHECK(cert.clause("c").margin < 1e-8);
  CHECK(d.model.kind() == ModelKind::Deformed);
  // bitwise identity above t_sigma, checked off the lattice too
  for (double t : {1.4, 1.55, 1.81, 1.99})
    for (double x : {0.0, 1.3, 7.7}) {
      CHECK(d.model.lapse(t, x) == s.model.lapse(t, x));
      CHECK(d.model.scale(t, x) == s.model.scale(t, x));
    }
  // flat pocket, continued below t_sigma1
  for (double t : {-1.9, 0.0, 0.7, 0.99})
    for (double x : {0.5, 4.0}) {
      CHECK(d.model.lapse(t, x) == 1.0);
      CHECK(d.model.scale(t, x) == std::sqrt(d.gamma));
    }
  REQUIRE(d.model.initial_flat_band().has_value());
  CHECK(d.model.initial_flat_band()->t_hi == doctest::Approx(1.0));
  // atlas shape
  for (int k = 0; k < 2; ++k) {
    CHECK(d.u[k].contains(s.lat.index(d.p_tilde[static_cast<std::size_t>(k)])));
    CHECK(d.u_tilde[k].subset_of(d.u_hat[k]));
    CHECK(d.graph->causally_determined(d.u_tilde[k], d.u[k]));
    CHECK(d.graph->causally_determined(d.u[k], d.u_hat[k]));
  }
  CHECK(d.u[0].descriptor() == "U1");
  CHECK(d.u_hat[1].descriptor() == "U2^");
}

TEST_CASE("lapse stays in (0, 1] and cones narrow on the band") {
  Setup s;
  const auto d = build_deformation(s.model, s.lat, s.spec);
  for (int j = 0; j < s.lat.nt; ++j) {
    const double t = s.lat.t(j);
    if (t >= s.spec.t_sigma) continue;
    for (int i = 0; i < s.lat.nx; i += 7) {
      const double b = d.model.lapse(t, s.lat.x(i));
      CHECK(b > 0.0);
      CHECK(b <= 1.0);
    }
  }
  const double mid = 0.5 * (s.spec.t_sigma + s.spec.t_sigma2);
  CHECK(d.model.lapse(mid, 1.0) == doctest::Approx(1.0 - 0.5 * s.spec.lapse_dip).epsilon(0.05));
  CHECK(d.profile(s.spec.t_sigma2 - 0.1) == 1.0);
  CHECK(d.profile(s.spec.t_sigma + 0.01) == 0.0);
}

TEST_CASE("gamma is rescaled when the band would widen the cones") {
  // scale grows after t_sigma2, so the mean on the t_sigma2 slice is too small
  const auto grow = MetricModel::custom(
      "growing", [](double, double) { return 1.0; },
      [](double t, double x) { return 1.0 + 0.3 * smoothstep((t - 0.9) / 0.4) * (1.0 + 0.2 * std::cos(x)); },
      -2.0, 2.0, 8.0);
  const auto lat = build_lattice(grow, 401, 401);
  auto spec = DeformationSpec::defaults(grow, lat.nearest(1.6, 2.0), lat.nearest(1.6, 6.0));
  spec.t_sigma = 1.4;
  spec.t_sigma2 = 1.0;
  spec.t_sigma1 = 0.6;
  const auto d = build_deformation(grow, lat, spec);
  CHECK(d.gamma > d.gamma_base * 1.01);
  const auto cert = certify(d);
  CHECK(cert.clause("narrowing").pass);
  CHECK(cert.all_pass());
}

TEST_CASE("flat source gives a flat deformation up to the lapse") {
  const auto flat = MetricModel::minkowski(-2.0, 2.0, 8.0);
  const auto lat = build_lattice(flat, 401, 401);
  const auto spec = DeformationSpec::defaults(flat, lat.nearest(0.3, 2.0), lat.nearest(0.3, 6.0));
  const auto d = build_deformation(flat, lat, spec);
  CHECK(d.gamma == 1.0);
  for (int j = 0; j < lat.nt; j += 5)
    for (int i = 0; i < lat.nx; i += 13) CHECK(d.model.scale(lat.t(j), lat.x(i)) == 1.0);
  CHECK(certify(d).all_pass());
}

TEST_CASE("sabotaged specs fail the intended clause") {
  Setup s;
  {
    auto spec = s.spec;
    spec.sabotage = Sabotage::FutureProfile;
    const auto cert = certify(build_deformation(s.model, s.lat, spec));
    CHECK_FALSE(cert.clause("a").pass);
    CHECK(cert.clause("a").margin > 0.0);
  }
  {
    auto spec = s.spec;
    spec.sabotage = Sabotage::PocketCurvature;
    const auto cert = certify(build_deformation(s.model, s.lat, spec));
    CHECK_FALSE(cert.clause("c").pass);
    CHECK(cert.clause("a").pass);
  }
  {
    auto spec = s.spec;
    spec.sabotage = Sabotage::ShrinkHat;
    const auto cert = certify(build_deformation(s.model, s.lat, spec));
    CHECK_FALSE(cert.clause("f").pass);
    CHECK(cert.clause("e").pass);
    CHECK_FALSE(cert.all_pass());
  }
  for (Sabotage v : {Sabotage::None, Sabotage::FutureProfile, Sabotage::PocketCurvature, Sabotage::ShrinkHat})
    CHECK(sabotage_from_string(to_string(v)) == v);
  CHECK_THROWS_AS(sabotage_from_string("bogus"), ConfigError);
}

TEST_CASE("preconditions and diagnostics") {
  Setup s;
  {
    auto spec = s.spec;
    spec.p2 = s.lat.nearest(1.8, 2.05);  // timelike to p1
    CHECK_THROWS_AS(build_deformation(s.model, s.lat, spec), DomainError);
  }
  {
    auto spec = s.spec;
    spec.p1 = s.lat.nearest(1.2, 2.0);  // below t_sigma
    CHECK_THROWS_AS(build_deformation(s.model, s.lat, spec), DomainError);
  }
  {
    auto spec = s.spec;
    std::swap(spec.t_sigma1, spec.t_sigma2);
    CHECK_THROWS_AS(build_deformation(s.model, s.lat, spec), ConfigError);
  }
  {
    auto spec = s.spec;
    spec.lapse_dip = 1.0;
    CHECK_THROWS_AS(build_deformation(s.model, s.lat, spec), ConfigError);
  }
  {
    // pocket far below the points: no atlas fits
    auto spec = s.spec;
    spec.t_sigma2 = -0.6;
    spec.t_sigma1 = -1.0;
    try {
      build_deformation(s.model, s.lat, spec);
      FAIL("expected a diagnostic");
    } catch (const DiagnosticError& e) {
      CHECK(std::string(e.what()).find("try t_sigma2") != std::string::npos);
    }
  }
  {
    // a late point whose past wraps the t_sigma slice is uncertifiable
    auto spec = s.spec;
    spec.t_sigma = -1.5;
    spec.t_sigma2 = -1.6;
    spec.t_sigma1 = -1.8;
    spec.p1 = s.lat.nearest(1.9, 2.0);
    spec.p2 = s.lat.nearest(1.9, 6.0);
    CHECK_THROWS_AS(build_deformation(s.model, s.lat, spec), std::exception);
  }
}
