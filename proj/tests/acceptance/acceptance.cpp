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

// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance [--only N] [--strict]
//
// Without --strict the exit status is 0 whenever every criterion ran to
// completion; --strict also fails on a FAIL verdict.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "causal_oracle.hpp"
#include "covlab/causal.hpp"
#include "covlab/deformation.hpp"
#include "covlab/diracfield.hpp"
#include "covlab/harness.hpp"
#include "covlab/scalarfield.hpp"
#include "covlab/spin.hpp"
#include "dalembert_oracle.hpp"

using namespace covlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// 1. Causal relations against brute-force path enumeration.
Outcome causal_oracle() {
  const auto t0 = Clock::now();
  SandwichParams p;
  p.amplitude = 2.0;
  struct Case {
    std::string name;
    MetricModel model;
    double cfl;
  };
  const std::vector<Case> cases{{"minkowski", MetricModel::minkowski(-0.9375, 0.9375, 2.0), 1.0},
                                {"curved", MetricModel::sandwich(p, -2.0, 2.0, 2.4), 2.0}};
  long long regions = 0, mismatches = 0;
  std::mt19937_64 rng(1601);
  for (const auto& c : cases) {
    const Lattice lat = build_lattice(c.model, 16, 16, c.cfl);
    const CausalGraph g(c.model, lat);
    const oracle::CausalOracle o(c.model, lat);
    auto check = [&](const Region& r) {
      const auto bits = oracle::to_bits(r);
      ++regions;
      bool ok = oracle::to_bits(g.future(r)) == o.future(bits) && oracle::to_bits(g.past(r)) == o.past(bits) &&
                oracle::to_bits(g.dependence_future(r)) == o.dependence_future(bits) &&
                oracle::to_bits(g.dependence_past(r)) == o.dependence_past(bits) &&
                oracle::to_bits(g.causal_complement(r)) == o.complement_of(bits);
      if (!ok) ++mismatches;
    };
    const int n = lat.size();
    // every region with one or two sites
    for (int a = 0; a < n; ++a) {
      check(Region::from_indices(n, {a}));
      for (int b = a + 1; b < n; ++b) check(Region::from_indices(n, {a, b}));
    }
    // sampled regions with three to six sites, and the relation O1 <| O
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int trial = 0; trial < 4000; ++trial) {
      Region r(n);
      const int k = 3 + trial % 4;
      while (r.count() < k) r.insert(pick(rng));
      check(r);
      Region r1(n);
      for (int s = 0; s < 1 + trial % 3; ++s) r1.insert(pick(rng));
      ++regions;
      if (g.causally_determined(r1, r) != o.determined(oracle::to_bits(r1), oracle::to_bits(r))) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          fmt::format("{} regions on 16x16 Minkowski and curved lattices, {} mismatches, {:.2f} s (< 10 s)", regions,
                      mismatches, secs)};
}

// 2. Support of E+- f and S+- f inside the lattice cones.
Outcome propagator_support() {
  const RunConfig c;
  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  const CausalGraph g(model, lat);
  double worst = 0.0, slowest = 0.0;
  auto cones = [&](const Region& supp) {
    return std::pair{g.dilate(g.dilate(g.future(supp))), g.dilate(g.dilate(g.past(supp)))};
  };
  auto timed = [&](auto&& solve) {
    const auto t0 = Clock::now();
    auto u = solve();
    slowest = std::max(slowest, seconds_since(t0));
    return u;
  };
  int solves = 0;
  for (double m : {0.0, 0.5, 1.0}) {
    const ScalarKernel sk(model, lat, m);
    const TestFunction f = make_bump(lat, -0.3, 2.5, 0.15, 0.3);
    const auto [jp, jm] = cones(f.support());
    worst = std::max(worst, mass_fraction_outside(timed([&] { return sk.solve_retarded(f.values); }), jp));
    worst = std::max(worst, mass_fraction_outside(timed([&] { return sk.solve_advanced(f.values); }), jm));
    const DiracKernel dk(model, lat, m);
    const SpinorTestFunction h = make_spinor_bump(lat, 0.2, 5.5, 0.15, 0.3, {1.0, 0.0}, {0.0, 0.5});
    const auto [hp, hm] = cones(h.support());
    auto norms = [](const Eigen::VectorXcd& u) {
      Eigen::VectorXd n(u.size() / 2);
      for (Eigen::Index k = 0; k < n.size(); ++k) n(k) = std::hypot(std::abs(u(2 * k)), std::abs(u(2 * k + 1)));
      return n;
    };
    worst = std::max(worst, mass_fraction_outside(norms(timed([&] { return dk.solve_retarded(h.values); })), hp));
    worst = std::max(worst, mass_fraction_outside(norms(timed([&] { return dk.solve_advanced(h.values); })), hm));
    solves += 4;
  }
  return {worst < 1e-8 && slowest < 5.0,
          fmt::format("{} solves on {}x{}, m in {{0, 0.5, 1}}: max mass outside J+-(supp f) + 2 cells = {:.2e} (< 1e-8), "
                      "slowest solve {:.3f} s (< 5 s)",
                      solves, lat.nt, lat.nx, worst, slowest)};
}

// 3. Massless flat propagator against the d'Alembert closed form.
Outcome dalembert() {
  const oracle::DalembertOracle o{-0.4, 2.0, 0.15, 0.2};
  const MetricModel model = MetricModel::minkowski(-1.0, 1.0, 4.0);
  std::vector<double> errors;
  std::vector<int> ns{50, 100, 200};
  for (int n : ns) {
    const Lattice lat = build_lattice(model, 2 * n + 1, 4 * n);
    const ScalarKernel k(model, lat, 0.0);
    const auto eh = k.causal_propagator(make_bump(lat, -0.4, 2.0, 0.15, 0.2).values);
    // common points of all meshes: t, x on the 1/50 grid
    const int stride = n / ns.front();
    double worst = 0.0, scale = 0.0;
    for (int j = 0; j < lat.nt; j += stride)
      for (int i = 0; i < lat.nx; i += stride) {
        const double ex = o.causal(lat.t(j), lat.x(i));
        scale = std::max(scale, std::abs(ex));
        worst = std::max(worst, std::abs(eh[lat.index(j, i)] - ex));
      }
    errors.push_back(worst / scale);
  }
  const double r1 = errors[0] / errors[1], r2 = errors[1] / errors[2];
  const bool accuracy = errors.back() < 0.05;
  const bool band = r2 >= 1.5 && r2 <= 2.5;
  return {accuracy && band,
          fmt::format("relative max error {:.3e} / {:.3e} / {:.3e} at 1/50, 1/100, 1/200 ({} 5%); "
                      "halving ratios {:.2f}, {:.2f} ({} [1.5, 2.5]: the scheme is second order)",
                      errors[0], errors[1], errors[2], accuracy ? "within" : "outside", r1, r2,
                      band ? "inside" : "outside")};
}

// 4. Locality at spacelike separation, nonvanishing witnesses for timelike pairs.
Outcome locality() {
  const RunConfig c;
  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  const CausalGraph g(model, lat);
  const ScalarKernel sk(model, lat, c.scalar_mass);
  const DiracKernel dk(model, lat, c.dirac_mass);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ut(-1.2, 1.2), ux(0.0, 8.0), uu(-1.0, 1.0);
  const double rt = 0.1, rx = 0.2;
  double worst_scalar = 0.0, worst_dirac = 0.0;
  int spacelike = 0;
  while (spacelike < 50) {
    const double t1 = ut(rng), x1 = ux(rng), t2 = ut(rng), x2 = ux(rng);
    const TestFunction f = make_bump(lat, t1, x1, rt, rx), h = make_bump(lat, t2, x2, rt, rx);
    if (g.causal_shadow(f.support()).intersects(h.support())) continue;
    ++spacelike;
    worst_scalar = std::max(worst_scalar, std::abs(sk.symplectic_pairing(f.values, h.values)) /
                                              (sk.norm(f.values) * sk.norm(h.values)));
    const auto fs = make_spinor_bump(lat, t1, x1, rt, rx, {uu(rng), uu(rng)}, {uu(rng), uu(rng)});
    const auto hs = make_spinor_bump(lat, t2, x2, rt, rx, {uu(rng), uu(rng)}, {uu(rng), uu(rng)});
    const CARSpace space = CARSpace::build(dk, {fs, hs});
    const CARRep rep(space);
    worst_dirac = std::max(worst_dirac, spacelike_anticommutator(space, rep, 0, 1).anticommutator);
  }
  int strong_scalar = 0, strong_dirac = 0;
  for (int pair = 0; pair < 50; ++pair) {
    const double t1 = -1.2 + 0.8 * (uu(rng) + 1.0) / 2.0, x1 = ux(rng);
    const double dt = 0.6 + 0.4 * (uu(rng) + 1.0) / 2.0, dx = 0.4 * dt * uu(rng);
    const TestFunction f = make_bump(lat, t1, x1, rt, rx), h = make_bump(lat, t1 + dt, x1 + dx, rt, rx);
    const double k = std::abs(sk.symplectic_pairing(f.values, h.values));
    if (k >= 1e-3 * sk.norm(f.values) * sk.norm(h.values)) ++strong_scalar;
    const auto fs = make_spinor_bump(lat, t1, x1, rt, rx, {1.0, 0.0}, {0.0, 0.5});
    const auto hs = make_spinor_bump(lat, t1 + dt, x1 + dx, rt, rx, {1.0, 0.0}, {0.0, 0.5});
    const CARSpace space = CARSpace::build(dk, {fs, hs});
    const CARRep rep(space);
    if (spacelike_anticommutator(space, rep, 0, 1).anticommutator >= 1e-3) ++strong_dirac;
  }
  const bool ok = worst_scalar < 1e-8 && worst_dirac < 1e-8 && strong_scalar >= 45 && strong_dirac >= 45;
  return {ok, fmt::format("spacelike: max |kappa|/(|f||h|) = {:.2e}, max anticommutator/scale = {:.2e} (< 1e-8); "
                          "timelike pairs above 1e-3 scale: scalar {}/50, Dirac {}/50 (>= 45)",
                          worst_scalar, worst_dirac, strong_scalar, strong_dirac)};
}

// 5. CCR on the truncated Fock space and exact CAR.
Outcome ccr_car() {
  const RunConfig c;
  const CheckReport ccr = run_ccr_check(c);
  const CheckReport car = run_car_check(c);
  return {ccr.pass() && car.pass() && ccr.data["modes"] == 8 && c.fock_cutoff == 6 && car.data["n"] == 8,
          fmt::format("CCR defect {:.2e} (< 1e-8, {} modes, N = {}); CAR defect {:.2e} (< 1e-12, n = {})",
                      ccr.margins[0].value, ccr.data["modes"].get<int>(), c.fock_cutoff, car.margins[0].value,
                      car.data["n"].get<int>())};
}

// 6. Deformation certificate and the sabotaged variants.
Outcome deformation() {
  RunConfig c;
  const DeformRun run = run_deform(c);
  const auto& cert = run.certificate;
  bool ok = cert.all_pass();
  ok = ok && cert.clause("a").margin == 0.0 && cert.clause("c").margin < 1e-8 && cert.clause("e").margin == 0.0 &&
       cert.clause("f").margin == 0.0;
  std::ostringstream detail;
  detail << fmt::format("default: {} (max |R| on G^ = {:.1e}); sabotage:", cert.all_pass() ? "all clauses pass" : "FAILED",
                        cert.clause("c").margin);
  const std::vector<std::pair<Sabotage, std::string>> planted{
      {Sabotage::FutureProfile, "a"}, {Sabotage::PocketCurvature, "c"}, {Sabotage::ShrinkHat, "f"}};
  for (const auto& [s, clause] : planted) {
    c.sabotage = s;
    const auto failed = run_deform(c).certificate.failed();
    const bool hit = std::find(failed.begin(), failed.end(), clause) != failed.end();
    ok = ok && hit;
    detail << fmt::format(" {} -> [{}]", to_string(s), fmt::join(failed, ","));
  }
  return {ok, detail.str()};
}

// 7. Strict causal law on random instances.
Outcome strict_law() {
  const RunConfig c;
  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  const CausalGraph g(model, lat);
  const ScalarKernel sk(model, lat, c.scalar_mass);
  const DiracKernel dk(model, lat, c.dirac_mass);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ut(-0.8, 0.8), ux(0.0, 8.0), ur(0.0, 1.0);
  double worst_scalar = 0.0, worst_dirac = 0.0;
  int instances = 0;
  for (int n = 0; n < 10; ++n) {
    const double t = ut(rng), x = ux(rng), rt = 0.08 + 0.08 * ur(rng), rx = 0.15 + 0.2 * ur(rng);
    const TestFunction f1 = make_bump(lat, t, x, rt, rx);
    const SpinorTestFunction h1 = make_spinor_bump(lat, t, x, rt, rx, {1.0, 0.0}, {0.3, 0.5});
    const Region supp = f1.support();
    const auto [jlo, jhi] = supp.slice_range(lat);
    // a slab of 8..20 slices, above or below supp f1, with an arc wide enough to determine it
    const int height = 8 + static_cast<int>(12 * ur(rng));
    const int gap = 4 + static_cast<int>(20 * ur(rng));
    const bool above = ur(rng) < 0.5;
    const int ja = above ? jhi + gap : jlo - gap - height;
    const int jb = ja + height;
    int reach = 0;
    for (int j = std::min(ja, jlo); j <= std::max(jb, jhi); ++j) reach += g.max_reach(j);
    int i_lo = lat.nx, i_hi = -1;
    for (int k : supp.indices()) {
      i_lo = std::min(i_lo, lat.site(k).i);
      i_hi = std::max(i_hi, lat.site(k).i);
    }
    const int len = std::min(lat.nx - 1, i_hi - i_lo + 1 + 2 * reach + 6);
    const Region o2 = Region::arc_slab(lat, ja, jb, i_lo - reach - 3, len);
    worst_scalar = std::max(worst_scalar, strict_causal_law(sk, g, f1, o2).cauchy_rel_error);
    worst_dirac = std::max(worst_dirac, dirac_strict_causal_law(dk, g, h1, o2).data_rel_error);
    ++instances;
  }
  return {worst_scalar < 5e-3 && worst_dirac < 5e-3,
          fmt::format("{} random (f1, O2) instances: max relative Cauchy error scalar {:.2e}, Dirac {:.2e} (< 5e-3)",
                      instances, worst_scalar, worst_dirac)};
}

// 8. Category and functor laws, covariance and pairing transport.
Outcome functor_laws() {
  const RunConfig c;
  const CheckReport r = run_functor_check(c);
  std::string failed;
  for (const auto& m : r.margins)
    if (!m.pass) failed += " " + m.name;
  return {r.pass() && c.random_triples == 100, r.detail + (failed.empty() ? "" : "; failed:" + failed)};
}

// 9. Spin-statistics pipeline.
Outcome spinstat() {
  const auto t0 = Clock::now();
  const SpinStatReport r = run_spinstat(RunConfig{});
  const double secs = seconds_since(t0);
  // re-check from the serialized text, as a reader of report.json would
  const auto doc = nlohmann::ordered_json::parse(r.to_json().dump(2));
  const std::string problem = recheck_report(doc);
  int margins = 0;
  for (const auto& s : r.stages) margins += static_cast<int>(s.margins.size());
  const bool ok = r.verdict_integer == kConfirmed && r.verdict_half_integer == kConfirmed && secs < 180.0 &&
                  problem.empty();
  return {ok, fmt::format("integer: {}; half-integer: {}; {} margins re-checked from report.json{}; {:.1f} s (< 180 s)",
                          r.verdict_integer, r.verdict_half_integer, margins,
                          problem.empty() ? "" : " (" + problem + ")", secs)};
}

// 10. Spin layer.
Eigen::Matrix4d lorentz_oracle(const Eigen::Matrix2cd& s) {
  const cplx I(0.0, 1.0);
  std::array<Eigen::Matrix2cd, 4> sigma;
  sigma[0] << 1, 0, 0, 1;
  sigma[1] << 0, 1, 1, 0;
  sigma[2] << 0, -I, I, 0;
  sigma[3] << 1, 0, 0, -1;
  Eigen::Matrix4d l;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Eigen::Matrix2cd m = sigma[static_cast<std::size_t>(a)] * s * sigma[static_cast<std::size_t>(b)] * s.adjoint();
      l(a, b) = 0.5 * m.trace().real();
    }
  return l;
}

Outcome spin_layer() {
  const auto samples = sample_sl2c(400, 10);
  const Eigen::Matrix4d eta = Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
  double hom = 0.0, metric = 0.0, oracle_gap = 0.0;
  for (int k = 0; k < 200; ++k) {
    const SL2CElement& a = samples[static_cast<std::size_t>(2 * k)];
    const SL2CElement& b = samples[static_cast<std::size_t>(2 * k + 1)];
    const Eigen::Matrix4d la = covering_map(a).m, lb = covering_map(b).m, lab = covering_map(a * b).m;
    const double scale = std::max(1.0, la.cwiseAbs().maxCoeff() * lb.cwiseAbs().maxCoeff());
    hom = std::max(hom, (lab - la * lb).cwiseAbs().maxCoeff() / scale);
    const Eigen::Matrix4d g = la.transpose() * eta * la;
    metric = std::max(metric, (g - eta).cwiseAbs().maxCoeff() / std::max(1.0, la.cwiseAbs().maxCoeff() * la.cwiseAbs().maxCoeff()));
    const Eigen::Matrix4d lo = lorentz_oracle(a.matrix());
    oracle_gap = std::max(oracle_gap, std::min((la - lo).cwiseAbs().maxCoeff(), (la - lo.transpose()).cwiseAbs().maxCoeff()) /
                                          std::max(1.0, lo.cwiseAbs().maxCoeff()));
  }
  const bool kernel = covering_map(SL2CElement::identity()).m == Eigen::Matrix4d::Identity() &&
                      covering_map(SL2CElement(-Eigen::Matrix2cd::Identity())).m == Eigen::Matrix4d::Identity();
  int parity_ok = 0, total = 0;
  const SL2CElement minus(-Eigen::Matrix2cd::Identity());
  for (int k = 0; k <= 3; ++k)
    for (int l = 0; l <= 3; ++l) {
      const SpinRep rep = SpinRep::complex_irreducible(k, l);
      const SpinType expect = (k + l) % 2 == 0 ? SpinType::Integer : SpinType::HalfInteger;
      // D(-1) = (-1)^(k+l) I independently of the classification
      const Eigen::MatrixXcd dm = rep_matrix(rep, minus);
      const double sign = (k + l) % 2 == 0 ? 1.0 : -1.0;
      const bool central = (dm - sign * Eigen::MatrixXcd::Identity(dm.rows(), dm.cols())).cwiseAbs().maxCoeff() < 1e-12;
      ++total;
      if (spin_type(rep) == expect && central) ++parity_ok;
    }
  const bool ok = hom < 1e-10 && metric < 1e-10 && oracle_gap < 1e-10 && kernel && parity_ok == total;
  return {ok, fmt::format("200 samples: homomorphism defect {:.1e}, metric defect {:.1e}, gap to the trace formula {:.1e} "
                          "(< 1e-10); Lambda(+-1) = I exactly: {}; spin type by parity {}/{}",
                          hom, metric, oracle_gap, kernel ? "yes" : "no", parity_ok, total)};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  bool strict = false;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--strict") {
      strict = true;
    } else if (arg == "--only" && a + 1 < argc) {
      only = std::stoi(argv[++a]);
    } else {
      std::cerr << "usage: acceptance [--only N] [--strict]\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"causal oracle equivalence", causal_oracle},
      {"propagator support causality", propagator_support},
      {"massless closed form", dalembert},
      {"commutator/anticommutator locality", locality},
      {"CCR on truncated Fock, exact CAR", ccr_car},
      {"deformation certificate", deformation},
      {"strict causal law", strict_law},
      {"category/functor laws", functor_laws},
      {"spin-statistics pipeline", spinstat},
      {"spin layer", spin_layer},
  };
  int failed = 0, errors = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (only != 0 && only != id) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
      ++errors;
    }
    if (!o.pass) ++failed;
    std::cout << fmt::format("criterion {:>2}: {} - {}: {}", id, o.pass ? "PASS" : "FAIL", criteria[k].first, o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} criteria failed", failed) << std::endl;
  if (errors > 0) return 1;
  return strict && failed > 0 ? 1 : 0;
}
