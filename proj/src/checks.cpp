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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "covlab/causal.hpp"
#include "covlab/diracfield.hpp"
#include "covlab/harness.hpp"
#include "covlab/netfunctor.hpp"
#include "covlab/scalarfield.hpp"

namespace covlab {

namespace {

struct Placement {
  double t0, x0;
};

// Centres in a strip of width `spread` around a random column, so that most
// pairs are causally related.
std::vector<Placement> random_placements(const Lattice& lat, int n, std::mt19937_64& rng, double rt,
                                         double spread) {
  const double t_lo = lat.t_min + 4.0 * rt;
  const double t_hi = lat.t(lat.nt - 1) - 4.0 * rt;
  const double x_c = std::uniform_real_distribution<double>(0.0, lat.circumference)(rng);
  std::uniform_real_distribution<double> ut(t_lo, t_hi), ux(x_c - 0.5 * spread, x_c + 0.5 * spread);
  std::vector<Placement> out;
  for (int k = 0; k < n; ++k) out.push_back({ut(rng), ux(rng)});
  return out;
}

}  // namespace

CheckReport run_ccr_check(const RunConfig& c) {
  c.validate();
  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  const ScalarKernel kernel(model, lat, c.scalar_mass);
  std::mt19937_64 rng(c.seed);
  const double rt = 0.15, rx = 0.3;
  std::vector<TestFunction> basis;
  for (const auto& p : random_placements(lat, c.ccr_modes, rng, rt, 1.0))
    basis.push_back(make_bump(lat, p.t0, p.x0, rt, rx));
  const SymplecticSpace space = SymplecticSpace::build(kernel, basis);
  const QuasifreeState state = QuasifreeState::build(kernel, model, space, 0);
  const FockRep rep(state.psi(), c.fock_cutoff, c.ccr_modes);
  double defect = 0.0, herm = 0.0;
  for (int a = 0; a < rep.field_count(); ++a) {
    herm = std::max(herm, rep.hermiticity_defect(a));
    for (int b = 0; b < rep.field_count(); ++b) defect = std::max(defect, rep.ccr_defect(a, b, space.kappa(a, b)));
  }
  CheckReport r;
  r.name = "ccr-check";
  r.margins.push_back(Margin::below("max |([Phi(f), Phi(h)] - i kappa(f, h)) P|", defect, 1e-8));
  r.margins.push_back(Margin::below("max |Phi - Phi^dagger|", herm, 1e-12));
  r.margins.push_back(Margin::below("|W - W^T - i kappa|", state.ccr_defect(space.kappa), 1e-10));
  r.margins.push_back(Margin::above("Fock modes", rep.modes(), c.ccr_modes - 0.5));
  const double kmax = space.kappa.cwiseAbs().maxCoeff();
  r.margins.push_back(Margin::above("max |kappa(f, h)| (nontrivial commutators)", kmax, 1e-6));
  r.detail = fmt::format("{} modes, cutoff {}, Fock dimension {}, max |kappa| {:.3e}", rep.modes(), c.fock_cutoff,
                         rep.space().dimension(), kmax);
  r.data = {{"modes", rep.modes()},
            {"cutoff", c.fock_cutoff},
            {"fock_dimension", rep.space().dimension()},
            {"max_kappa", kmax}};
  return r;
}

CheckReport run_car_check(const RunConfig& c) {
  c.validate();
  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  const DiracKernel kernel(model, lat, c.dirac_mass);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double rt = 0.15, rx = 0.3;
  std::vector<SpinorTestFunction> basis;
  for (const auto& p : random_placements(lat, 8, rng, rt, 1.0)) {
    const cplx up(coef(rng), coef(rng)), lo(coef(rng), coef(rng));
    basis.push_back(make_spinor_bump(lat, p.t0, p.x0, rt, rx, up, lo));
  }
  const CARSpace space = CARSpace::build(kernel, basis);
  const CARRep rep(space);
  CheckReport r;
  r.name = "car-check";
  r.margins.push_back(Margin::below("max |{B(v)*, B(w)} - s(v, w) I|", rep.car_defect(), 1e-12));
  r.margins.push_back(Margin::below("max |B(Cv) - B(v)*|", rep.star_defect(), 1e-12));
  r.margins.push_back(Margin::below("Hermiticity defect of s", space.hermiticity_defect(), 1e-12));
  r.margins.push_back(Margin::above("min eigenvalue of s + tolerance", space.min_eigenvalue() + 1e-8, 0.0));
  r.detail = fmt::format("n = {}, rank {}, {} modes, dimension {}", space.size(), rep.rank(), rep.modes(),
                         rep.dimension());
  r.data = {{"n", space.size()}, {"rank", rep.rank()}, {"modes", rep.modes()}, {"dimension", rep.dimension()}};
  return r;
}

CheckReport run_functor_check(const RunConfig& c) {
  c.validate();
  using Obj = std::shared_ptr<const SpacetimeObject>;
  const MetricModel model = MetricModel::minkowski(-1.0, 1.0, 4.0);
  const Lattice lat = build_lattice(model, 101, 101);
  const auto graph = std::make_shared<const CausalGraph>(model, lat);
  std::vector<Obj> objs;
  for (const char* name : {"A", "B", "C"}) objs.push_back(SpacetimeObject::make(name, model, lat, graph));
  auto diamond = [&](int jc, int i0, int len, int h) {
    return graph->truncated_diamond(Region::arc_slab(lat, jc, jc, i0, len), jc - h, jc + h);
  };
  std::mt19937_64 rng(c.seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto random_iso = [&](const Obj& s, const Obj& t) {
    if (uni(0, 99) < 12) return LocalIso::trivial();
    const int jc = uni(35, 65), h = uni(8, 16);
    return LocalIso::translation(s, t, diamond(jc, uni(0, 100), uni(30, 70), h), uni(-6, 6), uni(-20, 20),
                                 uni(0, 1) ? 1 : -1);
  };
  auto same = [](const std::optional<Eigen::VectorXcd>& a, const std::optional<Eigen::VectorXcd>& b) {
    return a.has_value() == b.has_value() && (!a || *a == *b);
  };

  int assoc = 0, ident = 0, absorb = 0, functor = 0, nontrivial = 0, hits = 0;
  for (int trial = 0; trial < c.random_triples; ++trial) {
    const Obj& o0 = objs[static_cast<std::size_t>(uni(0, 2))];
    const Obj& o1 = objs[static_cast<std::size_t>(uni(0, 2))];
    const Obj& o2 = objs[static_cast<std::size_t>(uni(0, 2))];
    const Obj& o3 = objs[static_cast<std::size_t>(uni(0, 2))];
    const LocalIso a = random_iso(o0, o1), b = random_iso(o1, o2), d = random_iso(o2, o3);
    const LocalIso left = compose(d, compose(b, a));
    const LocalIso right = compose(compose(d, b), a);
    if (!(left == right)) ++assoc;
    if (!(compose(LocalIso::identity(o3), left) == left) || !(compose(left, LocalIso::identity(o0)) == left)) ++ident;
    if ((a.is_trivial() || b.is_trivial() || d.is_trivial()) && !left.is_trivial()) ++absorb;
    if (!left.is_trivial()) ++nontrivial;
    for (int comp : {1, 2}) {
      const NetMorphism direct = functor_apply(left, comp);
      const NetMorphism chained = compose(functor_apply(d, comp), compose(functor_apply(b, comp), functor_apply(a, comp)));
      if (direct.is_trivial() != chained.is_trivial()) ++functor;
      if (a.is_trivial()) continue;
      const Region& loc = left.is_trivial() ? a.initial() : left.initial();
      auto sites = graph->erode(graph->erode(loc)).indices();
      if (sites.empty()) sites = loc.indices();
      for (int g = 0; g < 4; ++g) {
        const Site s = lat.site(sites[static_cast<std::size_t>(uni(0, static_cast<int>(sites.size()) - 1))]);
        const double t = lat.t(s.j), x = lat.x(s.i);
        const Eigen::VectorXcd fn =
            comp == 1 ? make_bump(lat, t, x, 2.5 * lat.dt, 2.5 * lat.dx).values.cast<cplx>()
                      : make_spinor_bump(lat, t, x, 2.5 * lat.dt, 2.5 * lat.dx, {1.0, 0.5}, {0.0, -1.0}).values;
        const auto lhs = direct.on_generator(fn);
        if (!same(lhs, chained.on_generator(fn))) ++functor;
        if (!same(functor_apply(LocalIso::identity(o0), comp).on_generator(fn), fn)) ++ident;
        if (lhs) ++hits;
      }
    }
  }

  // Covariance and pairing transport for one translation between two nets.
  const Region l = diamond(50, 10, 70, 25);
  const LocalIso shift = LocalIso::translation(objs[0], objs[1], l, 5, 31, -1);
  int cov_fail = 0, regions = 0;
  double pairing = 0.0;
  for (const Theory th : {Theory::Scalar, Theory::Dirac}) {
    const TheorySpec spec{th, th == Theory::Scalar ? c.scalar_mass : c.dirac_mass};
    std::vector<Eigen::VectorXcd> b1, b2;
    const std::vector<Placement> at{{0.0, 1.6}, {0.1, 2.0}, {-0.1, 1.5}, {0.05, 2.3}};
    for (const auto& p : at) {
      const Eigen::VectorXcd v = th == Theory::Scalar
                                     ? make_bump(lat, p.t0, p.x0, 0.1, 0.2).values.cast<cplx>()
                                     : make_spinor_bump(lat, p.t0, p.x0, 0.1, 0.2, {1.0, 0.0}, {0.0, 0.5}).values;
      b1.push_back(v);
      b2.push_back(shift.transport(v, spec.components()));
    }
    const FieldNet n1 = FieldNet::build(objs[0], spec, b1);
    const FieldNet n2 = FieldNet::build(objs[1], spec, b2);
    const Relabeling alpha = functor_apply(shift, n1, n2, c.tol_pairing);
    for (int k = 0; k < n1.size(); ++k) {
      const Region o = graph->dilate(n1.support(k)) & l;
      const CovarianceCheck cc = check_covariance(alpha, n1, n2, o);
      ++regions;
      if (!cc.equal || !cc.isomorphic) ++cov_fail;
    }
    const CovarianceCheck all = check_covariance(alpha, n1, n2, l);
    ++regions;
    if (!all.equal || !all.isomorphic) ++cov_fail;
    pairing = std::max(pairing, check_invariant_pairings(shift, *objs[0], *objs[1], spec, b1, c.tol_pairing).max_rel_error);
  }

  CheckReport r;
  r.name = "functor-check";
  r.margins.push_back(Margin::below("associativity failures", assoc, 0.5));
  r.margins.push_back(Margin::below("identity law failures", ident, 0.5));
  r.margins.push_back(Margin::below("0-absorption failures", absorb, 0.5));
  r.margins.push_back(Margin::below("F(m2 m1) != F(m2) F(m1)", functor, 0.5));
  r.margins.push_back(Margin::above("nontrivial composites", nontrivial, 0.5));
  r.margins.push_back(Margin::below("covariance failures (alpha(F1(O)) != F2(theta O))", cov_fail, 0.5));
  r.margins.push_back(Margin::below("pairing transport, relative", pairing, c.tol_pairing));
  r.detail = fmt::format("{} triples, {} nontrivial composites, {} generator hits, {} covariance regions",
                         c.random_triples, nontrivial, hits, regions);
  r.data = {{"triples", c.random_triples}, {"nontrivial", nontrivial}, {"generator_hits", hits}, {"regions", regions}};
  return r;
}

DeformRun run_deform(const RunConfig& c) {
  c.validate();
  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  DeformedSpacetime d = build_deformation(model, lat, c.deformation_spec(model, lat));
  DeformationCertificate cert = certify(d);
  return {std::move(d), std::move(cert)};
}

PropagateRun run_propagate(const RunConfig& c) {
  c.validate();
  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  const CausalGraph graph(model, lat);
  PropagateRun out{lat, {}, {}, Region(lat.size()), {}};
  out.check.name = "propagate";
  auto support_margin = [&](const std::string& label, const Eigen::VectorXd& u, const Region& cone) {
    out.check.margins.push_back(Margin::below(label, mass_fraction_outside(u, cone), c.tol_support));
  };
  if (c.propagate_theory == "scalar") {
    const ScalarKernel kernel(model, lat, c.scalar_mass);
    const TestFunction f = make_bump(lat, c.propagate_t, c.propagate_x, c.propagate_rt, c.propagate_rx);
    out.source = f.support();
    out.retarded = kernel.solve_retarded(f.values);
    out.advanced = kernel.solve_advanced(f.values);
  } else {
    const DiracKernel kernel(model, lat, c.dirac_mass);
    const SpinorTestFunction f =
        make_spinor_bump(lat, c.propagate_t, c.propagate_x, c.propagate_rt, c.propagate_rx, {1.0, 0.0}, {0.0, 0.5});
    out.source = f.support();
    auto norms = [](const Eigen::VectorXcd& u) {
      Eigen::VectorXd n(u.size() / 2);
      for (Eigen::Index k = 0; k < n.size(); ++k) n(k) = std::hypot(std::abs(u(2 * k)), std::abs(u(2 * k + 1)));
      return n;
    };
    out.retarded = norms(kernel.solve_retarded(f.values));
    out.advanced = norms(kernel.solve_advanced(f.values));
  }
  if (out.source.empty()) throw ConfigError("propagate: the source bump misses every lattice site");
  const Region jp = graph.dilate(graph.dilate(graph.future(out.source)));
  const Region jm = graph.dilate(graph.dilate(graph.past(out.source)));
  support_margin("mass of E+ f outside J+(supp f) + 2 cells", out.retarded.cwiseAbs(), jp);
  support_margin("mass of E- f outside J-(supp f) + 2 cells", out.advanced.cwiseAbs(), jm);
  out.check.detail = fmt::format("{} field, mass {}, source with {} sites", c.propagate_theory,
                                 c.propagate_theory == "scalar" ? c.scalar_mass : c.dirac_mass, out.source.count());
  out.retarded = out.retarded.cwiseAbs();
  out.advanced = out.advanced.cwiseAbs();
  return out;
}

std::string causal_query_csv(const RunConfig& c, std::istream& queries) {
  c.validate();
  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  const CausalGraph graph(model, lat);
  std::ostringstream csv;
  csv << "query,j,i,t,x,region,J+,J-,D+,D-,perp\n";
  std::string line;
  int line_no = 0;
  auto want = [&](std::istringstream& in, const std::string& what) {
    long long v = 0;
    if (!(in >> v)) throw ConfigError(fmt::format("query line {}: missing or bad {}", line_no, what));
    return static_cast<int>(v);
  };
  while (std::getline(queries, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream in(line);
    std::string kind, name;
    if (!(in >> kind)) continue;
    if (!(in >> name)) throw ConfigError(fmt::format("query line {}: missing name", line_no));
    Region o;
    if (kind == "site") {
      const int j = want(in, "j"), i = want(in, "i");
      if (!lat.contains_slice(j) || i < 0 || i >= lat.nx) throw ConfigError(fmt::format("query line {}: site off the lattice", line_no));
      o = graph.region({{j, i}});
    } else if (kind == "arc") {
      const int jlo = want(in, "j_lo"), jhi = want(in, "j_hi"), i0 = want(in, "i_start"), len = want(in, "length");
      if (!lat.contains_slice(jlo) || !lat.contains_slice(jhi) || jlo > jhi || len < 1)
        throw ConfigError(fmt::format("query line {}: bad arc", line_no));
      o = Region::arc_slab(lat, jlo, jhi, i0, len);
    } else if (kind == "diamond") {
      const int jc = want(in, "j_center"), i0 = want(in, "i_start"), len = want(in, "length"), h = want(in, "half_height");
      if (!lat.contains_slice(jc - h) || !lat.contains_slice(jc + h) || len < 1 || h < 0)
        throw ConfigError(fmt::format("query line {}: bad diamond", line_no));
      o = graph.truncated_diamond(Region::arc_slab(lat, jc, jc, i0, len), jc - h, jc + h);
    } else {
      throw ConfigError(fmt::format("query line {}: unknown query kind '{}'", line_no, kind));
    }
    std::string extra;
    if (in >> extra) throw ConfigError(fmt::format("query line {}: trailing text '{}'", line_no, extra));
    const Region jp = graph.future(o), jm = graph.past(o);
    const Region dp = graph.dependence_future(o), dm = graph.dependence_past(o);
    const Region perp = graph.causal_complement(o);
    for (int k = 0; k < lat.size(); ++k) {
      const bool in_o = o.contains(k);
      const bool any = in_o || jp.contains(k) || jm.contains(k) || dp.contains(k) || dm.contains(k);
      if (!any) continue;
      const Site s = lat.site(k);
      csv << fmt::format("{},{},{},{:.6f},{:.6f},{:d},{:d},{:d},{:d},{:d},{:d}\n", name, s.j, s.i, lat.t(s.j), lat.x(s.i),
                         in_o, jp.contains(k), jm.contains(k), dp.contains(k), dm.contains(k), perp.contains(k));
    }
  }
  return csv.str();
}

}  // namespace covlab
