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

#include "covlab/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "covlab/scalarfield.hpp"

namespace covlab {

namespace {

int first_slice_above(const Lattice& lat, double t) {
  for (int j = 0; j < lat.nt; ++j)
    if (lat.t(j) > t + 1e-9 * lat.dt) return j;
  return lat.nt;
}

int last_slice_below(const Lattice& lat, double t) {
  for (int j = lat.nt - 1; j >= 0; --j)
    if (lat.t(j) < t - 1e-9 * lat.dt) return j;
  return -1;
}

Region arc(const Lattice& lat, int j, int i_center, int half_width) {
  return Region::arc_slab(lat, j, j, lat.wrap(i_center - half_width), 2 * half_width + 1);
}

bool pairwise_separated(const CausalGraph& g, const std::array<const Region*, 3>& a,
                        const std::array<const Region*, 3>& b, int* violations = nullptr) {
  int bad = 0;
  for (const Region* x : a)
    for (const Region* y : b)
      if (!x->subset_of(g.causal_complement(*y))) ++bad;
  if (violations) *violations = bad;
  return bad == 0;
}

}  // namespace

std::string to_string(Sabotage s) {
  switch (s) {
    case Sabotage::None:
      return "none";
    case Sabotage::FutureProfile:
      return "future-profile";
    case Sabotage::PocketCurvature:
      return "pocket-curvature";
    case Sabotage::ShrinkHat:
      return "shrink-hat";
  }
  return "unknown";
}

Sabotage sabotage_from_string(const std::string& s) {
  for (Sabotage v : {Sabotage::None, Sabotage::FutureProfile, Sabotage::PocketCurvature, Sabotage::ShrinkHat})
    if (to_string(v) == s) return v;
  throw ConfigError(fmt::format(
      "unknown sabotage '{}' (expected none, future-profile, pocket-curvature or shrink-hat)", s));
}

DeformationSpec DeformationSpec::defaults(const MetricModel& source, Site p1, Site p2) {
  DeformationSpec spec;
  spec.p1 = p1;
  spec.p2 = p2;
  double band_lo = source.t_min(), band_hi = source.t_max();
  double width = 0.5 * (source.t_max() - source.t_min());
  if (const auto& sp = source.sandwich_params()) {
    band_lo = sp->t_fut;
    width = sp->t_fut - sp->t_past;
  }
  spec.t_sigma = 0.5 * (band_lo + band_hi);
  spec.t_sigma2 = spec.t_sigma - 0.2 * width;
  spec.t_sigma1 = spec.t_sigma - 0.4 * width;
  return spec;
}

int DeformedSpacetime::slice_sigma() const { return first_slice_above(lattice, spec.t_sigma); }

double DeformedSpacetime::profile(double t) const {
  const double t_cut = spec.sabotage == Sabotage::FutureProfile
                           ? spec.t_sigma + 0.25 * (source.t_max() - spec.t_sigma)
                           : spec.t_sigma;
  return 1.0 - smoothstep((t - spec.t_sigma2) / (t_cut - spec.t_sigma2));
}

DeformedSpacetime build_deformation(const MetricModel& source, const Lattice& lattice,
                                    const DeformationSpec& spec) {
  if (!(source.t_min() < spec.t_sigma1 && spec.t_sigma1 < spec.t_sigma2 && spec.t_sigma2 < spec.t_sigma &&
        spec.t_sigma < source.t_max())) {
    throw ConfigError(fmt::format("deformation: need t_min < t_sigma1 < t_sigma2 < t_sigma < t_max, got {} {} {}",
                                  spec.t_sigma1, spec.t_sigma2, spec.t_sigma));
  }
  if (!(spec.lapse_dip >= 0.0 && spec.lapse_dip < 1.0)) {
    throw ConfigError(fmt::format("deformation: lapse_dip must be in [0, 1), got {}", spec.lapse_dip));
  }
  DeformedSpacetime d{.spec = spec,
                      .source = source,
                      .model = source,
                      .lattice = lattice,
                      .source_graph = nullptr,
                      .graph = nullptr,
                      .gamma = 1.0,
                      .gamma_base = 1.0,
                      .p_tilde = {},
                      .n_plus = {},
                      .n_minus_tilde = {},
                      .g = {},
                      .g_hat = {},
                      .u = {},
                      .u_tilde = {},
                      .u_hat = {}};
  d.source_graph = std::make_shared<const CausalGraph>(source, lattice);
  const CausalGraph& sg = *d.source_graph;
  const Lattice& lat = lattice;

  for (const Site& p : {spec.p1, spec.p2}) {
    if (!lat.contains_slice(p.j) || p.i < 0 || p.i >= lat.nx) {
      throw DomainError(fmt::format("deformation: point (j={}, i={}) is off the lattice", p.j, p.i));
    }
    if (!(lat.t(p.j) > spec.t_sigma) || p.j + 1 >= lat.nt) {
      throw DomainError(fmt::format("deformation: point (j={}, i={}) at t={} is not in the future of t_sigma={}",
                                    p.j, p.i, lat.t(p.j), spec.t_sigma));
    }
  }
  if (!sg.causal_complement(sg.region({spec.p2})).contains(lat.index(spec.p1))) {
    throw DomainError("deformation: p1 is not in the causal complement of p2");
  }

  const int j_sigma = first_slice_above(lat, spec.t_sigma);
  for (const Site& p : {spec.p1, spec.p2}) {
    const Region cut = sg.past(sg.region({p})) & Region::slab(lat, j_sigma, j_sigma);
    if (cut.count() >= lat.nx) {
      throw DiagnosticError(fmt::format(
          "deformation: J-(p) of (j={}, i={}) wraps around the t_sigma slice; move t_sigma closer to the point",
          p.j, p.i));
    }
  }

  // pocket metric and rescaling of gamma for causal narrowing
  const auto b = source.lapse_function();
  const auto a = source.scale_function();
  double gamma0 = 0.0;
  for (int i = 0; i < lat.nx; ++i) {
    const double ai = a(spec.t_sigma2, lat.x(i));
    gamma0 += ai * ai;
  }
  gamma0 /= lat.nx;
  const double t_cut = spec.sabotage == Sabotage::FutureProfile
                           ? spec.t_sigma + 0.25 * (source.t_max() - spec.t_sigma)
                           : spec.t_sigma;
  const double t2 = spec.t_sigma2, dip = spec.lapse_dip;
  auto prof = [t2, t_cut](double t) { return 1.0 - smoothstep((t - t2) / (t_cut - t2)); };
  auto band_lapse = [b, prof, dip, t2, t_cut](double t, double x) {
    const double f = prof(t);
    return f + (1.0 - f) * b(t, x) * (1.0 - dip * smooth_bump(t, t2, t_cut));
  };
  double gamma = gamma0;
  for (int j = 0; j < lat.nt; ++j) {
    const double t = lat.t(j);
    if (t <= t2 || t >= t_cut) continue;
    const double f = prof(t);
    if (f <= 0.0) continue;
    for (int i = 0; i < lat.nx; ++i) {
      const double x = lat.x(i), bb = b(t, x), aa = a(t, x), bt = band_lapse(t, x);
      gamma = std::max(gamma, (bt * aa * aa - bb * (1.0 - f) * aa * aa) / (bb * f));
    }
  }
  d.gamma = gamma;
  d.gamma_base = gamma0;

  const bool bent = spec.sabotage == Sabotage::PocketCurvature;
  const double kx = 2.0 * std::numbers::pi / source.circumference();
  auto pocket_lapse = [bent, kx](double x) { return bent ? 1.0 - 0.05 * (1.0 + std::sin(kx * x)) : 1.0; };
  auto lapse = [b, prof, band_lapse, pocket_lapse, t_cut](double t, double x) {
    if (t >= t_cut) return b(t, x);
    if (prof(t) == 1.0) return pocket_lapse(x);
    return band_lapse(t, x);
  };
  auto scale = [a, prof, gamma, t_cut](double t, double x) {
    if (t >= t_cut) return a(t, x);
    const double f = prof(t);
    if (f == 1.0) return std::sqrt(gamma);
    const double ax = a(t, x);
    return std::sqrt(f * gamma + (1.0 - f) * ax * ax);
  };
  std::vector<FlatBand> bands;
  if (!bent) bands.push_back({source.t_min(), t2, std::sqrt(gamma)});
  for (const auto& fb : source.flat_bands())
    if (fb.t_hi > t_cut) bands.push_back({std::max(fb.t_lo, t_cut), fb.t_hi, fb.scale});
  d.model = MetricModel::deformed(source.name() + "~deformed", lapse, scale, source.t_min(), source.t_max(),
                                  source.circumference(), std::move(bands));
  d.lattice = build_lattice(d.model, lat.nt, lat.nx, lat.cfl_factor);
  d.graph = std::make_shared<const CausalGraph>(d.model, d.lattice);
  const CausalGraph& g = *d.graph;
  d.p_tilde = {spec.p1, spec.p2};

  // atlas
  const int j1 = first_slice_above(lat, spec.t_sigma1), j2 = last_slice_below(lat, spec.t_sigma2);
  if (j2 - j1 < 5) {
    throw DiagnosticError(fmt::format("deformation: pocket ({}, {}) spans fewer than 6 slices; widen it",
                                      spec.t_sigma1, spec.t_sigma2));
  }
  d.n_plus = Region::slab(lat, j_sigma, lat.nt - 1);
  d.n_minus_tilde = Region::slab(lat, j1, j2);
  d.g = g.erode(d.n_plus);
  d.g_hat = g.erode(d.n_minus_tilde);

  const double gap = spec.t_sigma - spec.t_sigma2;
  const std::string hint = fmt::format("try t_sigma2 = {:.4f}, t_sigma1 = {:.4f}", spec.t_sigma - 0.5 * gap,
                                       spec.t_sigma - 0.5 * gap - (spec.t_sigma2 - spec.t_sigma1));
  const int jb = j2 - 2;
  const int max_half = lat.nx / 2 - 1;
  for (int k = 0; k < 2; ++k) {
    const Site p = d.p_tilde[static_cast<std::size_t>(k)];
    const int top = std::min(p.j + 3, lat.nt - 2);
    d.u_tilde[k] = g.truncated_diamond(arc(lat, jb, p.i, 4), jb - 2, jb + 2);
    int w = 4;
    for (; w <= max_half; ++w) {
      d.u[k] = g.truncated_diamond(arc(lat, j_sigma, p.i, w), j_sigma, top);
      if (d.u[k].contains(lat.index(p)) && g.causally_determined(d.u_tilde[k], d.u[k])) break;
    }
    if (w > max_half) {
      throw DiagnosticError(fmt::format(
          "deformation: no double cone around p{} in G determines a pocket region; {}", k + 1, hint));
    }
    int wh = w;
    for (; wh <= max_half; ++wh) {
      d.u_hat[k] = g.truncated_diamond(arc(lat, jb, p.i, wh), jb - 2, jb + 2);
      if (g.causally_determined(d.u[k], d.u_hat[k])) break;
    }
    if (wh > max_half) {
      throw DiagnosticError(fmt::format("deformation: no pocket region determines U{}; {}", k + 1, hint));
    }
    if (spec.sabotage == Sabotage::ShrinkHat) {
      d.u_hat[k] = g.truncated_diamond(arc(lat, jb, p.i, std::max(4, w / 2)), jb - 2, jb + 2);
    }
    d.u[k].describe(fmt::format("U{}", k + 1));
    d.u_tilde[k].describe(fmt::format("U{}~", k + 1));
    d.u_hat[k].describe(fmt::format("U{}^", k + 1));
  }
  if (!pairwise_separated(g, {&d.u[0], &d.u_tilde[0], &d.u_hat[0]}, {&d.u[1], &d.u_tilde[1], &d.u_hat[1]})) {
    throw DiagnosticError(fmt::format(
        "deformation: atlas regions around p1 and p2 overlap causally; {} or separate the points further", hint));
  }
  d.g.describe("G");
  d.g_hat.describe("G^");
  d.n_plus.describe("N+");
  d.n_minus_tilde.describe("N-~");
  return d;
}

bool DeformationCertificate::all_pass() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.pass; });
}

const ClauseResult& DeformationCertificate::clause(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.clause == name) return c;
  throw DomainError(fmt::format("certificate has no clause '{}'", name));
}

std::vector<std::string> DeformationCertificate::failed() const {
  std::vector<std::string> out;
  for (const auto& c : clauses)
    if (!c.pass) out.push_back(c.clause);
  return out;
}

DeformationCertificate certify(const DeformedSpacetime& d) {
  DeformationCertificate cert;
  const Lattice& lat = d.lattice;
  const CausalGraph& g = *d.graph;

  {
    double worst = 0.0;
    int sites = 0, mismatched = 0;
    for (int j = 0; j < lat.nt; ++j) {
      const double t = lat.t(j);
      if (t < d.spec.t_sigma) continue;
      for (int i = 0; i < lat.nx; ++i) {
        const double x = lat.x(i);
        const double db = d.model.lapse(t, x) - d.source.lapse(t, x);
        const double da = d.model.scale(t, x) - d.source.scale(t, x);
        ++sites;
        if (db != 0.0 || da != 0.0) ++mismatched;
        worst = std::max({worst, std::abs(db), std::abs(da)});
      }
    }
    cert.clauses.push_back({"a", mismatched == 0 && sites > 0, worst,
                            fmt::format("{} of {} sites with t >= t_sigma differ", mismatched, sites)});
  }
  {
    bool ok = true;
    int margin = std::numeric_limits<int>::max();
    for (const Site& p : d.p_tilde) {
      ok = ok && d.n_plus.contains(lat.index(p));
      margin = std::min(margin, p.j - d.slice_sigma());
    }
    const bool sep = g.causal_complement(g.region({d.p_tilde[1]})).contains(lat.index(d.p_tilde[0]));
    cert.clauses.push_back({"b", ok && sep, static_cast<double>(margin),
                            fmt::format("points in N+: {}, causally separated: {}", ok, sep)});
  }
  {
    const CurvatureField r = ricci_scalar(d.model, lat);
    double worst = 0.0;
    for (int k : d.g_hat.indices()) {
      const double v = r.values[static_cast<std::size_t>(k)];
      worst = std::max(worst, std::isnan(v) ? std::numeric_limits<double>::infinity() : std::abs(v));
    }
    const bool inside = !d.g_hat.empty() && d.g_hat.subset_of(d.n_minus_tilde);
    cert.clauses.push_back({"c", inside && worst < 1e-8, worst,
                            fmt::format("max |R| on G^ = {:.3e}, G^ inside N-~: {}", worst, inside)});
  }
  {
    bool ok = d.g.subset_of(d.n_plus) && !d.g.empty();
    for (const Site& p : d.p_tilde) ok = ok && d.g.contains(lat.index(p));
    const Region hull = g.future(d.g) & g.past(d.g);
    const bool convex = hull.subset_of(d.g);
    cert.clauses.push_back({"d", ok && convex, static_cast<double>((hull - d.g).count()),
                            fmt::format("G inside N+ with both points: {}, causally convex: {}", ok, convex)});
  }
  {
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      ok = ok && !d.u[k].empty() && !d.u_tilde[k].empty() && !d.u_hat[k].empty();
      ok = ok && d.u[k].contains(lat.index(d.p_tilde[static_cast<std::size_t>(k)]));
      ok = ok && d.u[k].subset_of(d.g) && d.u_tilde[k].subset_of(d.g_hat) && d.u_hat[k].subset_of(d.g_hat);
    }
    int violations = 0;
    const bool sep =
        pairwise_separated(g, {&d.u[0], &d.u_tilde[0], &d.u_hat[0]}, {&d.u[1], &d.u_tilde[1], &d.u_hat[1]}, &violations);
    cert.clauses.push_back({"e", ok && sep, static_cast<double>(violations),
                            fmt::format("placement ok: {}, causally linked pairs across indices: {}", ok, violations)});
  }
  {
    int missing = 0;
    for (int k = 0; k < 2; ++k) {
      missing += (d.u_tilde[k] - g.erode(g.domain_of_dependence(d.u[k]))).count();
      missing += (d.u[k] - g.erode(g.domain_of_dependence(d.u_hat[k]))).count();
    }
    cert.clauses.push_back({"f", missing == 0, static_cast<double>(missing),
                            fmt::format("{} sites fall outside the required interiors of D(.)", missing)});
  }
  {
    const CausalGraph& sg = *d.source_graph;
    int wider = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < lat.nt; ++j) {
      const double t = lat.t(j);
      if (t <= d.spec.t_sigma2 || t >= d.spec.t_sigma) continue;
      for (int i = 0; i < lat.nx; ++i) {
        if (g.reach(j, i) > sg.reach(j, i)) ++wider;
        const double x = lat.x(i);
        const double st = std::sqrt(d.model.lapse(t, x)) / d.model.scale(t, x);
        const double ss = std::sqrt(d.source.lapse(t, x)) / d.source.scale(t, x);
        worst = std::max(worst, st / ss - 1.0);
      }
    }
    const bool ok = wider == 0 && worst <= 1e-12;
    cert.clauses.push_back({"narrowing", ok, worst,
                            fmt::format("{} band edges wider than the source cone, max slope excess {:.3e}", wider, worst)});
  }
  {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int j = 0; j < lat.nt; ++j) {
      const double t = lat.t(j);
      if (t >= d.spec.t_sigma) continue;
      for (int i = 0; i < lat.nx; ++i) {
        const double bt = d.model.lapse(t, lat.x(i));
        lo = std::min(lo, bt);
        hi = std::max(hi, bt);
      }
    }
    cert.clauses.push_back({"lapse", lo > 0.0 && hi <= 1.0, hi,
                            fmt::format("lapse below t_sigma in [{:.6f}, {:.6f}]", lo, hi)});
  }
  return cert;
}

}  // namespace covlab
