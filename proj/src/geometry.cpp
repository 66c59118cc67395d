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

#include "covlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace covlab {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Minkowski:
      return "minkowski";
    case ModelKind::SandwichCurved:
      return "sandwich";
    case ModelKind::Deformed:
      return "deformed";
    case ModelKind::Custom:
      return "custom";
  }
  return "unknown";
}

double smooth_bump(double t, double lo, double hi) {
  const double u = (2.0 * t - (lo + hi)) / (hi - lo);
  if (u <= -1.0 || u >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

MetricModel MetricModel::minkowski(double t_min, double t_max, double circumference,
                                   double spatial_scale) {
  if (!(t_max > t_min) || !(circumference > 0.0) || !(spatial_scale > 0.0)) {
    throw ConfigError("minkowski: need t_max > t_min, L > 0, scale > 0");
  }
  MetricModel m;
  m.kind_ = ModelKind::Minkowski;
  m.name_ = "minkowski";
  m.lapse_ = [](double, double) { return 1.0; };
  m.scale_ = [spatial_scale](double, double) { return spatial_scale; };
  m.t_min_ = t_min;
  m.t_max_ = t_max;
  m.circumference_ = circumference;
  m.flat_bands_ = {{t_min, t_max, spatial_scale}};
  return m;
}

MetricModel MetricModel::sandwich(const SandwichParams& p, double t_min, double t_max,
                                  double circumference) {
  if (!(t_min < p.t_past && p.t_past < p.t_fut && p.t_fut < t_max)) {
    throw ConfigError(fmt::format(
        "sandwich: need t_min < t_past < t_fut < t_max, got {} {} {} {}", t_min, p.t_past,
        p.t_fut, t_max));
  }
  if (!(p.a0 > 0.0) || !(circumference > 0.0)) {
    throw ConfigError("sandwich: need a0 > 0 and L > 0");
  }
  if (p.amplitude * (1.0 - std::abs(p.modulation)) <= -1.0 || std::abs(p.lapse_amplitude) >= 1.0) {
    throw ConfigError("sandwich: parameters break Lorentzian signature");
  }
  const double k = 2.0 * std::numbers::pi * p.mode / circumference;
  MetricModel m;
  m.kind_ = ModelKind::SandwichCurved;
  m.name_ = "sandwich";
  m.sandwich_ = p;
  m.lapse_ = [p, k](double t, double x) {
    return 1.0 + p.lapse_amplitude * smooth_bump(t, p.t_past, p.t_fut) * std::sin(k * x);
  };
  m.scale_ = [p, k](double t, double x) {
    return p.a0 *
           (1.0 + p.amplitude * smooth_bump(t, p.t_past, p.t_fut) *
                      (1.0 + p.modulation * std::cos(k * x)));
  };
  m.t_min_ = t_min;
  m.t_max_ = t_max;
  m.circumference_ = circumference;
  m.flat_bands_ = {{t_min, p.t_past, p.a0}, {p.t_fut, t_max, p.a0}};
  return m;
}

MetricModel MetricModel::custom(std::string name, SpacetimeFunction lapse,
                                SpacetimeFunction scale, double t_min, double t_max,
                                double circumference, std::vector<FlatBand> flat_bands) {
  if (!(t_max > t_min) || !(circumference > 0.0)) {
    throw ConfigError("custom model: need t_max > t_min and L > 0");
  }
  MetricModel m;
  m.kind_ = ModelKind::Custom;
  m.name_ = std::move(name);
  m.lapse_ = std::move(lapse);
  m.scale_ = std::move(scale);
  m.t_min_ = t_min;
  m.t_max_ = t_max;
  m.circumference_ = circumference;
  m.flat_bands_ = std::move(flat_bands);
  return m;
}

MetricModel MetricModel::deformed(std::string name, SpacetimeFunction lapse,
                                  SpacetimeFunction scale, double t_min, double t_max,
                                  double circumference, std::vector<FlatBand> flat_bands) {
  MetricModel m = custom(std::move(name), std::move(lapse), std::move(scale), t_min, t_max,
                         circumference, std::move(flat_bands));
  m.kind_ = ModelKind::Deformed;
  return m;
}

std::optional<FlatBand> MetricModel::initial_flat_band() const {
  for (const auto& band : flat_bands_) {
    if (band.t_lo <= t_min_ && band.t_hi > t_min_) return band;
  }
  return std::nullopt;
}

Site Lattice::nearest(double t, double x) const {
  const double fj = (t - t_min) / dt;
  const int j = static_cast<int>(std::lround(fj));
  if (j < 0 || j >= nt) {
    throw DomainError(fmt::format("time {} outside lattice [{}, {}]", t, t_min, this->t(nt - 1)));
  }
  const int i = wrap(static_cast<int>(std::lround(x / dx)));
  return {j, i};
}

double Lattice::circle_delta(double x_a, double x_b) const {
  double d = std::fmod(x_b - x_a, circumference);
  if (d > 0.5 * circumference) d -= circumference;
  if (d < -0.5 * circumference) d += circumference;
  return d;
}

Lattice build_lattice(const MetricModel& model, int nt, int nx, double cfl_factor) {
  if (nt < 8 || nx < 8) {
    throw ConfigError(fmt::format("lattice needs Nt, Nx >= 8 (got {} x {})", nt, nx));
  }
  if (!(cfl_factor > 0.0)) throw ConfigError("CFL factor must be positive");
  Lattice lat;
  lat.nt = nt;
  lat.nx = nx;
  lat.t_min = model.t_min();
  lat.dt = (model.t_max() - model.t_min()) / (nt - 1);
  lat.dx = model.circumference() / nx;
  lat.circumference = model.circumference();
  lat.cfl_factor = cfl_factor;

  double min_ratio = std::numeric_limits<double>::infinity();
  Site limiting{};
  for (int j = 0; j < nt; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double t = lat.t(j);
      const double x = lat.x(i);
      const double b = model.lapse(t, x);
      const double a = model.scale(t, x);
      if (!(b > 0.0) || !(a > 0.0)) {
        throw ConfigError(fmt::format(
            "signature degenerates at site (j={}, i={}) t={} x={}: b={} a={}", j, i, t, x, b, a));
      }
      const double ratio = a / std::sqrt(b);
      if (ratio < min_ratio) {
        min_ratio = ratio;
        limiting = {j, i};
      }
    }
  }
  lat.dt_bound = cfl_factor * lat.dx * min_ratio;
  // Relative slack absorbs the rounding in (t_max - t_min) / (Nt - 1).
  if (lat.dt > lat.dt_bound * (1.0 + 1e-12)) {
    throw ConfigError(fmt::format(
        "CFL violation: dt={} exceeds bound {} set by site (j={}, i={}) t={} x={}", lat.dt,
        lat.dt_bound, limiting.j, limiting.i, lat.t(limiting.j), lat.x(limiting.i)));
  }
  return lat;
}

double ricci_scalar_at(const MetricModel& model, double t, double x, double ht, double hx) {
  auto n = [&](double tt, double xx) { return std::sqrt(model.lapse(tt, xx)); };
  auto a = [&](double tt, double xx) { return model.scale(tt, xx); };
  const double a0 = a(t, x);
  const double n0 = n(t, x);
  const double adot_hi = (a(t + ht, x) - a0) / ht / n(t + 0.5 * ht, x);
  const double adot_lo = (a0 - a(t - ht, x)) / ht / n(t - 0.5 * ht, x);
  const double nprime_hi = (n(t, x + hx) - n0) / hx / a(t, x + 0.5 * hx);
  const double nprime_lo = (n0 - n(t, x - hx)) / hx / a(t, x - 0.5 * hx);
  const double time_part = (adot_hi - adot_lo) / ht;
  const double space_part = (nprime_hi - nprime_lo) / hx;
  return -2.0 / (n0 * a0) * (time_part - space_part);
}

CurvatureField ricci_scalar(const MetricModel& model, const Lattice& lattice) {
  CurvatureField field;
  field.nt = lattice.nt;
  field.nx = lattice.nx;
  field.values.assign(static_cast<std::size_t>(lattice.size()),
                      std::numeric_limits<double>::quiet_NaN());
  for (int j = 1; j + 1 < lattice.nt; ++j) {
    for (int i = 0; i < lattice.nx; ++i) {
      field.values[static_cast<std::size_t>(lattice.index(j, i))] =
          ricci_scalar_at(model, lattice.t(j), lattice.x(i), lattice.dt, lattice.dx);
    }
  }
  return field;
}

double CurvatureField::max_abs(const Lattice& lattice, double t_lo, double t_hi) const {
  double best = 0.0;
  for (int j = 0; j < nt; ++j) {
    const double t = lattice.t(j);
    if (t < t_lo || t > t_hi) continue;
    for (int i = 0; i < nx; ++i) {
      const double r = at(j, i);
      if (!std::isnan(r)) best = std::max(best, std::abs(r));
    }
  }
  return best;
}

double CurvatureField::max_abs() const {
  double best = 0.0;
  for (double r : values) {
    if (!std::isnan(r)) best = std::max(best, std::abs(r));
  }
  return best;
}

std::pair<double, double> lightcone_slopes(const MetricModel& model, const Lattice& lattice,
                                           Site site) {
  const double t = lattice.t(site.j);
  const double x = lattice.x(site.i);
  const double slope = std::sqrt(model.lapse(t, x)) / model.scale(t, x);
  return {slope, -slope};
}

}  // namespace covlab
