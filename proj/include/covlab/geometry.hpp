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

#ifndef COVLAB_GEOMETRY_HPP
#define COVLAB_GEOMETRY_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covlab/errors.hpp"

namespace covlab {

using SpacetimeFunction = std::function<double(double t, double x)>;

enum class ModelKind { Minkowski, SandwichCurved, Deformed, Custom };

std::string to_string(ModelKind kind);

/// A time interval on which the metric is exactly dt^2 - scale^2 dx^2.
struct FlatBand {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double scale = 1.0;
};

/// Parameters of the curved "sandwich" model: flat for t <= t_past and
/// t >= t_fut, curved in between through a smooth bump w(t) in [0, 1]:
///
///   a(t,x) = a0 * (1 + amplitude * w(t) * (1 + modulation * cos(2 pi k x / L)))
///   b(t,x) = 1 + lapse_amplitude * w(t) * sin(2 pi k x / L)
struct SandwichParams {
  double t_past = -1.2;
  double t_fut = 0.8;
  double a0 = 1.0;
  double amplitude = 0.5;
  double modulation = 0.3;
  double lapse_amplitude = 0.2;
  int mode = 1;
};

/// Smooth compactly supported bump, equal to 1 at the midpoint of (lo, hi)
/// and identically zero outside.
double smooth_bump(double t, double lo, double hi);

/// Analytic foliated 1+1 metric ds^2 = b dt^2 - a^2 dx^2 on [t_min, t_max] x S^1.
class MetricModel {
 public:
  static MetricModel minkowski(double t_min, double t_max, double circumference,
                               double spatial_scale = 1.0);
  static MetricModel sandwich(const SandwichParams& params, double t_min, double t_max,
                              double circumference);
  static MetricModel custom(std::string name, SpacetimeFunction lapse, SpacetimeFunction scale,
                            double t_min, double t_max, double circumference,
                            std::vector<FlatBand> flat_bands = {});
  /// Used by the deformation builder; callers normally go through build_deformation.
  static MetricModel deformed(std::string name, SpacetimeFunction lapse, SpacetimeFunction scale,
                              double t_min, double t_max, double circumference,
                              std::vector<FlatBand> flat_bands);

  double lapse(double t, double x) const { return lapse_(t, x); }
  double scale(double t, double x) const { return scale_(t, x); }
  const SpacetimeFunction& lapse_function() const { return lapse_; }
  const SpacetimeFunction& scale_function() const { return scale_; }

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double circumference() const { return circumference_; }
  ModelKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::optional<SandwichParams>& sandwich_params() const { return sandwich_; }

  /// Bands where b == 1 and a is constant, ordered by time.
  const std::vector<FlatBand>& flat_bands() const { return flat_bands_; }
  /// The earliest flat band if it starts at t_min.
  std::optional<FlatBand> initial_flat_band() const;

 private:
  MetricModel() = default;

  ModelKind kind_ = ModelKind::Custom;
  std::string name_;
  SpacetimeFunction lapse_;
  SpacetimeFunction scale_;
  double t_min_ = 0.0;
  double t_max_ = 0.0;
  double circumference_ = 0.0;
  std::vector<FlatBand> flat_bands_;
  std::optional<SandwichParams> sandwich_;
};

struct Site {
  int j = 0;  // time slice
  int i = 0;  // spatial column
  friend bool operator==(const Site&, const Site&) = default;
};

/// Uniform discretization with Nt slices covering [t_min, t_max] (both
/// included) and Nx periodic columns covering [0, L).
struct Lattice {
  int nt = 0;
  int nx = 0;
  double t_min = 0.0;
  double dt = 0.0;
  double dx = 0.0;
  double circumference = 0.0;
  double cfl_factor = 1.0;
  /// cfl_factor * dx * min(a / sqrt(b)) over all sites.
  double dt_bound = 0.0;

  int size() const { return nt * nx; }
  double t(int j) const { return t_min + j * dt; }
  double x(int i) const { return i * dx; }
  int index(int j, int i) const { return j * nx + i; }
  int index(Site s) const { return s.j * nx + s.i; }
  Site site(int index) const { return {index / nx, index % nx}; }
  int wrap(int i) const { return ((i % nx) + nx) % nx; }
  bool contains_slice(int j) const { return j >= 0 && j < nt; }
  /// Nearest site to coordinates (t, x); x is taken modulo L. Throws if t is
  /// outside the covered range by more than half a step.
  Site nearest(double t, double x) const;
  /// Signed shortest distance x_b - x_a on the circle.
  double circle_delta(double x_a, double x_b) const;
};

/// Throws ConfigError if Nt or Nx < 8, if the signature degenerates, or if
/// dt exceeds the CFL bound (the message names the limiting site).
Lattice build_lattice(const MetricModel& model, int nt, int nx, double cfl_factor = 1.0);

/// Ricci scalar per site (row-major, Nt x Nx). Boundary slices are NaN.
struct CurvatureField {
  int nt = 0;
  int nx = 0;
  std::vector<double> values;

  double at(int j, int i) const { return values[static_cast<std::size_t>(j) * nx + i]; }
  /// Max |R| over sites with t in [t_lo, t_hi], skipping NaN.
  double max_abs(const Lattice& lattice, double t_lo, double t_hi) const;
  double max_abs() const;
};

/// R for ds^2 = b dt^2 - a^2 dx^2 with N = sqrt(b):
///   R = -(2 / (N a)) [ d_t(d_t a / N) - d_x(d_x N / a) ],
/// evaluated with centered differences of step (dt, dx).
CurvatureField ricci_scalar(const MetricModel& model, const Lattice& lattice);
double ricci_scalar_at(const MetricModel& model, double t, double x, double ht, double hx);

/// dx/dt = +/- sqrt(b)/a at the site.
std::pair<double, double> lightcone_slopes(const MetricModel& model, const Lattice& lattice,
                                           Site site);

}  // namespace covlab

#endif  // COVLAB_GEOMETRY_HPP
