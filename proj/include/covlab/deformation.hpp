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

#ifndef COVLAB_DEFORMATION_HPP
#define COVLAB_DEFORMATION_HPP

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "covlab/causal.hpp"
#include "covlab/geometry.hpp"

namespace covlab {

/// Deliberate defects used to exercise the certifier.
enum class Sabotage {
  None,
  FutureProfile,    // interpolation leaks into t >= t_sigma
  PocketCurvature,  // x-dependent pocket metric
  ShrinkHat,        // U-hat too narrow to determine U
};

std::string to_string(Sabotage s);
Sabotage sabotage_from_string(const std::string& s);

struct DeformationSpec {
  Site p1;
  Site p2;
  double t_sigma = 0.0;
  double t_sigma1 = 0.0;
  double t_sigma2 = 0.0;
  /// Depth of the lapse dip on (t_sigma2, t_sigma); keeps 0 < b <= 1.
  double lapse_dip = 0.25;
  Sabotage sabotage = Sabotage::None;

  /// t_sigma at the middle of the future flat band, t_sigma2 = t_sigma - 0.2 T,
  /// t_sigma1 = t_sigma - 0.4 T, with T the width of the curved band (or
  /// half the time range for models without one).
  static DeformationSpec defaults(const MetricModel& source, Site p1, Site p2);
};

/// The deformed model shares the source lattice. Below t_sigma1 the flat
/// pocket metric is continued so the model covers the full time range; the
/// deformed spacetime proper is the slab t > t_sigma1.
struct DeformedSpacetime {
  DeformationSpec spec;
  MetricModel source;
  MetricModel model;
  Lattice lattice;
  std::shared_ptr<const CausalGraph> source_graph;
  std::shared_ptr<const CausalGraph> graph;
  double gamma = 1.0;       // pocket spatial metric
  double gamma_base = 1.0;  // mean a^2 on the t_sigma2 slice
  std::array<Site, 2> p_tilde{};

  Region n_plus;         // t > t_sigma
  Region n_minus_tilde;  // t_sigma1 < t < t_sigma2
  Region g;
  Region g_hat;
  std::array<Region, 2> u;
  std::array<Region, 2> u_tilde;
  std::array<Region, 2> u_hat;

  int slice_sigma() const;  // first slice with t > t_sigma
  double profile(double t) const;
};

/// Throws DomainError if p1, p2 are not causally separated or not in the
/// future of t_sigma, ConfigError on bad slice times and DiagnosticError if
/// the atlas cannot be fitted (the message suggests slice times).
DeformedSpacetime build_deformation(const MetricModel& source, const Lattice& lattice,
                                    const DeformationSpec& spec);

struct ClauseResult {
  std::string clause;  // "a".."f", "narrowing", "lapse"
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

struct DeformationCertificate {
  std::vector<ClauseResult> clauses;

  bool all_pass() const;
  const ClauseResult& clause(const std::string& name) const;
  std::vector<std::string> failed() const;
};

DeformationCertificate certify(const DeformedSpacetime& d);

}  // namespace covlab

#endif  // COVLAB_DEFORMATION_HPP
