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

#ifndef COVLAB_HARNESS_HPP
#define COVLAB_HARNESS_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "covlab/deformation.hpp"
#include "covlab/geometry.hpp"

namespace covlab {

/// Run configuration read from an INI file with the sections [model],
/// [lattice], [fields], [points], [deformation], [tolerances], [checks],
/// [propagate] and [run]. Unknown sections or keys are rejected.
struct RunConfig {
  SandwichParams sandwich;
  double t_min = -2.0;
  double t_max = 2.0;
  double circumference = 8.0;

  int nt = 401;
  int nx = 401;
  double cfl = 1.0;

  double scalar_mass = 1.0;
  double dirac_mass = 0.5;
  int fock_cutoff = 6;

  double point_t = 1.6;
  double point_x1 = 2.0;
  double point_x2 = 6.0;

  std::optional<double> t_sigma, t_sigma1, t_sigma2;
  double lapse_dip = 0.25;
  Sabotage sabotage = Sabotage::None;

  double tol_locality = 1e-8;      // |kappa|, anticommutator, relative
  double tol_witness = 1e-3;       // lower bound for nonvanishing witnesses
  double tol_pairing = 1e-6;       // transported Gram data, relative
  double tol_cauchy = 5e-3;        // strict causal law
  double tol_support = 1e-8;       // mass outside the cone
  double tol_product_zero = 1e-10; // Schlieder precondition

  int random_pairs = 50;
  int random_triples = 100;
  int ccr_modes = 8;

  double propagate_t = -0.5;
  double propagate_x = 4.0;
  double propagate_rt = 0.15;
  double propagate_rx = 0.3;
  std::string propagate_theory = "scalar";

  std::uint64_t seed = 1;
  std::string out_dir = "covlab-out";

  /// Throws ConfigError on unknown keys, unparsable values or failed validation.
  static RunConfig parse(std::istream& in);
  static RunConfig load(const std::string& path);

  /// Throws ConfigError if a size, mass or tolerance is out of range.
  void validate() const;
  void scale_tolerances(double factor);
  nlohmann::ordered_json to_json() const;

  MetricModel model() const;
  Lattice lattice(const MetricModel& model) const;
  DeformationSpec deformation_spec(const MetricModel& model, const Lattice& lattice) const;
};

/// One thresholded number. `relation` is "<" (value must stay below the
/// threshold) or ">" (value must exceed it).
struct Margin {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation = "<";
  bool pass = false;

  static Margin below(std::string name, double value, double threshold);
  static Margin above(std::string name, double value, double threshold);
};

struct StageResult {
  int id = 0;
  std::string name;
  std::string branch;  // "common", "integer" or "half-integer"
  bool pass = false;
  bool skipped = false;
  std::vector<Margin> margins;
  std::string detail;

  std::optional<Margin> first_failure() const;
};

/// Arrays kept for plotting; not part of report.json.
struct SpinStatArtifacts {
  std::optional<Lattice> lattice;
  Eigen::VectorXd propagator;  // |E f1| per site on the deformed model
  std::map<std::string, Region> regions;
};

struct SpinStatReport {
  nlohmann::ordered_json config;
  std::vector<StageResult> stages;
  std::string verdict_integer;
  std::string verdict_half_integer;
  std::string verdict;
  SpinStatArtifacts artifacts;

  bool confirmed() const { return verdict == "mechanism-confirmed"; }
  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

inline constexpr const char* kConfirmed = "mechanism-confirmed";

/// The seven-stage pipeline. Stages run in order; after a failure the
/// remaining stages are marked skipped and the verdict names the stage and
/// the failing margin.
SpinStatReport run_spinstat(const RunConfig& config);

/// Re-derives every margin, stage and verdict from a report.json document.
/// Returns an empty string when consistent, otherwise the first discrepancy.
std::string recheck_report(const nlohmann::ordered_json& report);

/// Bipartite matrix model M (x) 1 and 1 (x) N on C^d1 (x) C^d2 with a
/// faithful product state rho1 (x) rho2.
class FactorModel {
 public:
  /// rho1, rho2 must be positive definite with unit trace (ConfigError).
  FactorModel(Eigen::MatrixXcd rho1, Eigen::MatrixXcd rho2);
  /// Maximally mixed factors.
  FactorModel(int d1, int d2);

  int left_dimension() const { return static_cast<int>(rho1_.rows()); }
  int right_dimension() const { return static_cast<int>(rho2_.rows()); }
  Eigen::MatrixXcd left(const Eigen::MatrixXcd& a) const;   // a (x) 1
  Eigen::MatrixXcd right(const Eigen::MatrixXcd& b) const;  // 1 (x) b
  /// a with A = a (x) 1, or nullopt if A is not of that form within tol.
  std::optional<Eigen::MatrixXcd> left_factor(const Eigen::MatrixXcd& big, double tol = 1e-10) const;
  std::optional<Eigen::MatrixXcd> right_factor(const Eigen::MatrixXcd& big, double tol = 1e-10) const;
  double expectation(const Eigen::MatrixXcd& big) const;
  double commutation_defect(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) const;

 private:
  Eigen::MatrixXcd rho1_, rho2_;
};

enum class SchliederOutcome { FirstZero, SecondZero, Violation };

std::string to_string(SchliederOutcome o);

/// For A1 in M (x) 1 and A2 in 1 (x) N with A1 A2 = 0 (within tol), reports
/// which factor vanishes. Throws DomainError if an operand is not in its
/// factor or the product does not vanish.
SchliederOutcome schlieder_check(const FactorModel& model, const Eigen::MatrixXcd& a1,
                                 const Eigen::MatrixXcd& a2, double tol = 1e-10);

/// Projector onto the eigenspace of the largest |eigenvalue| of a Hermitian matrix.
Eigen::MatrixXcd top_spectral_projection(const Eigen::MatrixXcd& h);

/// Result of one CLI check (ccr-check, car-check, functor-check, ...).
struct CheckReport {
  std::string name;
  std::vector<Margin> margins;
  std::string detail;
  nlohmann::ordered_json data;

  bool pass() const;
  nlohmann::ordered_json to_json() const;
};

CheckReport run_ccr_check(const RunConfig& config);
CheckReport run_car_check(const RunConfig& config);
CheckReport run_functor_check(const RunConfig& config);

struct DeformRun {
  DeformedSpacetime deformation;
  DeformationCertificate certificate;
};

/// Builds and certifies the configured deformation; throws like build_deformation.
DeformRun run_deform(const RunConfig& config);

struct PropagateRun {
  Lattice lattice;
  Eigen::VectorXd retarded;  // |E+ f| per site (spinor: Euclidean norm)
  Eigen::VectorXd advanced;
  Region source;
  CheckReport check;
};

PropagateRun run_propagate(const RunConfig& config);

/// Region queries. Each non-empty line of the query text is one of
///   site <name> <j> <i>
///   arc <name> <j_lo> <j_hi> <i_start> <length>
///   diamond <name> <j_center> <i_start> <length> <half_height>
/// ('#' starts a comment). Returns CSV rows of the sites that belong to the
/// region or to one of J+, J-, D+, D-; every unlisted site lies in O-perp.
/// Throws ConfigError on bad lines.
std::string causal_query_csv(const RunConfig& config, std::istream& queries);

}  // namespace covlab

#endif  // COVLAB_HARNESS_HPP
