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

#ifndef COVLAB_NETFUNCTOR_HPP
#define COVLAB_NETFUNCTOR_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covlab/causal.hpp"
#include "covlab/geometry.hpp"
#include "covlab/scalarfield.hpp"

namespace covlab {

/// A spacetime object: metric, lattice and causal graph under a name that
/// identifies it inside hom-sets.
struct SpacetimeObject {
  std::string name;
  std::shared_ptr<const MetricModel> model;
  Lattice lattice;
  std::shared_ptr<const CausalGraph> graph;

  static std::shared_ptr<const SpacetimeObject> make(std::string name, const MetricModel& model,
                                                     const Lattice& lattice);
  static std::shared_ptr<const SpacetimeObject> make(std::string name, const MetricModel& model,
                                                     const Lattice& lattice,
                                                     std::shared_ptr<const CausalGraph> graph);
};

/// Local isomorphism between two objects: a lattice translation
/// (j, i) -> (j + dj, i + di mod Nx) restricted to the initial localization,
/// together with a frame sign standing in for the spin-bundle map. The
/// trivial morphism carries no map.
class LocalIso {
 public:
  static LocalIso trivial();
  /// Identity of m with the full lattice as localization.
  static LocalIso identity(const std::shared_ptr<const SpacetimeObject>& m);
  /// Throws ConfigError if the lattices differ in spacing or Nx or the
  /// frame sign is not +-1, DomainError if l_ini is empty, wraps a full
  /// slice, is not causally convex, leaves the target lattice, or if the
  /// metric is not pushed forward within tol.
  static LocalIso translation(const std::shared_ptr<const SpacetimeObject>& source,
                              const std::shared_ptr<const SpacetimeObject>& target,
                              const Region& l_ini, int dj, int di, int frame_sign = 1,
                              double tol = 1e-12);

  bool is_trivial() const { return trivial_; }
  const std::string& source_name() const { return source_name_; }
  const std::string& target_name() const { return target_name_; }
  const Lattice& source_lattice() const { return source_lattice_; }
  const Lattice& target_lattice() const { return target_lattice_; }
  int time_shift() const { return dj_; }
  int space_shift() const { return di_; }
  int frame_sign() const { return sign_; }
  double metric_defect() const { return metric_defect_; }
  const Region& initial() const { return l_ini_; }
  const Region& final() const { return l_fin_; }

  Site map(Site s) const;
  Site inverse(Site s) const;
  /// theta(O) for O inside the initial localization.
  Region push(const Region& o) const;
  /// theta^-1(O) for O inside the final localization.
  Region pull(const Region& o) const;
  /// theta_* f = frame^spin * f o theta^-1 with `components` values per site
  /// (1 scalar, 2 spinor; the frame sign acts only on spinors). Throws
  /// DomainError if supp f is not inside the initial localization.
  Eigen::VectorXcd transport(const Eigen::VectorXcd& f, int components) const;

  friend bool operator==(const LocalIso& a, const LocalIso& b);

 private:
  bool trivial_ = true;
  std::string source_name_, target_name_;
  Lattice source_lattice_, target_lattice_;
  int dj_ = 0, di_ = 0, sign_ = 1;
  double metric_defect_ = 0.0;
  Region l_ini_, l_fin_;

  friend LocalIso compose(const LocalIso& m2, const LocalIso& m1);
};

/// m2 o m1. Trivial if either factor is trivial or the localizations miss
/// each other. Throws DomainError if target(m1) != source(m2).
LocalIso compose(const LocalIso& m2, const LocalIso& m1);

std::string describe(const LocalIso& m);

enum class Theory { Scalar, Dirac };

std::string to_string(Theory t);
Theory theory_from_string(const std::string& s);

struct TheorySpec {
  Theory kind = Theory::Scalar;
  double mass = 1.0;
  int fock_cutoff = 1;  // scalar only; net algebras are generated on this truncation

  int components() const { return kind == Theory::Dirac ? 2 : 1; }
};

/// kappa (scalar, real part of the inputs) or s (Dirac) Gram matrix of fs on m.
Eigen::MatrixXcd pairing_gram(const SpacetimeObject& m, const TheorySpec& theory,
                              const std::vector<Eigen::VectorXcd>& fs);

/// The free-field net on an object: a finite generator basis, its Gram
/// data and a matrix representation. F(O) is generated by the fields of
/// basis functions supported in O.
class FieldNet {
 public:
  /// Scalar nets need m > 0 and an initial flat band (quasifree state).
  static FieldNet build(std::shared_ptr<const SpacetimeObject> object, const TheorySpec& theory,
                        std::vector<Eigen::VectorXcd> basis);

  const SpacetimeObject& object() const { return *object_; }
  const TheorySpec& theory() const { return theory_; }
  int size() const { return static_cast<int>(basis_.size()); }
  const Eigen::VectorXcd& generator(int k) const { return basis_[static_cast<std::size_t>(k)]; }
  const Region& support(int k) const { return supports_[static_cast<std::size_t>(k)]; }
  const Eigen::MatrixXcd& gram() const { return gram_; }
  /// Index of a basis function equal to f, or -1.
  int generator_index(const Eigen::VectorXcd& f) const;
  std::vector<int> generators_in(const Region& o) const;

  int dimension() const { return static_cast<int>(fields_.empty() ? 0 : fields_.front().rows()); }
  const Eigen::MatrixXcd& field(int k) const { return fields_[static_cast<std::size_t>(k)]; }
  /// F(O); throws DiagnosticError if no generator lies in O.
  MatrixAlgebra algebra(const Region& o, bool unital = true) const;

 private:
  std::shared_ptr<const SpacetimeObject> object_;
  TheorySpec theory_;
  std::vector<Eigen::VectorXcd> basis_;
  std::vector<Region> supports_;
  Eigen::MatrixXcd gram_;
  std::vector<Eigen::MatrixXcd> fields_;
};

/// Image of a local isomorphism under the functor: a chain of base maps
/// acting on generators by transport. Composition concatenates chains, so
/// F(m2 o m1) and F(m2) o F(m1) are computed independently.
class NetMorphism {
 public:
  static NetMorphism trivial(int components);

  bool is_trivial() const { return trivial_; }
  int components() const { return components_; }
  const std::vector<LocalIso>& chain() const { return chain_; }
  /// Composed base map phi.
  LocalIso base() const;
  /// alpha(Phi(f)) = Phi(theta_* f) at generator level; nullopt when the
  /// morphism is trivial or f is not localized in the initial region.
  std::optional<Eigen::VectorXcd> on_generator(const Eigen::VectorXcd& f) const;

 private:
  bool trivial_ = true;
  int components_ = 1;
  std::vector<LocalIso> chain_;  // in order of application

  friend NetMorphism functor_apply(const LocalIso& m, int components);
  friend NetMorphism compose(const NetMorphism& b, const NetMorphism& a);
};

NetMorphism functor_apply(const LocalIso& m, int components);
NetMorphism compose(const NetMorphism& b, const NetMorphism& a);

/// Generator relabeling k -> index in n2 (or -1 outside the localization)
/// realizing F(m) between concrete nets. Throws CovarianceError if a
/// transported generator is missing from n2 or the Gram data disagree by
/// more than tol relative to the largest Gram entry.
struct Relabeling {
  NetMorphism morphism;
  std::vector<int> map;
  double gram_rel_error = 0.0;
};

Relabeling functor_apply(const LocalIso& m, const FieldNet& n1, const FieldNet& n2,
                         double tol = 1e-6);

struct CovarianceCheck {
  std::string region;
  int source_dimension = 0;  // dim F1(O)
  int image_dimension = 0;   // dim alpha(F1(O))
  int target_dimension = 0;  // dim F2(theta(O))
  bool equal = false;       // alpha(F1(O)) == F2(theta(O))
  bool isomorphic = false;  // equal dimensions of the non-unital generated algebras
};

/// alpha(F1(O)) = F2(theta(O)) as subspaces of the target representation.
/// Dimensions are those of the algebras generated without the identity,
/// which do not depend on the other generators of the representation.
CovarianceCheck check_covariance(const Relabeling& alpha, const FieldNet& n1, const FieldNet& n2,
                                 const Region& o);

struct PairingReport {
  int functions = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  double scale = 0.0;
  bool pass = false;
};

/// Compares the Gram data of the basis functions inside l_ini with that of
/// their transports, each computed by its own lattice solve. Throws
/// DomainError if iso is trivial or no basis function is localized.
PairingReport check_invariant_pairings(const LocalIso& iso, const SpacetimeObject& source,
                                       const SpacetimeObject& target, const TheorySpec& theory,
                                       const std::vector<Eigen::VectorXcd>& basis,
                                       double tol = 1e-6);

}  // namespace covlab

#endif  // COVLAB_NETFUNCTOR_HPP
