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

#ifndef COVLAB_DIRACFIELD_HPP
#define COVLAB_DIRACFIELD_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "covlab/causal.hpp"
#include "covlab/geometry.hpp"
#include "covlab/scalarfield.hpp"

namespace covlab {

/// Real Majorana gamma matrices for 1+1 dimensions.
Eigen::Matrix2d gamma0();
Eigen::Matrix2d gamma1();
/// gamma^1 = -gamma_1 (signature +,-).
Eigen::Matrix2d gamma_upper1();
/// Gamma = gamma0 gamma1, used by charge conjugation.
Eigen::Matrix2d chirality();
/// max |gamma_a gamma_b + gamma_b gamma_a - 2 eta_ab|
double clifford_defect();

/// Two-component spinor grid function; entry 2 * (j * Nx + i) + component.
struct SpinorTestFunction {
  Eigen::VectorXcd values;
  std::string label;

  Region support() const;
};

SpinorTestFunction make_spinor_bump(const Lattice& lattice, double t0, double x0, double rt,
                                    double rx, cplx upper, cplx lower, std::string label = {});

/// Discretization of (gamma^a nabla_a + i m) psi = f on ds^2 = N^2 dt^2 - a^2 dx^2.
/// Multiplied by w = N a the operator reads
///   gamma0 sqrt(a) d_t(sqrt(a) psi) + gamma^1 sqrt(N) d_x(sqrt(N) psi) + i m w psi,
/// discretized with centered differences in t and x (leapfrog).
class DiracKernel {
 public:
  DiracKernel(const MetricModel& model, const Lattice& lattice, double mass);

  const Lattice& lattice() const { return lattice_; }
  double mass() const { return mass_; }
  double weight(int j, int i) const { return w_[lattice_.index(j, i)]; }

  void check_source(const Eigen::VectorXcd& f) const;
  /// sign = +1 retarded, -1 advanced.
  Eigen::VectorXcd solve(const Eigen::VectorXcd& f, int sign) const;
  Eigen::VectorXcd solve_retarded(const Eigen::VectorXcd& f) const { return solve(f, +1); }
  Eigen::VectorXcd solve_advanced(const Eigen::VectorXcd& f) const { return solve(f, -1); }
  Eigen::VectorXcd causal_propagator(const Eigen::VectorXcd& f) const;
  /// Lattice Dirac operator on rows 1..Nt-2, zero on boundary rows.
  Eigen::VectorXcd apply_operator(const Eigen::VectorXcd& psi) const;

  /// s(f, h) = dt dx sum w (S f)^dagger gamma0 h.
  cplx pairing(const Eigen::VectorXcd& f, const Eigen::VectorXcd& h) const;
  cplx pairing_with(const Eigen::VectorXcd& sf, const Eigen::VectorXcd& h) const;

  /// C f = Gamma conj(f).
  static Eigen::VectorXcd charge_conjugate(const Eigen::VectorXcd& f);

 private:
  Lattice lattice_;
  double mass_;
  Eigen::VectorXd w_, c_, e_;  // N a, sqrt(a), sqrt(N) per site
};

/// Basis {f_i} extended by {C f_i}; Gram matrix s over the extended family.
struct CARSpace {
  std::vector<SpinorTestFunction> basis;  // f_1..f_n
  std::vector<Eigen::VectorXcd> family;   // f_1..f_n, C f_1..C f_n
  std::vector<Eigen::VectorXcd> solutions;
  Eigen::MatrixXcd gram;  // 2n x 2n

  /// Rescales each f_i to s(f_i, f_i) = 1 when `normalize` is set.
  static CARSpace build(const DiracKernel& kernel, std::vector<SpinorTestFunction> basis,
                        bool normalize = true);
  int size() const { return static_cast<int>(basis.size()); }
  double hermiticity_defect() const;
  /// max |s(Cv, Cw) - conj(s(v, w))| over the family.
  double conjugation_defect() const;
  double min_eigenvalue() const;
};

/// Self-dual CAR representation on 2^(r/2) dimensions, r = rank of s on the
/// C-real subspace. Vectors are coefficient vectors over CARSpace::family.
class CARRep {
 public:
  explicit CARRep(const CARSpace& space, double rank_tol = 1e-10, double negative_tol = 1e-8);

  int modes() const { return modes_; }
  int dimension() const { return 1 << modes_; }
  int rank() const { return rank_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

  /// alpha_k(v) = s(e_k, v).
  Eigen::VectorXcd components(const Eigen::VectorXcd& coeffs) const;
  SparseC field(const Eigen::VectorXcd& coeffs) const;
  SparseC field(int family_index) const;
  /// Coefficients of C v.
  Eigen::VectorXcd conjugate(const Eigen::VectorXcd& coeffs) const;
  cplx s(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w) const { return v.dot(gram_ * w); }
  Eigen::VectorXcd unit(int family_index) const;

  /// max |{B(v)*, B(w)} - s(v, w) I| over the family.
  double car_defect() const;
  /// max |B(C v) - B(v)*| over the family.
  double star_defect() const;

 private:
  int n_ = 0;  // basis size (family has 2n)
  int rank_ = 0;
  int modes_ = 0;
  double min_eigenvalue_ = 0.0;
  Eigen::MatrixXcd gram_;
  Eigen::MatrixXcd e_;  // 2n x rank coefficient vectors of e_k
  std::vector<SparseC> majorana_;  // B(e_k) = gamma_k / sqrt(2)
};

struct AnticommutatorReport {
  double anticommutator = 0.0;  // |s(f,h)| + |s(Cf,h)|
  double commutator_norm = 0.0; // || [B(f), B(h)] ||
};

AnticommutatorReport spacelike_anticommutator(const CARSpace& space, const CARRep& rep, int a, int b);

/// Largest singular value.
double operator_norm(const SparseC& m);

/// Algebra generated by B(f_i), B(f_i)* over basis functions supported in O.
MatrixAlgebra local_algebra(const CARRep& rep, const CARSpace& space, const Region& o);

struct DiracStrictCausalResult {
  SpinorTestFunction f2;
  bool identity_path = false;
  int band_lo = -1;
  int band_hi = -1;
  double data_rel_error = 0.0;  // on slices reference, reference + 1
  int reference_slice = 0;
};

/// Fermionic counterpart of strict_causal_law: f2 = D(chi S f1) restricted
/// to O2, with S f2 = S f1.
DiracStrictCausalResult dirac_strict_causal_law(const DiracKernel& kernel, const CausalGraph& graph,
                                                const SpinorTestFunction& f1, const Region& o2,
                                                int reference_slice = 0);

}  // namespace covlab

#endif  // COVLAB_DIRACFIELD_HPP
