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

#ifndef COVLAB_SCALARFIELD_HPP
#define COVLAB_SCALARFIELD_HPP

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "covlab/causal.hpp"
#include "covlab/geometry.hpp"

namespace covlab {

using cplx = std::complex<double>;
using SparseC = Eigen::SparseMatrix<cplx>;

/// Real grid function on the lattice, row-major (index j * Nx + i).
struct TestFunction {
  Eigen::VectorXd values;
  std::string label;

  Region support() const;
};

/// Polynomial bump (1 - s^2)^4 in each direction, s = (t - t0)/rt and the
/// periodic offset (x - x0)/rx.
TestFunction make_bump(const Lattice& lattice, double t0, double x0, double rt, double rx,
                       double amplitude = 1.0, std::string label = {});

/// Sum |u| outside the region divided by sum |u| (0 if u vanishes).
double mass_fraction_outside(const Eigen::VectorXd& u, const Region& region);

/// Discrete Klein-Gordon operator and its retarded/advanced inverses.
///
/// With w = N a, c = a/N on half time steps and d = N/a on half space steps
/// the lattice equation at row j is
///   [c+ (u[j+1] - u[j]) - c- (u[j] - u[j-1])] / dt^2
///     - [d+ (u[i+1] - u[i]) - d- (u[i] - u[i-1])] / dx^2 + m^2 w u = w f,
/// a conservative discretization of (Box_g + m^2) u = f.
class ScalarKernel {
 public:
  ScalarKernel(const MetricModel& model, const Lattice& lattice, double mass);

  const Lattice& lattice() const { return lattice_; }
  double mass() const { return mass_; }
  double weight(int j, int i) const { return w_[static_cast<std::size_t>(lattice_.index(j, i))]; }
  const Eigen::VectorXd& weights() const { return w_; }
  double c_half(int j, int i) const { return ct_[static_cast<std::size_t>(lattice_.index(j, i))]; }

  /// Throws DomainError if supp f comes within two slices of the time boundary.
  void check_source(const Eigen::VectorXd& f) const;

  Eigen::VectorXd solve_retarded(const Eigen::VectorXd& f) const;
  Eigen::VectorXd solve_advanced(const Eigen::VectorXd& f) const;
  /// E f = E+ f - E- f.
  Eigen::VectorXd causal_propagator(const Eigen::VectorXd& f) const;
  /// (Box + m^2) u on rows 1..Nt-2; boundary rows are set to zero.
  Eigen::VectorXd apply_operator(const Eigen::VectorXd& u) const;

  /// kappa(f, h) = dt dx sum w f (E h).
  double symplectic_pairing(const Eigen::VectorXd& f, const Eigen::VectorXd& h) const;
  double symplectic_pairing_with(const Eigen::VectorXd& f, const Eigen::VectorXd& eh) const;
  /// sqrt(dt dx sum w f^2)
  double norm(const Eigen::VectorXd& f) const;

  /// (u[j], (u[j+1] - u[j]) / dt) on slice j, concatenated.
  Eigen::VectorXd cauchy_data(const Eigen::VectorXd& u, int j) const;

 private:
  Lattice lattice_;
  double mass_;
  Eigen::VectorXd w_, ct_, dx_;
};

/// Basis of test functions together with their kappa Gram matrix and
/// propagated solutions.
struct SymplecticSpace {
  std::vector<TestFunction> basis;
  std::vector<Eigen::VectorXd> solutions;  // E f_i
  Eigen::MatrixXd kappa;

  static SymplecticSpace build(const ScalarKernel& kernel, std::vector<TestFunction> basis);
  double antisymmetry_defect() const;
  /// Rank of the Cauchy-data map on the basis span vs rank of span{E f_i};
  /// equal when the quotient by ker E is faithfully represented.
  std::pair<int, int> ranks(const ScalarKernel& kernel, int slice, double tol = 1e-9) const;
};

/// Instantaneous ground state of the flat initial band. Each f is mapped to a
/// one-particle vector psi(f) in C^Nx built from the positive-frequency part
/// of E f on two reference slices; W(f, h) = <psi(f), psi(h)>.
class QuasifreeState {
 public:
  /// Requires m > 0 and a flat initial band covering slices j0, j0 + 1.
  static QuasifreeState build(const ScalarKernel& kernel, const MetricModel& model,
                              const SymplecticSpace& space, int reference_slice = 0);

  Eigen::VectorXcd one_particle(const Eigen::VectorXd& ef) const;
  cplx two_point(const Eigen::VectorXd& ef, const Eigen::VectorXd& eh) const;

  const Eigen::MatrixXcd& W() const { return w_; }
  const Eigen::MatrixXcd& psi() const { return psi_; }
  /// Lattice dispersion omega_k (per Fourier index 0..Nx-1).
  const Eigen::VectorXd& frequencies() const { return omega_; }
  /// Continuum flat-band energies sqrt(k^2 / a0^2 + m^2).
  Eigen::VectorXd continuum_frequencies() const;
  /// max |W - W^T - i kappa|
  double ccr_defect(const Eigen::MatrixXd& kappa) const;
  double min_eigenvalue() const;
  int reference_slice() const { return j0_; }

 private:
  int j0_ = 0;
  int nx_ = 0;
  double dt_ = 0.0, dx_ = 0.0, a0_ = 1.0, mass_ = 0.0, norm_ = 0.0;
  Eigen::VectorXd omega_, sin_theta_;
  Eigen::MatrixXcd psi_;
  Eigen::MatrixXcd w_;
};

/// Bosonic Fock space on `modes` modes truncated to total occupation <= cutoff.
class FockSpace {
 public:
  FockSpace(int modes, int cutoff);
  int modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  int dimension() const { return static_cast<int>(states_.size()); }
  const std::vector<int>& occupation(int state) const { return states_[static_cast<std::size_t>(state)]; }
  int total(int state) const;
  const SparseC& annihilation(int k) const { return lower_[static_cast<std::size_t>(k)]; }
  const SparseC& creation(int k) const { return raise_[static_cast<std::size_t>(k)]; }
  /// Projector onto states of total occupation <= n.
  SparseC projector_below(int n) const;
  Eigen::VectorXcd vacuum() const;

 private:
  int modes_, cutoff_;
  std::vector<std::vector<int>> states_;
  std::vector<SparseC> lower_, raise_;
};

/// Field operators Phi(f) = sum_k conj(G_kf) a_k + G_kf a_k^dagger on the
/// truncated Fock space over an orthonormal basis of span{psi(f_i)}.
class FockRep {
 public:
  FockRep(const Eigen::MatrixXcd& psi, int cutoff, int max_modes = 10, double rank_tol = 1e-9);

  const FockSpace& space() const { return space_; }
  int modes() const { return space_.modes(); }
  /// Coefficients G (modes x functions).
  const Eigen::MatrixXcd& coefficients() const { return g_; }
  const SparseC& field(int index) const { return phi_[static_cast<std::size_t>(index)]; }
  int field_count() const { return static_cast<int>(phi_.size()); }
  /// Field operator for a one-particle vector psi.
  SparseC field_of(const Eigen::VectorXcd& psi) const;
  /// exp(i Phi(f)) via Hermitian eigendecomposition (dense; small truncations only).
  Eigen::MatrixXcd weyl(int index) const;
  /// || ([Phi_a, Phi_b] - i kappa I) P ||_max with P projecting on occupation <= N-1.
  double ccr_defect(int a, int b, double kappa_ab) const;
  /// max over entries of |Phi - Phi^dagger|.
  double hermiticity_defect(int index) const;

 private:
  FockSpace space_;
  Eigen::MatrixXcd basis_;  // orthonormal e_k as columns
  Eigen::MatrixXcd g_;
  std::vector<SparseC> phi_;
};

/// Linear span of matrices closed under multiplication, stored as an
/// orthonormal (Hilbert-Schmidt) basis of vectorized matrices.
class MatrixAlgebra {
 public:
  /// *-algebra generated by the given matrices, with the identity adjoined
  /// when `unital` is set.
  static MatrixAlgebra generate(const std::vector<Eigen::MatrixXcd>& generators, int dim,
                                double tol = 1e-10, bool unital = true);

  int dimension() const { return static_cast<int>(basis_.cols()); }
  int matrix_size() const { return n_; }
  bool contains(const Eigen::MatrixXcd& m, double tol = 1e-8) const;
  bool subset_of(const MatrixAlgebra& other, double tol = 1e-8) const;
  Eigen::MatrixXcd element(int k) const;
  /// dim span{A v : A in algebra}
  int orbit_dimension(const Eigen::VectorXcd& v, double tol = 1e-10) const;

 private:
  int n_ = 0;
  Eigen::MatrixXcd basis_;
};

/// Algebra generated by Phi(f_i) over basis functions with supp f_i in O.
/// Throws DiagnosticError if no basis function is supported in O.
MatrixAlgebra local_algebra(const FockRep& rep, const std::vector<TestFunction>& basis,
                            const Region& o);

struct StrictCausalResult {
  TestFunction f2;
  bool identity_path = false;
  int band_lo = -1;  // slices where the cutoff rises
  int band_hi = -1;
  double cauchy_rel_error = 0.0;
  int reference_slice = 0;
};

/// Quintic ramp, 0 for s <= 0 and 1 for s >= 1.
double smoothstep(double s);

/// Longest run of interior slices on which every site whose 5-point stencil
/// meets a nonzero site lies in O2. Throws DiagnosticError if the run has
/// fewer than two slices.
std::pair<int, int> cutoff_band(const Lattice& lattice, const std::vector<char>& nonzero,
                                const Region& o2);

/// Builds f2 = (Box + m^2)(chi E f1) supported in O2 with E f2 = E f1, where
/// chi rises from 0 to 1 across a band of slices inside O2. Throws
/// DomainError unless supp f1 is causally determined by O2 and
/// DiagnosticError if no band keeps supp f2 inside O2.
StrictCausalResult strict_causal_law(const ScalarKernel& kernel, const CausalGraph& graph,
                                     const TestFunction& f1, const Region& o2,
                                     int reference_slice = 0);

}  // namespace covlab

#endif  // COVLAB_SCALARFIELD_HPP
