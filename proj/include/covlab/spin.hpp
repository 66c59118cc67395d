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

#ifndef COVLAB_SPIN_HPP
#define COVLAB_SPIN_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covlab/errors.hpp"

namespace covlab {

using cplx = std::complex<double>;

/// 2x2 complex matrix with unit determinant.
class SL2CElement {
 public:
  /// Throws DomainError if |det s - 1| > tol.
  explicit SL2CElement(const Eigen::Matrix2cd& s, double tol = 1e-12);
  static SL2CElement identity() { return SL2CElement(Eigen::Matrix2cd::Identity()); }

  const Eigen::Matrix2cd& matrix() const { return s_; }
  SL2CElement operator*(const SL2CElement& other) const;
  SL2CElement inverse() const;

 private:
  Eigen::Matrix2cd s_;
};

/// exp(-i angle sigma_axis / 2), axis in {1,2,3}.
SL2CElement rotation(int axis, double angle);
/// exp(rapidity sigma_axis / 2), axis in {1,2,3}.
SL2CElement boost(int axis, double rapidity);
/// The six one-parameter generators at the given parameter values.
std::vector<SL2CElement> generators(double angle = 0.7, double rapidity = 0.4);
/// Gaussian 2x2 complex matrices rescaled to det 1, reproducible from seed.
std::vector<SL2CElement> sample_sl2c(int count, std::uint64_t seed);

/// Pauli basis sigma_0 = 1, sigma_1..3.
const Eigen::Matrix2cd& pauli(int a);

struct LorentzMatrix {
  Eigen::Matrix4d m;
  /// max |Lambda^T eta Lambda - eta|
  double metric_defect() const;
  bool orthochronous() const { return m(0, 0) > 0.0; }
  double determinant() const { return m.determinant(); }
};

/// Lambda_ab = 1/2 Tr(s^* sigma_a s sigma_b).
LorentzMatrix covering_map(const SL2CElement& s);

enum class RepKind { ComplexIrreducible, RealIrreducible };
enum class SpinType { Integer, HalfInteger };

std::string to_string(SpinType t);

struct SpinRep {
  int k = 0;
  int l = 0;
  RepKind kind = RepKind::ComplexIrreducible;

  static SpinRep complex_irreducible(int k, int l);
  /// D^(k,l) + D^(l,k), requires k != l.
  static SpinRep real_irreducible(int k, int l);
  int dimension() const;
  std::string label() const;
};

/// k-th symmetric power on the monomial basis e1^(k-j) e2^j, j = 0..k.
Eigen::MatrixXcd symmetric_power(const Eigen::Matrix2cd& s, int k);

/// D^(k,l)(s) = Sym^k(s) (x) Sym^l(conj s); block-diagonal for the real kind.
Eigen::MatrixXcd rep_matrix(const SpinRep& rep, const SL2CElement& s);

SpinType spin_type(const SpinRep& rep);

/// T rho1(s) T^-1 == rho2(s) on the generators and `samples` random elements.
bool check_equivalence(const SpinRep& rep1, const SpinRep& rep2, const Eigen::MatrixXcd& T,
                       std::uint64_t seed = 20260101, int samples = 20, double tol = 1e-9);

}  // namespace covlab

#endif  // COVLAB_SPIN_HPP
