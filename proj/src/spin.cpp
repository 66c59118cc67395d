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

#include "covlab/spin.hpp"

#include <array>
#include <random>

#include <fmt/format.h>

namespace covlab {

SL2CElement::SL2CElement(const Eigen::Matrix2cd& s, double tol) : s_(s) {
  const cplx det = s.determinant();
  if (std::abs(det - 1.0) > tol) {
    throw DomainError(fmt::format("SL(2,C) element needs det 1, got {}{:+}i", det.real(), det.imag()));
  }
}

SL2CElement SL2CElement::operator*(const SL2CElement& other) const {
  return SL2CElement(s_ * other.s_, 1e-9);
}

SL2CElement SL2CElement::inverse() const {
  Eigen::Matrix2cd inv;
  inv << s_(1, 1), -s_(0, 1), -s_(1, 0), s_(0, 0);
  return SL2CElement(inv, 1e-9);
}

const Eigen::Matrix2cd& pauli(int a) {
  static const std::array<Eigen::Matrix2cd, 4> basis = [] {
    std::array<Eigen::Matrix2cd, 4> p;
    const cplx i(0.0, 1.0);
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, -i, i, 0;
    p[3] << 1, 0, 0, -1;
    return p;
  }();
  if (a < 0 || a > 3) throw DomainError(fmt::format("no Pauli matrix with index {}", a));
  return basis[static_cast<std::size_t>(a)];
}

SL2CElement rotation(int axis, double angle) {
  if (axis < 1 || axis > 3) throw DomainError("rotation axis must be 1, 2 or 3");
  const Eigen::Matrix2cd s = std::cos(0.5 * angle) * pauli(0) -
                             cplx(0.0, 1.0) * std::sin(0.5 * angle) * pauli(axis);
  return SL2CElement(s, 1e-12);
}

SL2CElement boost(int axis, double rapidity) {
  if (axis < 1 || axis > 3) throw DomainError("boost axis must be 1, 2 or 3");
  const Eigen::Matrix2cd s =
      std::cosh(0.5 * rapidity) * pauli(0) + std::sinh(0.5 * rapidity) * pauli(axis);
  return SL2CElement(s, 1e-12);
}

std::vector<SL2CElement> generators(double angle, double rapidity) {
  std::vector<SL2CElement> out;
  for (int axis = 1; axis <= 3; ++axis) {
    out.push_back(rotation(axis, angle));
    out.push_back(boost(axis, rapidity));
  }
  return out;
}

std::vector<SL2CElement> sample_sl2c(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<SL2CElement> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    Eigen::Matrix2cd m;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) m(r, c) = cplx(normal(rng), normal(rng));
    const cplx det = m.determinant();
    if (std::abs(det) < 1e-3) continue;
    m /= std::sqrt(det);
    out.emplace_back(m, 1e-10);
  }
  return out;
}

double LorentzMatrix::metric_defect() const {
  const Eigen::Matrix4d eta = Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
  return (m.transpose() * eta * m - eta).cwiseAbs().maxCoeff();
}

LorentzMatrix covering_map(const SL2CElement& s) {
  const Eigen::Matrix2cd& sm = s.matrix();
  const Eigen::Matrix2cd sa = sm.adjoint();
  LorentzMatrix out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      out.m(a, b) = 0.5 * (sa * pauli(a) * sm * pauli(b)).trace().real();
  return out;
}

std::string to_string(SpinType t) { return t == SpinType::Integer ? "integer" : "half-integer"; }

SpinRep SpinRep::complex_irreducible(int k, int l) {
  if (k < 0 || l < 0) throw DomainError("representation labels must be non-negative");
  return {k, l, RepKind::ComplexIrreducible};
}

SpinRep SpinRep::real_irreducible(int k, int l) {
  if (k < 0 || l < 0) throw DomainError("representation labels must be non-negative");
  if (k == l) throw DomainError("real-irreducible sum D(k,l)+D(l,k) needs k != l");
  return {k, l, RepKind::RealIrreducible};
}

int SpinRep::dimension() const {
  const int d = (k + 1) * (l + 1);
  return kind == RepKind::ComplexIrreducible ? d : 2 * d;
}

std::string SpinRep::label() const {
  if (kind == RepKind::ComplexIrreducible) return fmt::format("D({},{})", k, l);
  return fmt::format("D({},{})+D({},{})", k, l, l, k);
}

Eigen::MatrixXcd symmetric_power(const Eigen::Matrix2cd& s, int k) {
  if (k < 0) throw DomainError("symmetric power degree must be non-negative");
  // Column j holds the expansion of (s11 e1 + s21 e2)^(k-j) (s12 e1 + s22 e2)^j
  // in the monomials e1^(k-m) e2^m, stored as polynomial coefficients in e2.
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(k + 1, k + 1);
  for (int j = 0; j <= k; ++j) {
    std::vector<cplx> poly{1.0};
    auto multiply = [&](cplx c1, cplx c2) {
      std::vector<cplx> next(poly.size() + 1, 0.0);
      for (std::size_t m = 0; m < poly.size(); ++m) {
        next[m] += poly[m] * c1;
        next[m + 1] += poly[m] * c2;
      }
      poly = std::move(next);
    };
    for (int n = 0; n < k - j; ++n) multiply(s(0, 0), s(1, 0));
    for (int n = 0; n < j; ++n) multiply(s(0, 1), s(1, 1));
    for (int m = 0; m <= k; ++m) out(m, j) = poly[static_cast<std::size_t>(m)];
  }
  return out;
}

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

Eigen::MatrixXcd complex_block(int k, int l, const Eigen::Matrix2cd& s) {
  return kron(symmetric_power(s, k), symmetric_power(s.conjugate(), l));
}

}  // namespace

Eigen::MatrixXcd rep_matrix(const SpinRep& rep, const SL2CElement& s) {
  if (rep.kind == RepKind::ComplexIrreducible) return complex_block(rep.k, rep.l, s.matrix());
  const int d = (rep.k + 1) * (rep.l + 1);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
  out.topLeftCorner(d, d) = complex_block(rep.k, rep.l, s.matrix());
  out.bottomRightCorner(d, d) = complex_block(rep.l, rep.k, s.matrix());
  return out;
}

SpinType spin_type(const SpinRep& rep) {
  return (rep.k + rep.l) % 2 == 0 ? SpinType::Integer : SpinType::HalfInteger;
}

bool check_equivalence(const SpinRep& rep1, const SpinRep& rep2, const Eigen::MatrixXcd& T,
                       std::uint64_t seed, int samples, double tol) {
  const int n = rep1.dimension();
  if (rep2.dimension() != n || T.rows() != n || T.cols() != n) {
    throw DomainError(fmt::format("equivalence check: dimensions {} vs {} with T {}x{}", n,
                                  rep2.dimension(), T.rows(), T.cols()));
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(T);
  if (!lu.isInvertible()) throw DomainError("equivalence check: T is not invertible");
  const Eigen::MatrixXcd t_inv = lu.inverse();
  std::vector<SL2CElement> probe = generators();
  for (auto& s : sample_sl2c(samples, seed)) probe.push_back(s);
  for (const auto& s : probe) {
    const Eigen::MatrixXcd lhs = T * rep_matrix(rep1, s) * t_inv;
    const Eigen::MatrixXcd rhs = rep_matrix(rep2, s);
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if ((lhs - rhs).cwiseAbs().maxCoeff() > tol * scale) return false;
  }
  return true;
}

}  // namespace covlab
