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

#include "covlab/diracfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace covlab {

Eigen::Matrix2d gamma0() { return (Eigen::Matrix2d() << 0, 1, 1, 0).finished(); }
Eigen::Matrix2d gamma1() { return (Eigen::Matrix2d() << 0, 1, -1, 0).finished(); }
Eigen::Matrix2d gamma_upper1() { return -gamma1(); }
Eigen::Matrix2d chirality() { return gamma0() * gamma1(); }

double clifford_defect() {
  const std::array<Eigen::Matrix2d, 2> g{gamma0(), gamma1()};
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  const std::array<double, 2> eta{1.0, -1.0};
  double worst = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const Eigen::Matrix2d target = a == b ? Eigen::Matrix2d(2.0 * eta[static_cast<std::size_t>(a)] * id)
                                            : Eigen::Matrix2d::Zero();
      const Eigen::Matrix2d ac = g[static_cast<std::size_t>(a)] * g[static_cast<std::size_t>(b)] +
                                 g[static_cast<std::size_t>(b)] * g[static_cast<std::size_t>(a)];
      worst = std::max(worst, (ac - target).cwiseAbs().maxCoeff());
    }
  return worst;
}

Region SpinorTestFunction::support() const {
  Region r(static_cast<int>(values.size() / 2));
  for (Eigen::Index k = 0; k < values.size(); ++k)
    if (values[k] != cplx(0.0, 0.0)) r.insert(static_cast<int>(k / 2));
  return r;
}

SpinorTestFunction make_spinor_bump(const Lattice& lattice, double t0, double x0, double rt,
                                    double rx, cplx upper, cplx lower, std::string label) {
  const TestFunction b = make_bump(lattice, t0, x0, rt, rx);
  SpinorTestFunction f;
  f.values = Eigen::VectorXcd::Zero(2 * lattice.size());
  for (int k = 0; k < lattice.size(); ++k) {
    f.values[2 * k] = upper * b.values[k];
    f.values[2 * k + 1] = lower * b.values[k];
  }
  f.label = label.empty() ? fmt::format("spinor_bump(t={:.3f},x={:.3f})", t0, x0) : std::move(label);
  return f;
}

DiracKernel::DiracKernel(const MetricModel& model, const Lattice& lattice, double mass)
    : lattice_(lattice), mass_(mass) {
  if (!(mass >= 0.0)) throw ConfigError(fmt::format("mass must be >= 0, got {}", mass));
  const int n = lattice.size();
  w_.resize(n);
  c_.resize(n);
  e_.resize(n);
  for (int j = 0; j < lattice.nt; ++j)
    for (int i = 0; i < lattice.nx; ++i) {
      const double t = lattice.t(j), x = lattice.x(i);
      const double nn = std::sqrt(model.lapse(t, x)), a = model.scale(t, x);
      const int k = lattice.index(j, i);
      w_[k] = nn * a;
      c_[k] = std::sqrt(a);
      e_[k] = std::sqrt(nn);
    }
}

void DiracKernel::check_source(const Eigen::VectorXcd& f) const {
  if (f.size() != 2 * lattice_.size()) {
    throw DomainError(fmt::format("spinor source has {} entries, expected {}", f.size(), 2 * lattice_.size()));
  }
  for (int j = 0; j < lattice_.nt; ++j) {
    if (j >= 2 && j <= lattice_.nt - 3) continue;
    for (int i = 0; i < 2 * lattice_.nx; ++i)
      if (f[2 * j * lattice_.nx + i] != cplx(0.0, 0.0)) {
        throw DomainError(fmt::format(
            "spinor source support touches the lattice time boundary at slice {} (needs 2-slice margin)", j));
      }
  }
}

Eigen::VectorXcd DiracKernel::solve(const Eigen::VectorXcd& f, int sign) const {
  if (sign != 1 && sign != -1) throw DomainError("solve sign must be +1 or -1");
  check_source(f);
  const int nt = lattice_.nt, nx = lattice_.nx;
  const double two_dt = 2.0 * lattice_.dt, inv2dx = 1.0 / (2.0 * lattice_.dx);
  const cplx im(0.0, mass_);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(2 * lattice_.size());
  auto row_nonzero = [&](int j) {
    for (int i = 0; i < 2 * nx; ++i)
      if (f[2 * j * nx + i] != cplx(0.0, 0.0)) return true;
    return false;
  };
  int start = -1;
  if (sign > 0) {
    for (int j = 0; j < nt && start < 0; ++j)
      if (row_nonzero(j)) start = j;
  } else {
    for (int j = nt - 1; j >= 0 && start < 0; --j)
      if (row_nonzero(j)) start = j;
  }
  if (start < 0) return psi;
  // rhs = gamma0 (w f - X - i m w psi_j) at row j, column i
  auto rhs = [&](int j, int i, cplx& r0, cplx& r1) {
    const int k = j * nx + i;
    const int kp = j * nx + (i + 1 == nx ? 0 : i + 1);
    const int km = j * nx + (i == 0 ? nx - 1 : i - 1);
    const double ek = e_[k];
    const cplx d0 = (e_[kp] * psi[2 * kp] - e_[km] * psi[2 * km]) * ek * inv2dx;
    const cplx d1 = (e_[kp] * psi[2 * kp + 1] - e_[km] * psi[2 * km + 1]) * ek * inv2dx;
    // X = gamma^1 d = (-d1, d0)
    const cplx x0 = -d1, x1 = d0;
    const cplx v0 = w_[k] * f[2 * k] - x0 - im * w_[k] * psi[2 * k];
    const cplx v1 = w_[k] * f[2 * k + 1] - x1 - im * w_[k] * psi[2 * k + 1];
    r0 = v1;
    r1 = v0;
  };
  if (sign > 0) {
    for (int j = std::max(start, 1); j + 1 < nt; ++j)
      for (int i = 0; i < nx; ++i) {
        cplx r0, r1;
        rhs(j, i, r0, r1);
        const int k = j * nx + i;
        const double cc_prev = c_[k] * c_[k - nx], cc_next = c_[k] * c_[k + nx];
        psi[2 * (k + nx)] = (cc_prev * psi[2 * (k - nx)] + two_dt * r0) / cc_next;
        psi[2 * (k + nx) + 1] = (cc_prev * psi[2 * (k - nx) + 1] + two_dt * r1) / cc_next;
      }
  } else {
    for (int j = std::min(start, nt - 2); j >= 1; --j)
      for (int i = 0; i < nx; ++i) {
        cplx r0, r1;
        rhs(j, i, r0, r1);
        const int k = j * nx + i;
        const double cc_prev = c_[k] * c_[k - nx], cc_next = c_[k] * c_[k + nx];
        psi[2 * (k - nx)] = (cc_next * psi[2 * (k + nx)] - two_dt * r0) / cc_prev;
        psi[2 * (k - nx) + 1] = (cc_next * psi[2 * (k + nx) + 1] - two_dt * r1) / cc_prev;
      }
  }
  return psi;
}

Eigen::VectorXcd DiracKernel::causal_propagator(const Eigen::VectorXcd& f) const {
  return solve(f, +1) - solve(f, -1);
}

Eigen::VectorXcd DiracKernel::apply_operator(const Eigen::VectorXcd& psi) const {
  if (psi.size() != 2 * lattice_.size()) throw DomainError("apply_operator: size mismatch");
  const int nt = lattice_.nt, nx = lattice_.nx;
  const double inv2dt = 1.0 / (2.0 * lattice_.dt), inv2dx = 1.0 / (2.0 * lattice_.dx);
  const cplx im(0.0, mass_);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (int j = 1; j + 1 < nt; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      const int kp = j * nx + (i + 1 == nx ? 0 : i + 1);
      const int km = j * nx + (i == 0 ? nx - 1 : i - 1);
      cplx tder[2], xder[2];
      for (int s = 0; s < 2; ++s) {
        tder[s] = c_[k] * (c_[k + nx] * psi[2 * (k + nx) + s] - c_[k - nx] * psi[2 * (k - nx) + s]) * inv2dt;
        xder[s] = e_[k] * (e_[kp] * psi[2 * kp + s] - e_[km] * psi[2 * km + s]) * inv2dx;
      }
      // gamma0 tder + gamma^1 xder + i m w psi
      out[2 * k] = (tder[1] - xder[1] + im * w_[k] * psi[2 * k]) / w_[k];
      out[2 * k + 1] = (tder[0] + xder[0] + im * w_[k] * psi[2 * k + 1]) / w_[k];
    }
  return out;
}

cplx DiracKernel::pairing_with(const Eigen::VectorXcd& sf, const Eigen::VectorXcd& h) const {
  cplx sum = 0.0;
  for (int k = 0; k < lattice_.size(); ++k) {
    sum += w_[k] * (std::conj(sf[2 * k]) * h[2 * k + 1] + std::conj(sf[2 * k + 1]) * h[2 * k]);
  }
  return lattice_.dt * lattice_.dx * sum;
}

cplx DiracKernel::pairing(const Eigen::VectorXcd& f, const Eigen::VectorXcd& h) const {
  return pairing_with(causal_propagator(f), h);
}

Eigen::VectorXcd DiracKernel::charge_conjugate(const Eigen::VectorXcd& f) {
  Eigen::VectorXcd out = f.conjugate();
  for (Eigen::Index k = 0; k < out.size(); k += 2) out[k] = -out[k];
  return out;
}

CARSpace CARSpace::build(const DiracKernel& kernel, std::vector<SpinorTestFunction> basis, bool normalize) {
  CARSpace sp;
  sp.basis = std::move(basis);
  const int n = sp.size();
  if (normalize) {
    for (auto& f : sp.basis) {
      const cplx ss = kernel.pairing(f.values, f.values);
      if (!(ss.real() > 0.0)) {
        throw DiagnosticError(fmt::format("s({0},{0}) = {1} is not positive; cannot normalize", f.label, ss.real()));
      }
      f.values /= std::sqrt(ss.real());
    }
  }
  for (const auto& f : sp.basis) sp.family.push_back(f.values);
  for (const auto& f : sp.basis) sp.family.push_back(DiracKernel::charge_conjugate(f.values));
  for (const auto& v : sp.family) sp.solutions.push_back(kernel.causal_propagator(v));
  sp.gram.resize(2 * n, 2 * n);
  for (int a = 0; a < 2 * n; ++a)
    for (int b = 0; b < 2 * n; ++b)
      sp.gram(a, b) = kernel.pairing_with(sp.solutions[static_cast<std::size_t>(a)], sp.family[static_cast<std::size_t>(b)]);
  return sp;
}

double CARSpace::hermiticity_defect() const { return (gram - gram.adjoint()).cwiseAbs().maxCoeff(); }

double CARSpace::conjugation_defect() const {
  const int n = size();
  double worst = 0.0;
  for (int a = 0; a < 2 * n; ++a)
    for (int b = 0; b < 2 * n; ++b) {
      const int ca = a < n ? a + n : a - n, cb = b < n ? b + n : b - n;
      worst = std::max(worst, std::abs(gram(ca, cb) - std::conj(gram(a, b))));
    }
  return worst;
}

double CARSpace::min_eigenvalue() const {
  const Eigen::MatrixXcd h = 0.5 * (gram + gram.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

std::vector<SparseC> majoranas(int modes) {
  const int dim = 1 << modes;
  std::vector<SparseC> out;
  for (int p = 0; p < modes; ++p) {
    for (int kind = 0; kind < 2; ++kind) {
      std::vector<Eigen::Triplet<cplx>> trip;
      for (int s = 0; s < dim; ++s) {
        const int below = __builtin_popcount(static_cast<unsigned>(s & ((1 << p) - 1)));
        const double sgn = below % 2 == 0 ? 1.0 : -1.0;
        const bool occupied = (s >> p) & 1;
        const int target = s ^ (1 << p);
        cplx amp = sgn;
        if (kind == 1) amp *= occupied ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
        trip.emplace_back(target, s, amp);
      }
      SparseC m(dim, dim);
      m.setFromTriplets(trip.begin(), trip.end());
      out.push_back(m);
    }
  }
  return out;
}

double max_entry(const SparseC& m) {
  double worst = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseC::InnerIterator it(m, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

}  // namespace

CARRep::CARRep(const CARSpace& space, double rank_tol, double negative_tol) {
  n_ = space.size();
  gram_ = space.gram;
  // C-real vectors u_i = f_i + C f_i, w_i = i (f_i - C f_i)
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(2 * n_, 2 * n_);
  for (int i = 0; i < n_; ++i) {
    r(i, i) = 1.0;
    r(n_ + i, i) = 1.0;
    r(i, n_ + i) = cplx(0.0, 1.0);
    r(n_ + i, n_ + i) = cplx(0.0, -1.0);
  }
  const Eigen::MatrixXcd gc = r.adjoint() * gram_ * r;
  Eigen::MatrixXd g = 0.5 * (gc.real() + gc.real().transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const auto& lam = es.eigenvalues();
  min_eigenvalue_ = lam.minCoeff();
  const double top = std::max(lam.maxCoeff(), 0.0);
  if (min_eigenvalue_ < -negative_tol * std::max(1.0, top)) {
    throw DiagnosticError(fmt::format(
        "s has eigenvalue {} below -{} (solver inconsistency)", min_eigenvalue_, negative_tol));
  }
  std::vector<int> keep;
  for (int k = 0; k < lam.size(); ++k)
    if (lam[k] > rank_tol * top) keep.push_back(k);
  rank_ = static_cast<int>(keep.size());
  if (rank_ == 0) throw DiagnosticError("CAR representation: s vanishes on the basis");
  e_.resize(2 * n_, rank_);
  for (int c = 0; c < rank_; ++c) {
    const int k = keep[static_cast<std::size_t>(c)];
    e_.col(c) = r * es.eigenvectors().col(k).cast<cplx>() / std::sqrt(lam[k]);
  }
  modes_ = (rank_ + 1) / 2;
  if (modes_ > 12) throw ConfigError(fmt::format("CAR representation needs {} modes, limit is 12", modes_));
  majorana_ = majoranas(modes_);
  for (auto& m : majorana_) m *= 1.0 / std::sqrt(2.0);
}

Eigen::VectorXcd CARRep::components(const Eigen::VectorXcd& coeffs) const {
  return e_.adjoint() * (gram_ * coeffs);
}

SparseC CARRep::field(const Eigen::VectorXcd& coeffs) const {
  const Eigen::VectorXcd alpha = components(coeffs);
  SparseC b(dimension(), dimension());
  for (int k = 0; k < rank_; ++k) b += alpha[k] * majorana_[static_cast<std::size_t>(k)];
  return b;
}

Eigen::VectorXcd CARRep::unit(int family_index) const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * n_);
  v[family_index] = 1.0;
  return v;
}

SparseC CARRep::field(int family_index) const { return field(unit(family_index)); }

Eigen::VectorXcd CARRep::conjugate(const Eigen::VectorXcd& coeffs) const {
  Eigen::VectorXcd out(2 * n_);
  out.head(n_) = coeffs.tail(n_).conjugate();
  out.tail(n_) = coeffs.head(n_).conjugate();
  return out;
}

double CARRep::car_defect() const {
  double worst = 0.0;
  SparseC id(dimension(), dimension());
  id.setIdentity();
  std::vector<SparseC> b;
  for (int a = 0; a < 2 * n_; ++a) b.push_back(field(a));
  for (int a = 0; a < 2 * n_; ++a) {
    const SparseC ba = SparseC(b[static_cast<std::size_t>(a)].adjoint());
    for (int c = 0; c < 2 * n_; ++c) {
      const SparseC& bc = b[static_cast<std::size_t>(c)];
      const SparseC ac = SparseC(ba * bc) + SparseC(bc * ba) - gram_(a, c) * id;
      worst = std::max(worst, max_entry(ac));
    }
  }
  return worst;
}

double CARRep::star_defect() const {
  double worst = 0.0;
  for (int a = 0; a < 2 * n_; ++a) {
    const SparseC d = field(conjugate(unit(a))) - SparseC(field(a).adjoint());
    worst = std::max(worst, max_entry(d));
  }
  return worst;
}

double operator_norm(const SparseC& m) {
  const Eigen::MatrixXcd dense(m);
  if (dense.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(dense);
  return svd.singularValues()[0];
}

AnticommutatorReport spacelike_anticommutator(const CARSpace& space, const CARRep& rep, int a, int b) {
  const int n = space.size();
  if (a < 0 || a >= n || b < 0 || b >= n) throw DomainError("basis index out of range");
  AnticommutatorReport r;
  r.anticommutator = std::abs(space.gram(a, b)) + std::abs(space.gram(n + a, b));
  const SparseC fa = rep.field(a), fb = rep.field(b);
  r.commutator_norm = operator_norm(SparseC(fa * fb) - SparseC(fb * fa));
  return r;
}

MatrixAlgebra local_algebra(const CARRep& rep, const CARSpace& space, const Region& o) {
  std::vector<Eigen::MatrixXcd> gens;
  for (int a = 0; a < space.size(); ++a)
    if (space.basis[static_cast<std::size_t>(a)].support().subset_of(o)) gens.emplace_back(rep.field(a));
  if (gens.empty()) {
    throw DiagnosticError(fmt::format("no spinor basis function is supported in region '{}'", o.descriptor()));
  }
  return MatrixAlgebra::generate(gens, rep.dimension());
}

DiracStrictCausalResult dirac_strict_causal_law(const DiracKernel& kernel, const CausalGraph& graph,
                                                const SpinorTestFunction& f1, const Region& o2,
                                                int reference_slice) {
  kernel.check_source(f1.values);
  const Lattice& lat = kernel.lattice();
  if (reference_slice < 0 || reference_slice + 1 >= lat.nt) throw DomainError("reference slice out of range");
  const Region s1 = f1.support();
  if (s1.empty()) throw DomainError("strict causal law: f1 vanishes");
  if (o2.empty() || !graph.causally_determined(s1, o2)) {
    throw DomainError("strict causal law: supp f1 is not causally determined by O2");
  }
  DiracStrictCausalResult res;
  res.reference_slice = reference_slice;
  if (s1.subset_of(o2)) {
    res.f2 = f1;
    res.identity_path = true;
    return res;
  }
  const Eigen::VectorXcd u = kernel.causal_propagator(f1.values);
  std::vector<char> nonzero(static_cast<std::size_t>(lat.size()));
  for (int k = 0; k < lat.size(); ++k)
    nonzero[static_cast<std::size_t>(k)] = u[2 * k] != cplx(0.0, 0.0) || u[2 * k + 1] != cplx(0.0, 0.0);
  const auto [lo, hi] = cutoff_band(lat, nonzero, o2);
  Eigen::VectorXcd chi_u = u;
  for (int j = 0; j < lat.nt; ++j) {
    const double chi = smoothstep(static_cast<double>(j - lo) / (hi - lo));
    chi_u.segment(2 * static_cast<Eigen::Index>(j) * lat.nx, 2 * lat.nx) *= chi;
  }
  res.f2.values = kernel.apply_operator(chi_u);
  for (int k = 0; k < lat.size(); ++k)
    if (!o2.contains(k)) res.f2.values.segment(2 * k, 2).setZero();
  res.f2.label = f1.label + " pushed into " + (o2.descriptor().empty() ? "O2" : o2.descriptor());
  res.band_lo = lo;
  res.band_hi = hi;
  const Eigen::VectorXcd u2 = kernel.causal_propagator(res.f2.values);
  const Eigen::Index off = 2 * static_cast<Eigen::Index>(reference_slice) * lat.nx, len = 4 * lat.nx;
  res.data_rel_error = (u2.segment(off, len) - u.segment(off, len)).norm() /
                       std::max(u.segment(off, len).norm(), 1e-300);
  return res;
}

}  // namespace covlab
