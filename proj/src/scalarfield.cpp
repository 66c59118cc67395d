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

#include "covlab/scalarfield.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include <fmt/format.h>

namespace covlab {

namespace {

double bump_profile(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q * q;
}

}  // namespace

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

std::pair<int, int> cutoff_band(const Lattice& lat, const std::vector<char>& nonzero, const Region& o2) {
  const int nt = lat.nt, nx = lat.nx;
  auto on = [&](int j, int i) { return nonzero[static_cast<std::size_t>(lat.index(j, i))] != 0; };
  auto touches = [&](int j, int i) {
    return on(j, i) || on(j - 1, i) || on(j + 1, i) || on(j, lat.wrap(i + 1)) || on(j, lat.wrap(i - 1));
  };
  std::vector<char> feasible(static_cast<std::size_t>(nt), 0);
  for (int j = 2; j <= nt - 3; ++j) {
    bool ok = true;
    for (int i = 0; i < nx && ok; ++i)
      if (touches(j, i) && !o2.contains(lat.index(j, i))) ok = false;
    feasible[static_cast<std::size_t>(j)] = ok;
  }
  int best_lo = -1, best_hi = -1;
  for (int j = 2; j <= nt - 3;) {
    if (!feasible[static_cast<std::size_t>(j)]) {
      ++j;
      continue;
    }
    int k = j;
    while (k + 1 <= nt - 3 && feasible[static_cast<std::size_t>(k + 1)]) ++k;
    if (k - j > best_hi - best_lo) {
      best_lo = j;
      best_hi = k;
    }
    j = k + 1;
  }
  if (best_lo < 0 || best_hi - best_lo < 1) {
    throw DiagnosticError(
        "strict causal law: no band of slices keeps the cutoff inside O2; refine the lattice or widen O2");
  }
  return {best_lo, best_hi};
}

Region TestFunction::support() const {
  Region r(static_cast<int>(values.size()));
  for (Eigen::Index k = 0; k < values.size(); ++k)
    if (values[k] != 0.0) r.insert(static_cast<int>(k));
  return r;
}

TestFunction make_bump(const Lattice& lattice, double t0, double x0, double rt, double rx,
                       double amplitude, std::string label) {
  if (!(rt > 0.0) || !(rx > 0.0)) throw DomainError("bump radii must be positive");
  TestFunction f;
  f.values = Eigen::VectorXd::Zero(lattice.size());
  for (int j = 0; j < lattice.nt; ++j) {
    const double pt = bump_profile((lattice.t(j) - t0) / rt);
    if (pt == 0.0) continue;
    for (int i = 0; i < lattice.nx; ++i) {
      const double px = bump_profile(lattice.circle_delta(x0, lattice.x(i)) / rx);
      f.values[lattice.index(j, i)] = amplitude * pt * px;
    }
  }
  f.label = label.empty() ? fmt::format("bump(t={:.3f},x={:.3f})", t0, x0) : std::move(label);
  return f;
}

double mass_fraction_outside(const Eigen::VectorXd& u, const Region& region) {
  if (u.size() != region.lattice_size()) throw DomainError("mass fraction: size mismatch");
  double total = 0.0, outside = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    total += std::abs(u[k]);
    if (!region.contains(static_cast<int>(k))) outside += std::abs(u[k]);
  }
  return total > 0.0 ? outside / total : 0.0;
}

ScalarKernel::ScalarKernel(const MetricModel& model, const Lattice& lattice, double mass)
    : lattice_(lattice), mass_(mass) {
  if (!(mass >= 0.0)) throw ConfigError(fmt::format("mass must be >= 0, got {}", mass));
  const int n = lattice.size();
  w_.resize(n);
  ct_ = Eigen::VectorXd::Zero(n);
  dx_.resize(n);
  for (int j = 0; j < lattice.nt; ++j) {
    const double t = lattice.t(j);
    for (int i = 0; i < lattice.nx; ++i) {
      const double x = lattice.x(i);
      const int k = lattice.index(j, i);
      w_[k] = std::sqrt(model.lapse(t, x)) * model.scale(t, x);
      if (j + 1 < lattice.nt) {
        const double th = t + 0.5 * lattice.dt;
        ct_[k] = model.scale(th, x) / std::sqrt(model.lapse(th, x));
      }
      const double xh = x + 0.5 * lattice.dx;
      dx_[k] = std::sqrt(model.lapse(t, xh)) / model.scale(t, xh);
    }
  }
}

void ScalarKernel::check_source(const Eigen::VectorXd& f) const {
  if (f.size() != lattice_.size()) {
    throw DomainError(fmt::format("source has {} entries, lattice has {}", f.size(), lattice_.size()));
  }
  for (int j = 0; j < lattice_.nt; ++j) {
    if (j >= 2 && j <= lattice_.nt - 3) continue;
    for (int i = 0; i < lattice_.nx; ++i) {
      if (f[lattice_.index(j, i)] != 0.0) {
        throw DomainError(fmt::format(
            "source support touches the lattice time boundary at slice {} (needs 2-slice margin)", j));
      }
    }
  }
}

Eigen::VectorXd ScalarKernel::solve_retarded(const Eigen::VectorXd& f) const {
  check_source(f);
  const int nt = lattice_.nt, nx = lattice_.nx;
  const double dt2 = lattice_.dt * lattice_.dt, idx2 = 1.0 / (lattice_.dx * lattice_.dx);
  const double m2 = mass_ * mass_;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(lattice_.size());
  int first = nt;
  for (int j = 0; j < nt && first == nt; ++j)
    for (int i = 0; i < nx; ++i)
      if (f[j * nx + i] != 0.0) {
        first = j;
        break;
      }
  for (int j = std::max(first, 1); j + 1 < nt; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      const int ip = j * nx + (i + 1 == nx ? 0 : i + 1);
      const int im = j * nx + (i == 0 ? nx - 1 : i - 1);
      const double xs = (dx_[k] * (u[ip] - u[k]) - dx_[im] * (u[k] - u[im])) * idx2;
      const double r = w_[k] * f[k] + xs - m2 * w_[k] * u[k];
      const double cm = ct_[k - nx], cp = ct_[k];
      u[k + nx] = u[k] + (dt2 * r + cm * (u[k] - u[k - nx])) / cp;
    }
  }
  return u;
}

Eigen::VectorXd ScalarKernel::solve_advanced(const Eigen::VectorXd& f) const {
  check_source(f);
  const int nt = lattice_.nt, nx = lattice_.nx;
  const double dt2 = lattice_.dt * lattice_.dt, idx2 = 1.0 / (lattice_.dx * lattice_.dx);
  const double m2 = mass_ * mass_;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(lattice_.size());
  int last = -1;
  for (int j = nt - 1; j >= 0 && last < 0; --j)
    for (int i = 0; i < nx; ++i)
      if (f[j * nx + i] != 0.0) {
        last = j;
        break;
      }
  if (last < 0) return u;
  for (int j = std::min(last, nt - 2); j >= 1; --j) {
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      const int ip = j * nx + (i + 1 == nx ? 0 : i + 1);
      const int im = j * nx + (i == 0 ? nx - 1 : i - 1);
      const double xs = (dx_[k] * (u[ip] - u[k]) - dx_[im] * (u[k] - u[im])) * idx2;
      const double r = w_[k] * f[k] + xs - m2 * w_[k] * u[k];
      const double cm = ct_[k - nx], cp = ct_[k];
      u[k - nx] = u[k] + (dt2 * r + cp * (u[k] - u[k + nx])) / cm;
    }
  }
  return u;
}

Eigen::VectorXd ScalarKernel::causal_propagator(const Eigen::VectorXd& f) const {
  return solve_retarded(f) - solve_advanced(f);
}

Eigen::VectorXd ScalarKernel::apply_operator(const Eigen::VectorXd& u) const {
  if (u.size() != lattice_.size()) throw DomainError("apply_operator: size mismatch");
  const int nt = lattice_.nt, nx = lattice_.nx;
  const double idt2 = 1.0 / (lattice_.dt * lattice_.dt), idx2 = 1.0 / (lattice_.dx * lattice_.dx);
  const double m2 = mass_ * mass_;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(lattice_.size());
  for (int j = 1; j + 1 < nt; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      const int ip = j * nx + (i + 1 == nx ? 0 : i + 1);
      const int im = j * nx + (i == 0 ? nx - 1 : i - 1);
      const double ts = (ct_[k] * (u[k + nx] - u[k]) - ct_[k - nx] * (u[k] - u[k - nx])) * idt2;
      const double xs = (dx_[k] * (u[ip] - u[k]) - dx_[im] * (u[k] - u[im])) * idx2;
      out[k] = (ts - xs) / w_[k] + m2 * u[k];
    }
  }
  return out;
}

double ScalarKernel::symplectic_pairing(const Eigen::VectorXd& f, const Eigen::VectorXd& h) const {
  return symplectic_pairing_with(f, causal_propagator(h));
}

double ScalarKernel::symplectic_pairing_with(const Eigen::VectorXd& f, const Eigen::VectorXd& eh) const {
  return lattice_.dt * lattice_.dx * f.cwiseProduct(w_).dot(eh);
}

double ScalarKernel::norm(const Eigen::VectorXd& f) const {
  return std::sqrt(lattice_.dt * lattice_.dx * f.cwiseProduct(f).dot(w_));
}

Eigen::VectorXd ScalarKernel::cauchy_data(const Eigen::VectorXd& u, int j) const {
  if (j < 0 || j + 1 >= lattice_.nt) throw DomainError(fmt::format("no Cauchy data on slice {}", j));
  const int nx = lattice_.nx;
  Eigen::VectorXd out(2 * nx);
  for (int i = 0; i < nx; ++i) {
    out[i] = u[j * nx + i];
    out[nx + i] = (u[(j + 1) * nx + i] - u[j * nx + i]) / lattice_.dt;
  }
  return out;
}

SymplecticSpace SymplecticSpace::build(const ScalarKernel& kernel, std::vector<TestFunction> basis) {
  SymplecticSpace s;
  s.basis = std::move(basis);
  const int n = static_cast<int>(s.basis.size());
  for (const auto& f : s.basis) s.solutions.push_back(kernel.causal_propagator(f.values));
  s.kappa = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      s.kappa(a, b) = kernel.symplectic_pairing_with(s.basis[static_cast<std::size_t>(a)].values,
                                                     s.solutions[static_cast<std::size_t>(b)]);
  return s;
}

double SymplecticSpace::antisymmetry_defect() const {
  return (kappa + kappa.transpose()).cwiseAbs().maxCoeff();
}

std::pair<int, int> SymplecticSpace::ranks(const ScalarKernel& kernel, int slice, double tol) const {
  const int n = static_cast<int>(solutions.size());
  if (n == 0) return {0, 0};
  const int nx = kernel.lattice().nx;
  Eigen::MatrixXd cd(2 * nx, n), full(kernel.lattice().size(), n);
  for (int a = 0; a < n; ++a) {
    cd.col(a) = kernel.cauchy_data(solutions[static_cast<std::size_t>(a)], slice);
    full.col(a) = solutions[static_cast<std::size_t>(a)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> q1(cd), q2(full);
  q1.setThreshold(tol);
  q2.setThreshold(tol);
  return {static_cast<int>(q1.rank()), static_cast<int>(q2.rank())};
}

QuasifreeState QuasifreeState::build(const ScalarKernel& kernel, const MetricModel& model,
                                     const SymplecticSpace& space, int reference_slice) {
  const Lattice& lat = kernel.lattice();
  if (!(kernel.mass() > 0.0)) {
    throw ConfigError("quasifree ground state needs m > 0 (the k = 0 mode has no ground state at m = 0)");
  }
  const int j0 = reference_slice;
  if (j0 < 0 || j0 + 1 >= lat.nt) throw ConfigError(fmt::format("bad reference slice {}", j0));
  const auto band = model.initial_flat_band();
  if (!band || band->t_lo > lat.t(j0) + 1e-12 || band->t_hi < lat.t(j0 + 1) - 1e-12) {
    throw ConfigError(fmt::format(
        "reference slices {}, {} are not inside a flat initial band", j0, j0 + 1));
  }
  for (const auto& f : space.basis) {
    const auto [lo, hi] = f.support().slice_range(lat);
    if (lo >= 0 && lo < j0 + 2) {
      throw DomainError(fmt::format("test function '{}' reaches the reference slices", f.label));
    }
  }
  QuasifreeState st;
  st.j0_ = j0;
  st.nx_ = lat.nx;
  st.dt_ = lat.dt;
  st.dx_ = lat.dx;
  st.a0_ = band->scale;
  st.mass_ = kernel.mass();
  st.norm_ = 2.0 * st.a0_ * lat.dx / (lat.dt * lat.nx);
  st.omega_.resize(lat.nx);
  st.sin_theta_.resize(lat.nx);
  for (int k = 0; k < lat.nx; ++k) {
    const double sk = std::sin(std::numbers::pi * k / lat.nx);
    const double big = std::sqrt(4.0 * sk * sk / (st.a0_ * st.a0_ * lat.dx * lat.dx) +
                                 st.mass_ * st.mass_);
    const double arg = 0.5 * big * lat.dt;
    if (arg >= 1.0) throw ConfigError("reference band violates the leapfrog stability bound");
    const double theta = 2.0 * std::asin(arg);
    st.omega_[k] = theta / lat.dt;
    st.sin_theta_[k] = std::sin(theta);
  }
  const int n = static_cast<int>(space.solutions.size());
  st.psi_.resize(lat.nx, n);
  for (int a = 0; a < n; ++a) st.psi_.col(a) = st.one_particle(space.solutions[static_cast<std::size_t>(a)]);
  st.w_ = st.psi_.adjoint() * st.psi_;
  return st;
}

Eigen::VectorXcd QuasifreeState::one_particle(const Eigen::VectorXd& ef) const {
  const int nx = nx_;
  Eigen::VectorXcd out(nx);
  const cplx iunit(0.0, 1.0);
  for (int k = 0; k < nx; ++k) {
    cplx u0 = 0.0, u1 = 0.0;
    for (int i = 0; i < nx; ++i) {
      // exact phase reduction keeps the DFT accurate for large Nx
      const cplx ph = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(k) * i) % nx) / nx);
      u0 += ef[j0_ * nx + i] * ph;
      u1 += ef[(j0_ + 1) * nx + i] * ph;
    }
    const double theta = omega_[k] * dt_;
    const cplx b = (u1 - u0 * std::polar(1.0, -theta)) / (2.0 * iunit * sin_theta_[k]);
    out[k] = std::sqrt(norm_ * sin_theta_[k]) * b;
  }
  return out;
}

cplx QuasifreeState::two_point(const Eigen::VectorXd& ef, const Eigen::VectorXd& eh) const {
  return one_particle(ef).dot(one_particle(eh));
}

Eigen::VectorXd QuasifreeState::continuum_frequencies() const {
  Eigen::VectorXd out(nx_);
  const double length = nx_ * dx_;
  for (int k = 0; k < nx_; ++k) {
    const int signed_k = k <= nx_ / 2 ? k : k - nx_;
    const double kp = 2.0 * std::numbers::pi * signed_k / length;
    out[k] = std::sqrt(kp * kp / (a0_ * a0_) + mass_ * mass_);
  }
  return out;
}

double QuasifreeState::ccr_defect(const Eigen::MatrixXd& kappa) const {
  const Eigen::MatrixXcd d = w_ - w_.transpose() - cplx(0.0, 1.0) * kappa.cast<cplx>();
  return d.cwiseAbs().maxCoeff();
}

double QuasifreeState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

FockSpace::FockSpace(int modes, int cutoff) : modes_(modes), cutoff_(cutoff) {
  if (modes < 1 || cutoff < 1) throw ConfigError("Fock space needs >= 1 mode and cutoff >= 1");
  // states ordered by total occupation, then lexicographically
  std::vector<int> occ(static_cast<std::size_t>(modes), 0);
  for (int total = 0; total <= cutoff; ++total) {
    std::vector<std::vector<int>> level;
    std::function<void(int, int)> fill = [&](int mode, int left) {
      if (mode == modes - 1) {
        occ[static_cast<std::size_t>(mode)] = left;
        level.push_back(occ);
        return;
      }
      for (int n = left; n >= 0; --n) {
        occ[static_cast<std::size_t>(mode)] = n;
        fill(mode + 1, left - n);
      }
    };
    fill(0, total);
    for (auto& s : level) states_.push_back(std::move(s));
  }
  std::map<std::vector<int>, int> lookup;
  for (std::size_t s = 0; s < states_.size(); ++s) lookup[states_[s]] = static_cast<int>(s);
  const int dim = dimension();
  for (int k = 0; k < modes; ++k) {
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int s = 0; s < dim; ++s) {
      const auto& st = states_[static_cast<std::size_t>(s)];
      const int n = st[static_cast<std::size_t>(k)];
      if (n == 0) continue;
      auto lowered = st;
      lowered[static_cast<std::size_t>(k)] -= 1;
      trip.emplace_back(lookup.at(lowered), s, std::sqrt(static_cast<double>(n)));
    }
    SparseC a(dim, dim);
    a.setFromTriplets(trip.begin(), trip.end());
    lower_.push_back(a);
    raise_.push_back(SparseC(a.adjoint()));
  }
}

int FockSpace::total(int state) const {
  int t = 0;
  for (int n : states_[static_cast<std::size_t>(state)]) t += n;
  return t;
}

SparseC FockSpace::projector_below(int n) const {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int s = 0; s < dimension(); ++s)
    if (total(s) <= n) trip.emplace_back(s, s, 1.0);
  SparseC p(dimension(), dimension());
  p.setFromTriplets(trip.begin(), trip.end());
  return p;
}

Eigen::VectorXcd FockSpace::vacuum() const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dimension());
  v[0] = 1.0;
  return v;
}

namespace {

int rank_of(const Eigen::MatrixXcd& psi, double rank_tol, Eigen::MatrixXcd* u_out) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(psi, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int r = 0;
  if (s.size() > 0 && s[0] > 0.0)
    while (r < s.size() && s[r] > rank_tol * s[0]) ++r;
  if (u_out) *u_out = svd.matrixU().leftCols(r);
  return r;
}

}  // namespace

FockRep::FockRep(const Eigen::MatrixXcd& psi, int cutoff, int max_modes, double rank_tol)
    : space_([&] {
        const int r = rank_of(psi, rank_tol, nullptr);
        if (r == 0) throw DiagnosticError("Fock representation: all one-particle vectors vanish");
        if (r > max_modes) {
          throw ConfigError(fmt::format("Fock representation needs {} modes, limit is {}", r, max_modes));
        }
        return FockSpace(r, cutoff);
      }()) {
  rank_of(psi, rank_tol, &basis_);
  g_ = basis_.adjoint() * psi;
  for (Eigen::Index a = 0; a < psi.cols(); ++a) phi_.push_back(field_of(psi.col(a)));
}

SparseC FockRep::field_of(const Eigen::VectorXcd& psi) const {
  const Eigen::VectorXcd g = basis_.adjoint() * psi;
  SparseC phi(space_.dimension(), space_.dimension());
  for (int k = 0; k < modes(); ++k) {
    phi += std::conj(g[k]) * space_.annihilation(k) + g[k] * space_.creation(k);
  }
  phi.prune(cplx(0.0, 0.0));
  return phi;
}

Eigen::MatrixXcd FockRep::weyl(int index) const {
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(field(index));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  const Eigen::VectorXcd phases = (cplx(0.0, 1.0) * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double FockRep::ccr_defect(int a, int b, double kappa_ab) const {
  const SparseC& fa = field(a);
  const SparseC& fb = field(b);
  const int dim = space_.dimension();
  SparseC id(dim, dim);
  id.setIdentity();
  const SparseC comm = SparseC(fa * fb) - SparseC(fb * fa) - cplx(0.0, kappa_ab) * id;
  const SparseC cp = comm * space_.projector_below(space_.cutoff() - 1);
  double worst = 0.0;
  for (int k = 0; k < cp.outerSize(); ++k)
    for (SparseC::InnerIterator it(cp, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

double FockRep::hermiticity_defect(int index) const {
  const SparseC d = field(index) - SparseC(field(index).adjoint());
  double worst = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseC::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

MatrixAlgebra MatrixAlgebra::generate(const std::vector<Eigen::MatrixXcd>& generators, int dim,
                                      double tol, bool unital) {
  MatrixAlgebra alg;
  alg.n_ = dim;
  const Eigen::Index n2 = static_cast<Eigen::Index>(dim) * dim;
  std::vector<Eigen::VectorXcd> basis;
  // scale: product of the factor norms of m.
  auto add = [&](const Eigen::MatrixXcd& m, double scale) -> bool {
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(m.data(), n2);
    const double n0 = v.norm();
    if (n0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(v) * b;
    const double n1 = v.norm();
    if (n1 <= tol * std::max(n0, scale)) return false;
    basis.push_back(v / n1);
    return true;
  };
  std::vector<Eigen::MatrixXcd> gens;
  std::vector<double> norms;
  for (const auto& g : generators) {
    if (g.rows() != dim || g.cols() != dim) throw DomainError("generator has wrong size");
    gens.push_back(g);
    gens.push_back(g.adjoint());
    norms.insert(norms.end(), 2, g.norm());
  }
  if (unital) {
    add(Eigen::MatrixXcd::Identity(dim, dim), 0.0);
  } else {
    for (std::size_t k = 0; k < gens.size(); ++k) add(gens[k], 0.0);
  }
  std::size_t next = 0;
  while (next < basis.size() && static_cast<Eigen::Index>(basis.size()) < n2) {
    const Eigen::MatrixXcd word = Eigen::Map<const Eigen::MatrixXcd>(basis[next].data(), dim, dim);
    ++next;
    for (std::size_t k = 0; k < gens.size(); ++k) add(gens[k] * word, norms[k]);
  }
  alg.basis_.resize(n2, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) alg.basis_.col(static_cast<Eigen::Index>(k)) = basis[k];
  return alg;
}

bool MatrixAlgebra::contains(const Eigen::MatrixXcd& m, double tol) const {
  if (m.rows() != n_ || m.cols() != n_) return false;
  const Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(m.data(), static_cast<Eigen::Index>(n_) * n_);
  const Eigen::VectorXcd r = v - basis_ * (basis_.adjoint() * v);
  return r.norm() <= tol * std::max(1.0, v.norm());
}

bool MatrixAlgebra::subset_of(const MatrixAlgebra& other, double tol) const {
  for (int k = 0; k < dimension(); ++k)
    if (!other.contains(element(k), tol)) return false;
  return true;
}

Eigen::MatrixXcd MatrixAlgebra::element(int k) const {
  return Eigen::Map<const Eigen::MatrixXcd>(basis_.col(k).data(), n_, n_);
}

int MatrixAlgebra::orbit_dimension(const Eigen::VectorXcd& v, double tol) const {
  Eigen::MatrixXcd orbit(n_, dimension());
  for (int k = 0; k < dimension(); ++k) orbit.col(k) = element(k) * v;
  return rank_of(orbit, tol, nullptr);
}

MatrixAlgebra local_algebra(const FockRep& rep, const std::vector<TestFunction>& basis,
                            const Region& o) {
  if (static_cast<int>(basis.size()) != rep.field_count()) {
    throw DomainError("local_algebra: basis and representation disagree in size");
  }
  std::vector<Eigen::MatrixXcd> gens;
  for (std::size_t a = 0; a < basis.size(); ++a) {
    if (basis[a].support().subset_of(o)) gens.emplace_back(rep.field(static_cast<int>(a)));
  }
  if (gens.empty()) {
    throw DiagnosticError(fmt::format("no basis function is supported in region '{}'", o.descriptor()));
  }
  return MatrixAlgebra::generate(gens, rep.space().dimension());
}

StrictCausalResult strict_causal_law(const ScalarKernel& kernel, const CausalGraph& graph,
                                     const TestFunction& f1, const Region& o2, int reference_slice) {
  kernel.check_source(f1.values);
  const Lattice& lat = kernel.lattice();
  const Region s1 = f1.support();
  if (s1.empty()) throw DomainError("strict causal law: f1 vanishes");
  if (o2.empty() || !graph.causally_determined(s1, o2)) {
    throw DomainError("strict causal law: supp f1 is not causally determined by O2");
  }
  StrictCausalResult res;
  res.reference_slice = reference_slice;
  const Eigen::VectorXd u = kernel.causal_propagator(f1.values);
  if (s1.subset_of(o2)) {
    res.f2 = f1;
    res.identity_path = true;
    return res;
  }
  const int nt = lat.nt, nx = lat.nx;
  std::vector<char> nonzero(static_cast<std::size_t>(lat.size()));
  for (int k = 0; k < lat.size(); ++k) nonzero[static_cast<std::size_t>(k)] = u[k] != 0.0;
  const auto [best_lo, best_hi] = cutoff_band(lat, nonzero, o2);
  Eigen::VectorXd chi_u = u;
  for (int j = 0; j < nt; ++j) {
    const double chi = smoothstep(static_cast<double>(j - best_lo) / (best_hi - best_lo));
    chi_u.segment(static_cast<Eigen::Index>(j) * nx, nx) *= chi;
  }
  res.f2.values = kernel.apply_operator(chi_u);
  // Outside the band L(chi u) = chi L(E f1), which is rounding residue of zero.
  for (Eigen::Index k = 0; k < res.f2.values.size(); ++k)
    if (!o2.contains(static_cast<int>(k))) res.f2.values[k] = 0.0;
  res.f2.label = f1.label + " pushed into " + (o2.descriptor().empty() ? "O2" : o2.descriptor());
  res.band_lo = best_lo;
  res.band_hi = best_hi;
  const Eigen::VectorXd cd1 = kernel.cauchy_data(u, reference_slice);
  const Eigen::VectorXd cd2 = kernel.cauchy_data(kernel.causal_propagator(res.f2.values), reference_slice);
  res.cauchy_rel_error = (cd2 - cd1).norm() / std::max(cd1.norm(), 1e-300);
  return res;
}

}  // namespace covlab
