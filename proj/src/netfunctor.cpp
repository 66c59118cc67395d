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

#include "covlab/netfunctor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "covlab/diracfield.hpp"

namespace covlab {

namespace {

bool same_grid(const Lattice& a, const Lattice& b) {
  return a.nx == b.nx && std::abs(a.dx - b.dx) <= 1e-12 * a.dx && std::abs(a.dt - b.dt) <= 1e-12 * a.dt;
}

bool wraps_slice(const Region& o, const Lattice& lat) {
  for (int j = 0; j < lat.nt; ++j) {
    int n = 0;
    for (int i = 0; i < lat.nx; ++i) n += o.contains(lat.index(j, i)) ? 1 : 0;
    if (n == lat.nx) return true;
  }
  return false;
}

Region support_of(const Eigen::VectorXcd& f, int components) {
  Region r(static_cast<int>(f.size() / components));
  for (Eigen::Index k = 0; k < f.size(); ++k)
    if (f[k] != cplx(0.0, 0.0)) r.insert(static_cast<int>(k / components));
  return r;
}

}  // namespace

std::shared_ptr<const SpacetimeObject> SpacetimeObject::make(std::string name, const MetricModel& model,
                                                             const Lattice& lattice) {
  return make(std::move(name), model, lattice, std::make_shared<const CausalGraph>(model, lattice));
}

std::shared_ptr<const SpacetimeObject> SpacetimeObject::make(std::string name, const MetricModel& model,
                                                             const Lattice& lattice,
                                                             std::shared_ptr<const CausalGraph> graph) {
  if (name.empty()) throw ConfigError("spacetime object needs a name");
  if (!graph) graph = std::make_shared<const CausalGraph>(model, lattice);
  return std::make_shared<const SpacetimeObject>(
      SpacetimeObject{std::move(name), std::make_shared<const MetricModel>(model), lattice, std::move(graph)});
}

LocalIso LocalIso::trivial() { return LocalIso{}; }

LocalIso LocalIso::identity(const std::shared_ptr<const SpacetimeObject>& m) {
  if (!m) throw ConfigError("identity: null object");
  LocalIso id;
  id.trivial_ = false;
  id.source_name_ = id.target_name_ = m->name;
  id.source_lattice_ = id.target_lattice_ = m->lattice;
  id.l_ini_ = Region::full(m->lattice);
  id.l_fin_ = id.l_ini_;
  return id;
}

LocalIso LocalIso::translation(const std::shared_ptr<const SpacetimeObject>& source,
                               const std::shared_ptr<const SpacetimeObject>& target, const Region& l_ini,
                               int dj, int di, int frame_sign, double tol) {
  if (!source || !target) throw ConfigError("translation: null object");
  const Lattice& l1 = source->lattice;
  const Lattice& l2 = target->lattice;
  if (!same_grid(l1, l2)) throw ConfigError("translation: lattices differ in spacing or Nx");
  if (frame_sign != 1 && frame_sign != -1) throw ConfigError(fmt::format("frame sign must be +-1, got {}", frame_sign));
  if (l_ini.lattice_size() != l1.size() || l_ini.empty()) {
    throw DomainError("translation: initial localization is empty or sized for another lattice");
  }
  if (wraps_slice(l_ini, l1)) {
    throw DomainError("translation: initial localization contains a full slice (not simply connected)");
  }
  const CausalGraph& g = *source->graph;
  if (!(g.future(l_ini) & g.past(l_ini)).subset_of(l_ini)) {
    throw DomainError(fmt::format("translation: region '{}' is not causally convex", l_ini.descriptor()));
  }

  LocalIso m;
  m.trivial_ = false;
  m.source_name_ = source->name;
  m.target_name_ = target->name;
  m.source_lattice_ = l1;
  m.target_lattice_ = l2;
  m.dj_ = dj;
  m.di_ = l1.wrap(di);
  m.sign_ = frame_sign;
  m.l_ini_ = l_ini;
  m.l_fin_ = Region(l2.size());
  const MetricModel& g1 = *source->model;
  const MetricModel& g2 = *target->model;
  double defect = 0.0;
  for (int k : l_ini.indices()) {
    const Site s = l1.site(k);
    const Site t = m.map(s);
    if (!l2.contains_slice(t.j)) {
      throw DomainError(fmt::format("translation: site (j={}, i={}) leaves the target lattice", s.j, s.i));
    }
    m.l_fin_.insert(l2.index(t));
    const double t1 = l1.t(s.j), x1 = l1.x(s.i), t2 = l2.t(t.j), x2 = l2.x(t.i);
    defect = std::max({defect, std::abs(g2.lapse(t2, x2) - g1.lapse(t1, x1)),
                       std::abs(g2.scale(t2, x2) - g1.scale(t1, x1))});
  }
  m.metric_defect_ = defect;
  if (defect > tol) {
    throw DomainError(fmt::format("translation: metric not pushed forward (defect {:.3e} > {:.1e})", defect, tol));
  }
  m.l_ini_.describe(l_ini.descriptor());
  m.l_fin_.describe(l_ini.descriptor().empty() ? std::string{} : "theta(" + l_ini.descriptor() + ")");
  return m;
}

Site LocalIso::map(Site s) const { return {s.j + dj_, target_lattice_.wrap(s.i + di_)}; }

Site LocalIso::inverse(Site s) const { return {s.j - dj_, source_lattice_.wrap(s.i - di_)}; }

Region LocalIso::push(const Region& o) const {
  if (trivial_) throw DomainError("push through the trivial morphism");
  if (!o.subset_of(l_ini_)) throw DomainError("push: region is not inside the initial localization");
  Region r(target_lattice_.size());
  for (int k : o.indices()) r.insert(target_lattice_.index(map(source_lattice_.site(k))));
  r.describe(o.descriptor().empty() ? std::string{} : "theta(" + o.descriptor() + ")");
  return r;
}

Region LocalIso::pull(const Region& o) const {
  if (trivial_) throw DomainError("pull through the trivial morphism");
  if (!o.subset_of(l_fin_)) throw DomainError("pull: region is not inside the final localization");
  Region r(source_lattice_.size());
  for (int k : o.indices()) r.insert(source_lattice_.index(inverse(target_lattice_.site(k))));
  return r;
}

Eigen::VectorXcd LocalIso::transport(const Eigen::VectorXcd& f, int components) const {
  if (trivial_) throw DomainError("transport through the trivial morphism");
  if (components != 1 && components != 2) throw DomainError("transport: components must be 1 or 2");
  if (f.size() != static_cast<Eigen::Index>(components) * source_lattice_.size()) {
    throw DomainError("transport: function sized for another lattice");
  }
  const Region supp = support_of(f, components);
  if (!supp.subset_of(l_ini_)) throw DomainError("transport: function not localized in the initial region");
  const double s = components == 2 ? static_cast<double>(sign_) : 1.0;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(components) * target_lattice_.size());
  for (int k : supp.indices()) {
    const int t = target_lattice_.index(map(source_lattice_.site(k)));
    for (int c = 0; c < components; ++c) out[components * t + c] = s * f[components * k + c];
  }
  return out;
}

bool operator==(const LocalIso& a, const LocalIso& b) {
  if (a.trivial_ || b.trivial_) return a.trivial_ == b.trivial_;
  return a.source_name_ == b.source_name_ && a.target_name_ == b.target_name_ && a.dj_ == b.dj_ &&
         a.di_ == b.di_ && a.sign_ == b.sign_ && a.l_ini_ == b.l_ini_ && a.l_fin_ == b.l_fin_;
}

LocalIso compose(const LocalIso& m2, const LocalIso& m1) {
  if (m1.trivial_ || m2.trivial_) return LocalIso::trivial();
  if (m1.target_name_ != m2.source_name_) {
    throw DomainError(fmt::format("compose: target '{}' of the first map is not the source '{}' of the second",
                                  m1.target_name_, m2.source_name_));
  }
  const Region mid = m2.l_ini_ & m1.l_fin_;
  if (mid.empty()) return LocalIso::trivial();
  LocalIso c;
  c.trivial_ = false;
  c.source_name_ = m1.source_name_;
  c.target_name_ = m2.target_name_;
  c.source_lattice_ = m1.source_lattice_;
  c.target_lattice_ = m2.target_lattice_;
  c.dj_ = m1.dj_ + m2.dj_;
  c.di_ = c.target_lattice_.wrap(m1.di_ + m2.di_);
  c.sign_ = m1.sign_ * m2.sign_;
  c.metric_defect_ = std::max(m1.metric_defect_, m2.metric_defect_);
  c.l_ini_ = m1.pull(mid);
  c.l_fin_ = m2.push(mid);
  return c;
}

std::string describe(const LocalIso& m) {
  if (m.is_trivial()) return "0";
  return fmt::format("{} -> {}: shift (dj={}, di={}), frame {:+d}, |l_ini|={}, metric defect {:.2e}",
                     m.source_name(), m.target_name(), m.time_shift(), m.space_shift(), m.frame_sign(),
                     m.initial().count(), m.metric_defect());
}

std::string to_string(Theory t) { return t == Theory::Dirac ? "dirac" : "scalar"; }

Theory theory_from_string(const std::string& s) {
  if (s == "scalar") return Theory::Scalar;
  if (s == "dirac") return Theory::Dirac;
  throw ConfigError(fmt::format("unknown theory '{}' (expected scalar or dirac)", s));
}

Eigen::MatrixXcd pairing_gram(const SpacetimeObject& m, const TheorySpec& theory,
                              const std::vector<Eigen::VectorXcd>& fs) {
  const auto n = static_cast<Eigen::Index>(fs.size());
  Eigen::MatrixXcd g(n, n);
  if (theory.kind == Theory::Scalar) {
    const ScalarKernel kernel(*m.model, m.lattice, theory.mass);
    std::vector<Eigen::VectorXd> re, eh;
    for (const auto& f : fs) {
      if (f.imag().cwiseAbs().maxCoeff() > 0.0) throw DomainError("scalar test functions must be real");
      re.emplace_back(f.real());
      eh.emplace_back(kernel.causal_propagator(re.back()));
    }
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        g(a, b) = kernel.symplectic_pairing_with(re[static_cast<std::size_t>(a)], eh[static_cast<std::size_t>(b)]);
  } else {
    const DiracKernel kernel(*m.model, m.lattice, theory.mass);
    std::vector<Eigen::VectorXcd> sf;
    for (const auto& f : fs) sf.emplace_back(kernel.causal_propagator(f));
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        g(a, b) = kernel.pairing_with(sf[static_cast<std::size_t>(a)], fs[static_cast<std::size_t>(b)]);
  }
  return g;
}

FieldNet FieldNet::build(std::shared_ptr<const SpacetimeObject> object, const TheorySpec& theory,
                         std::vector<Eigen::VectorXcd> basis) {
  if (!object) throw ConfigError("field net: null object");
  if (basis.empty()) throw ConfigError("field net: empty generator basis");
  FieldNet net;
  net.object_ = std::move(object);
  net.theory_ = theory;
  const Lattice& lat = net.object_->lattice;
  const int comp = theory.components();
  for (const auto& f : basis) {
    if (f.size() != static_cast<Eigen::Index>(comp) * lat.size()) {
      throw ConfigError("field net: basis function sized for another lattice or theory");
    }
    net.supports_.push_back(support_of(f, comp));
  }
  net.basis_ = std::move(basis);
  const int n = net.size();
  if (theory.kind == Theory::Scalar) {
    const ScalarKernel kernel(*net.object_->model, lat, theory.mass);
    std::vector<TestFunction> fs;
    for (int k = 0; k < n; ++k) fs.push_back({net.basis_[static_cast<std::size_t>(k)].real(), fmt::format("g{}", k)});
    const SymplecticSpace space = SymplecticSpace::build(kernel, fs);
    net.gram_ = space.kappa.cast<cplx>();
    const QuasifreeState state = QuasifreeState::build(kernel, *net.object_->model, space);
    const FockRep rep(state.psi(), theory.fock_cutoff);
    for (int k = 0; k < n; ++k) net.fields_.emplace_back(Eigen::MatrixXcd(rep.field(k)));
  } else {
    const DiracKernel kernel(*net.object_->model, lat, theory.mass);
    std::vector<SpinorTestFunction> fs;
    for (int k = 0; k < n; ++k) fs.push_back({net.basis_[static_cast<std::size_t>(k)], fmt::format("g{}", k)});
    const CARSpace space = CARSpace::build(kernel, fs, false);
    net.gram_ = space.gram.topLeftCorner(n, n);
    const CARRep rep(space);
    for (int k = 0; k < n; ++k) net.fields_.emplace_back(Eigen::MatrixXcd(rep.field(k)));
  }
  return net;
}

int FieldNet::generator_index(const Eigen::VectorXcd& f) const {
  for (int k = 0; k < size(); ++k)
    if (basis_[static_cast<std::size_t>(k)] == f) return k;
  return -1;
}

std::vector<int> FieldNet::generators_in(const Region& o) const {
  std::vector<int> out;
  for (int k = 0; k < size(); ++k)
    if (supports_[static_cast<std::size_t>(k)].subset_of(o)) out.push_back(k);
  return out;
}

MatrixAlgebra FieldNet::algebra(const Region& o, bool unital) const {
  std::vector<Eigen::MatrixXcd> gens;
  for (int k : generators_in(o)) gens.push_back(field(k) / field(k).cwiseAbs().maxCoeff());
  if (gens.empty()) throw DiagnosticError(fmt::format("no generator is localized in region '{}'", o.descriptor()));
  return MatrixAlgebra::generate(gens, dimension(), 1e-10, unital);
}

NetMorphism NetMorphism::trivial(int components) {
  NetMorphism m;
  m.components_ = components;
  return m;
}

LocalIso NetMorphism::base() const {
  if (trivial_) return LocalIso::trivial();
  LocalIso b = chain_.front();
  for (std::size_t k = 1; k < chain_.size(); ++k) b = compose(chain_[k], b);
  return b;
}

std::optional<Eigen::VectorXcd> NetMorphism::on_generator(const Eigen::VectorXcd& f) const {
  if (trivial_) return std::nullopt;
  Eigen::VectorXcd g = f;
  for (const auto& m : chain_) {
    if (!support_of(g, components_).subset_of(m.initial())) return std::nullopt;
    g = m.transport(g, components_);
  }
  return g;
}

NetMorphism functor_apply(const LocalIso& m, int components) {
  NetMorphism out = NetMorphism::trivial(components);
  if (m.is_trivial()) return out;
  out.trivial_ = false;
  out.chain_.push_back(m);
  return out;
}

NetMorphism compose(const NetMorphism& b, const NetMorphism& a) {
  if (a.components_ != b.components_) throw DomainError("compose: morphisms act on different theories");
  if (a.trivial_ || b.trivial_) return NetMorphism::trivial(a.components_);
  if (a.chain_.back().target_name() != b.chain_.front().source_name()) {
    throw DomainError("compose: net morphisms are not composable");
  }
  // The base maps must overlap; otherwise the composite is the zero morphism.
  if (compose(b.base(), a.base()).is_trivial()) return NetMorphism::trivial(a.components_);
  NetMorphism c = a;
  c.chain_.insert(c.chain_.end(), b.chain_.begin(), b.chain_.end());
  return c;
}

Relabeling functor_apply(const LocalIso& m, const FieldNet& n1, const FieldNet& n2, double tol) {
  if (n1.theory().kind != n2.theory().kind) throw DomainError("functor_apply: nets carry different theories");
  Relabeling r;
  r.morphism = functor_apply(m, n1.theory().components());
  r.map.assign(static_cast<std::size_t>(n1.size()), -1);
  if (m.is_trivial()) return r;
  if (m.source_name() != n1.object().name || m.target_name() != n2.object().name) {
    throw DomainError("functor_apply: morphism does not connect the given nets");
  }
  for (int k = 0; k < n1.size(); ++k) {
    const auto img = r.morphism.on_generator(n1.generator(k));
    if (!img) continue;
    const int idx = n2.generator_index(*img);
    if (idx < 0) throw CovarianceError(fmt::format("transported generator {} has no counterpart in the target net", k));
    r.map[static_cast<std::size_t>(k)] = idx;
  }
  double scale = 0.0, err = 0.0;
  for (std::size_t a = 0; a < r.map.size(); ++a) {
    if (r.map[a] < 0) continue;
    for (std::size_t b = 0; b < r.map.size(); ++b) {
      if (r.map[b] < 0) continue;
      const cplx g1 = n1.gram()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      scale = std::max(scale, std::abs(g1));
      err = std::max(err, std::abs(g1 - n2.gram()(r.map[a], r.map[b])));
    }
  }
  r.gram_rel_error = scale > 0.0 ? err / scale : err;
  if (r.gram_rel_error > tol) {
    throw CovarianceError(fmt::format("Gram data mismatch under {}: rel {:.3e} > {:.1e}", describe(m),
                                      r.gram_rel_error, tol));
  }
  return r;
}

CovarianceCheck check_covariance(const Relabeling& alpha, const FieldNet& n1, const FieldNet& n2,
                                 const Region& o) {
  if (alpha.morphism.is_trivial()) throw DomainError("covariance check on the trivial morphism");
  const LocalIso base = alpha.morphism.base();
  CovarianceCheck c;
  c.region = o.descriptor();
  std::vector<Eigen::MatrixXcd> img;
  for (int k : n1.generators_in(o)) {
    const int idx = alpha.map[static_cast<std::size_t>(k)];
    if (idx < 0) throw DomainError(fmt::format("covariance check: region '{}' leaves the localization", c.region));
    const Eigen::MatrixXcd& g = n2.field(idx);
    img.push_back(g / g.cwiseAbs().maxCoeff());
  }
  const Region target = base.push(o);
  const MatrixAlgebra image = MatrixAlgebra::generate(img, n2.dimension());
  const MatrixAlgebra a2 = n2.algebra(target);
  c.equal = image.subset_of(a2) && a2.subset_of(image);
  c.source_dimension = n1.algebra(o, false).dimension();
  c.image_dimension = MatrixAlgebra::generate(img, n2.dimension(), 1e-10, false).dimension();
  c.target_dimension = n2.algebra(target, false).dimension();
  c.isomorphic = c.source_dimension == c.image_dimension;
  return c;
}

PairingReport check_invariant_pairings(const LocalIso& iso, const SpacetimeObject& source,
                                       const SpacetimeObject& target, const TheorySpec& theory,
                                       const std::vector<Eigen::VectorXcd>& basis, double tol) {
  if (iso.is_trivial()) throw DomainError("pairing check on the trivial morphism");
  if (iso.source_name() != source.name || iso.target_name() != target.name) {
    throw DomainError("pairing check: morphism does not connect the given objects");
  }
  const int comp = theory.components();
  std::vector<Eigen::VectorXcd> fs, moved;
  for (const auto& f : basis) {
    if (!support_of(f, comp).subset_of(iso.initial())) continue;
    fs.push_back(f);
    moved.push_back(iso.transport(f, comp));
  }
  if (fs.empty()) throw DomainError("pairing check: no basis function is localized in the initial region");
  const Eigen::MatrixXcd g1 = pairing_gram(source, theory, fs);
  const Eigen::MatrixXcd g2 = pairing_gram(target, theory, moved);
  PairingReport rep;
  rep.functions = static_cast<int>(fs.size());
  rep.scale = g1.cwiseAbs().maxCoeff();
  rep.max_abs_error = (g1 - g2).cwiseAbs().maxCoeff();
  rep.max_rel_error = rep.scale > 0.0 ? rep.max_abs_error / rep.scale : rep.max_abs_error;
  rep.pass = rep.max_rel_error <= tol;
  return rep;
}

}  // namespace covlab
