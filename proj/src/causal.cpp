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

#include "covlab/causal.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace covlab {

namespace {

int circle_distance(int a, int b, int nx) {
  const int d = std::abs(a - b) % nx;
  return std::min(d, nx - d);
}

// Distinct columns within `r` of column i (all columns once if the window wraps).
template <typename Fn>
void for_window(int i, int r, int nx, Fn&& fn) {
  if (2 * r + 1 >= nx) {
    for (int k = 0; k < nx; ++k) fn(k);
    return;
  }
  for (int d = -r; d <= r; ++d) fn(((i + d) % nx + nx) % nx);
}

}  // namespace

Region Region::from_indices(int lattice_size, const std::vector<int>& indices) {
  Region r(lattice_size);
  for (int idx : indices) {
    if (idx < 0 || idx >= lattice_size) {
      throw DomainError(fmt::format("site index {} outside lattice of size {}", idx, lattice_size));
    }
    r.insert(idx);
  }
  return r;
}

Region Region::from_sites(const Lattice& lattice, const std::vector<Site>& sites) {
  Region r(lattice.size());
  for (const Site& s : sites) {
    if (!lattice.contains_slice(s.j) || s.i < 0 || s.i >= lattice.nx) {
      throw DomainError(fmt::format("site (j={}, i={}) outside lattice", s.j, s.i));
    }
    r.insert(lattice.index(s));
  }
  return r;
}

Region Region::full(const Lattice& lattice) {
  Region r(lattice.size());
  std::fill(r.mask_.begin(), r.mask_.end(), 1);
  return r.describe("full");
}

Region Region::slab(const Lattice& lattice, int j_lo, int j_hi) {
  Region r(lattice.size());
  for (int j = std::max(0, j_lo); j <= std::min(lattice.nt - 1, j_hi); ++j)
    for (int i = 0; i < lattice.nx; ++i) r.insert(lattice.index(j, i));
  return r.describe(fmt::format("slab j=[{},{}]", j_lo, j_hi));
}

Region Region::arc_slab(const Lattice& lattice, int j_lo, int j_hi, int i_start, int length) {
  Region r(lattice.size());
  for (int j = std::max(0, j_lo); j <= std::min(lattice.nt - 1, j_hi); ++j)
    for (int d = 0; d < std::min(length, lattice.nx); ++d)
      r.insert(lattice.index(j, lattice.wrap(i_start + d)));
  return r.describe(fmt::format("arc_slab j=[{},{}] i0={} len={}", j_lo, j_hi, i_start, length));
}

int Region::count() const {
  return static_cast<int>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

std::vector<int> Region::indices() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < mask_.size(); ++k)
    if (mask_[k]) out.push_back(static_cast<int>(k));
  return out;
}

void Region::check_same(const Region& other) const {
  if (mask_.size() != other.mask_.size()) {
    throw DomainError("region operands live on different lattices");
  }
}

bool Region::subset_of(const Region& other) const {
  check_same(other);
  for (std::size_t k = 0; k < mask_.size(); ++k)
    if (mask_[k] && !other.mask_[k]) return false;
  return true;
}

bool Region::intersects(const Region& other) const {
  check_same(other);
  for (std::size_t k = 0; k < mask_.size(); ++k)
    if (mask_[k] && other.mask_[k]) return true;
  return false;
}

Region Region::operator|(const Region& other) const {
  check_same(other);
  Region r(lattice_size());
  for (std::size_t k = 0; k < mask_.size(); ++k) r.mask_[k] = mask_[k] | other.mask_[k];
  return r;
}

Region Region::operator&(const Region& other) const {
  check_same(other);
  Region r(lattice_size());
  for (std::size_t k = 0; k < mask_.size(); ++k) r.mask_[k] = mask_[k] & other.mask_[k];
  return r;
}

Region Region::operator-(const Region& other) const {
  check_same(other);
  Region r(lattice_size());
  for (std::size_t k = 0; k < mask_.size(); ++k) r.mask_[k] = mask_[k] & !other.mask_[k];
  return r;
}

Region Region::complement() const {
  Region r(lattice_size());
  for (std::size_t k = 0; k < mask_.size(); ++k) r.mask_[k] = !mask_[k];
  return r;
}

std::pair<int, int> Region::slice_range(const Lattice& lattice) const {
  int lo = -1, hi = -1;
  for (std::size_t k = 0; k < mask_.size(); ++k) {
    if (!mask_[k]) continue;
    const int j = static_cast<int>(k) / lattice.nx;
    if (lo < 0 || j < lo) lo = j;
    if (j > hi) hi = j;
  }
  return {lo, hi};
}

CausalGraph::CausalGraph(const MetricModel& model, const Lattice& lattice) : lattice_(lattice) {
  reach_.assign(static_cast<std::size_t>(lattice.size()), 0);
  max_reach_.assign(static_cast<std::size_t>(lattice.nt), 0);
  const double ratio = lattice.dt / lattice.dx;
  for (int j = 0; j + 1 < lattice.nt; ++j) {
    for (int i = 0; i < lattice.nx; ++i) {
      const double x = lattice.x(i);
      const double s0 = std::sqrt(model.lapse(lattice.t(j), x)) / model.scale(lattice.t(j), x);
      const double s1 =
          std::sqrt(model.lapse(lattice.t(j + 1), x)) / model.scale(lattice.t(j + 1), x);
      // The small offset keeps exact integers (slope 1, dt == dx) from rounding up.
      const int r = std::max(1, static_cast<int>(std::ceil(std::max(s0, s1) * ratio - 1e-9)));
      reach_[static_cast<std::size_t>(lattice.index(j, i))] = r;
      max_reach_[static_cast<std::size_t>(j)] = std::max(max_reach_[static_cast<std::size_t>(j)], r);
    }
  }
}

void CausalGraph::check(const Region& o) const {
  if (o.lattice_size() != lattice_.size()) {
    throw DomainError("region does not belong to this lattice");
  }
}

bool CausalGraph::has_edge(Site from, Site to) const {
  if (to.j != from.j + 1 || !lattice_.contains_slice(to.j) || !lattice_.contains_slice(from.j)) {
    return false;
  }
  return circle_distance(from.i, to.i, lattice_.nx) <= reach(from.j, from.i);
}

std::vector<Site> CausalGraph::successors(Site s) const {
  std::vector<Site> out;
  if (s.j + 1 >= lattice_.nt) return out;
  for_window(s.i, reach(s.j, s.i), lattice_.nx, [&](int k) { out.push_back({s.j + 1, k}); });
  return out;
}

std::vector<Site> CausalGraph::predecessors(Site s) const {
  std::vector<Site> out;
  if (s.j == 0) return out;
  const int jp = s.j - 1;
  for_window(s.i, max_reach(jp), lattice_.nx, [&](int k) {
    if (circle_distance(k, s.i, lattice_.nx) <= reach(jp, k)) out.push_back({jp, k});
  });
  return out;
}

Region CausalGraph::future(const Region& o) const {
  check(o);
  Region f = o;
  const int nx = lattice_.nx;
  for (int j = 0; j + 1 < lattice_.nt; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!f.contains(lattice_.index(j, i))) continue;
      for_window(i, reach(j, i), nx, [&](int k) { f.insert(lattice_.index(j + 1, k)); });
    }
  }
  return f;
}

Region CausalGraph::past(const Region& o) const {
  check(o);
  Region p = o;
  const int nx = lattice_.nx;
  for (int j = lattice_.nt - 1; j > 0; --j) {
    for (int i = 0; i < nx; ++i) {
      const int idx = lattice_.index(j - 1, i);
      if (p.contains(idx)) continue;
      bool hit = false;
      for_window(i, reach(j - 1, i), nx, [&](int k) { hit = hit || p.contains(lattice_.index(j, k)); });
      if (hit) p.insert(idx);
    }
  }
  return p;
}

Region CausalGraph::dependence_future(const Region& o) const {
  check(o);
  Region d = o;
  const int nx = lattice_.nx;
  for (int j = 1; j < lattice_.nt; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int idx = lattice_.index(j, i);
      if (d.contains(idx)) continue;
      bool all = true;
      for_window(i, max_reach(j - 1), nx, [&](int k) {
        if (circle_distance(k, i, nx) <= reach(j - 1, k) && !d.contains(lattice_.index(j - 1, k)))
          all = false;
      });
      if (all) d.insert(idx);
    }
  }
  return d;
}

Region CausalGraph::dependence_past(const Region& o) const {
  check(o);
  Region d = o;
  const int nx = lattice_.nx;
  for (int j = lattice_.nt - 2; j >= 0; --j) {
    for (int i = 0; i < nx; ++i) {
      const int idx = lattice_.index(j, i);
      if (d.contains(idx)) continue;
      bool all = true;
      for_window(i, reach(j, i), nx,
                 [&](int k) { all = all && d.contains(lattice_.index(j + 1, k)); });
      if (all) d.insert(idx);
    }
  }
  return d;
}

Region CausalGraph::domain_of_dependence(const Region& o) const {
  return dependence_future(o) | dependence_past(o);
}

Region CausalGraph::dilate(const Region& o) const {
  check(o);
  Region out(lattice_.size());
  const int nx = lattice_.nx;
  for (int j = 0; j < lattice_.nt; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!o.contains(lattice_.index(j, i))) continue;
      for (int dj = -1; dj <= 1; ++dj) {
        if (!lattice_.contains_slice(j + dj)) continue;
        for (int di = -1; di <= 1; ++di) out.insert(lattice_.index(j + dj, lattice_.wrap(i + di)));
      }
    }
  }
  return out;
}

Region CausalGraph::erode(const Region& o) const {
  check(o);
  Region out(lattice_.size());
  const int nx = lattice_.nx;
  for (int j = 1; j + 1 < lattice_.nt; ++j) {
    for (int i = 0; i < nx; ++i) {
      bool all = true;
      for (int dj = -1; dj <= 1 && all; ++dj)
        for (int di = -1; di <= 1 && all; ++di)
          all = o.contains(lattice_.index(j + dj, lattice_.wrap(i + di)));
      if (all) out.insert(lattice_.index(j, i));
    }
  }
  return out;
}

Region CausalGraph::causal_complement(const Region& o) const {
  return dilate(causal_shadow(o)).complement();
}

bool CausalGraph::causally_determined(const Region& o1, const Region& o) const {
  check(o1);
  check(o);
  if (o1.empty() || o.empty()) {
    throw DomainError("causally_determined needs nonempty regions");
  }
  return o1.subset_of(erode(domain_of_dependence(o)));
}

Region CausalGraph::double_cone(Site p, Site q) const {
  const Region rp = region({p});
  const Region rq = region({q});
  const Region fq = future(rq);
  if (!erode(fq).contains(lattice_.index(p))) {
    throw DomainError(fmt::format(
        "double cone needs p=(j={}, i={}) in the interior of J+(q=(j={}, i={}))", p.j, p.i, q.j,
        q.i));
  }
  Region dc = erode(past(rp) & fq);
  dc.describe(fmt::format("double_cone p=({},{}) q=({},{})", p.j, p.i, q.j, q.i));
  return dc;
}

Region CausalGraph::truncated_diamond(const Region& base, int j_lo, int j_hi) const {
  check(base);
  if (j_lo > j_hi) {
    throw DomainError(fmt::format("truncated diamond slice range [{}, {}] is empty", j_lo, j_hi));
  }
  Region td = erode(domain_of_dependence(base) & Region::slab(lattice_, j_lo, j_hi));
  td.describe(fmt::format("truncated_diamond base_sites={} j=[{},{}]", base.count(), j_lo, j_hi));
  return td;
}

}  // namespace covlab
