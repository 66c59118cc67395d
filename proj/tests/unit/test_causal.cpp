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

#include <random>

#include <doctest.h>

#include "../support/causal_oracle.hpp"
#include "covlab/causal.hpp"

using namespace covlab;

namespace {

// t in [-1, 1], x in [0, 4), dt = dx = 0.05.
struct Mink {
  MetricModel model = MetricModel::minkowski(-1.0, 1.0, 4.0);
  Lattice lat = build_lattice(model, 41, 80);
  CausalGraph g{model, lat};
  Site at(double t, double x) const { return lat.nearest(t, x < 0 ? x + 4.0 : x); }
};

MetricModel curved16() {
  SandwichParams p;
  p.amplitude = 2.0;
  return MetricModel::sandwich(p, -2.0, 2.0, 2.4);
}

void check_against_oracle(const CausalGraph& g, const oracle::CausalOracle& o, const Region& r) {
  const auto bits = oracle::to_bits(r);
  REQUIRE(oracle::to_bits(g.future(r)) == o.future(bits));
  REQUIRE(oracle::to_bits(g.past(r)) == o.past(bits));
  REQUIRE(oracle::to_bits(g.dependence_future(r)) == o.dependence_future(bits));
  REQUIRE(oracle::to_bits(g.dependence_past(r)) == o.dependence_past(bits));
  REQUIRE(oracle::to_bits(g.causal_complement(r)) == o.complement_of(bits));
}

}  // namespace

TEST_CASE("minkowski successors at unit slope") {
  Mink m;
  const auto succ = m.g.successors({10, 5});
  REQUIRE(succ.size() == 3);
  CHECK(succ[0] == Site{11, 4});
  CHECK(succ[1] == Site{11, 5});
  CHECK(succ[2] == Site{11, 6});
  CHECK(m.g.successors({10, 0})[0] == Site{11, 79});
  CHECK(m.g.predecessors({10, 5}).size() == 3);
  CHECK(m.g.successors({40, 5}).empty());
}

TEST_CASE("future of a point is the light cone") {
  Mink m;
  const auto o = m.g.region({m.at(0.0, 0.0)});
  const auto f = m.g.future(o);
  CHECK(f.contains(m.lat.index(m.at(0.5, 0.3))));
  CHECK_FALSE(f.contains(m.lat.index(m.at(0.5, 0.7))));
  CHECK(o.subset_of(f));
  CHECK(m.g.future(f) == f);
  const auto p = m.g.past(o);
  CHECK(p.contains(m.lat.index(m.at(-0.5, -0.3))));
  CHECK(m.g.past(p) == p);
}

TEST_CASE("domain of dependence of a slab") {
  Mink m;
  std::vector<Site> sites;
  for (int i = 0; i < 80; ++i) {
    const double x = m.lat.x(i);
    if (std::abs(m.lat.circle_delta(0.0, x)) <= 1.0 + 1e-12) sites.push_back({20, i});
  }
  const auto o = m.g.region(sites);
  const auto dp = m.g.dependence_future(o);
  CHECK(dp.contains(m.lat.index(m.at(0.5, 0.0))));
  CHECK_FALSE(dp.contains(m.lat.index(m.at(0.5, 0.9))));
  CHECK(o.subset_of(m.g.domain_of_dependence(o)));

}

TEST_CASE("domain of dependence of a full slice is everything") {
  Mink m;
  const auto slice = Region::slab(m.lat, 20, 20);
  CHECK(m.g.domain_of_dependence(slice) == Region::full(m.lat));
  CHECK(m.g.causal_complement(slice).empty());
}

TEST_CASE("causal determination by a wide slab") {
  Mink m;
  std::vector<Site> sites;
  for (int i = 0; i < 80; ++i) {
    if (std::abs(m.lat.circle_delta(0.0, m.lat.x(i))) <= 2.0 - 1e-12 + 0.0) sites.push_back({20, i});
  }
  // |x| <= 2 on a circle of length 4 minus one column is a wide arc
  const auto o = m.g.region(sites);
  CHECK(m.g.causally_determined(m.g.region({m.at(0.5, 0.0)}), o));
  CHECK_FALSE(m.g.causally_determined(m.g.region({m.at(0.5, 1.9)}), o));
  CHECK_THROWS_AS(m.g.causally_determined(Region(m.lat.size()), o), DomainError);
}

TEST_CASE("causal complement of a point") {
  Mink m;
  const auto o = m.g.region({m.at(0.0, 0.0)});
  const auto perp = m.g.causal_complement(o);
  CHECK(perp.contains(m.lat.index(m.at(0.0, 1.0))));
  CHECK_FALSE(perp.contains(m.lat.index(m.at(1.0, 0.0))));
  CHECK_FALSE(perp.contains(m.lat.index(m.at(0.0, 0.0))));
}

TEST_CASE("causal complement is symmetric on points") {
  Mink m;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dj(0, 40), di(0, 79);
  for (int n = 0; n < 100; ++n) {
    const Site p{dj(rng), di(rng)}, q{dj(rng), di(rng)};
    const bool pq = m.g.causal_complement(m.g.region({q})).contains(m.lat.index(p));
    const bool qp = m.g.causal_complement(m.g.region({p})).contains(m.lat.index(q));
    CHECK(pq == qp);
  }
}

TEST_CASE("double cone and truncated diamond") {
  Mink m;
  const auto dc = m.g.double_cone(m.at(1.0 - 0.05, 0.0), m.at(-1.0 + 0.05, 0.0));
  // lattice double cone between t = -0.95 and 0.95: |t| + |x| < 0.95 after erosion
  for (int j = 0; j < 41; ++j)
    for (int i = 0; i < 80; ++i) {
      const double t = m.lat.t(j), x = std::abs(m.lat.circle_delta(0.0, m.lat.x(i)));
      if (std::abs(t) + x < 0.95 - 0.05 - 1e-9) CHECK(dc.contains(m.lat.index(j, i)));
      if (std::abs(t) + x > 0.95 - 1e-9) CHECK_FALSE(dc.contains(m.lat.index(j, i)));
    }
  CHECK_THROWS_AS(m.g.double_cone(m.at(0.0, 0.0), m.at(0.0, 0.0)), DomainError);
  CHECK_THROWS_AS(m.g.double_cone(m.at(-0.5, 0.0), m.at(0.5, 0.0)), DomainError);

  const auto td = m.g.truncated_diamond(Region::slab(m.lat, 20, 20), 10, 30);
  CHECK(td == Region::slab(m.lat, 11, 29));
}

TEST_CASE("monotonicity and duality") {
  const auto model = curved16();
  const auto lat = build_lattice(model, 16, 16, 2.0);
  const CausalGraph g(model, lat);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, lat.size() - 1);
  for (int n = 0; n < 50; ++n) {
    Region small(lat.size());
    for (int k = 0; k < 3; ++k) small.insert(pick(rng));
    Region big = small;
    for (int k = 0; k < 3; ++k) big.insert(pick(rng));
    CHECK(g.future(small).subset_of(g.future(big)));
    CHECK(g.past(small).subset_of(g.past(big)));
    CHECK(g.domain_of_dependence(small).subset_of(g.domain_of_dependence(big)));
    CHECK(g.causal_complement(big).subset_of(g.causal_complement(small)));
  }

  // time-symmetric model: J- is the reflection of J+
  const auto sym = MetricModel::custom(
      "sym", [](double, double) { return 1.0; },
      [](double t, double x) { return 1.0 + 0.4 * std::exp(-t * t) * (1.0 + 0.5 * std::cos(x)); },
      -1.0, 1.0, 2.0 * std::acos(-1.0));
  const auto ls = build_lattice(sym, 21, 40, 1.0);
  const CausalGraph gs(sym, ls);
  for (int n = 0; n < 20; ++n) {
    const int idx = pick(rng) % ls.size();
    const Site s = ls.site(idx);
    const Site r{ls.nt - 1 - s.j, s.i};
    const auto f = gs.future(gs.region({s}));
    const auto p = gs.past(gs.region({r}));
    for (int j = 0; j < ls.nt; ++j)
      for (int i = 0; i < ls.nx; ++i)
        CHECK(f.contains(ls.index(j, i)) == p.contains(ls.index(ls.nt - 1 - j, i)));
  }
}

TEST_CASE("curved graph has non-uniform reach") {
  const auto model = curved16();
  const auto lat = build_lattice(model, 16, 16, 2.0);
  const CausalGraph g(model, lat);
  int lo = 100, hi = 0;
  for (int j = 0; j + 1 < lat.nt; ++j)
    for (int i = 0; i < lat.nx; ++i) {
      lo = std::min(lo, g.reach(j, i));
      hi = std::max(hi, g.reach(j, i));
    }
  CHECK(lo == 1);
  CHECK(hi == 2);
}

TEST_CASE("region operators agree with the path oracle") {
  std::mt19937_64 rng(3);
  for (int which = 0; which < 2; ++which) {
    const auto model = which == 0 ? MetricModel::minkowski(-1.0, 1.0, 2.0) : curved16();
    const auto lat = which == 0 ? build_lattice(model, 24, 24, 2.0) : build_lattice(model, 16, 16, 2.0);
    const CausalGraph g(model, lat);
    const oracle::CausalOracle o(model, lat);
    std::uniform_int_distribution<int> pick(0, lat.size() - 1);
    for (int idx = 0; idx < lat.size(); ++idx) check_against_oracle(g, o, Region::from_indices(lat.size(), {idx}));
    for (int n = 0; n < 300; ++n) {
      Region r(lat.size());
      const int k = 2 + n % 5;
      for (int c = 0; c < k; ++c) r.insert(pick(rng));
      check_against_oracle(g, o, r);
      Region r1(lat.size());
      r1.insert(pick(rng));
      CHECK(g.causally_determined(r1, r) == o.determined(oracle::to_bits(r1), oracle::to_bits(r)));
    }
  }
}

TEST_CASE("region serialization is sorted") {
  Mink m;
  const auto r = Region::from_indices(m.lat.size(), {50, 3, 17});
  CHECK(r.indices() == std::vector<int>{3, 17, 50});
  CHECK(r.slice_range(m.lat) == std::pair<int, int>{0, 0});
}
