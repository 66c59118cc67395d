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

#ifndef COVLAB_CAUSAL_HPP
#define COVLAB_CAUSAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "covlab/geometry.hpp"

namespace covlab {

/// Set of lattice sites stored as a dense mask, with an optional descriptor
/// such as "double_cone p=(j,i) q=(j,i)".
class Region {
 public:
  Region() = default;
  explicit Region(int lattice_size) : mask_(static_cast<std::size_t>(lattice_size), 0) {}

  static Region from_indices(int lattice_size, const std::vector<int>& indices);
  static Region from_sites(const Lattice& lattice, const std::vector<Site>& sites);
  static Region full(const Lattice& lattice);
  /// All sites with slice index in [j_lo, j_hi].
  static Region slab(const Lattice& lattice, int j_lo, int j_hi);
  /// Sites on slices [j_lo, j_hi] whose columns lie on the arc starting at
  /// i_start with the given length (wrapping).
  static Region arc_slab(const Lattice& lattice, int j_lo, int j_hi, int i_start, int length);

  int lattice_size() const { return static_cast<int>(mask_.size()); }
  bool contains(int index) const { return mask_[static_cast<std::size_t>(index)] != 0; }
  void insert(int index) { mask_[static_cast<std::size_t>(index)] = 1; }
  void erase(int index) { mask_[static_cast<std::size_t>(index)] = 0; }
  int count() const;
  bool empty() const { return count() == 0; }
  /// Sorted site indices.
  std::vector<int> indices() const;

  bool subset_of(const Region& other) const;
  bool intersects(const Region& other) const;
  Region operator|(const Region& other) const;
  Region operator&(const Region& other) const;
  Region operator-(const Region& other) const;
  Region complement() const;
  friend bool operator==(const Region& a, const Region& b) { return a.mask_ == b.mask_; }

  const std::vector<std::uint8_t>& mask() const { return mask_; }
  const std::string& descriptor() const { return descriptor_; }
  Region& describe(std::string d) {
    descriptor_ = std::move(d);
    return *this;
  }

  /// Smallest and largest occupied slice; (-1, -1) when empty.
  std::pair<int, int> slice_range(const Lattice& lattice) const;

 private:
  void check_same(const Region& other) const;

  std::vector<std::uint8_t> mask_;
  std::string descriptor_;
};

/// Light-cone reachability DAG between consecutive slices. Site (j,i) has
/// edges to (j+1, i+d) for |d| <= reach(j,i), where
///   reach = ceil(max(s(j,i), s(j+1,i)) * dt / dx),  s = sqrt(b)/a,
/// i.e. the continuum cone rounded outwards to whole cells.
class CausalGraph {
 public:
  CausalGraph(const MetricModel& model, const Lattice& lattice);

  const Lattice& lattice() const { return lattice_; }
  int reach(int j, int i) const { return reach_[static_cast<std::size_t>(lattice_.index(j, i))]; }
  int max_reach(int j) const { return max_reach_[static_cast<std::size_t>(j)]; }
  bool has_edge(Site from, Site to) const;
  std::vector<Site> successors(Site s) const;
  std::vector<Site> predecessors(Site s) const;

  Region future(const Region& o) const;
  Region past(const Region& o) const;
  Region causal_shadow(const Region& o) const { return future(o) | past(o); }

  Region dependence_future(const Region& o) const;
  Region dependence_past(const Region& o) const;
  Region domain_of_dependence(const Region& o) const;

  /// O-perp = lattice minus dilate(J+(O) u J-(O)).
  Region causal_complement(const Region& o) const;
  /// O1 is causally determined by O iff O1 is inside erode(D(O)).
  bool causally_determined(const Region& o1, const Region& o) const;

  /// One-cell 3x3 dilation / erosion (periodic in x; beyond the time range
  /// counts as outside, so boundary slices are never interior).
  Region dilate(const Region& o) const;
  Region erode(const Region& o) const;

  /// erode(J-(p) n J+(q)). Requires p in erode(J+(q)).
  Region double_cone(Site p, Site q) const;
  /// erode(D(base) n {j_lo <= j <= j_hi}).
  Region truncated_diamond(const Region& base, int j_lo, int j_hi) const;

  Region region(const std::vector<Site>& sites) const {
    return Region::from_sites(lattice_, sites);
  }

 private:
  void check(const Region& o) const;

  Lattice lattice_;
  std::vector<int> reach_;
  std::vector<int> max_reach_;
};

}  // namespace covlab

#endif  // COVLAB_CAUSAL_HPP
