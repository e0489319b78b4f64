// Copyright 2026 The stratnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stratnet/error.hpp"

namespace stratnet {

using NodeId = int;
using Arc = std::pair<NodeId, NodeId>;

// Binary N x N adjacency matrix with a structurally zero diagonal. Row and
// column sums are cached so that flips stay O(1).
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(int n_nodes)
      : n_(n_nodes),
        cells_(static_cast<std::size_t>(n_nodes) * n_nodes, 0),
        out_(n_nodes, 0),
        in_(n_nodes, 0) {
    if (n_nodes < 0) throw UsageError("node count must be nonnegative");
  }

  int n_nodes() const { return n_; }
  long arc_count() const { return arcs_; }

  bool operator()(int i, int j) const { return cells_[index(i, j)] != 0; }
  const std::uint8_t* row(int i) const { return cells_.data() + index(i, 0); }

  int out_degree(int i) const { return out_[i]; }
  int in_degree(int j) const { return in_[j]; }

  void set(int i, int j, bool value) {
    if (i == j) {
      if (value) throw DataError("self-loops are not allowed");
      return;
    }
    if ((*this)(i, j) != value) flip(i, j);
  }

  // Toggles entry (i, j); i != j is the caller's responsibility.
  void flip(int i, int j) {
    std::uint8_t& c = cells_[index(i, j)];
    c ^= 1;
    const int delta = c ? 1 : -1;
    out_[i] += delta;
    in_[j] += delta;
    arcs_ += delta;
  }

  std::vector<Arc> arcs() const {
    std::vector<Arc> result;
    result.reserve(static_cast<std::size_t>(arcs_));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if ((*this)(i, j)) result.emplace_back(i, j);
    return result;
  }

  const std::vector<std::uint8_t>& cells() const { return cells_; }

  friend bool operator==(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
    return a.n_ == b.n_ && a.cells_ == b.cells_;
  }
  friend bool operator<(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
    return a.n_ != b.n_ ? a.n_ < b.n_ : a.cells_ < b.cells_;
  }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }

  int n_ = 0;
  long arcs_ = 0;
  std::vector<std::uint8_t> cells_;
  std::vector<int> out_;
  std::vector<int> in_;
};

// Node-to-group map with 0-based group indices 0..K-1.
class GroupAssignment {
 public:
  GroupAssignment() = default;
  GroupAssignment(std::vector<int> groups, int n_groups)
      : groups_(std::move(groups)), k_(n_groups) {
    if (k_ < 1) throw DataError("at least one group is required");
    for (int g : groups_)
      if (g < 0 || g >= k_) throw DataError("group index out of range");
  }

  static GroupAssignment single(int n_nodes) {
    return GroupAssignment(std::vector<int>(n_nodes, 0), 1);
  }

  int n_nodes() const { return static_cast<int>(groups_.size()); }
  int n_groups() const { return k_; }
  int operator[](int node) const { return groups_[node]; }
  const std::vector<int>& groups() const { return groups_; }

  std::vector<int> group_sizes() const {
    std::vector<int> sizes(k_, 0);
    for (int g : groups_) ++sizes[g];
    return sizes;
  }

 private:
  std::vector<int> groups_;
  int k_ = 1;
};

struct DegreeSequence {
  std::vector<int> out_degrees;
  std::vector<int> in_degrees;

  friend bool operator==(const DegreeSequence&, const DegreeSequence&) = default;
};

// K x K arc counts, row group -> column group, row-major.
struct CrossLinkMatrix {
  int k = 0;
  std::vector<long> counts;

  long operator()(int from, int to) const { return counts[static_cast<std::size_t>(from) * k + to]; }
  long& operator()(int from, int to) { return counts[static_cast<std::size_t>(from) * k + to]; }

  long total() const {
    long sum = 0;
    for (long c : counts) sum += c;
    return sum;
  }

  friend bool operator==(const CrossLinkMatrix&, const CrossLinkMatrix&) = default;
};

struct DyadCensus {
  long mutual = 0;
  long asym = 0;
  long null_dyads = 0;
};

// Builds a matrix from ordered pairs. Repeated pairs collapse to a single arc
// and are counted in *duplicates when given.
inline AdjacencyMatrix from_edge_list(const std::vector<Arc>& edges, int n_nodes,
                                      std::size_t* duplicates = nullptr) {
  AdjacencyMatrix d(n_nodes);
  std::size_t dup = 0;
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= n_nodes || j < 0 || j >= n_nodes)
      throw DataError("node id out of range: (" + std::to_string(i) + "," +
                      std::to_string(j) + ")");
    if (i == j) throw DataError("self-loop pair: (" + std::to_string(i) + "," + std::to_string(j) + ")");
    if (d(i, j))
      ++dup;
    else
      d.flip(i, j);
  }
  if (duplicates) *duplicates = dup;
  return d;
}

inline std::vector<Arc> to_edge_list(const AdjacencyMatrix& d) { return d.arcs(); }

inline DegreeSequence degree_sequence(const AdjacencyMatrix& d) {
  DegreeSequence s;
  const int n = d.n_nodes();
  s.out_degrees.resize(n);
  s.in_degrees.resize(n);
  for (int i = 0; i < n; ++i) {
    s.out_degrees[i] = d.out_degree(i);
    s.in_degrees[i] = d.in_degree(i);
  }
  return s;
}

inline CrossLinkMatrix cross_link_matrix(const AdjacencyMatrix& d, const GroupAssignment& g) {
  if (g.n_nodes() != d.n_nodes()) throw DataError("group assignment length differs from node count");
  CrossLinkMatrix m{g.n_groups(), std::vector<long>(static_cast<std::size_t>(g.n_groups()) * g.n_groups(), 0)};
  const int n = d.n_nodes();
  for (int i = 0; i < n; ++i) {
    const auto* row = d.row(i);
    for (int j = 0; j < n; ++j)
      if (row[j]) ++m(g[i], g[j]);
  }
  return m;
}

inline DyadCensus dyad_census(const AdjacencyMatrix& d) {
  DyadCensus c;
  const int n = d.n_nodes();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int links = int(d(i, j)) + int(d(j, i));
      if (links == 2)
        ++c.mutual;
      else if (links == 1)
        ++c.asym;
      else
        ++c.null_dyads;
    }
  return c;
}

inline bool is_undefined(double x) { return std::isnan(x); }

// 2 P(mutual) / (2 P(mutual) + P(asym)); NaN when every dyad is null.
inline double reciprocity_index(const AdjacencyMatrix& d) {
  const DyadCensus c = dyad_census(d);
  const double n = d.n_nodes();
  if (c.mutual + c.asym == 0) return std::numeric_limits<double>::quiet_NaN();
  const double pairs = n * (n - 1) / 2.0;
  const double p_mutual = c.mutual / pairs;
  const double p_asym = c.asym / pairs;
  return 2.0 * p_mutual / (2.0 * p_mutual + p_asym);
}

// Number of directed two-paths i -> k -> j for every ordered pair, k ranging
// over intermediaries distinct from i and j.
inline std::vector<int> two_path_counts(const AdjacencyMatrix& d) {
  const int n = d.n_nodes();
  std::vector<int> paths(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    int* out = paths.data() + static_cast<std::size_t>(i) * n;
    const auto* ri = d.row(i);
    for (int k = 0; k < n; ++k) {
      if (!ri[k]) continue;
      const auto* rk = d.row(k);
      for (int j = 0; j < n; ++j) out[j] += rk[j];
    }
  }
  return paths;
}

// Closed directed two-paths over all directed two-paths with distinct
// endpoints. NaN when there are no two-paths.
inline double transitivity_index(const AdjacencyMatrix& d) {
  const int n = d.n_nodes();
  const std::vector<int> paths = two_path_counts(d);
  long closed = 0;
  long total = 0;
  for (int i = 0; i < n; ++i) {
    const auto* ri = d.row(i);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int p = paths[static_cast<std::size_t>(i) * n + j];
      total += p;
      if (ri[j]) closed += p;
    }
  }
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(closed) / static_cast<double>(total);
}

inline double density(const AdjacencyMatrix& d) {
  const double n = d.n_nodes();
  return n < 2 ? 0.0 : static_cast<double>(d.arc_count()) / (n * (n - 1));
}

}  // namespace stratnet
