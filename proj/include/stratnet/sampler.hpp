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

// Uniform sampling of digraphs with a fixed degree sequence and cross-link
// matrix. A move builds link-disjoint schlaufen (alternating walks that end
// by closing one alternating cycle or at a dead end) until their violation
// matrices cancel, then switches every recorded cycle at once.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stratnet/error.hpp"
#include "stratnet/graph.hpp"
#include "stratnet/rng.hpp"

namespace stratnet {

struct ChainConfig {
  long tau = 1;
  double q = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (tau < 1) throw UsageError("tau must be at least 1");
    if (!(q > 0.0 && q < 1.0)) throw UsageError("q must lie strictly between 0 and 1");
  }
};

// Per-pair marks over all ordered pairs. Tracks which cells were touched so
// clearing costs O(marked) rather than O(N^2).
class LinkMarks {
 public:
  explicit LinkMarks(int n_nodes = 0)
      : n_(n_nodes), flags_(static_cast<std::size_t>(n_nodes) * n_nodes, 0) {}

  int n_nodes() const { return n_; }
  bool marked(int i, int j) const { return flags_[idx(i, j)] != 0; }

  void mark(int i, int j) {
    std::uint8_t& f = flags_[idx(i, j)];
    if (!f) {
      f = 1;
      touched_.push_back(idx(i, j));
    }
  }

  void clear() {
    for (std::size_t t : touched_) flags_[t] = 0;
    touched_.clear();
  }

  bool empty() const { return touched_.empty(); }
  std::size_t count() const { return touched_.size(); }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  int n_ = 0;
  std::vector<std::uint8_t> flags_;
  std::vector<std::size_t> touched_;
};

// Signed K x K change in the cross-link matrix caused by switching cycles.
struct ViolationMatrix {
  int k = 0;
  std::vector<long> deltas;

  static ViolationMatrix zero(int k) {
    return ViolationMatrix{k, std::vector<long>(static_cast<std::size_t>(k) * k, 0)};
  }

  long operator()(int from, int to) const { return deltas[static_cast<std::size_t>(from) * k + to]; }
  long& operator()(int from, int to) { return deltas[static_cast<std::size_t>(from) * k + to]; }

  bool is_zero() const {
    return std::all_of(deltas.begin(), deltas.end(), [](long x) { return x == 0; });
  }
  long sum() const {
    long s = 0;
    for (long x : deltas) s += x;
    return s;
  }
  ViolationMatrix& operator+=(const ViolationMatrix& other) {
    for (std::size_t t = 0; t < deltas.size(); ++t) deltas[t] += other.deltas[t];
    return *this;
  }
  friend bool operator==(const ViolationMatrix&, const ViolationMatrix&) = default;
};

enum class Role : std::uint8_t { kActive, kPassive };

// An alternating walk. Position 0 is always active. An active node leaves
// along one of its present, unmarked out-links; a passive node leaves to a
// row whose entry into it is absent and unmarked.
struct Schlaufe {
  std::vector<int> node_walk;
  std::vector<Role> step_roles;
  // Inclusive positions [first, last] of the closed cycle in node_walk.
  std::optional<std::pair<std::size_t, std::size_t>> cycle;
  ViolationMatrix violation;
  double log_prob = 0.0;

  bool has_cycle() const { return cycle.has_value(); }
  std::size_t arc_length() const { return node_walk.empty() ? 0 : node_walk.size() - 1; }

  // The (row, column) matrix entry visited by the step leaving position t.
  Arc step_entry(std::size_t t) const {
    return step_roles[t] == Role::kActive ? Arc{node_walk[t], node_walk[t + 1]}
                                          : Arc{node_walk[t + 1], node_walk[t]};
  }

  std::vector<Arc> cycle_entries() const {
    std::vector<Arc> entries;
    if (!cycle) return entries;
    for (std::size_t t = cycle->first; t < cycle->second; ++t) entries.push_back(step_entry(t));
    return entries;
  }
};

inline void check_alternating(const std::vector<Arc>& entries, const AdjacencyMatrix& d) {
  if (entries.size() < 4 || entries.size() % 2 != 0)
    throw DataError("alternating cycle must have even length of at least 4");
  for (std::size_t t = 0; t < entries.size(); ++t) {
    const auto [i, j] = entries[t];
    const auto [k, l] = entries[(t + 1) % entries.size()];
    if (i == j) throw DataError("cycle contains a diagonal entry");
    if (d(i, j) == d(k, l)) throw DataError("cycle entries do not alternate between present and absent");
  }
}

// Cross-link change caused by switching the cycle: absent entries become arcs
// (+1), present ones disappear (-1).
inline ViolationMatrix violation_of_cycle(const std::vector<Arc>& entries, const AdjacencyMatrix& d,
                                          const GroupAssignment& g) {
  check_alternating(entries, d);
  ViolationMatrix v = ViolationMatrix::zero(g.n_groups());
  for (const auto& [i, j] : entries) v(g[i], g[j]) += d(i, j) ? -1 : 1;
  return v;
}

inline void switch_cycle(AdjacencyMatrix& d, const std::vector<Arc>& entries) {
  check_alternating(entries, d);
  for (const auto& [i, j] : entries) d.flip(i, j);
}

// Walk builder with reusable scratch space. Node role marks live only for the
// duration of one detect() call; link marks belong to the caller.
class SchlaufeDetector {
 public:
  explicit SchlaufeDetector(int n_nodes = 0)
      : active_at_(n_nodes, -1), passive_at_(n_nodes, -1), scratch_(n_nodes) {}

  Schlaufe detect(const AdjacencyMatrix& d, const GroupAssignment& g, LinkMarks& marks, Rng& rng) {
    const int n = d.n_nodes();
    if (static_cast<int>(active_at_.size()) != n) *this = SchlaufeDetector(n);
    Schlaufe r;
    r.violation = ViolationMatrix::zero(g.n_groups());
    if (n == 0) return r;

    int node = std::uniform_int_distribution<int>(0, n - 1)(rng);
    r.log_prob = -std::log(static_cast<double>(n));
    r.node_walk.push_back(node);
    r.step_roles.push_back(Role::kActive);

    for (;;) {
      // Active step from row `node`.
      const std::size_t pos = r.node_walk.size() - 1;
      active_at_[node] = static_cast<int>(pos);
      touched_.push_back(node);
      int count = 0;
      const auto* row = d.row(node);
      for (int j = 0; j < n; ++j)
        if (row[j] && !marks.marked(node, j)) scratch_[count++] = j;
      if (count == 0) break;
      const int col = scratch_[std::uniform_int_distribution<int>(0, count - 1)(rng)];
      r.log_prob -= std::log(static_cast<double>(count));
      marks.mark(node, col);
      r.node_walk.push_back(col);
      r.step_roles.push_back(Role::kPassive);
      if (passive_at_[col] >= 0) {
        r.cycle = {static_cast<std::size_t>(passive_at_[col]), r.node_walk.size() - 1};
        break;
      }

      // Passive step from column `col`.
      passive_at_[col] = static_cast<int>(r.node_walk.size() - 1);
      touched_.push_back(col);
      count = 0;
      for (int k = 0; k < n; ++k)
        if (k != col && !d(k, col) && !marks.marked(k, col)) scratch_[count++] = k;
      if (count == 0) break;
      const int next = scratch_[std::uniform_int_distribution<int>(0, count - 1)(rng)];
      r.log_prob -= std::log(static_cast<double>(count));
      marks.mark(next, col);
      r.node_walk.push_back(next);
      r.step_roles.push_back(Role::kActive);
      if (active_at_[next] >= 0) {
        r.cycle = {static_cast<std::size_t>(active_at_[next]), r.node_walk.size() - 1};
        break;
      }
      node = next;
    }

    for (int v : touched_) active_at_[v] = passive_at_[v] = -1;
    touched_.clear();
    if (r.cycle) r.violation = violation_of_cycle(r.cycle_entries(), d, g);
    return r;
  }

 private:
  std::vector<int> active_at_;
  std::vector<int> passive_at_;
  std::vector<int> scratch_;
  std::vector<int> touched_;
};

inline Schlaufe detect_schlaufe(const AdjacencyMatrix& d, const GroupAssignment& g, LinkMarks& marks,
                                Rng& rng) {
  SchlaufeDetector detector(d.n_nodes());
  return detector.detect(d, g, marks, rng);
}

// Natural-log probability that the detector produces exactly `walk` from the
// given marks. Marks are updated as the walk is replayed. Throws if a step is
// infeasible.
inline double schlaufe_log_prob(const AdjacencyMatrix& d, LinkMarks& marks, const std::vector<int>& walk) {
  const int n = d.n_nodes();
  double lp = -std::log(static_cast<double>(n));
  for (std::size_t t = 0; t + 1 < walk.size(); ++t) {
    const int from = walk[t];
    const int to = walk[t + 1];
    int count = 0;
    bool feasible = false;
    if (t % 2 == 0) {
      for (int j = 0; j < n; ++j)
        if (d(from, j) && !marks.marked(from, j)) {
          ++count;
          feasible |= (j == to);
        }
      if (feasible) marks.mark(from, to);
    } else {
      for (int k = 0; k < n; ++k)
        if (k != from && !d(k, from) && !marks.marked(k, from)) {
          ++count;
          feasible |= (k == to);
        }
      if (feasible) marks.mark(to, from);
    }
    if (!feasible) throw DataError("walk step " + std::to_string(t) + " is not feasible");
    lp -= std::log(static_cast<double>(count));
  }
  return lp;
}

// Reverses the cycle portion of the walk; the prefix is kept. On the switched
// graph the result is again a schlaufe with the same probability.
inline std::vector<int> reversed_walk(const Schlaufe& r) {
  std::vector<int> walk = r.node_walk;
  if (r.cycle) std::reverse(walk.begin() + r.cycle->first + 1, walk.begin() + r.cycle->second);
  return walk;
}

enum class StepKind { kLazy, kAccepted, kAbandoned };

struct StepOutcome {
  StepKind kind = StepKind::kLazy;
  int cycles_switched = 0;
  long entries_flipped = 0;
  int schlaufen = 0;
};

struct ChainStats {
  long steps = 0;
  long lazy = 0;
  long accepted = 0;   // steps that switched at least one cycle
  long abandoned = 0;
  long entries_flipped = 0;

  double acceptance_rate() const { return steps ? static_cast<double>(accepted) / steps : 0.0; }

  void record(const StepOutcome& o) {
    ++steps;
    if (o.kind == StepKind::kLazy) ++lazy;
    if (o.kind == StepKind::kAbandoned) ++abandoned;
    if (o.cycles_switched > 0) ++accepted;
    entries_flipped += o.entries_flipped;
  }

  ChainStats& operator+=(const ChainStats& o) {
    steps += o.steps;
    lazy += o.lazy;
    accepted += o.accepted;
    abandoned += o.abandoned;
    entries_flipped += o.entries_flipped;
    return *this;
  }
};

// One sequential chain on D_{s,m}. Owns its matrix and marks.
class SchlaufenChain {
 public:
  SchlaufenChain(AdjacencyMatrix start, GroupAssignment groups, double q)
      : d_(std::move(start)), g_(std::move(groups)), q_(q), marks_(d_.n_nodes()), detector_(d_.n_nodes()) {
    if (g_.n_nodes() != d_.n_nodes()) throw DataError("group assignment length differs from node count");
    if (!(q_ >= 0.0 && q_ <= 1.0)) throw UsageError("q must lie in [0, 1]");
#ifndef NDEBUG
    reference_degrees_ = degree_sequence(d_);
    reference_cross_ = cross_link_matrix(d_, g_);
#endif
  }

  const AdjacencyMatrix& state() const { return d_; }
  const GroupAssignment& groups() const { return g_; }
  const ChainStats& stats() const { return stats_; }

  StepOutcome step(Rng& rng) {
    StepOutcome out;
    if (uniform01(rng) < q_) {
      out.kind = StepKind::kLazy;
      stats_.record(out);
      return out;
    }
    ViolationMatrix total = ViolationMatrix::zero(g_.n_groups());
    cycles_.clear();
    for (;;) {
      Schlaufe r = detector_.detect(d_, g_, marks_, rng);
      ++out.schlaufen;
      if (r.has_cycle()) {
        total += r.violation;
        cycles_.push_back(r.cycle_entries());
      }
      if (total.is_zero()) {
        for (const auto& c : cycles_) {
          switch_cycle(d_, c);
          out.entries_flipped += static_cast<long>(c.size());
        }
        out.cycles_switched = static_cast<int>(cycles_.size());
        out.kind = StepKind::kAccepted;
        break;
      }
      if (fair_coin(rng)) {
        out.kind = StepKind::kAbandoned;
        break;
      }
    }
    marks_.clear();
#ifndef NDEBUG
    assert(degree_sequence(d_) == reference_degrees_);
    assert(cross_link_matrix(d_, g_) == reference_cross_);
#endif
    stats_.record(out);
    return out;
  }

  void run(long steps, Rng& rng) {
    for (long t = 0; t < steps; ++t) step(rng);
  }

 private:
  AdjacencyMatrix d_;
  GroupAssignment g_;
  double q_;
  LinkMarks marks_;
  SchlaufeDetector detector_;
  std::vector<std::vector<Arc>> cycles_;
  ChainStats stats_;
#ifndef NDEBUG
  DegreeSequence reference_degrees_;
  CrossLinkMatrix reference_cross_;
#endif
};

// Single move applied in place.
inline StepOutcome markov_step(AdjacencyMatrix& d, const GroupAssignment& g, const ChainConfig& cfg, Rng& rng) {
  SchlaufenChain chain(std::move(d), g, cfg.q);
  StepOutcome out = chain.step(rng);
  d = chain.state();
  return out;
}

// Applies cfg.tau moves to a copy of d. tau <= 0 returns d unchanged.
inline AdjacencyMatrix markov_draw(const AdjacencyMatrix& d, const GroupAssignment& g, const ChainConfig& cfg,
                                   Rng& rng, ChainStats* stats = nullptr) {
  SchlaufenChain chain(d, g, cfg.q);
  chain.run(cfg.tau, rng);
  if (stats) *stats += chain.stats();
  return chain.state();
}

// Smallest tau with expected per-arc modification count >= r, given pilot
// estimates of entries flipped per accepted step and the acceptance rate.
inline long tau_from_pilot(long arcs, double flips_per_accepted, double acceptance, double r) {
  if (r <= 0.0 || arcs <= 0) return 1;
  const double per_step = flips_per_accepted * acceptance;
  if (!(per_step > 0.0))
    throw NumericalError("pilot run produced no accepted switches; the reference set may be a single network "
                         "(frozen) or the pilot is too short");
  return std::max(1L, static_cast<long>(std::ceil(r * static_cast<double>(arcs) / per_step - 1e-9)));
}

struct MixingEstimate {
  long tau = 1;
  ChainStats pilot;
};

inline MixingEstimate mixing_time_heuristic(const AdjacencyMatrix& d, const GroupAssignment& g, double q, Rng& rng,
                                            double r = 10.0, long pilot_steps = 2000) {
  MixingEstimate est;
  if (r <= 0.0) return est;
  SchlaufenChain chain(d, g, q);
  chain.run(pilot_steps, rng);
  est.pilot = chain.stats();
  const double acceptance = est.pilot.acceptance_rate();
  const double flips = est.pilot.accepted ? static_cast<double>(est.pilot.entries_flipped) / est.pilot.accepted : 0.0;
  est.tau = tau_from_pilot(d.arc_count(), flips, acceptance, r);
  return est;
}

// Uniform draw among all digraphs on n nodes with exactly `arcs` arcs.
inline AdjacencyMatrix sample_fixed_density(int n, long arcs, Rng& rng) {
  const long cells = static_cast<long>(n) * (n - 1);
  if (arcs < 0 || arcs > cells) throw DataError("arc count out of range");
  std::vector<long> slots(static_cast<std::size_t>(cells));
  for (long t = 0; t < cells; ++t) slots[t] = t;
  AdjacencyMatrix d(n);
  for (long t = 0; t < arcs; ++t) {
    const long pick = std::uniform_int_distribution<long>(t, cells - 1)(rng);
    std::swap(slots[t], slots[pick]);
    const long s = slots[t];
    const int i = static_cast<int>(s / (n - 1));
    int j = static_cast<int>(s % (n - 1));
    if (j >= i) ++j;
    d.flip(i, j);
  }
  return d;
}

inline constexpr int kEnumerationCellCap = 30;

// Every adjacency matrix with the given degree sequence and cross-link matrix,
// in lexicographic order of cells. Rows are filled with subsets of the right
// size; partial column sums prune the scan.
inline std::vector<AdjacencyMatrix> enumerate_reference_set(const DegreeSequence& s, const CrossLinkMatrix& m,
                                                            const GroupAssignment& g) {
  const int n = static_cast<int>(s.out_degrees.size());
  if (static_cast<int>(s.in_degrees.size()) != n || g.n_nodes() != n)
    throw DataError("degree sequence and group assignment disagree on node count");
  if (n * (n - 1) > kEnumerationCellCap)
    throw UsageError("enumeration is capped at N(N-1) <= " + std::to_string(kEnumerationCellCap) + " (N = " +
                     std::to_string(n) + "); use the Markov chain instead");
  std::vector<AdjacencyMatrix> result;
  long out_total = 0, in_total = 0;
  for (int i = 0; i < n; ++i) {
    if (s.out_degrees[i] < 0 || s.out_degrees[i] > n - 1 || s.in_degrees[i] < 0 || s.in_degrees[i] > n - 1)
      return result;
    out_total += s.out_degrees[i];
    in_total += s.in_degrees[i];
  }
  if (out_total != in_total) return result;

  AdjacencyMatrix d(n);
  std::vector<int> col_sum(n, 0);

  // Recursive fill of row i starting at column `from` with `left` arcs to place.
  auto fill = [&](auto&& self, int i, int from, int left) -> void {
    if (i == n) {
      if (d.arc_count() == out_total && degree_sequence(d) == s && cross_link_matrix(d, g) == m)
        result.push_back(d);
      return;
    }
    if (left == 0) {
      // Remaining columns must still be able to reach their in-degrees.
      for (int j = 0; j < n; ++j) {
        const int rows_left = (n - 1 - i) - (j > i ? 1 : 0);
        if (s.in_degrees[j] - col_sum[j] > rows_left) return;
      }
      const int next = i + 1;
      self(self, next, 0, next < n ? s.out_degrees[next] : 0);
      return;
    }
    for (int j = from; j < n; ++j) {
      if (j == i || col_sum[j] >= s.in_degrees[j]) continue;
      if ((n - j) < left) break;
      d.flip(i, j);
      ++col_sum[j];
      self(self, i, j + 1, left - 1);
      --col_sum[j];
      d.flip(i, j);
    }
  };
  if (n > 0) fill(fill, 0, 0, s.out_degrees[0]);
  std::sort(result.begin(), result.end());
  return result;
}

inline std::vector<AdjacencyMatrix> enumerate_reference_set(const AdjacencyMatrix& d, const GroupAssignment& g) {
  return enumerate_reference_set(degree_sequence(d), cross_link_matrix(d, g), g);
}

}  // namespace stratnet
