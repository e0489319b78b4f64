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

// Fixtures and brute-force oracles shared by the test binaries. Nothing here
// calls into the library routine it is used to check.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "stratnet/graph.hpp"
#include "stratnet/rng.hpp"

namespace stratnet::testing {

inline AdjacencyMatrix random_digraph(int n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  AdjacencyMatrix d(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && coin(rng)) d.flip(i, j);
  return d;
}

inline GroupAssignment random_groups(int n, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> g(n);
  for (int i = 0; i < n; ++i) g[i] = i < k ? i : static_cast<int>(rng() % k);
  return GroupAssignment(g, k);
}

inline AdjacencyMatrix complete_digraph(int n) {
  AdjacencyMatrix d(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) d.flip(i, j);
  return d;
}

// Arc list from a plain 0/1 grid.
inline AdjacencyMatrix from_grid(const std::vector<std::vector<int>>& grid) {
  const int n = static_cast<int>(grid.size());
  AdjacencyMatrix d(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (grid[i][j]) d.set(i, j, true);
  return d;
}

// Counts 0/1 matrices with zero diagonal, given row sums, column sums and
// group-pair counts, by filling cells one at a time in column-major order.
// Deliberately a different traversal from the library's row-subset scan.
inline long backtrack_count(const std::vector<int>& out, const std::vector<int>& in, const GroupAssignment& g,
                            const std::vector<long>& m) {
  const int n = static_cast<int>(out.size());
  const int k = g.n_groups();
  std::vector<int> row(n, 0), col(n, 0);
  std::vector<long> cell(static_cast<std::size_t>(k) * k, 0);
  long count = 0;
  auto rec = [&](auto&& self, int t) -> void {
    if (t == n * n) {
      for (int i = 0; i < n; ++i)
        if (row[i] != out[i] || col[i] != in[i]) return;
      if (cell == m) ++count;
      return;
    }
    const int j = t / n;
    const int i = t % n;
    if (i == 0 && j > 0 && col[j - 1] != in[j - 1]) return;
    if (i == j) {
      self(self, t + 1);
      return;
    }
    self(self, t + 1);
    const std::size_t c = static_cast<std::size_t>(g[i]) * k + g[j];
    if (row[i] < out[i] && col[j] < in[j] && cell[c] < m[c]) {
      ++row[i], ++col[j], ++cell[c];
      self(self, t + 1);
      --row[i], --col[j], --cell[c];
    }
  };
  rec(rec, 0);
  return count;
}

// Upper regularized gamma Q(a, x) for the chi-square survival function.
inline double chi_square_survival(double stat, int df) {
  const double a = 0.5 * df;
  const double x = 0.5 * stat;
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) {
    double sum = 1.0 / a, term = sum;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (term < sum * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // Continued fraction (Lentz).
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace stratnet::testing
