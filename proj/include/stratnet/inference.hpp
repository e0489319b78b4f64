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

// Conditional tests for strategic interaction. Under the null every network
// with the observed degree sequence and cross-link matrix is equally likely,
// so critical values come from the uniform distribution on that set.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stratnet/error.hpp"
#include "stratnet/graph.hpp"
#include "stratnet/model.hpp"
#include "stratnet/parallel.hpp"
#include "stratnet/rng.hpp"
#include "stratnet/sampler.hpp"

namespace stratnet {

// ---------------------------------------------------------------------------
// Score statistics.

// sum_{i != j} (d_ij - F(mu_ij)) s_ij(d).
inline double locally_best_statistic(const AdjacencyMatrix& d, const UtilityMatrix& mu, const StrategicSpec& spec) {
  const int n = d.n_nodes();
  const std::vector<int> s = strategic_matrix(spec, d);
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t t = static_cast<std::size_t>(i) * n + j;
      if (s[t] == 0) continue;
      total += ((d(i, j) ? 1.0 : 0.0) - logistic_cdf(mu[t])) * s[t];
    }
  return total;
}

inline double locally_best_statistic(const AdjacencyMatrix& d, const GroupAssignment& g, const NuisanceParams& delta,
                                     const StrategicSpec& spec) {
  return locally_best_statistic(d, systematic_utility(delta, g), spec);
}

// The same score assembled bucket by bucket: the all-outer-bucket term (which
// carries the smallest and largest attainable s) plus the term with exactly
// one inner bucket, each weighted by f/F or f/(1-F). The logistic identity
// f = F(1-F) makes it equal to locally_best_statistic.
inline double bucket_score(const AdjacencyMatrix& d, const UtilityMatrix& mu, const StrategicSpec& spec) {
  const int n = d.n_nodes();
  const std::vector<int> s = strategic_matrix(spec, d);
  const double s_lo = spec.s_min;
  const double s_hi = spec.s_max;
  double outer = 0.0;
  double one_inner = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t t = static_cast<std::size_t>(i) * n + j;
      const double f = logistic_pdf(mu[t]);
      const double below = logistic_cdf(mu[t]);
      const double above = logistic_cdf(-mu[t]);
      if (d(i, j)) {
        outer += s_lo * f / below;
        one_inner += (s[t] - s_lo) * f / below;
      } else {
        outer -= s_hi * f / above;
        one_inner += (s_hi - s[t]) * f / above;
      }
    }
  return outer + one_inner;
}

inline double bucket_score(const AdjacencyMatrix& d, const GroupAssignment& g, const NuisanceParams& delta,
                           const StrategicSpec& spec) {
  return bucket_score(d, systematic_utility(delta, g), spec);
}

// ---------------------------------------------------------------------------
// Reciprocity model with uniform selection among pure-strategy equilibria.

// Outcome probabilities of dyad {i, j}: index = 2 d_ij + d_ji, i.e.
// {empty, j->i only, i->j only, mutual}. Each shock falls in the bucket where
// linking is dominant, contingent on the partner's link, or dominated. For
// gamma >= 0 a dyad with both shocks contingent has the equilibria empty and
// mutual; for gamma < 0 it has the two asymmetric outcomes. Either pair is
// selected one half each. The two branches meet smoothly at gamma = 0.
inline std::array<double, 4> dyad_outcome_probabilities(double mu_ij, double mu_ji, double gamma) {
  if (!std::isfinite(gamma)) throw UsageError("gamma must be finite");
  auto buckets = [gamma](double mu) {
    const double lo = gamma >= 0.0 ? mu : mu + gamma;
    const double hi = gamma >= 0.0 ? mu + gamma : mu;
    const double always = logistic_cdf(lo);
    const double never = logistic_cdf(-hi);
    return std::array<double, 3>{always, std::max(0.0, 1.0 - always - never), never};
  };
  const auto [l1, m1, h1] = buckets(mu_ij);
  const auto [l2, m2, h2] = buckets(mu_ji);
  std::array<double, 4> p{};
  if (gamma >= 0.0) {
    p[3] = l1 * l2 + l1 * m2 + m1 * l2 + 0.5 * m1 * m2;
    p[2] = l1 * h2;
    p[1] = h1 * l2;
    p[0] = h1 * h2 + h1 * m2 + m1 * h2 + 0.5 * m1 * m2;
  } else {
    p[3] = l1 * l2;
    p[2] = l1 * m2 + l1 * h2 + m1 * h2 + 0.5 * m1 * m2;
    p[1] = m1 * l2 + h1 * l2 + h1 * m2 + 0.5 * m1 * m2;
    p[0] = h1 * h2;
  }
  return p;
}

// Exact likelihood of d under the reciprocity specification; dyads are
// independent so the likelihood is the product of dyad outcome probabilities.
inline double exact_reciprocity_likelihood(const AdjacencyMatrix& d, const UtilityMatrix& mu, double gamma) {
  const int n = d.n_nodes();
  double prob = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto p = dyad_outcome_probabilities(mu[static_cast<std::size_t>(i) * n + j],
                                                mu[static_cast<std::size_t>(j) * n + i], gamma);
      prob *= p[2 * int(d(i, j)) + int(d(j, i))];
    }
  return prob;
}

inline double exact_reciprocity_likelihood(const AdjacencyMatrix& d, const GroupAssignment& g,
                                           const NuisanceParams& delta, double gamma) {
  return exact_reciprocity_likelihood(d, systematic_utility(delta, g), gamma);
}

// ---------------------------------------------------------------------------
// Test specification and results.

enum class StatisticKind { kLocallyBest, kTransitivityIndex, kReciprocityIndex };
enum class ReferenceKind { kDensityOnly, kDegreeOnly, kDegreeAndCrossLink, kEnumerated };

inline std::string to_string(StatisticKind k) {
  switch (k) {
    case StatisticKind::kLocallyBest: return "locally_best";
    case StatisticKind::kTransitivityIndex: return "transitivity_index";
    case StatisticKind::kReciprocityIndex: return "reciprocity_index";
  }
  return "?";
}

inline std::string to_string(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::kDensityOnly: return "density_only";
    case ReferenceKind::kDegreeOnly: return "degree_only";
    case ReferenceKind::kDegreeAndCrossLink: return "degree_and_crosslink";
    case ReferenceKind::kEnumerated: return "enumerated";
  }
  return "?";
}

struct TestStatisticSpec {
  StatisticKind kind = StatisticKind::kLocallyBest;
  std::optional<StrategicSpec> strategic;
  // Empty means: fit delta once on the observed network.
  std::optional<NuisanceParams> provided_delta;

  void validate() const {
    if (kind == StatisticKind::kLocallyBest && !strategic)
      throw UsageError("the locally best statistic requires a strategic specification");
  }
};

using StatisticFn = std::function<double(const AdjacencyMatrix&)>;

// Evaluator for the statistic; for the locally best statistic mu is frozen
// at the given delta.
inline StatisticFn make_statistic(const TestStatisticSpec& spec, const GroupAssignment& g,
                                  const std::optional<NuisanceParams>& delta) {
  spec.validate();
  switch (spec.kind) {
    case StatisticKind::kTransitivityIndex:
      return [](const AdjacencyMatrix& d) { return transitivity_index(d); };
    case StatisticKind::kReciprocityIndex:
      return [](const AdjacencyMatrix& d) { return reciprocity_index(d); };
    case StatisticKind::kLocallyBest: {
      if (!delta) throw UsageError("the locally best statistic requires nuisance parameters");
      auto mu = std::make_shared<const UtilityMatrix>(systematic_utility(*delta, g));
      StrategicSpec strategic = *spec.strategic;
      return [mu, strategic](const AdjacencyMatrix& d) { return locally_best_statistic(d, *mu, strategic); };
    }
  }
  throw UsageError("unknown statistic");
}

struct TestDiagnostics {
  double acceptance_rate = 0.0;
  double per_arc_modifications = 0.0;
  long missing_draws = 0;
  ChainStats chain;
};

struct TestResult {
  std::string statistic;
  double observed = 0.0;
  std::vector<double> null_draws;  // NaN marks an undefined draw
  double p_value = 1.0;
  double quantile = 1.0;
  ReferenceKind reference = ReferenceKind::kDegreeAndCrossLink;
  std::uint64_t seed = 0;
  long tau = 0;
  double q = 0.5;
  TestDiagnostics diagnostics;
  std::optional<MleResult> fit;
};

// (1 + #{draws >= observed}) / (valid + 1); undefined draws are skipped.
inline double add_one_p_value(double observed, const std::vector<double>& draws) {
  long valid = 0;
  long at_least = 0;
  for (double v : draws) {
    if (std::isnan(v)) continue;
    ++valid;
    if (v >= observed) ++at_least;
  }
  return (1.0 + at_least) / (valid + 1.0);
}

// Fraction of defined draws that do not exceed the observed value.
inline double observed_quantile(double observed, const std::vector<double>& draws) {
  long valid = 0;
  long below = 0;
  for (double v : draws) {
    if (std::isnan(v)) continue;
    ++valid;
    if (v <= observed) ++below;
  }
  return valid ? static_cast<double>(below) / valid : std::numeric_limits<double>::quiet_NaN();
}

struct SamplingOptions {
  // When set, tau is chosen so each arc is modified about this many times.
  std::optional<double> tau_auto_r;
  long pilot_steps = 2000;
  unsigned jobs = 1;
};

inline constexpr std::uint64_t kPilotStream = 0x70696c6f74ULL;
inline constexpr std::uint64_t kDrawStream = 0x64726177ULL;

struct ReferencePlan {
  GroupAssignment groups;  // single group unless the cross-link matrix is held fixed
  long tau = 0;            // 0 for direct density-only sampling
};

// Resolves the grouping and the number of chain moves per draw. With
// opt.tau_auto_r set, tau comes from a pilot run on the substream
// (cfg.seed, pilot).
inline ReferencePlan plan_reference(const AdjacencyMatrix& d, const GroupAssignment& g, ReferenceKind reference,
                                    const ChainConfig& cfg, const SamplingOptions& opt) {
  if (reference == ReferenceKind::kEnumerated) throw UsageError("the enumerated reference is not sampled");
  ReferencePlan plan;
  plan.groups = reference == ReferenceKind::kDegreeAndCrossLink ? g : GroupAssignment::single(d.n_nodes());
  if (reference == ReferenceKind::kDensityOnly) return plan;
  if (opt.tau_auto_r) {
    Rng pilot_rng = substream(cfg.seed, {kPilotStream});
    plan.tau = mixing_time_heuristic(d, plan.groups, cfg.q, pilot_rng, *opt.tau_auto_r, opt.pilot_steps).tau;
  } else {
    cfg.validate();
    plan.tau = cfg.tau;
  }
  return plan;
}

// Draw b of the reference set: substream (cfg.seed, b), then either direct
// arc placement or an independent chain of plan.tau moves started at d.
inline AdjacencyMatrix reference_draw(const AdjacencyMatrix& d, const ReferencePlan& plan, ReferenceKind reference,
                                      const ChainConfig& cfg, std::uint64_t b, ChainStats* stats = nullptr) {
  Rng rng = substream(cfg.seed, {kDrawStream, b});
  if (reference == ReferenceKind::kDensityOnly) return sample_fixed_density(d.n_nodes(), d.arc_count(), rng);
  SchlaufenChain chain(d, plan.groups, cfg.q);
  chain.run(plan.tau, rng);
  if (stats) *stats = chain.stats();
  return chain.state();
}

struct ReferenceStatistics {
  std::vector<std::vector<double>> values;  // [statistic][draw]
  long tau = 0;
  ChainStats chain;
};

// Evaluates every statistic on `draws` reference networks.
inline ReferenceStatistics reference_statistics(const AdjacencyMatrix& d, const GroupAssignment& g,
                                                ReferenceKind reference, long draws, const ChainConfig& cfg,
                                                const SamplingOptions& opt, const std::vector<StatisticFn>& stats) {
  if (draws < 1) throw UsageError("at least one reference draw is required");
  const ReferencePlan plan = plan_reference(d, g, reference, cfg, opt);
  ReferenceStatistics out;
  out.tau = plan.tau;
  out.values.assign(stats.size(), std::vector<double>(static_cast<std::size_t>(draws), 0.0));
  std::vector<ChainStats> per_draw(static_cast<std::size_t>(draws));
  parallel_for(static_cast<std::size_t>(draws), opt.jobs, [&](std::size_t b) {
    const AdjacencyMatrix net = reference_draw(d, plan, reference, cfg, b, &per_draw[b]);
    for (std::size_t s = 0; s < stats.size(); ++s) out.values[s][b] = stats[s](net);
  });
  for (const auto& c : per_draw) out.chain += c;
  return out;
}

// Statistic on every member of the enumerated reference set.
inline std::vector<double> exact_reference_statistics(const AdjacencyMatrix& d, const GroupAssignment& g,
                                                      const StatisticFn& stat) {
  const auto set = enumerate_reference_set(d, g);
  std::vector<double> values;
  values.reserve(set.size());
  for (const auto& v : set) values.push_back(stat(v));
  return values;
}

inline TestResult conditional_p_value(const AdjacencyMatrix& d, const GroupAssignment& g,
                                      const TestStatisticSpec& spec, ReferenceKind reference, long draws,
                                      const ChainConfig& cfg, const SamplingOptions& opt = {}) {
  spec.validate();
  if (draws < 1) throw UsageError("at least one reference draw is required");
  TestResult res;
  res.statistic = to_string(spec.kind);
  res.reference = reference;
  res.seed = cfg.seed;
  res.q = cfg.q;

  std::optional<NuisanceParams> delta = spec.provided_delta;
  if (spec.kind == StatisticKind::kLocallyBest && !delta) {
    res.fit = mle_null(d, g);
    delta = res.fit->params;
  }
  const StatisticFn stat = make_statistic(spec, g, delta);
  res.observed = stat(d);
  if (std::isnan(res.observed)) throw NumericalError("statistic is undefined on the observed network");

  if (reference == ReferenceKind::kEnumerated) {
    res.null_draws = exact_reference_statistics(d, g, stat);
    long at_least = 0;
    for (double v : res.null_draws) at_least += (v >= res.observed) ? 1 : 0;
    // The observed network is itself a member of the enumerated set.
    res.p_value = static_cast<double>(at_least) / static_cast<double>(res.null_draws.size());
    res.quantile = observed_quantile(res.observed, res.null_draws);
    return res;
  }

  ReferenceStatistics ref = reference_statistics(d, g, reference, draws, cfg, opt, {stat});
  res.null_draws = std::move(ref.values[0]);
  res.tau = ref.tau;
  res.diagnostics.chain = ref.chain;
  res.diagnostics.acceptance_rate = ref.chain.acceptance_rate();
  res.diagnostics.per_arc_modifications =
      d.arc_count() > 0 ? static_cast<double>(ref.chain.entries_flipped) / (static_cast<double>(draws) * d.arc_count())
                        : 0.0;
  for (double v : res.null_draws) res.diagnostics.missing_draws += std::isnan(v) ? 1 : 0;
  res.p_value = add_one_p_value(res.observed, res.null_draws);
  res.quantile = observed_quantile(res.observed, res.null_draws);
  return res;
}

// ---------------------------------------------------------------------------
// Exact randomized test on an enumerable reference set.

struct CriticalValues {
  double c = 0.0;  // reject when R > c
  double g = 0.0;  // reject with probability g when R == c
};

namespace detail {
inline bool same_value(double x, double y) {
  return std::fabs(x - y) <= 1e-9 * std::max(1.0, std::max(std::fabs(x), std::fabs(y)));
}
}  // namespace detail

// c is the smallest attained value whose upper tail P(R > c) is strictly
// below alpha, so that g = (alpha - P(R > c)) / P(R = c) lies in (0, 1] and
// the test has exact size alpha. alpha >= 1 rejects always (c = -inf).
inline CriticalValues critical_values_from(std::vector<double> values, double alpha) {
  if (values.empty()) throw UsageError("empty reference distribution");
  if (alpha >= 1.0) return {-std::numeric_limits<double>::infinity(), 1.0};
  if (alpha <= 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
  std::sort(values.begin(), values.end(), std::greater<>());
  const double total = static_cast<double>(values.size());
  double above = 0.0;  // P(R > current value)
  CriticalValues cv{values.front(), 0.0};
  std::size_t t = 0;
  while (t < values.size()) {
    std::size_t u = t;
    while (u < values.size() && detail::same_value(values[u], values[t])) ++u;
    const double at = static_cast<double>(u - t) / total;
    if (above >= alpha) break;
    cv = {values[t], (alpha - above) / at};
    above += at;
    t = u;
  }
  cv.g = std::min(1.0, cv.g);
  return cv;
}

inline double critical_function(double value, const CriticalValues& cv) {
  if (std::isinf(cv.c) && cv.c < 0) return 1.0;
  if (detail::same_value(value, cv.c)) return cv.g;
  return value > cv.c ? 1.0 : 0.0;
}

inline CriticalValues exact_conditional_critical_values(const AdjacencyMatrix& d, const GroupAssignment& g,
                                                        const StatisticFn& stat, double alpha) {
  return critical_values_from(exact_reference_statistics(d, g, stat), alpha);
}

}  // namespace stratnet
