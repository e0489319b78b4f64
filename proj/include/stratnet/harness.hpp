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

// Size and power experiments for the conditional tests.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stratnet/error.hpp"
#include "stratnet/graph.hpp"
#include "stratnet/inference.hpp"
#include "stratnet/model.hpp"
#include "stratnet/parallel.hpp"
#include "stratnet/rng.hpp"
#include "stratnet/sampler.hpp"

namespace stratnet {

// One agent type: out-effect a, in-effect b and group x.
struct SupportPoint {
  double a = 0.0;
  double b = 0.0;
  int group = 0;
};

// Discrete type distribution plus the group-pair utilities.
struct Population {
  std::vector<SupportPoint> points;
  std::vector<double> weights;  // empty means equally likely
  int k = 1;
  std::vector<double> lambda;  // k x k row-major

  // Two levels of a and b, two groups, every combination equally likely.
  static Population design(double a_high = 1.1, double a_low = -1.1, double b_high = 1.1, double b_low = -1.1,
                           double same = 0.0, double cross = -2.2) {
    Population p;
    p.k = 2;
    p.lambda = {same, cross, cross, same};
    for (double a : {a_low, a_high})
      for (double b : {b_low, b_high})
        for (int x : {0, 1}) p.points.push_back({a, b, x});
    return p;
  }

  void validate() const {
    if (points.empty()) throw UsageError("population has no support points");
    if (k < 1 || lambda.size() != static_cast<std::size_t>(k) * k) throw UsageError("lambda must be k x k");
    if (!weights.empty() && weights.size() != points.size()) throw UsageError("one weight per support point");
    for (double w : weights)
      if (!(w >= 0.0)) throw UsageError("weights must be nonnegative");
    for (const auto& s : points)
      if (s.group < 0 || s.group >= k) throw UsageError("support point group out of range");
  }
};

struct AgentDraw {
  GroupAssignment groups;
  NuisanceParams delta;
};

inline AgentDraw draw_agents(int n, const Population& pop, Rng& rng) {
  pop.validate();
  std::vector<double> w = pop.weights.empty() ? std::vector<double>(pop.points.size(), 1.0) : pop.weights;
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<int> x(static_cast<std::size_t>(n));
  NuisanceParams delta = NuisanceParams::zero(n, pop.k);
  delta.lambda = pop.lambda;
  for (int i = 0; i < n; ++i) {
    const SupportPoint& s = pop.points[pick(rng)];
    delta.a[i] = s.a;
    delta.b[i] = s.b;
    x[i] = s.group;
  }
  return {GroupAssignment(std::move(x), pop.k), std::move(delta)};
}

enum class HarnessStatistic { kLocallyBestInfeasible, kLocallyBestFeasible, kTransitivityIndex };

inline std::string to_string(HarnessStatistic s) {
  switch (s) {
    case HarnessStatistic::kLocallyBestInfeasible: return "locally_best_infeasible";
    case HarnessStatistic::kLocallyBestFeasible: return "locally_best_feasible";
    case HarnessStatistic::kTransitivityIndex: return "transitivity_index";
  }
  return "?";
}

inline HarnessStatistic harness_statistic_from_string(const std::string& s) {
  for (auto k : {HarnessStatistic::kLocallyBestInfeasible, HarnessStatistic::kLocallyBestFeasible,
                 HarnessStatistic::kTransitivityIndex})
    if (to_string(k) == s) return k;
  throw UsageError("unknown statistic: " + s);
}

struct ExperimentConfig {
  int n_nodes = 24;
  std::vector<double> gammas{0.0, 0.05, 0.1, 0.15, 0.2};
  long replications = 200;
  long draws_per_test = 200;
  double alpha = 0.05;
  std::vector<HarnessStatistic> statistics{HarnessStatistic::kLocallyBestInfeasible,
                                           HarnessStatistic::kLocallyBestFeasible,
                                           HarnessStatistic::kTransitivityIndex};
  std::uint64_t seed = 20260101;
  Population population = Population::design();
  StrategicKind strategic = StrategicKind::kTransitivity;
  double q = 0.5;
  // Each arc is modified about tau_r times per reference draw.
  double tau_r = 10.0;
  long pilot_steps = 2000;
  unsigned jobs = 1;

  void validate() const {
    if (n_nodes < 3) throw UsageError("n_nodes must be at least 3");
    if (gammas.empty()) throw UsageError("no gamma values");
    for (double g : gammas)
      if (!std::isfinite(g) || g < 0.0) throw UsageError("gamma values must be finite and nonnegative");
    if (replications < 1) throw UsageError("replications must be positive");
    if (draws_per_test < 1) throw UsageError("draws_per_test must be positive");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in [0, 1)");
    if (statistics.empty()) throw UsageError("no statistics");
    if (!(q > 0.0 && q < 1.0)) throw UsageError("q must lie in (0, 1)");
    population.validate();
  }

  StrategicSpec strategic_spec() const {
    switch (strategic) {
      case StrategicKind::kReciprocity: return StrategicSpec::reciprocity();
      case StrategicKind::kTransitivity: return StrategicSpec::transitivity(n_nodes);
      case StrategicKind::kCustomerProduct: return StrategicSpec::customer_product(n_nodes);
      case StrategicKind::kCustom: break;
    }
    throw UsageError("the harness supports the builtin strategic specifications only");
  }
};

struct PowerRow {
  double gamma = 0.0;
  HarnessStatistic statistic = HarnessStatistic::kLocallyBestFeasible;
  double reject_rate = 0.0;
  double se = 0.0;
  long reps = 0;  // replications that produced a decision
  long failures = 0;
};

struct PowerTable {
  std::vector<PowerRow> rows;

  const PowerRow& find(double gamma, HarnessStatistic s) const {
    for (const auto& r : rows)
      if (r.gamma == gamma && r.statistic == s) return r;
    throw UsageError("no such row");
  }
};

namespace detail {

inline constexpr std::uint64_t kReplicationStream = 0x7265706cULL;

inline std::vector<int> run_replication(const ExperimentConfig& cfg, const StrategicSpec& spec, double gamma,
                                        std::uint64_t rep_seed) {
  const std::size_t n_stats = cfg.statistics.size();
  std::vector<int> decision(n_stats, -1);
  Rng rng = substream(rep_seed, {0});
  const AgentDraw agents = draw_agents(cfg.n_nodes, cfg.population, rng);
  const AdjacencyMatrix d = gamma == 0.0 ? simulate_null(agents.delta, agents.groups, rng)
                                         : simulate_alternative(gamma, agents.delta, spec, agents.groups, rng);

  bool need_fit = false;
  for (auto s : cfg.statistics) need_fit |= s == HarnessStatistic::kLocallyBestFeasible;
  std::optional<NuisanceParams> fitted;
  if (need_fit) {
    try {
      fitted = mle_null(d, agents.groups).params;
    } catch (const NumericalError&) {
      return decision;  // the whole replication is excluded
    }
  }

  std::vector<StatisticFn> fns;
  for (auto s : cfg.statistics) {
    TestStatisticSpec ts;
    switch (s) {
      case HarnessStatistic::kLocallyBestInfeasible:
        ts = {StatisticKind::kLocallyBest, spec, agents.delta};
        break;
      case HarnessStatistic::kLocallyBestFeasible:
        ts = {StatisticKind::kLocallyBest, spec, fitted};
        break;
      case HarnessStatistic::kTransitivityIndex:
        ts = {StatisticKind::kTransitivityIndex, std::nullopt, std::nullopt};
        break;
    }
    fns.push_back(make_statistic(ts, agents.groups, ts.provided_delta));
  }

  ChainConfig chain{1, cfg.q, substream_seed(rep_seed, {1})};
  SamplingOptions opt;
  opt.tau_auto_r = cfg.tau_r;
  opt.pilot_steps = cfg.pilot_steps;
  ReferenceStatistics ref;
  try {
    ref = reference_statistics(d, agents.groups, ReferenceKind::kDegreeAndCrossLink, cfg.draws_per_test, chain, opt,
                               fns);
  } catch (const NumericalError&) {
    return decision;  // frozen chain
  }
  for (std::size_t s = 0; s < n_stats; ++s) {
    const double observed = fns[s](d);
    if (std::isnan(observed)) continue;
    decision[s] = add_one_p_value(observed, ref.values[s]) <= cfg.alpha ? 1 : 0;
  }
  return decision;
}

}  // namespace detail

// For every gamma and replication: draw agent types, simulate the network
// (independent links at gamma = 0, least dense equilibrium otherwise), then
// test with every configured statistic against one shared set of reference
// draws. Replication r at grid point t uses the substream (seed, t, r).
inline PowerTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const StrategicSpec spec = cfg.strategic_spec();
  const std::size_t n_stats = cfg.statistics.size();
  PowerTable table;
  for (std::size_t t = 0; t < cfg.gammas.size(); ++t) {
    const double gamma = cfg.gammas[t];
    std::vector<std::vector<int>> outcomes(static_cast<std::size_t>(cfg.replications));
    parallel_for(outcomes.size(), cfg.jobs, [&](std::size_t r) {
      outcomes[r] = detail::run_replication(cfg, spec, gamma,
                                            substream_seed(cfg.seed, {detail::kReplicationStream, t, r}));
    });
    for (std::size_t s = 0; s < n_stats; ++s) {
      PowerRow row;
      row.gamma = gamma;
      row.statistic = cfg.statistics[s];
      long rejects = 0;
      for (const auto& o : outcomes) {
        if (o[s] < 0) {
          ++row.failures;
          continue;
        }
        ++row.reps;
        rejects += o[s];
      }
      row.reject_rate = row.reps ? static_cast<double>(rejects) / row.reps : 0.0;
      row.se = row.reps ? std::sqrt(row.reject_rate * (1.0 - row.reject_rate) / row.reps) : 0.0;
      table.rows.push_back(row);
    }
  }
  return table;
}

struct CalibrationEntry {
  std::string label;
  double utility = 0.0;
  double probability = 0.0;
};

// Null link probabilities of the Monte Carlo design.
inline std::vector<CalibrationEntry> design_calibration(double a_high = 1.1, double a_low = -1.1,
                                                        double b_high = 1.1, double b_low = -1.1, double same = 0.0,
                                                        double cross = -2.2) {
  std::vector<CalibrationEntry> out = {
      {"F(aH + bH + l00)", a_high + b_high + same, 0.0}, {"F(aH + bL + l00)", a_high + b_low + same, 0.0},
      {"F(aL + bL + l00)", a_low + b_low + same, 0.0},   {"F(aH + bH + l01)", a_high + b_high + cross, 0.0},
      {"F(aH + bL + l01)", a_high + b_low + cross, 0.0}, {"F(aL + bL + l01)", a_low + b_low + cross, 0.0},
  };
  for (auto& e : out) e.probability = logistic_cdf(e.utility);
  return out;
}

struct DesignSummary {
  double mean_density = 0.0;
  double mean_transitivity = 0.0;
  double mean_in_degree_sd = 0.0;
  double mean_out_degree_sd = 0.0;
  long replications = 0;
};

// Population standard deviation (divisor N).
inline double degree_sd(const std::vector<int>& deg) {
  const double n = static_cast<double>(deg.size());
  const double mean = std::accumulate(deg.begin(), deg.end(), 0.0) / n;
  double ss = 0.0;
  for (int v : deg) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

// Averages of descriptive statistics over independent null networks.
inline DesignSummary null_design_summary(int n, long replications, std::uint64_t seed,
                                         const Population& pop = Population::design(), unsigned jobs = 1) {
  if (replications < 1) throw UsageError("replications must be positive");
  struct One {
    double density, ti, in_sd, out_sd;
  };
  std::vector<One> per(static_cast<std::size_t>(replications));
  parallel_for(per.size(), jobs, [&](std::size_t r) {
    Rng rng = substream(seed, {r});
    const AgentDraw agents = draw_agents(n, pop, rng);
    const AdjacencyMatrix d = simulate_null(agents.delta, agents.groups, rng);
    const DegreeSequence s = degree_sequence(d);
    per[r] = {density(d), transitivity_index(d), degree_sd(s.in_degrees), degree_sd(s.out_degrees)};
  });
  DesignSummary out;
  long ti_count = 0;
  for (const auto& o : per) {
    out.mean_density += o.density;
    out.mean_in_degree_sd += o.in_sd;
    out.mean_out_degree_sd += o.out_sd;
    if (!std::isnan(o.ti)) {
      out.mean_transitivity += o.ti;
      ++ti_count;
    }
  }
  out.replications = replications;
  out.mean_density /= replications;
  out.mean_in_degree_sd /= replications;
  out.mean_out_degree_sd /= replications;
  out.mean_transitivity = ti_count ? out.mean_transitivity / ti_count : std::nan("");
  return out;
}

}  // namespace stratnet
