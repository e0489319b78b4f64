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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stratnet/error.hpp"
#include "stratnet/graph.hpp"
#include "stratnet/rng.hpp"

namespace stratnet {

// ---------------------------------------------------------------------------
// Logistic distribution.

inline double logistic_cdf(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logistic_pdf(double x) {
  const double e = std::exp(-std::fabs(x));
  return e / ((1.0 + e) * (1.0 + e));
}

// log(1 + exp(x)) without overflow.
inline double log1pexp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double logistic_quantile(double p) { return std::log(p) - std::log1p(-p); }

// ---------------------------------------------------------------------------
// Parameters.

// delta = (lambda, a, b): K x K homophily utilities (row-major), out-effects
// and in-effects.
struct NuisanceParams {
  int k = 1;
  std::vector<double> lambda;
  std::vector<double> a;
  std::vector<double> b;

  static NuisanceParams zero(int n_nodes, int n_groups) {
    return NuisanceParams{n_groups, std::vector<double>(static_cast<std::size_t>(n_groups) * n_groups, 0.0),
                          std::vector<double>(n_nodes, 0.0), std::vector<double>(n_nodes, 0.0)};
  }

  int n_nodes() const { return static_cast<int>(a.size()); }
  double lam(int from, int to) const { return lambda[static_cast<std::size_t>(from) * k + to]; }
  double& lam(int from, int to) { return lambda[static_cast<std::size_t>(from) * k + to]; }

  bool finite() const {
    auto ok = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return ok(lambda) && ok(a) && ok(b);
  }
};

inline constexpr const char* kNormalizationTag = "lambda first row and column fixed at 0; mean(b) = 0";

inline void check_dims(const NuisanceParams& delta, const GroupAssignment& g) {
  if (delta.n_nodes() != g.n_nodes() || static_cast<int>(delta.b.size()) != g.n_nodes())
    throw DataError("parameter vectors do not match the node count");
  if (delta.k != g.n_groups() || delta.lambda.size() != static_cast<std::size_t>(delta.k) * delta.k)
    throw DataError("lambda does not match the number of groups");
}

// Row-major N x N matrix of mu_ij = a_i + b_j + lambda[g(i)][g(j)]; the
// diagonal is left at zero and never read.
using UtilityMatrix = std::vector<double>;

inline UtilityMatrix systematic_utility(const NuisanceParams& delta, const GroupAssignment& g) {
  check_dims(delta, g);
  const int n = g.n_nodes();
  UtilityMatrix mu(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) mu[static_cast<std::size_t>(i) * n + j] = delta.a[i] + delta.b[j] + delta.lam(g[i], g[j]);
  return mu;
}

// Null-direction reparameterization a_i + c_{g(i)}, b_j + e_{g(j)},
// lambda_kl - c_k - e_l; leaves mu unchanged.
inline NuisanceParams shift_null_direction(NuisanceParams delta, const GroupAssignment& g,
                                           const std::vector<double>& c, const std::vector<double>& e) {
  for (int i = 0; i < g.n_nodes(); ++i) {
    delta.a[i] += c[g[i]];
    delta.b[i] += e[g[i]];
  }
  for (int k = 0; k < delta.k; ++k)
    for (int l = 0; l < delta.k; ++l) delta.lam(k, l) -= c[k] + e[l];
  return delta;
}

// ---------------------------------------------------------------------------
// Strategic interaction terms s_ij(d).

enum class StrategicKind { kReciprocity, kTransitivity, kCustomerProduct, kCustom };

struct StrategicSpec {
  StrategicKind kind = StrategicKind::kReciprocity;
  std::function<int(const AdjacencyMatrix&, int, int)> evaluator;
  int s_min = 0;
  int s_max = 1;
  // Nondecreasing in d; with gamma >= 0 the best-response map is monotone.
  bool monotone = true;

  int operator()(const AdjacencyMatrix& d, int i, int j) const { return evaluator(d, i, j); }

  std::string name() const {
    switch (kind) {
      case StrategicKind::kReciprocity: return "reciprocity";
      case StrategicKind::kTransitivity: return "transitivity";
      case StrategicKind::kCustomerProduct: return "customer_product";
      case StrategicKind::kCustom: return "custom";
    }
    return "custom";
  }

  static StrategicSpec reciprocity() {
    return {StrategicKind::kReciprocity, [](const AdjacencyMatrix& d, int i, int j) { return int(d(j, i)); }, 0, 1,
            true};
  }

  // Number of intermediaries k with i -> k -> j.
  static StrategicSpec transitivity(int n_nodes) {
    return {StrategicKind::kTransitivity,
            [](const AdjacencyMatrix& d, int i, int j) {
              int s = 0;
              const auto* ri = d.row(i);
              for (int k = 0; k < d.n_nodes(); ++k)
                if (ri[k] && d(k, j)) ++s;
              return s;
            },
            0, std::max(0, n_nodes - 2), true};
  }

  // (out-degree of i excluding j) x (out-degree of j).
  static StrategicSpec customer_product(int n_nodes) {
    return {StrategicKind::kCustomerProduct,
            [](const AdjacencyMatrix& d, int i, int j) { return (d.out_degree(i) - int(d(i, j))) * d.out_degree(j); },
            0, std::max(0, (n_nodes - 2) * (n_nodes - 1)), true};
  }

  static StrategicSpec custom(std::function<int(const AdjacencyMatrix&, int, int)> f, int s_min, int s_max,
                              bool monotone) {
    return {StrategicKind::kCustom, std::move(f), s_min, s_max, monotone};
  }
};

inline int strategic_term(const StrategicSpec& spec, const AdjacencyMatrix& d, int i, int j) {
  if (i == j) throw UsageError("strategic term is undefined on the diagonal");
  return spec(d, i, j);
}

// s_ij(d) for all ordered pairs, row-major, diagonal zero.
inline std::vector<int> strategic_matrix(const StrategicSpec& spec, const AdjacencyMatrix& d) {
  const int n = d.n_nodes();
  std::vector<int> s(static_cast<std::size_t>(n) * n, 0);
  switch (spec.kind) {
    case StrategicKind::kReciprocity:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) s[static_cast<std::size_t>(i) * n + j] = d(j, i);
      break;
    case StrategicKind::kTransitivity:
      s = two_path_counts(d);
      for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i) * n + i] = 0;
      break;
    case StrategicKind::kCustomerProduct:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) s[static_cast<std::size_t>(i) * n + j] = (d.out_degree(i) - int(d(i, j))) * d.out_degree(j);
      break;
    case StrategicKind::kCustom:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) s[static_cast<std::size_t>(i) * n + j] = spec(d, i, j);
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Null likelihood.

inline double null_log_likelihood(const AdjacencyMatrix& d, const UtilityMatrix& mu) {
  const int n = d.n_nodes();
  double ll = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double m = mu[static_cast<std::size_t>(i) * n + j];
      ll += (d(i, j) ? m : 0.0) - log1pexp(m);
    }
  return ll;
}

inline double null_log_likelihood(const AdjacencyMatrix& d, const GroupAssignment& g, const NuisanceParams& delta) {
  return null_log_likelihood(d, systematic_utility(delta, g));
}

// Gradient of the null log-likelihood in the full (unnormalized) delta.
inline NuisanceParams null_score(const AdjacencyMatrix& d, const GroupAssignment& g, const NuisanceParams& delta) {
  const UtilityMatrix mu = systematic_utility(delta, g);
  const int n = g.n_nodes();
  NuisanceParams grad = NuisanceParams::zero(n, g.n_groups());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = (d(i, j) ? 1.0 : 0.0) - logistic_cdf(mu[static_cast<std::size_t>(i) * n + j]);
      grad.a[i] += r;
      grad.b[j] += r;
      grad.lam(g[i], g[j]) += r;
    }
  return grad;
}

// Expected out-degrees, in-degrees and cross-link counts under mu.
struct FittedMoments {
  std::vector<double> out_degrees;
  std::vector<double> in_degrees;
  std::vector<double> cross_links;  // K x K row-major
};

inline FittedMoments fitted_moments(const UtilityMatrix& mu, const GroupAssignment& g) {
  const int n = g.n_nodes();
  const int k = g.n_groups();
  FittedMoments fm{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                   std::vector<double>(static_cast<std::size_t>(k) * k, 0.0)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double p = logistic_cdf(mu[static_cast<std::size_t>(i) * n + j]);
      fm.out_degrees[i] += p;
      fm.in_degrees[j] += p;
      fm.cross_links[static_cast<std::size_t>(g[i]) * k + g[j]] += p;
    }
  return fm;
}

// Sup-norm of observed minus fitted sufficient statistics.
inline double moment_residual(const AdjacencyMatrix& d, const GroupAssignment& g, const UtilityMatrix& mu) {
  const FittedMoments fm = fitted_moments(mu, g);
  const CrossLinkMatrix m = cross_link_matrix(d, g);
  double worst = 0.0;
  for (int i = 0; i < d.n_nodes(); ++i) {
    worst = std::max(worst, std::fabs(d.out_degree(i) - fm.out_degrees[i]));
    worst = std::max(worst, std::fabs(d.in_degree(i) - fm.in_degrees[i]));
  }
  for (std::size_t t = 0; t < m.counts.size(); ++t)
    worst = std::max(worst, std::fabs(m.counts[t] - fm.cross_links[t]));
  return worst;
}

struct MleOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 200;
  double divergence_bound = 40.0;
};

struct MleResult {
  NuisanceParams params;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;  // sup-norm on the identified parameters
  int iterations = 0;
  bool converged = false;
  std::string normalization = kNormalizationTag;
};

namespace detail {

// Identified coordinates: a (N), b_0..b_{N-2} (b_{N-1} pinned at 0 during the
// solve), lambda_kl for k, l >= 1.
struct MleLayout {
  int n, k;
  int size() const { return 2 * n - 1 + (k - 1) * (k - 1); }
  int a(int i) const { return i; }
  int b(int j) const { return j < n - 1 ? n + j : -1; }
  int lam(int gi, int gj) const { return gi >= 1 && gj >= 1 ? 2 * n - 1 + (gi - 1) * (k - 1) + (gj - 1) : -1; }

  NuisanceParams unpack(const Eigen::VectorXd& x) const {
    NuisanceParams p = NuisanceParams::zero(n, k);
    for (int i = 0; i < n; ++i) p.a[i] = x[a(i)];
    for (int j = 0; j < n - 1; ++j) p.b[j] = x[b(j)];
    for (int gi = 1; gi < k; ++gi)
      for (int gj = 1; gj < k; ++gj) p.lam(gi, gj) = x[lam(gi, gj)];
    return p;
  }
};

inline std::string degree_separation_report(const AdjacencyMatrix& d, const GroupAssignment& g) {
  const int n = d.n_nodes();
  std::ostringstream os;
  bool any = false;
  for (int i = 0; i < n; ++i) {
    std::string why;
    if (d.out_degree(i) == 0) why += " out-degree 0";
    if (d.out_degree(i) == n - 1) why += " out-degree N-1";
    if (d.in_degree(i) == 0) why += " in-degree 0";
    if (d.in_degree(i) == n - 1) why += " in-degree N-1";
    if (!why.empty()) {
      os << (any ? ";" : "") << " node " << i << ":" << why;
      any = true;
    }
  }
  const CrossLinkMatrix m = cross_link_matrix(d, g);
  const std::vector<int> sizes = g.group_sizes();
  for (int k = 0; k < g.n_groups(); ++k)
    for (int l = 0; l < g.n_groups(); ++l) {
      const long cap = static_cast<long>(sizes[k]) * sizes[l] - (k == l ? sizes[k] : 0);
      if (cap > 0 && (m(k, l) == 0 || m(k, l) == cap)) {
        os << (any ? ";" : "") << " cross-link cell (" << k << "," << l << ")"
           << (m(k, l) == 0 ? " empty" : " saturated");
        any = true;
      }
    }
  return any ? os.str() : std::string();
}

}  // namespace detail

// Maximum likelihood estimate of delta under the null by damped Newton on the
// concave logit likelihood. Throws NumericalError on (quasi-)separation.
inline MleResult mle_null(const AdjacencyMatrix& d, const GroupAssignment& g, const MleOptions& opt = {}) {
  const int n = d.n_nodes();
  const int k = g.n_groups();
  if (g.n_nodes() != n) throw DataError("group assignment length differs from node count");
  if (n < 2) throw DataError("need at least two nodes to fit");
  if (const std::string why = detail::degree_separation_report(d, g); !why.empty())
    throw NumericalError("MLE may not exist (quasi-separation):" + why);

  const detail::MleLayout layout{n, k};
  const int p = layout.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd grad(p);
  Eigen::MatrixXd info(p, p);

  auto loglik = [&](const Eigen::VectorXd& v) {
    return null_log_likelihood(d, systematic_utility(layout.unpack(v), g));
  };
  auto score_and_info = [&](const Eigen::VectorXd& v) {
    const UtilityMatrix mu = systematic_utility(layout.unpack(v), g);
    grad.setZero();
    info.setZero();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double pr = logistic_cdf(mu[static_cast<std::size_t>(i) * n + j]);
        const double r = (d(i, j) ? 1.0 : 0.0) - pr;
        const double w = pr * (1.0 - pr);
        const int idx[3] = {layout.a(i), layout.b(j), layout.lam(g[i], g[j])};
        for (int s = 0; s < 3; ++s) {
          if (idx[s] < 0) continue;
          grad[idx[s]] += r;
          for (int t = 0; t < 3; ++t)
            if (idx[t] >= 0) info(idx[s], idx[t]) += w;
        }
      }
  };

  MleResult result;
  double ll = loglik(x);
  for (int it = 0; it < opt.max_iterations; ++it) {
    score_and_info(x);
    result.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    result.iterations = it;
    if (result.gradient_norm < opt.gradient_tolerance) {
      result.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> solver(info);
    Eigen::VectorXd step = solver.solve(grad);
    if (!step.allFinite()) throw NumericalError("MLE may not exist (quasi-separation): singular information matrix");
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 40; ++half, scale *= 0.5) {
      const Eigen::VectorXd trial = x + scale * step;
      const double ll_trial = loglik(trial);
      // Near the optimum the gain of a full Newton step is below the rounding
      // noise of the log-likelihood; such a step is still taken.
      const double slack = half == 0 ? 1e-12 * (1.0 + std::fabs(ll)) : 0.0;
      if (ll_trial > ll - slack) {
        x = trial;
        ll = ll_trial;
        improved = true;
        break;
      }
    }
    if (x.lpNorm<Eigen::Infinity>() > opt.divergence_bound)
      throw NumericalError("MLE may not exist (quasi-separation): a parameter exceeded magnitude " +
                           std::to_string(opt.divergence_bound));
    if (!improved) {
      // No ascent direction left at machine precision.
      score_and_info(x);
      result.gradient_norm = grad.lpNorm<Eigen::Infinity>();
      result.converged = result.gradient_norm < 1e3 * opt.gradient_tolerance;
      break;
    }
  }
  if (!result.converged) {
    score_and_info(x);
    result.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    result.converged = result.gradient_norm < opt.gradient_tolerance;
  }
  if (!result.converged)
    throw NumericalError("MLE may not exist (quasi-separation): gradient stalled at sup-norm " +
                         std::to_string(result.gradient_norm));

  NuisanceParams est = layout.unpack(x);
  double mean_b = 0.0;
  for (double v : est.b) mean_b += v;
  mean_b /= n;
  for (int i = 0; i < n; ++i) {
    est.b[i] -= mean_b;
    est.a[i] += mean_b;
  }
  result.params = std::move(est);
  result.log_likelihood = ll;
  return result;
}

// ---------------------------------------------------------------------------
// Simulation.

// Row-major N x N iid standard logistic draws; diagonal unused (zero).
struct UtilityShockMatrix {
  int n = 0;
  std::vector<double> u;

  double operator()(int i, int j) const { return u[static_cast<std::size_t>(i) * n + j]; }
};

inline UtilityShockMatrix draw_utility_shocks(int n, Rng& rng) {
  UtilityShockMatrix s{n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double p = unif(rng);
      while (p <= 0.0) p = unif(rng);
      s.u[static_cast<std::size_t>(i) * n + j] = logistic_quantile(p);
    }
  return s;
}

// d_ij = 1(mu_ij >= u_ij): the unique outcome when gamma = 0.
inline AdjacencyMatrix null_response(const UtilityMatrix& mu, const UtilityShockMatrix& shocks) {
  const int n = shocks.n;
  AdjacencyMatrix d(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && mu[static_cast<std::size_t>(i) * n + j] >= shocks(i, j)) d.flip(i, j);
  return d;
}

inline AdjacencyMatrix simulate_null(const NuisanceParams& delta, const GroupAssignment& g, Rng& rng) {
  const UtilityMatrix mu = systematic_utility(delta, g);
  return null_response(mu, draw_utility_shocks(g.n_nodes(), rng));
}

struct EquilibriumResult {
  AdjacencyMatrix network;
  int sweeps = 0;
};

// Iterates d <- [1(mu_ij + gamma s_ij(d) >= u_ij)] from the empty network.
// With a monotone spec and gamma >= 0 the iterates increase to the least
// dense pure-strategy equilibrium. Otherwise revisiting an earlier state means
// the map cycles and NumericalError is thrown.
inline EquilibriumResult least_equilibrium(const UtilityMatrix& mu, const UtilityShockMatrix& shocks, double gamma,
                                           const StrategicSpec& spec) {
  const int n = shocks.n;
  const bool tarski = spec.monotone && gamma >= 0.0;
  const long bound = static_cast<long>(n) * (n - 1) + 1;
  EquilibriumResult res{AdjacencyMatrix(n), 0};
  std::set<std::vector<std::uint8_t>> seen;
  for (;;) {
    const std::vector<int> s = strategic_matrix(spec, res.network);
    AdjacencyMatrix next(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const std::size_t t = static_cast<std::size_t>(i) * n + j;
        if (mu[t] + gamma * s[t] >= shocks.u[t]) next.flip(i, j);
      }
    ++res.sweeps;
    if (next == res.network) return res;
    if (tarski) {
      if (res.sweeps > bound) throw NumericalError("fixed-point iteration exceeded its monotone bound");
    } else if (!seen.insert(res.network.cells()).second) {
      throw NumericalError("no monotone fixed point; pure-strategy NE not guaranteed");
    }
    res.network = std::move(next);
  }
}

inline AdjacencyMatrix simulate_alternative(double gamma, const NuisanceParams& delta, const StrategicSpec& spec,
                                            const GroupAssignment& g, Rng& rng) {
  if (!std::isfinite(gamma)) throw UsageError("gamma must be finite");
  const UtilityMatrix mu = systematic_utility(delta, g);
  return least_equilibrium(mu, draw_utility_shocks(g.n_nodes(), rng), gamma, spec).network;
}

}  // namespace stratnet
