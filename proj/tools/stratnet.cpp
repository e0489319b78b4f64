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


// Command-line front end.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stratnet/error.hpp"
#include "stratnet/graph.hpp"
#include "stratnet/harness.hpp"
#include "stratnet/inference.hpp"
#include "stratnet/io.hpp"
#include "stratnet/model.hpp"
#include "stratnet/parallel.hpp"
#include "stratnet/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stratnet;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned jobs = default_jobs();
  bool one_based = false;
};

struct Run {
  io::RunManifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
    if (seed) {
      manifest.seed = *seed;
    } else {
      std::random_device rd;
      manifest.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      manifest.seed_from_entropy = true;
      std::cerr << "seed " << manifest.seed << " drawn from system entropy\n";
    }
    return manifest.seed;
  }

  void input(const std::string& path) { manifest.input_digests[path] = io::file_digest(path); }
  void warn(const std::string& w) {
    std::cerr << "warning: " << w << '\n';
    manifest.warnings.push_back(w);
  }

  // The manifest lives next to the primary output.
  void finish(const fs::path& out) {
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fs::path dir = fs::is_directory(out) ? out : out.parent_path();
    if (dir.empty()) dir = ".";
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    f << manifest.to_json().dump(2) << '\n';
  }
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

struct Network {
  AdjacencyMatrix d;
  io::NodeTable nodes;
};

Network load_network(Run& run, const std::string& edges, const std::string& nodes, bool one_based) {
  Network net;
  int n = -1;
  if (!nodes.empty()) {
    run.input(nodes);
    net.nodes = io::read_nodes_csv(nodes, one_based);
    n = net.nodes.groups.n_nodes();
  }
  run.input(edges);
  std::size_t dups = 0;
  net.d = io::read_edges_csv(edges, n, one_based, &dups);
  if (dups) run.warn(std::to_string(dups) + " duplicate edge rows collapsed");
  if (nodes.empty()) net.nodes = {GroupAssignment::single(net.d.n_nodes()), {"all"}};
  return net;
}

StrategicSpec parse_spec(const std::string& s, int n) {
  if (s == "reciprocity") return StrategicSpec::reciprocity();
  if (s == "transitivity") return StrategicSpec::transitivity(n);
  if (s == "customer-product" || s == "customer_product") return StrategicSpec::customer_product(n);
  throw UsageError("unknown strategic specification: " + s);
}

ReferenceKind parse_reference(const std::string& s) {
  if (s == "density") return ReferenceKind::kDensityOnly;
  if (s == "degree") return ReferenceKind::kDegreeOnly;
  if (s == "degree-crosslink") return ReferenceKind::kDegreeAndCrossLink;
  if (s == "enumerated") return ReferenceKind::kEnumerated;
  throw UsageError("unknown reference set: " + s);
}

StatisticKind parse_statistic(const std::string& s) {
  if (s == "locally-best") return StatisticKind::kLocallyBest;
  if (s == "ti") return StatisticKind::kTransitivityIndex;
  if (s == "reciprocity") return StatisticKind::kReciprocityIndex;
  throw UsageError("unknown statistic: " + s);
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "root seed (system entropy when absent)");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--one-based", c.one_based, "node ids in CSV files start at 1");
}

struct ChainFlags {
  long tau = 0;
  std::optional<double> tau_auto;
  double q = 0.5;
  long pilot = 2000;

  void add(CLI::App* cmd) {
    auto* t = cmd->add_option("--tau", tau, "chain moves per draw");
    auto* a = cmd->add_option("--tau-auto", tau_auto, "choose tau so each arc is modified about r times");
    t->excludes(a);
    cmd->add_option("--q", q, "lazy step probability");
    cmd->add_option("--pilot-steps", pilot, "pilot run length for --tau-auto");
  }

  SamplingOptions options(unsigned jobs) const {
    SamplingOptions o;
    o.tau_auto_r = tau_auto;
    if (!tau_auto && tau == 0) o.tau_auto_r = 10.0;
    o.pilot_steps = pilot;
    o.jobs = jobs;
    return o;
  }
};

json chain_json(const ChainFlags& f) {
  json j{{"q", f.q}, {"pilot_steps", f.pilot}};
  if (f.tau_auto) j["tau_auto"] = *f.tau_auto;
  if (f.tau) j["tau"] = f.tau;
  return j;
}

// ---------------------------------------------------------------------------

int cmd_sample(const Common& c, const std::string& edges, const std::string& nodes, long draws,
               const ChainFlags& chain, const std::string& reference, const std::string& out) {
  Run run;
  run.manifest.subcommand = "sample";
  const Network net = load_network(run, edges, nodes, c.one_based);
  const ReferenceKind ref = parse_reference(reference);
  if (ref == ReferenceKind::kEnumerated) throw UsageError("use the enumerate subcommand for the full set");
  if (draws < 1) throw UsageError("--draws must be positive");
  ChainConfig cfg{std::max(1L, chain.tau), chain.q, run.resolve_seed(c.seed)};
  const SamplingOptions opt = chain.options(c.jobs);
  const ReferencePlan plan = plan_reference(net.d, net.nodes.groups, ref, cfg, opt);

  std::vector<AdjacencyMatrix> nets(static_cast<std::size_t>(draws));
  std::vector<ChainStats> stats(nets.size());
  parallel_for(nets.size(), c.jobs, [&](std::size_t b) { nets[b] = reference_draw(net.d, plan, ref, cfg, b, &stats[b]); });
  ChainStats total;
  for (const auto& s : stats) total += s;

  const fs::path out_path(out);
  if (out_path.extension() == ".csv") {
    auto f = open_output(out_path);
    io::write_draws_csv(f, nets, c.one_based);
  } else {
    fs::create_directories(out_path);
    for (std::size_t b = 0; b < nets.size(); ++b) {
      char name[32];
      std::snprintf(name, sizeof name, "draw_%06zu.csv", b);
      auto f = open_output(out_path / name);
      io::write_edges_csv(f, nets[b], c.one_based);
    }
  }
  run.manifest.config = {{"edges", edges}, {"nodes", nodes}, {"draws", draws}, {"reference", reference},
                         {"tau", plan.tau}, {"chain", chain_json(chain)}, {"one_based", c.one_based}};
  run.manifest.config["acceptance_rate"] = total.acceptance_rate();
  run.finish(out_path);
  std::cout << "wrote " << draws << " draws (tau " << plan.tau << ")\n";
  return 0;
}

int cmd_fit(const Common& c, const std::string& edges, const std::string& nodes, const std::string& out) {
  Run run;
  run.manifest.subcommand = "fit";
  const Network net = load_network(run, edges, nodes, c.one_based);
  const MleResult fit = mle_null(net.d, net.nodes.groups);
  auto f = open_output(out);
  f << io::fit_to_json(fit, net.nodes.groups, net.nodes.labels).dump(2) << '\n';
  run.manifest.config = {{"edges", edges}, {"nodes", nodes}, {"one_based", c.one_based}};
  run.finish(fs::path(out));
  std::cout << "converged in " << fit.iterations << " iterations, gradient sup-norm "
            << io::format_real(fit.gradient_norm) << '\n';
  return 0;
}

int cmd_simulate(const Common& c, const std::string& params, double gamma, const std::string& spec_name,
                 const std::string& out) {
  Run run;
  run.manifest.subcommand = "simulate";
  run.input(params);
  const io::ParamsFile p = io::read_params_json(params);
  const StrategicSpec spec = parse_spec(spec_name, p.groups.n_nodes());
  Rng rng = substream(run.resolve_seed(c.seed), {0});
  const AdjacencyMatrix d = simulate_alternative(gamma, p.params, spec, p.groups, rng);
  auto f = open_output(out);
  io::write_edges_csv(f, d, c.one_based);
  run.manifest.config = {{"params", params}, {"gamma", gamma}, {"spec", spec_name},
                         {"selection", "least dense pure-strategy equilibrium"}, {"one_based", c.one_based}};
  run.finish(fs::path(out));
  std::cout << "wrote " << d.arc_count() << " arcs\n";
  return 0;
}

int cmd_test(const Common& c, const std::string& edges, const std::string& nodes, const std::string& statistic,
             const std::string& spec_name, const std::string& reference, long draws, const ChainFlags& chain,
             const std::string& delta_path, const std::string& out, const std::string& null_out) {
  Run run;
  run.manifest.subcommand = "test";
  const Network net = load_network(run, edges, nodes, c.one_based);
  TestStatisticSpec spec;
  spec.kind = parse_statistic(statistic);
  if (spec.kind == StatisticKind::kLocallyBest) {
    if (spec_name.empty()) throw UsageError("--spec is required for the locally best statistic");
    spec.strategic = parse_spec(spec_name, net.d.n_nodes());
    if (!delta_path.empty()) {
      run.input(delta_path);
      spec.provided_delta = io::read_params_json(delta_path).params;
    }
  }
  ChainConfig cfg{std::max(1L, chain.tau), chain.q, run.resolve_seed(c.seed)};
  const TestResult r =
      conditional_p_value(net.d, net.nodes.groups, spec, parse_reference(reference), draws, cfg, chain.options(c.jobs));
  if (r.diagnostics.missing_draws)
    run.warn(std::to_string(r.diagnostics.missing_draws) + " reference draws left the statistic undefined");

  json j = io::result_to_json(r);
  if (spec.kind == StatisticKind::kTransitivityIndex) j["statistic_definition"] = "TI (closed two-path ratio)";
  if (spec.strategic) j["spec"] = spec.strategic->name();
  auto f = open_output(out);
  f << j.dump(2) << '\n';
  if (!null_out.empty()) {
    auto g = open_output(null_out);
    io::write_values_csv(g, "statistic", r.null_draws);
  }
  run.manifest.config = {{"edges", edges},     {"nodes", nodes}, {"statistic", statistic},
                         {"spec", spec_name},  {"reference", reference}, {"draws", draws},
                         {"chain", chain_json(chain)}, {"delta", delta_path.empty() ? "fitted" : delta_path},
                         {"one_based", c.one_based}};
  run.finish(fs::path(out));
  std::cout << "observed " << io::format_real(r.observed) << "  p-value " << io::format_real(r.p_value) << '\n';
  return 0;
}

ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.n_nodes = j.value("n_nodes", cfg.n_nodes);
    cfg.gammas = j.value("gammas", cfg.gammas);
    cfg.replications = j.value("replications", cfg.replications);
    cfg.draws_per_test = j.value("draws_per_test", cfg.draws_per_test);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.q = j.value("q", cfg.q);
    cfg.tau_r = j.value("tau_r", cfg.tau_r);
    cfg.pilot_steps = j.value("pilot_steps", cfg.pilot_steps);
    if (j.contains("statistics")) {
      cfg.statistics.clear();
      for (const auto& s : j.at("statistics")) cfg.statistics.push_back(harness_statistic_from_string(s));
    }
    if (j.contains("spec")) {
      const std::string s = j.at("spec");
      cfg.strategic = s == "reciprocity"    ? StrategicKind::kReciprocity
                      : s == "transitivity" ? StrategicKind::kTransitivity
                      : (s == "customer-product" || s == "customer_product")
                          ? StrategicKind::kCustomerProduct
                          : throw UsageError("unknown strategic specification: " + s);
    }
    if (j.contains("population")) {
      const json& p = j.at("population");
      Population pop;
      pop.k = p.at("k");
      pop.lambda = p.at("lambda").get<std::vector<double>>();
      for (const auto& s : p.at("points")) pop.points.push_back({s.at("a"), s.at("b"), s.at("group")});
      pop.weights = p.value("weights", std::vector<double>{});
      cfg.population = pop;
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed experiment config: ") + e.what());
  }
  return cfg;
}

int cmd_experiment(const Common& c, const std::string& config, bool full, const std::string& out) {
  Run run;
  run.manifest.subcommand = "mc-experiment";
  ExperimentConfig cfg;
  if (!config.empty()) {
    run.input(config);
    std::ifstream in(config, std::ios::binary);
    if (!in) throw DataError("cannot open " + config);
    try {
      cfg = experiment_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw DataError(config + ": " + e.what());
    }
  }
  if (full) {
    cfg.replications = 1000;
    cfg.draws_per_test = 400;
    run.warn("full-scale configuration (1000 replications, 400 draws per test) may take hours");
  }
  if (c.seed) cfg.seed = *c.seed;
  run.manifest.seed = cfg.seed;
  cfg.jobs = c.jobs;
  const PowerTable table = run_experiment(cfg);

  auto f = open_output(out);
  f << "gamma,statistic,reject_rate,se,reps,failures\n";
  for (const auto& r : table.rows) {
    f << io::format_real(r.gamma) << ',' << to_string(r.statistic) << ',' << io::format_real(r.reject_rate) << ','
      << io::format_real(r.se) << ',' << r.reps << ',' << r.failures << '\n';
    std::printf("gamma %-6g %-24s reject %.3f (se %.3f, reps %ld, failed %ld)\n", r.gamma,
                to_string(r.statistic).c_str(), r.reject_rate, r.se, r.reps, r.failures);
  }
  long failures = 0;
  for (const auto& r : table.rows) failures = std::max(failures, r.failures);
  if (failures) run.warn("replications excluded after a failed fit or frozen chain; see the failures column");
  run.manifest.config = {{"config", config}, {"full", full}, {"n_nodes", cfg.n_nodes}, {"gammas", cfg.gammas},
                         {"replications", cfg.replications}, {"draws_per_test", cfg.draws_per_test},
                         {"alpha", cfg.alpha}, {"tau_r", cfg.tau_r}, {"q", cfg.q},
                         {"selection", "least dense pure-strategy equilibrium"}};
  run.finish(fs::path(out));
  return 0;
}

int cmd_enumerate(const Common& c, const std::string& edges, const std::string& nodes, const std::string& out,
                  const std::string& statistic, const std::string& spec_name, double alpha) {
  Run run;
  run.manifest.subcommand = "enumerate";
  const Network net = load_network(run, edges, nodes, c.one_based);
  const auto set = enumerate_reference_set(net.d, net.nodes.groups);
  std::cout << "reference set size " << set.size() << '\n';
  json summary{{"size", set.size()}};
  if (!statistic.empty()) {
    TestStatisticSpec spec;
    spec.kind = parse_statistic(statistic);
    std::optional<NuisanceParams> delta;
    if (spec.kind == StatisticKind::kLocallyBest) {
      if (spec_name.empty()) throw UsageError("--spec is required for the locally best statistic");
      spec.strategic = parse_spec(spec_name, net.d.n_nodes());
      delta = mle_null(net.d, net.nodes.groups).params;
    }
    const StatisticFn stat = make_statistic(spec, net.nodes.groups, delta);
    const CriticalValues cv = exact_conditional_critical_values(net.d, net.nodes.groups, stat, alpha);
    const double observed = stat(net.d);
    summary["randomized_test"] = {{"alpha", alpha},
                                  {"c", io::real_or_null(std::isinf(cv.c) ? std::nan("") : cv.c)},
                                  {"c_is_minus_infinity", std::isinf(cv.c) && cv.c < 0},
                                  {"g", cv.g},
                                  {"observed", io::real_or_null(observed)},
                                  {"rejection_probability", critical_function(observed, cv)}};
    std::cout << "exact randomized test: c " << io::format_real(cv.c) << "  g " << io::format_real(cv.g)
              << "  rejection probability " << io::format_real(critical_function(observed, cv)) << '\n';
  }
  if (!out.empty()) {
    auto f = open_output(out);
    io::write_draws_csv(f, set, c.one_based);
    std::ofstream s(fs::path(out).replace_extension(".json"), std::ios::binary);
    s << summary.dump(2) << '\n';
    run.manifest.config = {{"edges", edges}, {"nodes", nodes}, {"statistic", statistic}, {"alpha", alpha}};
    run.finish(fs::path(out));
  }
  return 0;
}

int cmd_calibrate(const std::string& out, bool summary, int n, long reps, const Common& c) {
  Run run;
  run.manifest.subcommand = "calibrate";
  const auto table = design_calibration();
  std::ostringstream csv;
  csv << "link,utility,probability\n";
  for (const auto& e : table) {
    // Two significant digits, as in the design table.
    const int digits = std::max(2, 1 - static_cast<int>(std::floor(std::log10(e.probability))));
    std::printf("%-18s %6.2f  %.*f\n", e.label.c_str(), e.utility, digits, e.probability);
    csv << e.label << ',' << io::format_real(e.utility) << ',' << io::format_real(e.probability) << '\n';
  }
  if (summary) {
    const std::uint64_t seed = run.resolve_seed(c.seed);
    const DesignSummary s = null_design_summary(n, reps, seed, Population::design(), c.jobs);
    std::printf("null design, N=%d, %ld networks: density %.4f  TI %.4f  sd(in) %.4f  sd(out) %.4f\n", n, reps,
                s.mean_density, s.mean_transitivity, s.mean_in_degree_sd, s.mean_out_degree_sd);
  }
  if (!out.empty()) {
    auto f = open_output(out);
    f << csv.str();
    run.finish(fs::path(out));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional tests for strategic interaction in directed networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kVersion);
  app.failure_message(CLI::FailureMessage::help);
  Common common;
  ChainFlags chain;
  std::string edges, nodes, out, params, spec, statistic = "locally-best", reference = "degree-crosslink", delta,
                                               null_out, config;
  long draws = 1000;
  double gamma = 0.0, alpha = 0.05;
  bool full = false, summary = false;
  int n = 48;
  long reps = 1000;

  auto* sample = app.add_subcommand("sample", "draw networks from a reference set");
  sample->add_option("--edges", edges, "edge list CSV")->required();
  sample->add_option("--nodes", nodes, "node groups CSV");
  sample->add_option("--draws", draws, "number of draws");
  sample->add_option("--reference", reference, "density | degree | degree-crosslink");
  sample->add_option("--out", out, "directory, or a .csv file for all draws")->required();
  chain.add(sample);
  add_common(sample, common);

  auto* fit = app.add_subcommand("fit", "maximum likelihood under the null");
  fit->add_option("--edges", edges, "edge list CSV")->required();
  fit->add_option("--nodes", nodes, "node groups CSV");
  fit->add_option("--out", out, "parameter JSON")->required();
  add_common(fit, common);

  auto* simulate = app.add_subcommand("simulate", "simulate the least dense equilibrium network");
  simulate->add_option("--params", params, "parameter JSON")->required();
  simulate->add_option("--gamma", gamma, "strategic interaction strength");
  simulate->add_option("--spec", spec, "reciprocity | transitivity | customer-product")->required();
  simulate->add_option("--out", out, "edge list CSV")->required();
  add_common(simulate, common);

  auto* test = app.add_subcommand("test", "conditional test of no strategic interaction");
  test->add_option("--edges", edges, "edge list CSV")->required();
  test->add_option("--nodes", nodes, "node groups CSV");
  test->add_option("--statistic", statistic, "locally-best | ti | reciprocity");
  test->add_option("--spec", spec, "reciprocity | transitivity | customer-product");
  test->add_option("--reference", reference, "density | degree | degree-crosslink | enumerated");
  test->add_option("--draws", draws, "reference draws");
  test->add_option("--delta", delta, "parameter JSON to use instead of fitting");
  test->add_option("--out", out, "result JSON")->required();
  test->add_option("--null-draws", null_out, "CSV of the statistic on each reference draw");
  chain.add(test);
  add_common(test, common);

  auto* mc = app.add_subcommand("mc-experiment", "Monte Carlo size and power experiment");
  mc->add_option("--config", config, "experiment JSON (defaults when absent)");
  mc->add_flag("--full", full, "1000 replications with 400 draws per test");
  mc->add_option("--out", out, "power table CSV")->required();
  add_common(mc, common);

  auto* en = app.add_subcommand("enumerate", "list the whole reference set of a small network");
  en->add_option("--edges", edges, "edge list CSV")->required();
  en->add_option("--nodes", nodes, "node groups CSV");
  en->add_option("--out", out, "CSV of all members");
  en->add_option("--statistic", statistic, "also compute the exact randomized test")->default_str("");
  en->add_option("--spec", spec, "strategic specification for locally-best");
  en->add_option("--alpha", alpha, "level of the randomized test");
  add_common(en, common);

  auto* cal = app.add_subcommand("calibrate", "print the null link probabilities of the Monte Carlo design");
  cal->add_option("--out", out, "CSV output");
  cal->add_flag("--design-summary", summary, "also average descriptive statistics over null networks");
  cal->add_option("--n", n, "nodes for the design summary");
  cal->add_option("--reps", reps, "networks for the design summary");
  add_common(cal, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sample) return cmd_sample(common, edges, nodes, draws, chain, reference, out);
    if (*fit) return cmd_fit(common, edges, nodes, out);
    if (*simulate) return cmd_simulate(common, params, gamma, spec, out);
    if (*test) return cmd_test(common, edges, nodes, statistic, spec, reference, draws, chain, delta, out, null_out);
    if (*mc) return cmd_experiment(common, config, full, out);
    if (*en) return cmd_enumerate(common, edges, nodes, out, en->count("--statistic") ? statistic : "", spec, alpha);
    if (*cal) return cmd_calibrate(out, summary, n, reps, common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
