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

// File formats: edge and node CSV files, parameter and result JSON, run
// manifests.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratnet/error.hpp"
#include "stratnet/graph.hpp"
#include "stratnet/inference.hpp"
#include "stratnet/model.hpp"

namespace stratnet::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

// 17 significant digits round-trip every double; NaN prints as "undefined".
inline std::string format_real(double x) {
  if (std::isnan(x)) return "undefined";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_long(std::string_view s, long& value) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

[[noreturn]] inline void fail(const std::string& file, long line, const std::string& what) {
  throw DataError(file + ":" + std::to_string(line) + ": " + what);
}

// Calls row(fields, line_number) for each data row after checking the header.
template <typename Fn>
void read_csv(std::istream& in, const std::string& name, const std::vector<std::string>& header, Fn&& row) {
  std::string line;
  long line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (!seen_header) {
      bool ok = fields.size() == header.size();
      for (std::size_t t = 0; ok && t < header.size(); ++t) ok = fields[t] == header[t];
      if (!ok) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        fail(name, line_no, "expected header '" + want + "'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size())
      fail(name, line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()));
    row(fields, line_no);
  }
  if (!seen_header) fail(name, line_no, "missing header");
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

}  // namespace detail

struct NodeTable {
  GroupAssignment groups;
  std::vector<std::string> labels;  // label of group index k
};

// `node,group` rows. Node ids must cover 0..N-1 (or 1..N) exactly once.
// Group labels are mapped to indices in sorted order, numerically when every
// label is an integer.
inline NodeTable read_nodes_csv(std::istream& in, const std::string& name, bool one_based) {
  std::vector<std::pair<long, std::string>> rows;
  std::vector<long> lines;
  detail::read_csv(in, name, {"node", "group"}, [&](const auto& f, long line) {
    long id = 0;
    if (!detail::parse_long(f[0], id)) detail::fail(name, line, "node id is not an integer");
    if (f[1].empty()) detail::fail(name, line, "empty group label");
    rows.emplace_back(id - (one_based ? 1 : 0), std::string(f[1]));
    lines.push_back(line);
  });
  const long n = static_cast<long>(rows.size());
  if (n == 0) throw DataError(name + ": no nodes");
  std::vector<std::string> assigned(static_cast<std::size_t>(n));
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const long id = rows[t].first;
    if (id < 0 || id >= n) detail::fail(name, lines[t], "node id out of range");
    if (seen[id]) detail::fail(name, lines[t], "duplicate node id");
    seen[id] = true;
    assigned[id] = rows[t].second;
  }

  std::vector<std::string> labels(assigned.begin(), assigned.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  bool numeric = true;
  for (const auto& l : labels) {
    long v = 0;
    numeric &= detail::parse_long(l, v);
  }
  if (numeric)
    std::sort(labels.begin(), labels.end(), [](const std::string& x, const std::string& y) {
      return std::stol(x) < std::stol(y);
    });
  std::map<std::string, int> index;
  for (std::size_t k = 0; k < labels.size(); ++k) index[labels[k]] = static_cast<int>(k);
  std::vector<int> g(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) g[i] = index[assigned[i]];
  return {GroupAssignment(std::move(g), static_cast<int>(labels.size())), std::move(labels)};
}

inline NodeTable read_nodes_csv(const std::string& path, bool one_based) {
  auto in = detail::open_input(path);
  return read_nodes_csv(in, path, one_based);
}

// `source,target` rows. With n_nodes < 0 the node count is the largest id + 1.
inline AdjacencyMatrix read_edges_csv(std::istream& in, const std::string& name, int n_nodes, bool one_based,
                                      std::size_t* duplicates = nullptr) {
  std::vector<Arc> edges;
  detail::read_csv(in, name, {"source", "target"}, [&](const auto& f, long line) {
    long s = 0, t = 0;
    if (!detail::parse_long(f[0], s) || !detail::parse_long(f[1], t))
      detail::fail(name, line, "node id is not an integer");
    if (one_based) --s, --t;
    if (s < 0 || t < 0 || (n_nodes >= 0 && (s >= n_nodes || t >= n_nodes)))
      detail::fail(name, line, "node id out of range");
    if (s == t) detail::fail(name, line, "self-loop");
    edges.emplace_back(static_cast<int>(s), static_cast<int>(t));
  });
  if (n_nodes < 0) {
    n_nodes = 0;
    for (const auto& [s, t] : edges) n_nodes = std::max({n_nodes, s + 1, t + 1});
  }
  return from_edge_list(edges, n_nodes, duplicates);
}

inline AdjacencyMatrix read_edges_csv(const std::string& path, int n_nodes, bool one_based,
                                      std::size_t* duplicates = nullptr) {
  auto in = detail::open_input(path);
  return read_edges_csv(in, path, n_nodes, one_based, duplicates);
}

inline void write_edges_csv(std::ostream& out, const AdjacencyMatrix& d, bool one_based) {
  const int base = one_based ? 1 : 0;
  out << "source,target\n";
  for (const auto& [s, t] : d.arcs()) out << s + base << ',' << t + base << '\n';
}

inline void write_draws_csv(std::ostream& out, const std::vector<AdjacencyMatrix>& draws, bool one_based) {
  const int base = one_based ? 1 : 0;
  out << "draw,source,target\n";
  for (std::size_t b = 0; b < draws.size(); ++b)
    for (const auto& [s, t] : draws[b].arcs()) out << b << ',' << s + base << ',' << t + base << '\n';
}

inline void write_values_csv(std::ostream& out, const std::string& column, const std::vector<double>& values) {
  out << column << '\n';
  for (double v : values) out << format_real(v) << '\n';
}

// ---------------------------------------------------------------------------
// JSON.

inline json params_to_json(const NuisanceParams& p, const GroupAssignment& g, const std::vector<std::string>& labels) {
  json j;
  j["k"] = p.k;
  j["lambda"] = p.lambda;
  j["a"] = p.a;
  j["b"] = p.b;
  j["groups"] = g.groups();
  j["group_labels"] = labels;
  j["normalization"] = kNormalizationTag;
  return j;
}

inline json fit_to_json(const MleResult& fit, const GroupAssignment& g, const std::vector<std::string>& labels) {
  json j = params_to_json(fit.params, g, labels);
  j["convergence"] = {{"converged", fit.converged},
                      {"iterations", fit.iterations},
                      {"gradient_sup_norm", fit.gradient_norm},
                      {"log_likelihood", fit.log_likelihood}};
  return j;
}

struct ParamsFile {
  NuisanceParams params;
  GroupAssignment groups;
};

inline ParamsFile params_from_json(const json& j) {
  try {
    ParamsFile f;
    const int k = j.at("k").get<int>();
    f.params.k = k;
    f.params.lambda = j.at("lambda").get<std::vector<double>>();
    f.params.a = j.at("a").get<std::vector<double>>();
    f.params.b = j.at("b").get<std::vector<double>>();
    f.groups = GroupAssignment(j.at("groups").get<std::vector<int>>(), k);
    check_dims(f.params, f.groups);
    if (!f.params.finite()) throw DataError("parameters must be finite");
    return f;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed parameter file: ") + e.what());
  }
}

inline ParamsFile read_params_json(const std::string& path) {
  auto in = detail::open_input(path);
  try {
    return params_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

// NaN is not representable in JSON; undefined values become null.
inline json real_or_null(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

inline json result_to_json(const TestResult& r) {
  json j;
  j["statistic"] = r.statistic;
  j["observed"] = real_or_null(r.observed);
  j["p_value"] = r.p_value;
  j["quantile"] = real_or_null(r.quantile);
  j["reference"] = to_string(r.reference);
  j["draws"] = r.null_draws.size();
  j["tau"] = r.tau;
  j["q"] = r.q;
  j["seed"] = r.seed;
  j["diagnostics"] = {{"acceptance_rate", r.diagnostics.acceptance_rate},
                      {"per_arc_modifications", r.diagnostics.per_arc_modifications},
                      {"missing_draws", r.diagnostics.missing_draws}};
  j["delta"] = r.fit ? "fitted once on the observed network" : "provided";
  return j;
}

// ---------------------------------------------------------------------------
// Provenance.

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string file_digest(const std::string& path) {
  auto in = detail::open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::ostringstream hex;
  hex << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a(buf.str());
  return hex.str();
}

struct RunManifest {
  std::string subcommand;
  json config = json::object();
  std::uint64_t seed = 0;
  bool seed_from_entropy = false;
  std::map<std::string, std::string> input_digests;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> warnings;

  json to_json() const {
    return {{"subcommand", subcommand},
            {"config", config},
            {"seed", seed},
            {"seed_from_entropy", seed_from_entropy},
            {"version", kVersion},
            {"input_digests", input_digests},
            {"wall_clock_seconds", wall_clock_seconds},
            {"warnings", warnings}};
  }
};

}  // namespace stratnet::io
