// Copyright 2026 The shapval Authors
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

#ifndef SHAPVAL_HARNESS_HPP
#define SHAPVAL_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shapval/baselines.hpp"
#include "shapval/exact.hpp"
#include "shapval/pruned.hpp"
#include "shapval/regression.hpp"
#include "shapval/rng.hpp"
#include "shapval/scenario.hpp"
#include "shapval/stratified.hpp"
#include "shapval/utility.hpp"
#include "shapval/valuation.hpp"

namespace shapval {

/// Raised for invalid experiment configurations (as opposed to failures while
/// running a valid one).
class ConfigError : public ParseError {
 public:
  explicit ConfigError(const std::string& what) : ParseError(what) {}
};

/// One method entry in an experiment: which estimator to run and with which
/// parameters. Client-facing JSON uses the same field names.
struct MethodSpec {
  std::string name;  // exact_mc | exact_cc | exact_perm | sample | kgreedy | ipss | tmc | ccshapley
  std::optional<Scheme> scheme;                      // sample
  std::optional<std::uint64_t> gamma;                // sample | ipss | ccshapley
  std::optional<std::vector<std::uint64_t>> plan_m;  // sample: explicit per-stratum counts
  std::optional<int> K;                              // kgreedy
  bool printed_denominator = false;                  // kgreedy variant weighting
  std::optional<std::uint64_t> rounds;               // tmc
  std::optional<double> trunc_tol;                   // tmc; absent = auto from |U(N)|

  /// Label used in reports and for deriving per-method random streams.
  std::string display() const {
    if (name == "sample" && scheme) return "sample_" + scheme_name(*scheme);
    return name;
  }
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& context) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError(context + ": unknown key \"" + item.key() + "\"");
    }
  }
}

inline std::uint64_t get_u64(const nlohmann::json& j, const std::string& key,
                             const std::string& context) {
  if (!j.contains(key)) throw ConfigError(context + ": missing \"" + key + "\"");
  const auto& v = j[key];
  if (!v.is_number_integer() ||
      (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(context + ": \"" + key + "\" must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace detail

inline MethodSpec method_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    throw ConfigError("method entry must be an object with a \"name\" string");
  }
  MethodSpec spec;
  spec.name = j["name"].get<std::string>();
  const std::string ctx = "method \"" + spec.name + "\"";
  if (spec.name == "exact_mc" || spec.name == "exact_cc" || spec.name == "exact_perm") {
    detail::require_keys(j, {"name"}, ctx);
  } else if (spec.name == "sample") {
    detail::require_keys(j, {"name", "scheme", "gamma", "m"}, ctx);
    if (!j.contains("scheme") || !j["scheme"].is_string()) {
      throw ConfigError(ctx + ": requires a \"scheme\" of \"mc\" or \"cc\"");
    }
    try {
      spec.scheme = parse_scheme(j["scheme"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ctx + ": " + e.what());
    }
    bool has_gamma = j.contains("gamma");
    bool has_plan = j.contains("m");
    if (has_gamma == has_plan) {
      throw ConfigError(ctx + ": give exactly one of \"gamma\" or \"m\"");
    }
    if (has_gamma) spec.gamma = detail::get_u64(j, "gamma", ctx);
    if (has_plan) {
      if (!j["m"].is_array()) throw ConfigError(ctx + ": \"m\" must be an array");
      spec.plan_m = j["m"].get<std::vector<std::uint64_t>>();
    }
  } else if (spec.name == "kgreedy") {
    detail::require_keys(j, {"name", "K", "printed_denominator"}, ctx);
    spec.K = static_cast<int>(detail::get_u64(j, "K", ctx));
    if (j.contains("printed_denominator")) {
      if (!j["printed_denominator"].is_boolean()) {
        throw ConfigError(ctx + ": \"printed_denominator\" must be a boolean");
      }
      spec.printed_denominator = j["printed_denominator"].get<bool>();
    }
  } else if (spec.name == "ipss" || spec.name == "ccshapley") {
    detail::require_keys(j, {"name", "gamma"}, ctx);
    spec.gamma = detail::get_u64(j, "gamma", ctx);
  } else if (spec.name == "tmc") {
    detail::require_keys(j, {"name", "rounds", "trunc_tol"}, ctx);
    spec.rounds = detail::get_u64(j, "rounds", ctx);
    if (j.contains("trunc_tol")) {
      if (!j["trunc_tol"].is_number()) throw ConfigError(ctx + ": \"trunc_tol\" must be a number");
      double tol = j["trunc_tol"].get<double>();
      if (!(tol >= 0.0) || !std::isfinite(tol)) {
        throw ConfigError(ctx + ": \"trunc_tol\" must be finite and >= 0");
      }
      spec.trunc_tol = tol;
    }
  } else {
    throw ConfigError("unknown method \"" + spec.name + "\"");
  }
  return spec;
}

inline nlohmann::ordered_json method_to_json(const MethodSpec& spec) {
  nlohmann::ordered_json j;
  j["name"] = spec.name;
  if (spec.scheme) j["scheme"] = scheme_name(*spec.scheme);
  if (spec.gamma) j["gamma"] = *spec.gamma;
  if (spec.plan_m) j["m"] = *spec.plan_m;
  if (spec.K) j["K"] = *spec.K;
  if (spec.name == "kgreedy") j["printed_denominator"] = spec.printed_denominator;
  if (spec.rounds) j["rounds"] = *spec.rounds;
  if (spec.trunc_tol) j["trunc_tol"] = *spec.trunc_tol;
  return j;
}

/// A full experiment: one game (explicit table or generated federation),
/// a set of methods, and how often to repeat each. Client ids in configs are
/// 1-based to match the printed coalition form; they are stored 0-based here.
struct ExperimentConfig {
  std::optional<std::string> table_path;
  std::optional<UtilityTable> table_inline;
  std::optional<ScenarioConfig> scenario;
  std::vector<int> null_clients;                      // 0-based
  std::vector<std::pair<int, int>> duplicate_pairs;   // 0-based (source, target)
  std::vector<MethodSpec> methods;
  int repeats = 1;
  std::uint64_t seed = 0;
  bool exact_reference = true;
  std::string out_dir;

  void validate() const {
    int sources = (table_path ? 1 : 0) + (table_inline ? 1 : 0) + (scenario ? 1 : 0);
    if (sources != 1) {
      throw ConfigError("config needs exactly one of \"table\", \"table_inline\", \"scenario\"");
    }
    if (methods.empty()) throw ConfigError("config needs at least one method");
    if (repeats < 1) throw ConfigError("config repeats must be >= 1");
    if (!scenario && (!null_clients.empty() || !duplicate_pairs.empty())) {
      throw ConfigError("null_clients / duplicate_pairs require a scenario game");
    }
  }
};

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  detail::require_keys(j,
                       {"table", "table_inline", "scenario", "null_clients", "duplicate_pairs",
                        "methods", "repeats", "seed", "exact_reference", "out_dir"},
                       "experiment config");
  ExperimentConfig config;
  if (j.contains("table")) {
    if (!j["table"].is_string()) throw ConfigError("\"table\" must be a path string");
    config.table_path = j["table"].get<std::string>();
  }
  if (j.contains("table_inline")) {
    try {
      config.table_inline = table_from_json(j["table_inline"]);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("\"table_inline\": ") + e.what());
    }
  }
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    detail::require_keys(s, {"name", "n", "t", "d", "sigma", "noise_level"}, "scenario");
    ScenarioConfig sc;
    if (!s.contains("name") || !s["name"].is_string()) {
      throw ConfigError("scenario needs a \"name\"");
    }
    try {
      sc.kind = parse_scenario_name(s["name"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    sc.n = static_cast<int>(detail::get_u64(s, "n", "scenario"));
    sc.t = static_cast<int>(detail::get_u64(s, "t", "scenario"));
    sc.d = static_cast<int>(detail::get_u64(s, "d", "scenario"));
    if (s.contains("sigma")) {
      if (!s["sigma"].is_number()) throw ConfigError("scenario \"sigma\" must be a number");
      sc.sigma = s["sigma"].get<double>();
    }
    if (s.contains("noise_level")) {
      if (!s["noise_level"].is_number()) {
        throw ConfigError("scenario \"noise_level\" must be a number");
      }
      sc.noise_level = s["noise_level"].get<double>();
    }
    try {
      sc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    config.scenario = sc;
  }
  if (j.contains("null_clients")) {
    if (!j["null_clients"].is_array()) throw ConfigError("\"null_clients\" must be an array");
    for (const auto& c : j["null_clients"]) {
      if (!c.is_number_integer() || c.get<std::int64_t>() < 1) {
        throw ConfigError("null_clients entries are 1-based client ids");
      }
      config.null_clients.push_back(c.get<int>() - 1);
    }
  }
  if (j.contains("duplicate_pairs")) {
    if (!j["duplicate_pairs"].is_array()) throw ConfigError("\"duplicate_pairs\" must be an array");
    for (const auto& p : j["duplicate_pairs"]) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
          !p[1].is_number_integer() || p[0].get<std::int64_t>() < 1 ||
          p[1].get<std::int64_t>() < 1) {
        throw ConfigError("duplicate_pairs entries are [source, target] 1-based id pairs");
      }
      config.duplicate_pairs.emplace_back(p[0].get<int>() - 1, p[1].get<int>() - 1);
    }
  }
  if (!j.contains("methods") || !j["methods"].is_array()) {
    throw ConfigError("config needs a \"methods\" array");
  }
  for (const auto& m : j["methods"]) config.methods.push_back(method_from_json(m));
  if (j.contains("repeats")) config.repeats = static_cast<int>(detail::get_u64(j, "repeats", "config"));
  if (j.contains("seed")) config.seed = detail::get_u64(j, "seed", "config");
  if (j.contains("exact_reference")) {
    if (!j["exact_reference"].is_boolean()) {
      throw ConfigError("\"exact_reference\" must be a boolean");
    }
    config.exact_reference = j["exact_reference"].get<bool>();
  }
  if (j.contains("out_dir")) {
    if (!j["out_dir"].is_string()) throw ConfigError("\"out_dir\" must be a string");
    config.out_dir = j["out_dir"].get<std::string>();
  }
  config.validate();
  return config;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return experiment_from_json(j);
}

inline nlohmann::ordered_json experiment_to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  if (config.table_path) j["table"] = *config.table_path;
  if (config.table_inline) j["table_inline"] = table_to_json(*config.table_inline);
  if (config.scenario) {
    nlohmann::ordered_json s;
    s["name"] = scenario_name(config.scenario->kind);
    s["n"] = config.scenario->n;
    s["t"] = config.scenario->t;
    s["d"] = config.scenario->d;
    s["sigma"] = config.scenario->sigma;
    s["noise_level"] = config.scenario->noise_level;
    j["scenario"] = std::move(s);
  }
  if (!config.null_clients.empty()) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int c : config.null_clients) arr.push_back(c + 1);
    j["null_clients"] = std::move(arr);
  }
  if (!config.duplicate_pairs.empty()) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& [a, b] : config.duplicate_pairs) {
      arr.push_back(nlohmann::ordered_json::array({a + 1, b + 1}));
    }
    j["duplicate_pairs"] = std::move(arr);
  }
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  for (const MethodSpec& m : config.methods) methods.push_back(method_to_json(m));
  j["methods"] = std::move(methods);
  j["repeats"] = config.repeats;
  j["seed"] = config.seed;
  j["exact_reference"] = config.exact_reference;
  if (!config.out_dir.empty()) j["out_dir"] = config.out_dir;
  return j;
}

/// L2 relative error of an estimate against a reference valuation. Undefined
/// (and reported as an error, never as 0) when the reference has zero norm.
inline double relative_error(const std::vector<double>& estimate,
                             const std::vector<double>& reference) {
  if (estimate.size() != reference.size()) {
    throw std::invalid_argument("relative_error: size mismatch");
  }
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    double d = estimate[i] - reference[i];
    diff += d * d;
    norm += reference[i] * reference[i];
  }
  if (norm == 0.0) {
    throw std::domain_error("relative error undefined: reference valuation has zero norm");
  }
  return std::sqrt(diff) / std::sqrt(norm);
}

/// Proxy fairness metrics computable without exact values: a data-free client
/// should be valued 0 (free-rider error), and clients with identical shards
/// should be valued identically (symmetry error). Absent when the experiment
/// designates no such clients.
struct FairnessProxies {
  std::optional<double> free_rider_error;  // max |value| over data-free clients
  std::optional<double> symmetry_error;    // max |value_a - value_b| over duplicate pairs
};

inline FairnessProxies fairness_proxies(const std::vector<double>& values,
                                        const std::vector<int>& null_clients,
                                        const std::vector<std::pair<int, int>>& duplicate_pairs) {
  FairnessProxies out;
  for (int z : null_clients) {
    double err = std::abs(values.at(z));
    out.free_rider_error = std::max(out.free_rider_error.value_or(0.0), err);
  }
  for (const auto& [a, b] : duplicate_pairs) {
    double err = std::abs(values.at(a) - values.at(b));
    out.symmetry_error = std::max(out.symmetry_error.value_or(0.0), err);
  }
  return out;
}

/// Builds the game's inner oracle from a config (loads the table or generates
/// the federation and applies null/duplicate designations).
inline std::shared_ptr<const UtilityOracle> build_oracle(const ExperimentConfig& config) {
  config.validate();
  if (config.table_path || config.table_inline) {
    UtilityTable table =
        config.table_inline ? *config.table_inline : load_table(*config.table_path);
    return std::make_shared<TableOracle>(std::move(table));
  }
  ScenarioConfig sc = *config.scenario;
  sc.seed = config.seed;  // one seed governs the game and every method stream
  RegressionFederation fed = generate_scenario(sc);
  for (const auto& [source, target] : config.duplicate_pairs) {
    if (source < 0 || source >= fed.n || target < 0 || target >= fed.n) {
      throw ConfigError("duplicate pair out of range for n=" + std::to_string(fed.n));
    }
    fed = with_duplicate(std::move(fed), source, target);
  }
  for (int z : config.null_clients) {
    if (z < 0 || z >= fed.n) {
      throw ConfigError("null client out of range for n=" + std::to_string(fed.n));
    }
    fed = with_null_client(std::move(fed), z);
  }
  return std::make_shared<RegressionOracle>(
      std::make_shared<RegressionFederation>(std::move(fed)));
}

/// Runs one method once against a fresh memoizing cache over the shared inner
/// oracle. `stream_seed` fully determines the run's randomness and is
/// recorded in the result.
inline Valuation run_method(const std::shared_ptr<const UtilityOracle>& inner,
                            const MethodSpec& spec, std::uint64_t stream_seed) {
  MemoizingOracle memo(inner);
  int n = memo.client_count();
  Rng rng(stream_seed);
  Valuation v;
  if (spec.name == "exact_mc") {
    v = exact_mc_sv(memo, n);
  } else if (spec.name == "exact_cc") {
    v = exact_cc_sv(memo, n);
  } else if (spec.name == "exact_perm") {
    v = exact_perm_sv(memo, n);
  } else if (spec.name == "sample") {
    if (!spec.scheme) throw ConfigError("sample method needs a scheme");
    SamplingPlan plan;
    if (spec.plan_m) {
      plan.n = n;
      plan.m = *spec.plan_m;
      plan.source = "explicit";
      plan.validate();
    } else if (spec.gamma) {
      plan = default_plan(n, *spec.gamma);
    } else {
      throw ConfigError("sample method needs \"gamma\" or \"m\"");
    }
    v = stratified_estimate(memo, n, plan, *spec.scheme, rng);
  } else if (spec.name == "kgreedy") {
    if (!spec.K) throw ConfigError("kgreedy method needs \"K\"");
    KGreedyOptions options;
    options.printed_denominator = spec.printed_denominator;
    v = k_greedy(memo, n, *spec.K, options);
  } else if (spec.name == "ipss") {
    if (!spec.gamma) throw ConfigError("ipss method needs \"gamma\"");
    v = ipss(memo, n, *spec.gamma, rng);
  } else if (spec.name == "tmc") {
    if (!spec.rounds) throw ConfigError("tmc method needs \"rounds\"");
    double tol;
    if (spec.trunc_tol) {
      tol = *spec.trunc_tol;
    } else {
      double u_grand = memo.evaluate(Coalition::grand(n));
      tol = kDefaultTruncationScale * std::abs(u_grand);
    }
    v = extended_tmc(memo, n, *spec.rounds, tol, rng);
  } else if (spec.name == "ccshapley") {
    if (!spec.gamma) throw ConfigError("ccshapley method needs \"gamma\"");
    v = cc_shapley(memo, n, *spec.gamma, rng);
  } else {
    throw ConfigError("unknown method \"" + spec.name + "\"");
  }
  v.seed = stream_seed;
  return v;
}

struct ExperimentRow {
  int method_index = 0;
  std::string method;
  int repeat = 0;
  Valuation valuation;
  std::optional<double> relative_error;
  std::optional<double> free_rider_error;
  std::optional<double> symmetry_error;
};

struct MethodAggregate {
  int method_index = 0;
  std::string method;
  std::optional<std::uint64_t> gamma;
  std::optional<int> K;
  std::optional<std::uint64_t> rounds;
  int repeats = 0;
  std::optional<double> mean_relative_error;
  std::optional<double> error_variance;  // sample variance; absent below 2 repeats
  double mean_evaluations = 0.0;
  double mean_wall_ms = 0.0;
  std::optional<double> mean_free_rider_error;
  std::optional<double> max_free_rider_error;
  std::optional<double> mean_symmetry_error;
  std::optional<double> max_symmetry_error;
};

struct ExperimentReport {
  nlohmann::ordered_json config_echo;
  int n = 0;
  std::optional<Valuation> exact;
  bool relative_error_defined = true;  // false when the exact valuation has zero norm
  std::vector<ExperimentRow> rows;
  std::vector<MethodAggregate> aggregates;
};

namespace detail {

inline std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

inline nlohmann::ordered_json row_to_json(const ExperimentRow& row) {
  nlohmann::ordered_json j;
  j["method_index"] = row.method_index;
  j["method"] = row.method;
  j["repeat"] = row.repeat;
  j["valuation"] = valuation_to_json(row.valuation);
  if (row.relative_error) j["relative_error"] = *row.relative_error;
  if (row.free_rider_error) j["free_rider_error"] = *row.free_rider_error;
  if (row.symmetry_error) j["symmetry_error"] = *row.symmetry_error;
  return j;
}

inline nlohmann::ordered_json aggregate_to_json(const MethodAggregate& a) {
  nlohmann::ordered_json j;
  j["method_index"] = a.method_index;
  j["method"] = a.method;
  if (a.gamma) j["gamma"] = *a.gamma;
  if (a.K) j["K"] = *a.K;
  if (a.rounds) j["rounds"] = *a.rounds;
  j["repeats"] = a.repeats;
  if (a.mean_relative_error) j["mean_relative_error"] = *a.mean_relative_error;
  if (a.error_variance) j["error_variance"] = *a.error_variance;
  j["mean_evaluations"] = a.mean_evaluations;
  j["mean_wall_ms"] = a.mean_wall_ms;
  if (a.mean_free_rider_error) j["mean_free_rider_error"] = *a.mean_free_rider_error;
  if (a.max_free_rider_error) j["max_free_rider_error"] = *a.max_free_rider_error;
  if (a.mean_symmetry_error) j["mean_symmetry_error"] = *a.mean_symmetry_error;
  if (a.max_symmetry_error) j["max_symmetry_error"] = *a.max_symmetry_error;
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["config"] = report.config_echo;
  j["n"] = report.n;
  if (report.exact) {
    j["exact"] = valuation_to_json(*report.exact);
  } else {
    j["exact"] = nullptr;
  }
  j["relative_error_defined"] = report.relative_error_defined;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ExperimentRow& row : report.rows) rows.push_back(detail::row_to_json(row));
  j["rows"] = std::move(rows);
  nlohmann::ordered_json aggs = nlohmann::ordered_json::array();
  for (const MethodAggregate& a : report.aggregates) aggs.push_back(detail::aggregate_to_json(a));
  j["aggregates"] = std::move(aggs);
  return j;
}

inline std::string aggregates_to_csv(const std::vector<MethodAggregate>& aggregates) {
  std::string out =
      "method,gamma,K,rounds,repeats,mean_relative_error,error_variance,"
      "mean_evaluations,mean_wall_ms,mean_free_rider_error,max_free_rider_error,"
      "mean_symmetry_error,max_symmetry_error\n";
  auto opt_u64 = [](const std::optional<std::uint64_t>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  auto opt_int = [](const std::optional<int>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  auto opt_dbl = [](const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string();
  };
  for (const MethodAggregate& a : aggregates) {
    out += a.method + ',' + opt_u64(a.gamma) + ',' + opt_int(a.K) + ',' + opt_u64(a.rounds) +
           ',' + std::to_string(a.repeats) + ',' + opt_dbl(a.mean_relative_error) + ',' +
           opt_dbl(a.error_variance) + ',' + detail::format_double(a.mean_evaluations) + ',' +
           detail::format_double(a.mean_wall_ms) + ',' + opt_dbl(a.mean_free_rider_error) +
           ',' + opt_dbl(a.max_free_rider_error) + ',' + opt_dbl(a.mean_symmetry_error) + ',' +
           opt_dbl(a.max_symmetry_error) + '\n';
  }
  return out;
}

/// Runs every configured method `repeats` times against the game, computes
/// error and fairness metrics per run, aggregates them per method, and (when
/// out_dir is set) writes report.json and aggregates.csv. Each (method,
/// repeat) pair gets its own random stream derived from the config seed, so
/// adding or removing one method never changes another's rows.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  std::shared_ptr<const UtilityOracle> inner = build_oracle(config);
  ExperimentReport report;
  report.config_echo = experiment_to_json(config);
  report.n = inner->client_count();

  std::optional<std::vector<double>> reference;
  if (config.exact_reference) {
    if (report.n > kMaxExactClients) {
      throw ConfigError("exact_reference needs n <= " + std::to_string(kMaxExactClients) +
                        "; set \"exact_reference\": false for larger games");
    }
    MemoizingOracle memo(inner);
    report.exact = exact_mc_sv(memo, report.n);
    reference = report.exact->values;
    double norm = 0.0;
    for (double v : *reference) norm += v * v;
    if (norm == 0.0) report.relative_error_defined = false;
  }

  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const MethodSpec& spec = config.methods[mi];
    const std::string label = spec.display();
    std::vector<double> errors;
    std::vector<double> free_riders, symmetries;
    double eval_sum = 0.0, wall_sum = 0.0;
    for (int r = 0; r < config.repeats; ++r) {
      std::uint64_t stream = derive_seed(config.seed, label, static_cast<std::uint64_t>(r));
      ExperimentRow row;
      row.method_index = static_cast<int>(mi);
      row.method = label;
      row.repeat = r;
      row.valuation = run_method(inner, spec, stream);
      if (reference && report.relative_error_defined) {
        row.relative_error = relative_error(row.valuation.values, *reference);
        errors.push_back(*row.relative_error);
      }
      FairnessProxies proxies =
          fairness_proxies(row.valuation.values, config.null_clients, config.duplicate_pairs);
      row.free_rider_error = proxies.free_rider_error;
      row.symmetry_error = proxies.symmetry_error;
      if (proxies.free_rider_error) free_riders.push_back(*proxies.free_rider_error);
      if (proxies.symmetry_error) symmetries.push_back(*proxies.symmetry_error);
      eval_sum += static_cast<double>(row.valuation.evaluations);
      wall_sum += row.valuation.wall_ms;
      report.rows.push_back(std::move(row));
    }
    MethodAggregate agg;
    agg.method_index = static_cast<int>(mi);
    agg.method = label;
    agg.gamma = spec.gamma;
    agg.K = spec.K;
    agg.rounds = spec.rounds;
    agg.repeats = config.repeats;
    if (!errors.empty()) {
      double mean = 0.0;
      for (double e : errors) mean += e;
      mean /= errors.size();
      agg.mean_relative_error = mean;
      if (errors.size() >= 2) {
        double ss = 0.0;
        for (double e : errors) ss += (e - mean) * (e - mean);
        agg.error_variance = ss / (errors.size() - 1);
      }
    }
    agg.mean_evaluations = eval_sum / config.repeats;
    agg.mean_wall_ms = wall_sum / config.repeats;
    auto fill = [](const std::vector<double>& xs, std::optional<double>& mean_out,
                   std::optional<double>& max_out) {
      if (xs.empty()) return;
      double mean = 0.0, mx = xs.front();
      for (double x : xs) {
        mean += x;
        mx = std::max(mx, x);
      }
      mean_out = mean / xs.size();
      max_out = mx;
    };
    fill(free_riders, agg.mean_free_rider_error, agg.max_free_rider_error);
    fill(symmetries, agg.mean_symmetry_error, agg.max_symmetry_error);
    report.aggregates.push_back(std::move(agg));
  }

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::filesystem::path dir(config.out_dir);
    {
      std::ofstream out(dir / "report.json");
      if (!out) throw std::runtime_error("cannot write report.json in " + config.out_dir);
      out << report_to_json(report).dump(2) << '\n';
    }
    {
      std::ofstream out(dir / "aggregates.csv");
      if (!out) throw std::runtime_error("cannot write aggregates.csv in " + config.out_dir);
      out << aggregates_to_csv(report.aggregates);
    }
  }
  return report;
}

/// One point of an accuracy/cost frontier: a method run at a given budget.
struct ParetoRow {
  int method_index = 0;
  std::string method;
  std::uint64_t gamma = 0;
  std::optional<double> mean_error;
  double mean_evaluations = 0.0;
  double mean_wall_ms = 0.0;
};

inline std::string pareto_to_csv(const std::vector<ParetoRow>& rows) {
  std::string out = "method,gamma,mean_error,mean_evaluations,mean_wall_ms\n";
  for (const ParetoRow& r : rows) {
    out += r.method + ',' + std::to_string(r.gamma) + ',' +
           (r.mean_error ? detail::format_double(*r.mean_error) : std::string()) + ',' +
           detail::format_double(r.mean_evaluations) + ',' +
           detail::format_double(r.mean_wall_ms) + '\n';
  }
  return out;
}

/// Sweeps each budgeted method across a grid of budgets, reporting mean
/// relative error and cost per (method, budget) cell. tmc maps the budget to
/// its round count; explicit stratum plans cannot be swept. Rows are ordered
/// by budget, then by method entry. Writes pareto.csv when out_dir is set.
inline std::vector<ParetoRow> pareto_sweep(const ExperimentConfig& config,
                                           std::vector<std::uint64_t> gammas) {
  if (gammas.empty()) throw ConfigError("pareto sweep needs at least one budget");
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
  std::shared_ptr<const UtilityOracle> inner = build_oracle(config);
  int n = inner->client_count();
  for (const MethodSpec& spec : config.methods) {
    if (spec.name != "sample" && spec.name != "ipss" && spec.name != "ccshapley" &&
        spec.name != "tmc") {
      throw ConfigError("pareto sweep supports budgeted methods only, got \"" + spec.name +
                        "\"");
    }
    if (spec.name == "sample" && spec.plan_m) {
      throw ConfigError("pareto sweep cannot sweep an explicit stratum plan");
    }
    for (std::uint64_t gamma : gammas) {
      if (gamma == 0) throw ConfigError("pareto budgets must be >= 1");
      if (spec.name == "ipss" && gamma < static_cast<std::uint64_t>(n) + 1) {
        throw ConfigError("pareto budget " + std::to_string(gamma) +
                          " is below the ipss minimum of n + 1 = " + std::to_string(n + 1));
      }
      if ((spec.name == "sample" || spec.name == "ccshapley") && n < kMaxClients &&
          gamma > (std::uint64_t{1} << n) - 1) {
        throw ConfigError("pareto budget " + std::to_string(gamma) +
                          " exceeds the number of non-empty coalitions");
      }
    }
  }
  if (n > kMaxExactClients) {
    throw ConfigError("pareto sweep needs an exact reference, so n <= " +
                      std::to_string(kMaxExactClients));
  }
  std::vector<double> reference;
  {
    MemoizingOracle memo(inner);
    reference = exact_mc_sv(memo, n).values;
  }
  double norm = 0.0;
  for (double v : reference) norm += v * v;
  bool error_defined = norm > 0.0;

  std::vector<ParetoRow> rows;
  for (std::uint64_t gamma : gammas) {
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      MethodSpec spec = config.methods[mi];
      if (spec.name == "tmc") {
        spec.rounds = gamma;
      } else {
        spec.gamma = gamma;
      }
      const std::string label = spec.display();
      ParetoRow row;
      row.method_index = static_cast<int>(mi);
      row.method = label;
      row.gamma = gamma;
      double err_sum = 0.0, eval_sum = 0.0, wall_sum = 0.0;
      for (int r = 0; r < config.repeats; ++r) {
        std::uint64_t stream = derive_seed(
            config.seed, label + "/g" + std::to_string(gamma), static_cast<std::uint64_t>(r));
        Valuation v = run_method(inner, spec, stream);
        if (error_defined) err_sum += relative_error(v.values, reference);
        eval_sum += static_cast<double>(v.evaluations);
        wall_sum += v.wall_ms;
      }
      if (error_defined) row.mean_error = err_sum / config.repeats;
      row.mean_evaluations = eval_sum / config.repeats;
      row.mean_wall_ms = wall_sum / config.repeats;
      rows.push_back(std::move(row));
    }
  }

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(std::filesystem::path(config.out_dir) / "pareto.csv");
    if (!out) throw std::runtime_error("cannot write pareto.csv in " + config.out_dir);
    out << pareto_to_csv(rows);
  }
  return rows;
}

}  // namespace shapval

#endif  // SHAPVAL_HARNESS_HPP
