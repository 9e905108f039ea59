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

#ifndef SHAPVAL_VALUATION_HPP
#define SHAPVAL_VALUATION_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapval/utility.hpp"

namespace shapval {

/// Result of one valuation run: per-client values plus enough metadata to
/// reproduce the run. Optional fields are set only by the methods they apply
/// to (e.g. scheme/plan for stratified sampling, k_star/extra for the
/// progressive-stratum method).
struct Valuation {
  std::string method;
  int n = 0;
  std::optional<std::uint64_t> seed;  // stream seed that reproduces this run
  std::vector<double> values;         // one per client, index 0 = client 1
  std::uint64_t evaluations = 0;      // distinct coalitions touched by this run
  double wall_ms = 0.0;

  std::optional<std::string> scheme;                 // "mc" | "cc"
  std::optional<std::vector<std::uint64_t>> plan_m;  // per-stratum sample counts
  std::optional<std::string> plan_source;            // "even_split_default" | "explicit"
  std::optional<std::uint64_t> gamma;                // sampling budget
  std::optional<int> k_star;                         // deepest fully covered stratum
  std::optional<std::uint64_t> extra;                // budget left after full strata
  std::optional<int> K;                              // truncation depth (small coalitions)
  std::optional<std::uint64_t> rounds;               // permutation walks
  std::optional<double> trunc_tol;                   // permutation truncation tolerance

  double total() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
};

inline nlohmann::ordered_json valuation_to_json(const Valuation& v) {
  nlohmann::ordered_json out;
  out["method"] = v.method;
  out["n"] = v.n;
  if (v.seed) out["seed"] = *v.seed;
  out["values"] = v.values;
  out["evaluations"] = v.evaluations;
  out["wall_ms"] = v.wall_ms;
  if (v.scheme) out["scheme"] = *v.scheme;
  if (v.plan_m) out["plan_m"] = *v.plan_m;
  if (v.plan_source) out["plan_source"] = *v.plan_source;
  if (v.gamma) out["gamma"] = *v.gamma;
  if (v.k_star) out["k_star"] = *v.k_star;
  if (v.extra) out["extra"] = *v.extra;
  if (v.K) out["K"] = *v.K;
  if (v.rounds) out["rounds"] = *v.rounds;
  if (v.trunc_tol) out["trunc_tol"] = *v.trunc_tol;
  return out;
}

inline Valuation valuation_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("method") || !j.contains("n") || !j.contains("values")) {
    throw ParseError("valuation JSON must have \"method\", \"n\", and \"values\"");
  }
  Valuation v;
  v.method = j["method"].get<std::string>();
  v.n = j["n"].get<int>();
  if (j.contains("seed")) v.seed = j["seed"].get<std::uint64_t>();
  v.values = j["values"].get<std::vector<double>>();
  if (static_cast<int>(v.values.size()) != v.n) {
    throw ParseError("valuation has " + std::to_string(v.values.size()) + " values but n=" +
                     std::to_string(v.n));
  }
  if (j.contains("evaluations")) v.evaluations = j["evaluations"].get<std::uint64_t>();
  if (j.contains("wall_ms")) v.wall_ms = j["wall_ms"].get<double>();
  if (j.contains("scheme")) v.scheme = j["scheme"].get<std::string>();
  if (j.contains("plan_m")) v.plan_m = j["plan_m"].get<std::vector<std::uint64_t>>();
  if (j.contains("plan_source")) v.plan_source = j["plan_source"].get<std::string>();
  if (j.contains("gamma")) v.gamma = j["gamma"].get<std::uint64_t>();
  if (j.contains("k_star")) v.k_star = j["k_star"].get<int>();
  if (j.contains("extra")) v.extra = j["extra"].get<std::uint64_t>();
  if (j.contains("K")) v.K = j["K"].get<int>();
  if (j.contains("rounds")) v.rounds = j["rounds"].get<std::uint64_t>();
  if (j.contains("trunc_tol")) v.trunc_tol = j["trunc_tol"].get<double>();
  return v;
}

inline void save_valuation(const Valuation& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << valuation_to_json(v).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace shapval

#endif  // SHAPVAL_VALUATION_HPP
