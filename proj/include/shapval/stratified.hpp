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

#ifndef SHAPVAL_STRATIFIED_HPP
#define SHAPVAL_STRATIFIED_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "shapval/coalition.hpp"
#include "shapval/exact.hpp"
#include "shapval/rng.hpp"
#include "shapval/utility.hpp"
#include "shapval/valuation.hpp"

namespace shapval {

/// How a sampled coalition S (containing client i) is paired with a baseline:
///   kMc pairs S with S minus i   (marginal contribution),
///   kCc pairs S with N minus S   (complementary contribution).
enum class Scheme { kMc, kCc };

inline std::string scheme_name(Scheme scheme) {
  return scheme == Scheme::kMc ? "mc" : "cc";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "mc") return Scheme::kMc;
  if (name == "cc") return Scheme::kCc;
  throw std::invalid_argument("unknown scheme \"" + name + "\" (expected \"mc\" or \"cc\")");
}

/// Per-stratum sample counts: m[k-1] coalitions of size k are drawn without
/// replacement, so the total evaluation budget is gamma() sampled coalitions
/// plus the always-evaluated empty coalition.
struct SamplingPlan {
  int n = 0;
  std::vector<std::uint64_t> m;
  std::string source = "explicit";  // "even_split_default" when derived from a budget

  std::uint64_t gamma() const {
    std::uint64_t total = 0;
    for (std::uint64_t count : m) total += count;
    return total;
  }

  void validate() const {
    if (n < 1 || n > kMaxClients) {
      throw std::invalid_argument("plan n must be in [1, 64], got " + std::to_string(n));
    }
    if (static_cast<int>(m.size()) != n) {
      throw std::invalid_argument("plan must list one count per stratum size 1.." +
                                  std::to_string(n));
    }
    for (int k = 1; k <= n; ++k) {
      std::uint64_t cap = binomial(n, k);
      if (m[k - 1] > cap) {
        throw std::invalid_argument("plan asks for " + std::to_string(m[k - 1]) +
                                    " size-" + std::to_string(k) + " coalitions but only " +
                                    std::to_string(cap) + " exist");
      }
    }
    if (gamma() == 0) throw std::invalid_argument("plan budget must be at least 1");
  }
};

/// Spreads a budget of gamma coalition draws as evenly as possible across the
/// n strata: repeatedly gives every not-yet-full stratum an equal share (capped
/// at the stratum size); when fewer draws remain than open strata, the
/// smallest coalition sizes get the leftovers first.
///   default_plan(3, 5)  -> m = (2, 2, 1)
///   default_plan(10,32) -> m = (4, 4, 4, 4, 3, 3, 3, 3, 3, 1)
inline SamplingPlan default_plan(int n, std::uint64_t gamma) {
  if (n < 1 || n > kMaxClients) {
    throw std::invalid_argument("default_plan n must be in [1, 64], got " + std::to_string(n));
  }
  if (gamma == 0) throw std::invalid_argument("default_plan budget must be at least 1");
  SamplingPlan plan;
  plan.n = n;
  plan.m.assign(n, 0);
  plan.source = "even_split_default";
  std::vector<std::uint64_t> cap(n);
  for (int k = 1; k <= n; ++k) cap[k - 1] = binomial(n, k);
  std::uint64_t remaining = gamma;
  while (remaining > 0) {
    std::vector<int> open;
    for (int k = 0; k < n; ++k) {
      if (plan.m[k] < cap[k]) open.push_back(k);
    }
    if (open.empty()) {
      throw std::invalid_argument("budget " + std::to_string(gamma) +
                                  " exceeds the number of non-empty coalitions");
    }
    std::uint64_t share = remaining / open.size();
    if (share == 0) {
      for (std::size_t j = 0; j < remaining; ++j) ++plan.m[open[j]];
      remaining = 0;
    } else {
      for (int k : open) {
        std::uint64_t add = std::min(share, cap[k] - plan.m[k]);
        plan.m[k] += add;
        remaining -= add;
      }
    }
  }
  return plan;
}

/// Stratified estimator over a fixed set of sampled coalitions (one list per
/// stratum size 1..n). Every sampled coalition is evaluated exactly once, in
/// ascending stratum then ascending bitmask order, after the always-included
/// empty coalition. For client i and sampled S containing i, the pair value
/// U(S) - U(paired(S)) enters stratum k's average only when paired(S) is
/// itself among the evaluated coalitions; a stratum with no usable pair
/// contributes zero while the combining divisor stays n.
inline Valuation stratified_estimate_with_samples(
    const UtilityOracle& oracle, int n, const std::vector<std::vector<Coalition>>& samples,
    Scheme scheme) {
  if (n < 1 || n > kMaxClients) {
    throw std::invalid_argument("estimator n must be in [1, 64], got " + std::to_string(n));
  }
  if (static_cast<int>(samples.size()) != n) {
    throw std::invalid_argument("need one sample list per stratum size 1.." + std::to_string(n) +
                                ", got " + std::to_string(samples.size()));
  }
  std::uint64_t t0 = now_ns();
  std::vector<std::vector<Coalition>> strata = samples;
  for (int k = 1; k <= n; ++k) {
    auto& list = strata[k - 1];
    for (const Coalition& s : list) {
      if (s.n != n || s.size() != k) {
        throw std::invalid_argument("sample " + shapval::to_string(s) +
                                    " does not belong to stratum " + std::to_string(k));
      }
    }
    std::sort(list.begin(), list.end());
    for (std::size_t j = 1; j < list.size(); ++j) {
      if (list[j].bits == list[j - 1].bits) {
        throw std::invalid_argument("duplicate sample " + shapval::to_string(list[j]));
      }
    }
  }

  std::unordered_map<std::uint64_t, double> value;
  value[0] = oracle.evaluate(Coalition::empty(n));
  for (int k = 1; k <= n; ++k) {
    for (const Coalition& s : strata[k - 1]) value[s.bits] = oracle.evaluate(s);
  }

  std::uint64_t full_mask =
      (n == kMaxClients) ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  Valuation result;
  result.method = "sample";
  result.n = n;
  result.scheme = scheme_name(scheme);
  result.values.assign(n, 0.0);
  std::vector<std::uint64_t> plan_m(n);
  for (int k = 1; k <= n; ++k) plan_m[k - 1] = strata[k - 1].size();
  for (int i = 0; i < n; ++i) {
    std::uint64_t bit = std::uint64_t{1} << i;
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
      int hits = 0;
      double sum = 0.0;
      for (const Coalition& s : strata[k - 1]) {
        if (!(s.bits & bit)) continue;
        std::uint64_t paired =
            (scheme == Scheme::kMc) ? (s.bits & ~bit) : (full_mask & ~s.bits);
        auto it = value.find(paired);
        if (it == value.end()) continue;
        ++hits;
        sum += value.at(s.bits) - it->second;
      }
      if (hits > 0) acc += sum / hits;
    }
    result.values[i] = acc / n;
  }
  result.plan_m = plan_m;
  std::uint64_t gamma = 0;
  for (std::uint64_t c : plan_m) gamma += c;
  result.gamma = gamma;
  result.evaluations = value.size();
  result.wall_ms = static_cast<double>(now_ns() - t0) / 1e6;
  return result;
}

/// Draws each stratum without replacement per the plan, then runs the
/// estimator above. Total evaluations are at most gamma + 1 (the +1 is the
/// empty coalition).
inline Valuation stratified_estimate(const UtilityOracle& oracle, int n,
                                     const SamplingPlan& plan, Scheme scheme, Rng& rng) {
  plan.validate();
  if (plan.n != n) {
    throw std::invalid_argument("plan is for n=" + std::to_string(plan.n) + ", estimator got n=" +
                                std::to_string(n));
  }
  std::vector<std::vector<Coalition>> samples(n);
  for (int k = 1; k <= n; ++k) {
    samples[k - 1] = sample_stratum_without_replacement(n, k, plan.m[k - 1], rng);
  }
  Valuation result = stratified_estimate_with_samples(oracle, n, samples, scheme);
  result.plan_source = plan.source;
  return result;
}

/// Repeats the estimator with independent streams and compares the per-client
/// mean against the exact values, reporting z-scores (difference over the
/// standard error of the mean). A stratum plan that covers every coalition
/// reproduces the exact values, giving z = 0.
struct UnbiasednessReport {
  int repeats = 0;
  std::vector<double> exact;
  std::vector<double> mean;
  std::vector<double> sem;  // standard error of the mean, per client
  std::vector<double> z;    // 0 when the deviation and the spread are both 0
  double max_abs_z = 0.0;
};

inline UnbiasednessReport unbiasedness_check(const UtilityOracle& oracle, int n,
                                             const SamplingPlan& plan, Scheme scheme,
                                             int repeats, std::uint64_t seed) {
  if (repeats < 2) throw std::invalid_argument("unbiasedness_check needs at least 2 repeats");
  UnbiasednessReport report;
  report.repeats = repeats;
  report.exact = exact_mc_sv(oracle, n).values;
  std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
  std::string tag = "unbias/" + scheme_name(scheme);
  for (int r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(seed, tag, static_cast<std::uint64_t>(r)));
    Valuation estimate = stratified_estimate(oracle, n, plan, scheme, rng);
    for (int i = 0; i < n; ++i) {
      sum[i] += estimate.values[i];
      sumsq[i] += estimate.values[i] * estimate.values[i];
    }
  }
  report.mean.assign(n, 0.0);
  report.sem.assign(n, 0.0);
  report.z.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double mean = sum[i] / repeats;
    double var = (sumsq[i] - repeats * mean * mean) / (repeats - 1);
    if (var < 0.0) var = 0.0;  // guard tiny negative from cancellation
    double sem = std::sqrt(var / repeats);
    double diff = mean - report.exact[i];
    report.mean[i] = mean;
    report.sem[i] = sem;
    if (sem > 0.0) {
      report.z[i] = diff / sem;
    } else {
      report.z[i] = (diff == 0.0) ? 0.0
                                  : std::numeric_limits<double>::infinity() * (diff > 0 ? 1 : -1);
    }
    report.max_abs_z = std::max(report.max_abs_z, std::abs(report.z[i]));
  }
  return report;
}

/// Runs both pairing schemes on identical coalition draws (common random
/// numbers: the two runs of a repeat share one stream seed, and drawing does
/// not depend on the scheme) and reports the per-client sample variances.
struct VarianceComparison {
  bool defined = false;  // false when repeats < 2
  int repeats = 0;
  std::vector<double> variance_mc;
  std::vector<double> variance_cc;
  int clients_mc_not_worse = 0;
  double fraction_mc_not_worse = 0.0;
};

inline VarianceComparison variance_comparison(const UtilityOracle& oracle, int n,
                                              const SamplingPlan& plan, int repeats,
                                              std::uint64_t seed) {
  VarianceComparison out;
  out.repeats = repeats;
  if (repeats < 2) return out;
  out.defined = true;
  std::vector<double> sum_mc(n, 0.0), sq_mc(n, 0.0), sum_cc(n, 0.0), sq_cc(n, 0.0);
  for (int r = 0; r < repeats; ++r) {
    std::uint64_t stream = derive_seed(seed, "varcmp", static_cast<std::uint64_t>(r));
    Rng rng_mc(stream);
    Valuation mc = stratified_estimate(oracle, n, plan, Scheme::kMc, rng_mc);
    Rng rng_cc(stream);
    Valuation cc = stratified_estimate(oracle, n, plan, Scheme::kCc, rng_cc);
    for (int i = 0; i < n; ++i) {
      sum_mc[i] += mc.values[i];
      sq_mc[i] += mc.values[i] * mc.values[i];
      sum_cc[i] += cc.values[i];
      sq_cc[i] += cc.values[i] * cc.values[i];
    }
  }
  out.variance_mc.assign(n, 0.0);
  out.variance_cc.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double mean_mc = sum_mc[i] / repeats;
    double mean_cc = sum_cc[i] / repeats;
    out.variance_mc[i] = std::max(0.0, (sq_mc[i] - repeats * mean_mc * mean_mc) / (repeats - 1));
    out.variance_cc[i] = std::max(0.0, (sq_cc[i] - repeats * mean_cc * mean_cc) / (repeats - 1));
    if (out.variance_mc[i] <= out.variance_cc[i]) ++out.clients_mc_not_worse;
  }
  out.fraction_mc_not_worse = static_cast<double>(out.clients_mc_not_worse) / n;
  return out;
}

}  // namespace shapval

#endif  // SHAPVAL_STRATIFIED_HPP
