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

#ifndef SHAPVAL_PRUNED_HPP
#define SHAPVAL_PRUNED_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "shapval/coalition.hpp"
#include "shapval/rng.hpp"
#include "shapval/utility.hpp"
#include "shapval/valuation.hpp"

namespace shapval {

/// How a budget of gamma evaluations covers the coalition strata from the
/// bottom up: strata 0..k_star fit entirely, `extra` evaluations remain for a
/// partial pass over stratum k_star + 1.
struct StratumBudget {
  int k_star = 0;
  std::uint64_t extra = 0;
};

/// Largest k with sum_{j=0..k} C(n,j) <= gamma, plus the leftover budget.
///   k_star(4, 10)   -> (1, 5)
///   k_star(10, 32)  -> (1, 21)
///   k_star(n, 2^n)  -> (n, 0)
inline StratumBudget k_star(int n, std::uint64_t gamma) {
  if (n < 1 || n > kMaxClients) {
    throw std::invalid_argument("k_star n must be in [1, 64], got " + std::to_string(n));
  }
  if (gamma == 0) throw std::domain_error("k_star requires a budget of at least 1");
  unsigned __int128 cumulative = 1;  // C(n, 0)
  int k = 0;
  while (k < n) {
    unsigned __int128 next = cumulative + static_cast<unsigned __int128>(binomial(n, k + 1));
    if (next > gamma) break;
    cumulative = next;
    ++k;
  }
  StratumBudget out;
  out.k_star = k;
  out.extra = (k == n) ? 0 : gamma - static_cast<std::uint64_t>(cumulative);
  return out;
}

struct KGreedyOptions {
  bool printed_denominator = false;  // weight stratum k by C(n,k) instead of C(n-1,k)
  bool force = false;                // accept enumeration beyond the soft cap
};

/// Truncated estimator that evaluates every coalition of size <= K and sums
/// the marginal contributions over just those strata:
///   phi_i ~= (1/n) sum_{k=0}^{K-1} [ sum_{|S|=k, S excludes i} U(S+i) - U(S) ] / C(n-1,k).
/// With K = n this is the exact value. The C(n-1,k) weight makes each covered
/// stratum an exact stratum average; the alternative C(n,k) weighting
/// (printed_denominator) deflates every term by (n-k)/n and is kept only for
/// comparison runs.
inline Valuation k_greedy(const UtilityOracle& oracle, int n, int K, KGreedyOptions options = {}) {
  if (n < 1 || n > kMaxClients) {
    throw std::invalid_argument("k_greedy n must be in [1, 64], got " + std::to_string(n));
  }
  if (K < 1 || K > n) {
    throw std::invalid_argument("k_greedy K must be in [1, n], got " + std::to_string(K));
  }
  unsigned __int128 required = 1;
  for (int j = 1; j <= K; ++j) required += static_cast<unsigned __int128>(binomial(n, j));
  if (!options.force && required > kEnumerationCap) {
    throw std::length_error("k_greedy would evaluate more than " +
                            std::to_string(kEnumerationCap) +
                            " coalitions; set force=true to override");
  }
  std::uint64_t t0 = now_ns();
  std::unordered_map<std::uint64_t, double> value;
  value.reserve(static_cast<std::size_t>(required));
  value[0] = oracle.evaluate(Coalition::empty(n));
  for (int k = 1; k <= K; ++k) {
    for (const Coalition& s : enumerate_stratum(n, k)) value[s.bits] = oracle.evaluate(s);
  }
  Valuation result;
  result.method = "kgreedy";
  result.n = n;
  result.K = K;
  result.values.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    std::uint64_t bit = std::uint64_t{1} << i;
    double phi = 0.0;
    for (int k = 0; k <= K - 1; ++k) {
      double stratum_sum = 0.0;
      std::uint64_t reduced = (k == 0) ? 0 : (std::uint64_t{1} << k) - 1;
      std::uint64_t end = std::uint64_t{1} << (n - 1);
      while (true) {
        std::uint64_t s = expand_excluding(reduced, i);
        stratum_sum += value.at(s | bit) - value.at(s);
        if (k == 0) break;
        reduced = next_same_popcount(reduced);
        if (reduced >= end) break;
      }
      std::uint64_t denom = options.printed_denominator ? binomial(n, k) : binomial(n - 1, k);
      phi += stratum_sum / static_cast<double>(denom);
    }
    result.values[i] = phi / n;
  }
  result.evaluations = value.size();
  result.wall_ms = static_cast<double>(now_ns() - t0) / 1e6;
  return result;
}

namespace detail {

/// Exhaustive completion for balanced_extra: picks the unused coalition that
/// keeps the appearance counts flattest (smallest resulting spread, then
/// smallest total member count, then smallest bitmask).
inline void balanced_fallback(int n, int size, std::uint64_t budget,
                              std::vector<std::uint64_t>& counts,
                              std::unordered_set<std::uint64_t>& used,
                              std::vector<Coalition>& out) {
  std::vector<Coalition> stratum = enumerate_stratum(n, size);
  while (out.size() < budget) {
    bool found = false;
    std::uint64_t best_bits = 0;
    std::uint64_t best_spread = 0, best_load = 0;
    for (const Coalition& s : stratum) {
      if (used.count(s.bits)) continue;
      std::uint64_t lo = ~std::uint64_t{0}, hi = 0, load = 0;
      for (int i = 0; i < n; ++i) {
        std::uint64_t c = counts[i] + ((s.bits >> i) & 1);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
        if ((s.bits >> i) & 1) load += counts[i];
      }
      std::uint64_t spread = hi - lo;
      if (!found || spread < best_spread || (spread == best_spread && load < best_load) ||
          (spread == best_spread && load == best_load && s.bits < best_bits)) {
        found = true;
        best_bits = s.bits;
        best_spread = spread;
        best_load = load;
      }
    }
    if (!found) throw std::logic_error("balanced_extra ran out of coalitions");
    used.insert(best_bits);
    out.emplace_back(best_bits, n);
    for (int i = 0; i < n; ++i) counts[i] += (best_bits >> i) & 1;
  }
}

}  // namespace detail

/// Strata with at most this many coalitions are filled by the exhaustive
/// flattest-first scan instead of draft rounds.
inline constexpr std::uint64_t kBalancedExhaustiveCap = 2048;

/// Draws `budget` distinct coalitions of the given size whose per-client
/// appearance counts stay as flat as possible. Small strata (at most
/// kBalancedExhaustiveCap coalitions) are filled one pick at a time by the
/// flattest-first scan, which keeps max - min <= 1 whenever a flat choice
/// remains. Larger strata use draft rounds: clients are ordered by current
/// appearance count with seeded tie-breaking, consecutive chunks of `size`
/// become coalitions, and collisions are re-drawn in later rounds (falling
/// back to the flattest-first scan if the rounds stall). Returns the
/// coalitions in ascending bitmask order.
inline std::vector<Coalition> balanced_extra(int n, int size, std::uint64_t budget, Rng& rng) {
  if (n < 1 || n > kMaxClients) {
    throw std::invalid_argument("balanced_extra n must be in [1, 64], got " + std::to_string(n));
  }
  if (size < 1 || size > n) {
    throw std::invalid_argument("balanced_extra size must be in [1, n], got " +
                                std::to_string(size));
  }
  std::uint64_t cap = binomial(n, size);
  if (budget > cap) {
    throw std::invalid_argument("balanced_extra budget " + std::to_string(budget) +
                                " exceeds the " + std::to_string(cap) + " coalitions of size " +
                                std::to_string(size));
  }
  std::vector<Coalition> out;
  if (budget == 0) return out;
  std::vector<std::uint64_t> counts(n, 0);
  std::unordered_set<std::uint64_t> used;
  if (cap <= kBalancedExhaustiveCap) {
    detail::balanced_fallback(n, size, budget, counts, used, out);
    std::sort(out.begin(), out.end());
    return out;
  }
  int stalls = 0;
  while (out.size() < budget) {
    std::vector<int> order = random_permutation(n, rng);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return counts[a] < counts[b]; });
    bool progressed = false;
    int chunks = n / size;
    for (int c = 0; c < chunks && out.size() < budget; ++c) {
      std::uint64_t bits = 0;
      for (int j = 0; j < size; ++j) bits |= std::uint64_t{1} << order[c * size + j];
      if (used.count(bits)) continue;
      used.insert(bits);
      out.emplace_back(bits, n);
      for (int j = 0; j < size; ++j) ++counts[order[c * size + j]];
      progressed = true;
    }
    if (progressed) {
      stalls = 0;
    } else if (++stalls >= 8) {
      detail::balanced_fallback(n, size, budget, counts, used, out);
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Progressive stratum sampling under a hard budget of gamma distinct
/// evaluations (the empty coalition counts). Strata 0..k_star are covered
/// exactly; the leftover budget goes to a balanced draw from stratum
/// k_star + 1, whose members pair with their (always evaluated) size-k_star
/// subsets. With gamma = 2^n every stratum is exact, so the result equals the
/// exact Shapley values. Requires gamma >= n + 1 so that at least the
/// singleton stratum is covered.
inline Valuation ipss(const UtilityOracle& oracle, int n, std::uint64_t gamma, Rng& rng) {
  if (n < 1 || n > kMaxClients) {
    throw std::invalid_argument("ipss n must be in [1, 64], got " + std::to_string(n));
  }
  if (gamma < static_cast<std::uint64_t>(n) + 1) {
    throw std::invalid_argument("ipss needs gamma >= n + 1 = " + std::to_string(n + 1) +
                                " to cover the empty and singleton strata, got " +
                                std::to_string(gamma));
  }
  StratumBudget budget = k_star(n, gamma);
  unsigned __int128 full_count = 1;
  for (int j = 1; j <= budget.k_star; ++j) {
    full_count += static_cast<unsigned __int128>(binomial(n, j));
  }
  if (full_count + budget.extra > kEnumerationCap) {
    throw std::length_error("ipss budget implies more than " + std::to_string(kEnumerationCap) +
                            " evaluations; use a smaller gamma");
  }

  std::uint64_t t0 = now_ns();
  std::unordered_map<std::uint64_t, double> value;
  value.reserve(static_cast<std::size_t>(full_count + budget.extra));
  value[0] = oracle.evaluate(Coalition::empty(n));
  for (int k = 1; k <= budget.k_star; ++k) {
    for (const Coalition& s : enumerate_stratum(n, k)) value[s.bits] = oracle.evaluate(s);
  }
  std::vector<Coalition> partial;
  if (budget.k_star < n && budget.extra > 0) {
    partial = balanced_extra(n, budget.k_star + 1, budget.extra, rng);
    for (const Coalition& s : partial) value[s.bits] = oracle.evaluate(s);
  }

  Valuation result;
  result.method = "ipss";
  result.n = n;
  result.values.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    std::uint64_t bit = std::uint64_t{1} << i;
    double phi = 0.0;
    for (int k = 0; k <= budget.k_star - 1; ++k) {
      double stratum_sum = 0.0;
      std::uint64_t reduced = (k == 0) ? 0 : (std::uint64_t{1} << k) - 1;
      std::uint64_t end = std::uint64_t{1} << (n - 1);
      while (true) {
        std::uint64_t s = expand_excluding(reduced, i);
        stratum_sum += value.at(s | bit) - value.at(s);
        if (k == 0) break;
        reduced = next_same_popcount(reduced);
        if (reduced >= end) break;
      }
      phi += stratum_sum / static_cast<double>(binomial(n - 1, k));
    }
    int hits = 0;
    double partial_sum = 0.0;
    for (const Coalition& s : partial) {
      if (!(s.bits & bit)) continue;
      ++hits;
      partial_sum += value.at(s.bits) - value.at(s.bits & ~bit);
    }
    if (hits > 0) phi += partial_sum / hits;
    result.values[i] = phi / n;
  }
  result.gamma = gamma;
  result.k_star = budget.k_star;
  result.extra = budget.extra;
  result.evaluations = value.size();
  result.wall_ms = static_cast<double>(now_ns() - t0) / 1e6;
  return result;
}

}  // namespace shapval

#endif  // SHAPVAL_PRUNED_HPP
