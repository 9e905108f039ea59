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

#ifndef SHAPVAL_EXACT_HPP
#define SHAPVAL_EXACT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapval/coalition.hpp"
#include "shapval/utility.hpp"
#include "shapval/valuation.hpp"

namespace shapval {

/// Soft limits for the exact solvers. `force` overrides them, but the dense
/// utility cache still refuses beyond kEnumerationCap coalitions.
inline constexpr int kMaxExactClients = 20;
inline constexpr int kMaxPermutationClients = 10;

struct ExactOptions {
  bool force = false;  // accept the cost of enumeration beyond the soft limit
};

namespace detail {

/// Evaluates every coalition once, in ascending bitmask order, into a dense
/// vector indexed by coalition bits.
inline std::vector<double> evaluate_all(const UtilityOracle& oracle, int n) {
  if (n < 1) throw std::invalid_argument("exact solver requires n >= 1");
  if (n >= 25 || (std::uint64_t{1} << n) > kEnumerationCap) {
    throw std::length_error("dense utility cache would need 2^" + std::to_string(n) +
                            " entries, beyond the supported cap");
  }
  std::size_t total = std::size_t{1} << n;
  std::vector<double> utilities(total);
  for (std::size_t mask = 0; mask < total; ++mask) {
    utilities[mask] = oracle.evaluate(Coalition(mask, n));
  }
  return utilities;
}

inline void check_exact_guard(int n, int limit, bool force, const char* what) {
  if (n > kMaxClients) {
    throw std::invalid_argument("n=" + std::to_string(n) + " exceeds the supported maximum of " +
                                std::to_string(kMaxClients));
  }
  if (!force && n > limit) {
    double required = std::pow(2.0, n);
    throw std::invalid_argument(std::string("refusing ") + what + " for n=" + std::to_string(n) +
                                ": would require about " + std::to_string(required) +
                                " utility evaluations; set force=true to override");
  }
}

}  // namespace detail

/// Exact Shapley values from the marginal-contribution form:
///   phi_i = (1/n) * sum_k [ sum_{|S|=k, S excludes i} U(S+i) - U(S) ] / C(n-1,k).
/// Deterministic: strata are reduced in ascending size, coalitions in
/// ascending bitmask order.
inline Valuation exact_mc_sv(const UtilityOracle& oracle, int n, ExactOptions options = {}) {
  detail::check_exact_guard(n, kMaxExactClients, options.force, "exact enumeration");
  std::uint64_t t0 = now_ns();
  std::vector<double> u = detail::evaluate_all(oracle, n);
  Valuation result;
  result.method = "exact_mc";
  result.n = n;
  result.values.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double phi = 0.0;
    for (int k = 0; k <= n - 1; ++k) {
      double stratum_sum = 0.0;
      std::uint64_t reduced = (k == 0) ? 0 : (std::uint64_t{1} << k) - 1;
      std::uint64_t end = std::uint64_t{1} << (n - 1);
      while (true) {
        std::uint64_t s = expand_excluding(reduced, i);
        stratum_sum += u[s | (std::uint64_t{1} << i)] - u[s];
        if (k == 0) break;
        reduced = next_same_popcount(reduced);
        if (reduced >= end) break;
      }
      phi += stratum_sum / static_cast<double>(binomial(n - 1, k));
    }
    result.values[i] = phi / n;
  }
  result.evaluations = std::uint64_t{1} << n;
  result.wall_ms = static_cast<double>(now_ns() - t0) / 1e6;
  return result;
}

/// Exact Shapley values from the complementary form, which replaces each
/// marginal baseline U(S) by the utility of the complement of S+i:
///   phi_i = (1/n) * sum_k [ sum_{|S|=k, S excludes i} U(S+i) - U(N \ (S+i)) ] / C(n-1,k).
/// Agrees with exact_mc_sv on every game (the two reductions reindex the same
/// alternating sum).
inline Valuation exact_cc_sv(const UtilityOracle& oracle, int n, ExactOptions options = {}) {
  detail::check_exact_guard(n, kMaxExactClients, options.force, "exact enumeration");
  std::uint64_t t0 = now_ns();
  std::vector<double> u = detail::evaluate_all(oracle, n);
  std::uint64_t full = (n == kMaxClients) ? ~std::uint64_t{0}
                                          : (std::uint64_t{1} << n) - 1;
  Valuation result;
  result.method = "exact_cc";
  result.n = n;
  result.values.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double phi = 0.0;
    for (int k = 0; k <= n - 1; ++k) {
      double stratum_sum = 0.0;
      std::uint64_t reduced = (k == 0) ? 0 : (std::uint64_t{1} << k) - 1;
      std::uint64_t end = std::uint64_t{1} << (n - 1);
      while (true) {
        std::uint64_t with_i = expand_excluding(reduced, i) | (std::uint64_t{1} << i);
        stratum_sum += u[with_i] - u[full & ~with_i];
        if (k == 0) break;
        reduced = next_same_popcount(reduced);
        if (reduced >= end) break;
      }
      phi += stratum_sum / static_cast<double>(binomial(n - 1, k));
    }
    result.values[i] = phi / n;
  }
  result.evaluations = std::uint64_t{1} << n;
  result.wall_ms = static_cast<double>(now_ns() - t0) / 1e6;
  return result;
}

/// Exact Shapley values as the average marginal contribution over all n!
/// orderings, iterated lexicographically. O(n! * n) after the 2^n utility
/// fill; intended for cross-checking the combinatorial solvers at small n.
inline Valuation exact_perm_sv(const UtilityOracle& oracle, int n, ExactOptions options = {}) {
  detail::check_exact_guard(n, kMaxPermutationClients, options.force,
                            "factorial permutation enumeration");
  std::uint64_t t0 = now_ns();
  std::vector<double> u = detail::evaluate_all(oracle, n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> sums(n, 0.0);
  std::uint64_t walks = 0;
  do {
    std::uint64_t prefix = 0;
    double prev = u[0];
    for (int pos = 0; pos < n; ++pos) {
      prefix |= std::uint64_t{1} << perm[pos];
      double next = u[prefix];
      sums[perm[pos]] += next - prev;
      prev = next;
    }
    ++walks;
  } while (std::next_permutation(perm.begin(), perm.end()));
  Valuation result;
  result.method = "exact_perm";
  result.n = n;
  result.values.assign(n, 0.0);
  for (int i = 0; i < n; ++i) result.values[i] = sums[i] / static_cast<double>(walks);
  result.evaluations = std::uint64_t{1} << n;
  result.wall_ms = static_cast<double>(now_ns() - t0) / 1e6;
  return result;
}

}  // namespace shapval

#endif  // SHAPVAL_EXACT_HPP
