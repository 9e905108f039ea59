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

#ifndef SHAPVAL_BASELINES_HPP
#define SHAPVAL_BASELINES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "shapval/coalition.hpp"
#include "shapval/exact.hpp"
#include "shapval/rng.hpp"
#include "shapval/stratified.hpp"
#include "shapval/utility.hpp"
#include "shapval/valuation.hpp"

namespace shapval {

/// Fraction of |U(N)| used as the truncation tolerance when none is given.
inline constexpr double kDefaultTruncationScale = 1e-3;

/// Permutation-walk estimator with truncation. Each round walks a random
/// ordering of the clients, crediting each client with the utility gain of
/// joining the prefix; once the prefix utility is within trunc_tol of the
/// grand-coalition utility, the rest of the walk is skipped and those clients
/// are credited zero for the round. Prefix utilities are memoized across
/// rounds, so `evaluations` counts distinct coalitions only. With
/// exhaustive = true the estimator averages over all n! orderings in
/// lexicographic order instead of sampling (rng is then unused), which at
/// trunc_tol = 0 reproduces the exact permutation-form Shapley values.
inline Valuation extended_tmc(const UtilityOracle& oracle, int n, std::uint64_t rounds,
                              double trunc_tol, Rng& rng, bool exhaustive = false) {
  if (n < 1 || n > kMaxClients) {
    throw std::invalid_argument("extended_tmc n must be in [1, 64], got " + std::to_string(n));
  }
  if (trunc_tol < 0.0 || !std::isfinite(trunc_tol)) {
    throw std::invalid_argument("extended_tmc trunc_tol must be finite and >= 0");
  }
  if (exhaustive && n > kMaxPermutationClients) {
    throw std::invalid_argument("exhaustive permutation averaging supports n <= " +
                                std::to_string(kMaxPermutationClients) + ", got " +
                                std::to_string(n));
  }
  if (!exhaustive && rounds == 0) {
    throw std::invalid_argument("extended_tmc needs at least 1 round");
  }
  std::uint64_t t0 = now_ns();
  std::unordered_map<std::uint64_t, double> value;
  std::uint64_t full_mask =
      (n == kMaxClients) ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  auto eval = [&](std::uint64_t bits) {
    auto it = value.find(bits);
    if (it != value.end()) return it->second;
    double v = oracle.evaluate(Coalition(bits, n));
    value.emplace(bits, v);
    return v;
  };
  double u_empty = eval(0);
  double u_grand = eval(full_mask);

  std::vector<double> contribution(n, 0.0);
  std::uint64_t walks = 0;
  auto walk = [&](const std::vector<int>& perm) {
    std::uint64_t prefix = 0;
    double prev = u_empty;
    for (int pos = 0; pos < n; ++pos) {
      if (std::abs(u_grand - prev) < trunc_tol) break;  // rest of the walk adds ~nothing
      prefix |= std::uint64_t{1} << perm[pos];
      double next = eval(prefix);
      contribution[perm[pos]] += next - prev;
      prev = next;
    }
    ++walks;
  };
  if (exhaustive) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      walk(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    for (std::uint64_t r = 0; r < rounds; ++r) walk(random_permutation(n, rng));
  }

  Valuation result;
  result.method = "tmc";
  result.n = n;
  result.values.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    result.values[i] = contribution[i] / static_cast<double>(walks);
  }
  result.rounds = walks;
  result.trunc_tol = trunc_tol;
  result.evaluations = value.size();
  result.wall_ms = static_cast<double>(now_ns() - t0) / 1e6;
  return result;
}

/// Complementary-pairing baseline: the stratified estimator run with the
/// complement scheme under the even-split plan for the given budget.
inline Valuation cc_shapley(const UtilityOracle& oracle, int n, std::uint64_t gamma, Rng& rng) {
  SamplingPlan plan = default_plan(n, gamma);
  Valuation result = stratified_estimate(oracle, n, plan, Scheme::kCc, rng);
  result.method = "ccshapley";
  return result;
}

}  // namespace shapval

#endif  // SHAPVAL_BASELINES_HPP
