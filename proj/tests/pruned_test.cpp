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

#include "shapval/pruned.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "shapval/exact.hpp"
#include "shapval/rng.hpp"
#include "shapval/scenario.hpp"
#include "shapval/utility.hpp"
#include "test_util.hpp"

namespace shapval {
namespace {

using testing::make_coalition;
using testing::make_table1;
using testing::random_full_table;

/// Oracle for client counts beyond any feasible enumeration; the guards must
/// fire before a single evaluation happens.
class UntouchableOracle : public UtilityOracle {
 public:
  explicit UntouchableOracle(int n) : n_(n) {}
  int client_count() const override { return n_; }

 protected:
  double do_evaluate(const Coalition&) const override {
    throw std::logic_error("oracle must not be consulted");
  }

 private:
  int n_;
};

/// Straight-line replication of the truncated-stratum formula with plain
/// bitmask loops, used as an independent cross-check of the Gosper-walk
/// implementation.
std::vector<double> truncated_reference(const UtilityTable& table, int n, int K,
                                        bool printed_denominator) {
  std::vector<double> phi(n, 0.0);
  std::uint64_t full = (std::uint64_t{1} << n);
  for (int i = 0; i < n; ++i) {
    std::uint64_t bit = std::uint64_t{1} << i;
    for (int k = 0; k <= K - 1; ++k) {
      double sum = 0.0;
      for (std::uint64_t mask = 0; mask < full; ++mask) {
        if ((mask & bit) || std::popcount(mask) != k) continue;
        sum += table.at(Coalition(mask | bit, n)) - table.at(Coalition(mask, n));
      }
      std::uint64_t denom = printed_denominator ? binomial(n, k) : binomial(n - 1, k);
      phi[i] += sum / static_cast<double>(denom);
    }
    phi[i] /= n;
  }
  return phi;
}

TEST(KStar, CoveredStrataAndLeftovers) {
  StratumBudget b = k_star(4, 10);
  EXPECT_EQ(b.k_star, 1);
  EXPECT_EQ(b.extra, 5u);

  b = k_star(10, 32);
  EXPECT_EQ(b.k_star, 1);
  EXPECT_EQ(b.extra, 21u);

  b = k_star(4, 4);  // cannot even afford the four singletons
  EXPECT_EQ(b.k_star, 0);
  EXPECT_EQ(b.extra, 3u);

  b = k_star(3, 8);  // exactly 2^3: everything covered
  EXPECT_EQ(b.k_star, 3);
  EXPECT_EQ(b.extra, 0u);

  b = k_star(3, 100);  // surplus budget is discarded once all strata fit
  EXPECT_EQ(b.k_star, 3);
  EXPECT_EQ(b.extra, 0u);

  EXPECT_THROW(k_star(4, 0), std::domain_error);
  EXPECT_THROW(k_star(0, 5), std::invalid_argument);
}

TEST(KStar, MonotoneAndConsistentAcrossBudgets) {
  const int n = 6;
  int last_k = 0;
  for (std::uint64_t gamma = 1; gamma <= 70; ++gamma) {
    StratumBudget b = k_star(n, gamma);
    EXPECT_GE(b.k_star, last_k) << "coverage can only grow with the budget";
    last_k = b.k_star;
    if (b.k_star < n) {
      std::uint64_t covered = 0;
      for (int j = 0; j <= b.k_star; ++j) covered += binomial(n, j);
      EXPECT_EQ(covered + b.extra, gamma);
      EXPECT_LT(covered + b.extra, covered + binomial(n, b.k_star + 1))
          << "the leftover must not fill the next stratum";
    } else {
      EXPECT_EQ(b.extra, 0u);
    }
  }
}

TEST(KGreedy, FullDepthEqualsTheExactValues) {
  UtilityTable table = random_full_table(5, 21);
  TableOracle oracle(table);
  Valuation exact = exact_mc_sv(oracle, 5);
  Valuation v = k_greedy(oracle, 5, 5);
  EXPECT_EQ(v.evaluations, 32u);
  EXPECT_EQ(v.method, "kgreedy");
  ASSERT_TRUE(v.K.has_value());
  EXPECT_EQ(*v.K, 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(v.values[i], exact.values[i], 1e-10);
}

TEST(KGreedy, MatchesTheBitmaskReferenceAtPartialDepth) {
  UtilityTable table = random_full_table(4, 22);
  TableOracle oracle(table);
  Valuation v = k_greedy(oracle, 4, 2);
  EXPECT_EQ(v.evaluations, 11u);  // 1 + C(4,1) + C(4,2)
  std::vector<double> want = truncated_reference(table, 4, 2, false);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(v.values[i], want[i], 1e-12);
}

TEST(KGreedy, PrintedDenominatorVariant) {
  UtilityTable table = random_full_table(4, 23);
  TableOracle oracle(table);
  KGreedyOptions options;
  options.printed_denominator = true;
  Valuation v = k_greedy(oracle, 4, 2, options);
  std::vector<double> want = truncated_reference(table, 4, 2, true);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(v.values[i], want[i], 1e-12);
  // C(n-1,k)/C(n,k) = (n-k)/n, so the two weightings agree on the size-0
  // term (both denominators are 1) and differ by exactly 3/4 on the size-1
  // stratum increment when n = 4.
  Valuation standard1 = k_greedy(oracle, 4, 1);
  Valuation variant1 = k_greedy(oracle, 4, 1, options);
  Valuation standard2 = k_greedy(oracle, 4, 2);
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(variant1.values[i], standard1.values[i]) << "depth-1 runs are identical";
    double standard_step = standard2.values[i] - standard1.values[i];
    double variant_step = v.values[i] - variant1.values[i];
    EXPECT_NEAR(variant_step, standard_step * 3.0 / 4.0, 1e-12);
  }
}

TEST(KGreedy, DeeperTruncationImprovesFederationEstimates) {
  // Averaged over a handful of federations the truncation error should drop
  // substantially between depth 1 and depth 3; depth n is exact.
  double err1 = 0.0, err3 = 0.0;
  const int kSeeds = 5;
  for (int s = 0; s < kSeeds; ++s) {
    ScenarioConfig config;
    config.kind = ScenarioKind::kSameSizeSameDist;
    config.n = 6;
    config.t = 30;
    config.d = 3;
    config.sigma = 0.5;
    config.seed = 100 + s;
    auto fed = std::make_shared<RegressionFederation>(generate_scenario(config));
    auto inner = std::make_shared<RegressionOracle>(fed);
    MemoizingOracle oracle(inner);
    Valuation exact = exact_mc_sv(oracle, 6);
    double norm = 0.0;
    for (double x : exact.values) norm += x * x;
    norm = std::sqrt(norm);
    ASSERT_GT(norm, 0.0);
    auto rel = [&](const Valuation& v) {
      double d2 = 0.0;
      for (int i = 0; i < 6; ++i) {
        double d = v.values[i] - exact.values[i];
        d2 += d * d;
      }
      return std::sqrt(d2) / norm;
    };
    err1 += rel(k_greedy(oracle, 6, 1)) / kSeeds;
    err3 += rel(k_greedy(oracle, 6, 3)) / kSeeds;
  }
  EXPECT_LT(err3, err1) << "three covered strata beat one on average";
}

TEST(KGreedy, Validation) {
  UtilityTable table = make_table1();
  TableOracle oracle(table);
  EXPECT_THROW(k_greedy(oracle, 3, 0), std::invalid_argument);
  EXPECT_THROW(k_greedy(oracle, 3, 4), std::invalid_argument);

  UntouchableOracle big(64);
  EXPECT_THROW(k_greedy(big, 64, 6), std::length_error)
      << "1 + sum C(64,1..6) exceeds the enumeration cap";
  EXPECT_NO_THROW(k_greedy(oracle, 3, 3));
}

TEST(BalancedExtra, FlattensAppearanceCounts) {
  Rng rng(derive_seed(5, "test/balanced", 0));
  std::vector<Coalition> picks = balanced_extra(4, 2, 5, rng);
  ASSERT_EQ(picks.size(), 5u);
  std::vector<int> counts(4, 0);
  std::set<std::uint64_t> seen;
  for (const Coalition& s : picks) {
    EXPECT_EQ(s.size(), 2);
    EXPECT_TRUE(seen.insert(s.bits).second) << "coalitions must be distinct";
    for (int i : s.members()) ++counts[i];
  }
  std::sort(counts.begin(), counts.end());
  // 5 pairs touch 10 slots over 4 clients; the only flat split is 2,2,3,3.
  EXPECT_EQ(counts, (std::vector<int>{2, 2, 3, 3}));
}

TEST(BalancedExtra, DisjointChunksWhenTheBudgetAllows) {
  Rng rng(derive_seed(6, "test/balanced", 0));
  std::vector<Coalition> picks = balanced_extra(6, 2, 3, rng);
  ASSERT_EQ(picks.size(), 3u);
  std::vector<int> counts(6, 0);
  for (const Coalition& s : picks) {
    for (int i : s.members()) ++counts[i];
  }
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(counts[i], 1) << "three disjoint pairs cover each client once";
  }
}

TEST(BalancedExtra, DeterministicAndSorted) {
  Rng a(derive_seed(7, "test/balanced", 0));
  Rng b(derive_seed(7, "test/balanced", 0));
  std::vector<Coalition> first = balanced_extra(7, 3, 9, a);
  std::vector<Coalition> second = balanced_extra(7, 3, 9, b);
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t j = 0; j < first.size(); ++j) {
    EXPECT_EQ(first[j].bits, second[j].bits);
    if (j > 0) EXPECT_LT(first[j - 1].bits, first[j].bits) << "ascending output order";
  }
}

TEST(BalancedExtra, PropertyGrid) {
  for (int n = 3; n <= 8; ++n) {
    for (int size = 1; size <= n; ++size) {
      std::uint64_t cap = binomial(n, size);
      for (std::uint64_t budget : {std::uint64_t{1}, cap / 2, cap}) {
        if (budget == 0) continue;
        Rng rng(derive_seed(8, "test/balanced_grid",
                            static_cast<std::uint64_t>(n * 1000 + size * 10) + budget));
        std::vector<Coalition> picks = balanced_extra(n, size, budget, rng);
        ASSERT_EQ(picks.size(), budget);
        std::vector<std::uint64_t> counts(n, 0);
        std::set<std::uint64_t> seen;
        for (const Coalition& s : picks) {
          EXPECT_EQ(s.n, n);
          EXPECT_EQ(s.size(), size);
          EXPECT_TRUE(seen.insert(s.bits).second);
          for (int i : s.members()) ++counts[i];
        }
        std::uint64_t lo = *std::min_element(counts.begin(), counts.end());
        std::uint64_t hi = *std::max_element(counts.begin(), counts.end());
        EXPECT_LE(hi - lo, 1u) << "n=" << n << " size=" << size << " budget=" << budget;
        if (budget == cap) {
          EXPECT_EQ(hi, binomial(n - 1, size - 1)) << "full stratum: every count is C(n-1,k-1)";
          EXPECT_EQ(lo, hi);
        }
      }
    }
  }
}

TEST(BalancedExtra, Validation) {
  Rng rng(1);
  EXPECT_THROW(balanced_extra(0, 1, 1, rng), std::invalid_argument);
  EXPECT_THROW(balanced_extra(4, 0, 1, rng), std::invalid_argument);
  EXPECT_THROW(balanced_extra(4, 5, 1, rng), std::invalid_argument);
  EXPECT_THROW(balanced_extra(4, 2, 7, rng), std::invalid_argument) << "only C(4,2)=6 exist";
  EXPECT_TRUE(balanced_extra(4, 2, 0, rng).empty());
}

TEST(Ipss, FullBudgetReproducesTheExactValues) {
  for (int n = 3; n <= 6; ++n) {
    UtilityTable table = random_full_table(n, 40 + static_cast<std::uint64_t>(n));
    TableOracle oracle(table);
    Valuation exact = exact_mc_sv(oracle, n);
    Rng rng(derive_seed(41, "test/ipss", static_cast<std::uint64_t>(n)));
    Valuation v = ipss(oracle, n, std::uint64_t{1} << n, rng);
    EXPECT_EQ(v.evaluations, std::uint64_t{1} << n);
    ASSERT_TRUE(v.k_star.has_value());
    EXPECT_EQ(*v.k_star, n);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(v.values[i], exact.values[i], 1e-10) << "n=" << n << " client " << i + 1;
    }
  }
}

TEST(Ipss, SurplusBudgetIsHarmless) {
  UtilityTable table = random_full_table(4, 44);
  TableOracle oracle(table);
  Rng rng(1);
  Valuation v = ipss(oracle, 4, 100, rng);
  EXPECT_EQ(v.evaluations, 16u) << "only 2^4 distinct coalitions exist";
}

TEST(Ipss, NeverExceedsTheBudget) {
  for (int n : {4, 7, 10, 12}) {
    UtilityTable table = random_full_table(n, 50 + static_cast<std::uint64_t>(n));
    auto inner = std::make_shared<TableOracle>(table);
    for (std::uint64_t gamma :
         {static_cast<std::uint64_t>(n) + 1, static_cast<std::uint64_t>(n) + 3,
          std::uint64_t{40}, (std::uint64_t{1} << n) - 5}) {
      if (gamma < static_cast<std::uint64_t>(n) + 1 || gamma > (std::uint64_t{1} << n)) continue;
      MemoizingOracle memo(inner);
      Rng rng(derive_seed(51, "test/ipss_budget", gamma));
      Valuation v = ipss(memo, n, gamma, rng);
      EXPECT_EQ(memo.distinct_evaluations(), gamma)
          << "a sub-exhaustive budget is spent exactly, n=" << n;
      EXPECT_EQ(v.evaluations, gamma);
      ASSERT_TRUE(v.gamma.has_value());
      EXPECT_EQ(*v.gamma, gamma);
    }
  }
}

TEST(Ipss, MinimumBudgetIsThePerClientLift) {
  UtilityTable table = random_full_table(6, 60);
  TableOracle oracle(table);
  Rng rng(1);
  Valuation v = ipss(oracle, 6, 7, rng);
  EXPECT_EQ(v.evaluations, 7u);
  ASSERT_TRUE(v.k_star.has_value());
  EXPECT_EQ(*v.k_star, 1);
  ASSERT_TRUE(v.extra.has_value());
  EXPECT_EQ(*v.extra, 0u);
  double empty = table.at(Coalition::empty(6));
  for (int i = 0; i < 6; ++i) {
    double single = table.at(Coalition(std::uint64_t{1} << i, 6));
    EXPECT_DOUBLE_EQ(v.values[i], (single - empty) / 6.0);
  }
}

TEST(Ipss, BudgetBelowTheSingletonsIsRejected) {
  UtilityTable table = make_table1();
  TableOracle oracle(table);
  Rng rng(1);
  EXPECT_THROW(ipss(oracle, 3, 3, rng), std::invalid_argument);
  EXPECT_NO_THROW(ipss(oracle, 3, 4, rng));
}

TEST(Ipss, ValueFreeClientScoresExactlyZero) {
  // Client 3 never changes the utility: U(S + 3) is a bitwise copy of U(S).
  UtilityTable base = random_full_table(2, 61);
  UtilityTable table;
  table.n = 3;
  for (std::uint64_t mask = 0; mask < 4; ++mask) {
    double u = base.at(Coalition(mask, 2));
    table.set(Coalition(mask, 3), u);
    table.set(Coalition(mask | 0b100, 3), u);
  }
  TableOracle oracle(table);
  for (std::uint64_t gamma : {std::uint64_t{4}, std::uint64_t{6}, std::uint64_t{8}}) {
    Rng rng(derive_seed(62, "test/ipss_null", gamma));
    Valuation v = ipss(oracle, 3, gamma, rng);
    EXPECT_EQ(v.values[2], 0.0) << "every pair difference cancels exactly, gamma=" << gamma;
  }
}

TEST(Ipss, PartialStratumPairingMatchesAReplayedDraw) {
  // gamma = 12 on n = 4 covers sizes 0..2 (11 evaluations) and draws one
  // size-3 coalition. Replaying the balanced draw with the same stream
  // reveals which one, and the estimate must equal the hand-assembled
  // formula: exact lifts for sizes 0 and 1, plus the lone sampled triple
  // paired against its always-present size-2 subset.
  UtilityTable table = random_full_table(4, 63);
  TableOracle oracle(table);
  std::uint64_t stream = derive_seed(64, "test/ipss_partial", 0);

  Rng run_rng(stream);
  Valuation v = ipss(oracle, 4, 12, run_rng);
  ASSERT_TRUE(v.k_star.has_value());
  EXPECT_EQ(*v.k_star, 2);
  ASSERT_TRUE(v.extra.has_value());
  EXPECT_EQ(*v.extra, 1u);
  EXPECT_EQ(v.evaluations, 12u);

  Rng replay_rng(stream);
  std::vector<Coalition> partial = balanced_extra(4, 3, 1, replay_rng);
  ASSERT_EQ(partial.size(), 1u);
  Coalition drawn = partial[0];

  for (int i = 0; i < 4; ++i) {
    std::uint64_t bit = std::uint64_t{1} << i;
    double phi = 0.0;
    for (int k = 0; k <= 1; ++k) {
      double sum = 0.0;
      for (std::uint64_t mask = 0; mask < 16; ++mask) {
        if ((mask & bit) || std::popcount(mask) != k) continue;
        sum += table.at(Coalition(mask | bit, 4)) - table.at(Coalition(mask, 4));
      }
      sum /= static_cast<double>(binomial(3, k));
      phi += sum;
    }
    if (drawn.bits & bit) {
      phi += table.at(drawn) - table.at(Coalition(drawn.bits & ~bit, 4));
    }
    phi /= 4.0;
    EXPECT_NEAR(v.values[i], phi, 1e-12) << "client " << i + 1;
  }
}

TEST(Ipss, DeterministicAcrossRuns) {
  UtilityTable table = random_full_table(6, 65);
  TableOracle oracle(table);
  Rng a(derive_seed(66, "test/ipss_det", 0));
  Rng b(derive_seed(66, "test/ipss_det", 0));
  Valuation va = ipss(oracle, 6, 14, a);  // covers sizes 0..1, draws 7 pairs
  Valuation vb = ipss(oracle, 6, 14, b);
  EXPECT_EQ(va.values, vb.values);
}

TEST(Ipss, RefusesRunawayBudgets) {
  UntouchableOracle big(64);
  Rng rng(1);
  EXPECT_THROW(ipss(big, 64, 20'000'000, rng), std::length_error);
}

}  // namespace
}  // namespace shapval
