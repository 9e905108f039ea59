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

// Shared fixtures and independent reference implementations for the tests.

#ifndef SHAPVAL_TESTS_TEST_UTIL_HPP
#define SHAPVAL_TESTS_TEST_UTIL_HPP

#include <bit>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapval/coalition.hpp"
#include "shapval/rng.hpp"
#include "shapval/utility.hpp"

namespace shapval::testing {

/// Builds a coalition from 1-based member ids (the display convention).
inline Coalition make_coalition(std::initializer_list<int> members, int n) {
  Coalition s = Coalition::empty(n);
  for (int c : members) s = s.with(c - 1);
  return s;
}

/// The running 3-client example used throughout the tests. Its exact Shapley
/// values are (0.22, 0.32, 0.32) and the efficiency total is 0.86.
inline UtilityTable make_table1() {
  UtilityTable table;
  table.n = 3;
  auto put = [&](std::initializer_list<int> members, double utility) {
    table.set(make_coalition(members, 3), utility);
  };
  put({}, 0.10);
  put({1}, 0.50);
  put({2}, 0.70);
  put({3}, 0.60);
  put({1, 2}, 0.80);
  put({1, 3}, 0.90);
  put({2, 3}, 0.90);
  put({1, 2, 3}, 0.96);
  return table;
}

/// A deliberately incomplete 4-client table holding exactly the coalitions the
/// forced-sample estimator tests touch. Missing coalitions make any stray
/// lookup fail loudly.
inline UtilityTable make_partial_table() {
  UtilityTable table;
  table.n = 4;
  auto put = [&](std::initializer_list<int> members, double utility) {
    table.set(make_coalition(members, 4), utility);
  };
  put({}, 0.10);
  put({1}, 0.88);
  put({2}, 0.78);
  put({3}, 0.80);
  put({1, 2}, 0.83);
  put({1, 3}, 0.92);
  put({2, 3}, 0.86);
  put({1, 2, 3}, 0.93);
  put({2, 3, 4}, 0.85);
  put({1, 2, 3, 4}, 0.95);
  return table;
}

/// The fixed per-stratum sample lists (plan 3,3,2,1) that pair with
/// make_partial_table() in the frozen estimator goldens.
inline std::vector<std::vector<Coalition>> forced_samples() {
  return {
      {make_coalition({1}, 4), make_coalition({2}, 4), make_coalition({3}, 4)},
      {make_coalition({1, 2}, 4), make_coalition({1, 3}, 4), make_coalition({2, 3}, 4)},
      {make_coalition({1, 2, 3}, 4), make_coalition({2, 3, 4}, 4)},
      {make_coalition({1, 2, 3, 4}, 4)},
  };
}

/// A complete n-client table with utilities uniform in (0, 1).
inline UtilityTable random_full_table(int n, std::uint64_t seed) {
  if (n < 1 || n > 20) throw std::invalid_argument("random_full_table: n out of range");
  Rng rng(derive_seed(seed, "test/random_table", 0));
  UtilityTable table;
  table.n = n;
  std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    table.entries[bits] = rng.uniform_double();
  }
  return table;
}

/// Independent Shapley reference: the factorial-weight definition
///   phi_i = sum over S excluding i of |S|! (n-1-|S|)! / n! * (U(S+i) - U(S)),
/// evaluated by a plain scan over all bitmasks. Shares nothing with the
/// library solvers beyond table lookup.
inline std::vector<double> brute_force_shapley(const UtilityTable& table) {
  int n = table.n;
  std::vector<double> fact(static_cast<std::size_t>(n) + 1, 1.0);
  for (int i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
  std::vector<double> phi(n, 0.0);
  std::uint64_t total = std::uint64_t{1} << n;
  for (int i = 0; i < n; ++i) {
    std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t s = 0; s < total; ++s) {
      if (s & bit) continue;
      int k = std::popcount(s);
      double weight = fact[k] * fact[n - 1 - k] / fact[n];
      phi[i] += weight * (table.at(Coalition(s | bit, n)) - table.at(Coalition(s, n)));
    }
  }
  return phi;
}

/// Table-backed oracle that records the order in which coalitions are
/// evaluated, for pinning deterministic evaluation sequences.
class RecordingOracle : public UtilityOracle {
 public:
  explicit RecordingOracle(UtilityTable table) : table_(std::move(table)) {}

  int client_count() const override { return table_.n; }
  const std::vector<std::uint64_t>& order() const { return order_; }

 protected:
  double do_evaluate(const Coalition& s) const override {
    order_.push_back(s.bits);
    return table_.at(s);
  }

 private:
  UtilityTable table_;
  mutable std::vector<std::uint64_t> order_;
};

/// A self-deleting temporary directory.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    std::filesystem::path base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::uint64_t tag = (std::uint64_t{rd()} << 32) ^ rd();
      std::filesystem::path candidate = base / ("shapval_test_" + std::to_string(tag));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec) && !ec) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create a temporary directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace shapval::testing

#endif  // SHAPVAL_TESTS_TEST_UTIL_HPP
