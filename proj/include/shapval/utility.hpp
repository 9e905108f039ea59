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

#ifndef SHAPVAL_UTILITY_HPP
#define SHAPVAL_UTILITY_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shapval/coalition.hpp"

namespace shapval {

/// Raised when a table, config, or report file is malformed.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Snapshot of an oracle's counters.
struct OracleStats {
  std::uint64_t evaluations = 0;  // inner computations performed
  std::uint64_t cache_hits = 0;   // requests answered from a cache
  double wall_ms = 0.0;           // cumulative time spent in inner computations
};

/// A coalition utility function U(S).
///
/// evaluate() validates the coalition, forwards to do_evaluate(), and
/// guarantees that no NaN or infinity ever escapes. Implementations must be
/// safe to call from concurrent workers; the counters here are atomic.
class UtilityOracle {
 public:
  virtual ~UtilityOracle() = default;

  virtual int client_count() const = 0;

  double evaluate(const Coalition& s) const {
    if (s.n != client_count()) {
      throw std::invalid_argument("utility oracle for " + std::to_string(client_count()) +
                                  " clients cannot evaluate " + shapval::to_string(s) + " (n=" +
                                  std::to_string(s.n) + ")");
    }
    double value = do_evaluate(s);
    if (!std::isfinite(value)) {
      throw std::domain_error("utility oracle produced a non-finite value for " +
                              shapval::to_string(s));
    }
    return value;
  }

  OracleStats stats() const {
    return OracleStats{evaluations_.load(), cache_hits_.load(),
                       static_cast<double>(wall_ns_.load()) / 1e6};
  }

 protected:
  virtual double do_evaluate(const Coalition& s) const = 0;

  void note_evaluation(std::uint64_t elapsed_ns) const {
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    wall_ns_.fetch_add(elapsed_ns, std::memory_order_relaxed);
  }
  void note_cache_hit() const { cache_hits_.fetch_add(1, std::memory_order_relaxed); }

 private:
  mutable std::atomic<std::uint64_t> evaluations_{0};
  mutable std::atomic<std::uint64_t> cache_hits_{0};
  mutable std::atomic<std::uint64_t> wall_ns_{0};
};

/// Monotonic nanosecond clock used for the wall-time counters.
inline std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

/// An explicit utility table: coalition bitmask -> utility.
struct UtilityTable {
  int n = 0;
  std::unordered_map<std::uint64_t, double> entries;

  /// True when every one of the 2^n coalitions has an entry.
  bool complete() const {
    if (n >= kMaxClients) return false;  // 2^64 entries cannot be materialized
    return entries.size() == (std::uint64_t{1} << n);
  }

  void set(const Coalition& s, double utility) {
    if (s.n != n) {
      throw std::invalid_argument("UtilityTable for n=" + std::to_string(n) +
                                  " cannot store " + shapval::to_string(s));
    }
    entries[s.bits] = utility;
  }

  bool contains(const Coalition& s) const { return entries.count(s.bits) != 0; }

  double at(const Coalition& s) const {
    auto it = entries.find(s.bits);
    if (it == entries.end()) {
      throw std::out_of_range("utility table has no entry for " + shapval::to_string(s));
    }
    return it->second;
  }
};

/// JSON form: { "n": 3, "entries": [ { "coalition": "{1,3}", "utility": 0.9 } ] }
/// with entries in ascending bitmask order. Doubles round-trip losslessly.
inline nlohmann::ordered_json table_to_json(const UtilityTable& table) {
  nlohmann::ordered_json out;
  out["n"] = table.n;
  std::vector<std::uint64_t> keys;
  keys.reserve(table.entries.size());
  for (const auto& [bits, value] : table.entries) keys.push_back(bits);
  std::sort(keys.begin(), keys.end());
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (std::uint64_t bits : keys) {
    nlohmann::ordered_json entry;
    entry["coalition"] = shapval::to_string(Coalition(bits, table.n));
    entry["utility"] = table.entries.at(bits);
    entries.push_back(std::move(entry));
  }
  out["entries"] = std::move(entries);
  return out;
}

inline UtilityTable table_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("entries")) {
    throw ParseError("utility table JSON must be an object with \"n\" and \"entries\"");
  }
  if (!j["n"].is_number_integer()) throw ParseError("utility table \"n\" must be an integer");
  int n = j["n"].get<int>();
  if (n < 1 || n > kMaxClients) {
    throw ParseError("utility table \"n\" must be in [1, 64], got " + std::to_string(n));
  }
  if (!j["entries"].is_array()) throw ParseError("utility table \"entries\" must be an array");
  UtilityTable table;
  table.n = n;
  for (const auto& entry : j["entries"]) {
    if (!entry.is_object() || !entry.contains("coalition") || !entry.contains("utility")) {
      throw ParseError("utility table entry must have \"coalition\" and \"utility\"");
    }
    if (!entry["coalition"].is_string()) throw ParseError("\"coalition\" must be a string");
    if (!entry["utility"].is_number()) throw ParseError("\"utility\" must be a number");
    Coalition s = Coalition::empty(n);
    try {
      s = parse_coalition(entry["coalition"].get<std::string>(), n);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
    double utility = entry["utility"].get<double>();
    if (!std::isfinite(utility)) {
      throw ParseError("non-finite utility for " + shapval::to_string(s));
    }
    if (table.contains(s)) {
      throw ParseError("duplicate table entry for " + shapval::to_string(s));
    }
    table.set(s, utility);
  }
  return table;
}

inline void save_table(const UtilityTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << table_to_json(table).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline UtilityTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return table_from_json(j);
}

/// Oracle backed by an explicit table. Missing coalitions raise
/// std::out_of_range naming the coalition.
class TableOracle : public UtilityOracle {
 public:
  explicit TableOracle(UtilityTable table) : table_(std::move(table)) {}

  int client_count() const override { return table_.n; }
  const UtilityTable& table() const { return table_; }

 protected:
  double do_evaluate(const Coalition& s) const override {
    std::uint64_t t0 = now_ns();
    double value = table_.at(s);
    note_evaluation(now_ns() - t0);
    return value;
  }

 private:
  UtilityTable table_;
};

/// Caching wrapper. Each distinct coalition is computed at most once even
/// under concurrent requests: the first caller computes while later callers
/// wait on a shared future. A computation that throws is not cached, so a
/// later request retries. stats().evaluations counts distinct computed
/// coalitions; stats().cache_hits counts requests served without computing.
class MemoizingOracle : public UtilityOracle {
 public:
  explicit MemoizingOracle(std::shared_ptr<const UtilityOracle> inner)
      : inner_(std::move(inner)) {
    if (!inner_) throw std::invalid_argument("MemoizingOracle: null inner oracle");
  }

  int client_count() const override { return inner_->client_count(); }

  std::uint64_t distinct_evaluations() const { return stats().evaluations; }

  bool cached(const Coalition& s) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(s.bits);
    return it != cache_.end() && it->second->ready;
  }

  /// Snapshot of all completed entries, reusable as a UtilityTable.
  UtilityTable snapshot() const {
    UtilityTable table;
    table.n = client_count();
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [bits, entry] : cache_) {
      if (entry->ready) table.entries[bits] = entry->value;
    }
    return table;
  }

  /// Seeds the cache from a previously saved table (counts as neither an
  /// evaluation nor a hit; later lookups of these coalitions are hits).
  void preload(const UtilityTable& table) {
    if (table.n != client_count()) {
      throw std::invalid_argument("preload: table is for n=" + std::to_string(table.n) +
                                  ", oracle has n=" + std::to_string(client_count()));
    }
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [bits, value] : table.entries) {
      auto it = cache_.find(bits);
      if (it != cache_.end()) continue;
      auto entry = std::make_shared<Entry>();
      entry->ready = true;
      entry->value = value;
      cache_.emplace(bits, std::move(entry));
    }
  }

 protected:
  double do_evaluate(const Coalition& s) const override {
    std::shared_ptr<Entry> entry;
    bool is_owner = false;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(s.bits);
      if (it != cache_.end()) {
        entry = it->second;
        if (entry->ready) {
          note_cache_hit();
          return entry->value;
        }
      } else {
        entry = std::make_shared<Entry>();
        entry->future = entry->promise.get_future().share();
        cache_.emplace(s.bits, entry);
        is_owner = true;
      }
    }
    if (!is_owner) {
      // Another thread is computing this coalition; wait for it.
      note_cache_hit();
      return entry->future.get();  // rethrows the computing thread's error
    }
    try {
      std::uint64_t t0 = now_ns();
      double value = inner_->evaluate(s);
      std::uint64_t elapsed = now_ns() - t0;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        entry->value = value;
        entry->ready = true;
      }
      entry->promise.set_value(value);
      note_evaluation(elapsed);
      return value;
    } catch (...) {
      {
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.erase(s.bits);  // errored coalitions are not cached
      }
      entry->promise.set_exception(std::current_exception());
      throw;
    }
  }

 private:
  struct Entry {
    std::promise<double> promise;
    std::shared_future<double> future;
    bool ready = false;
    double value = 0.0;
  };

  std::shared_ptr<const UtilityOracle> inner_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, std::shared_ptr<Entry>> cache_;
};

}  // namespace shapval

#endif  // SHAPVAL_UTILITY_HPP
