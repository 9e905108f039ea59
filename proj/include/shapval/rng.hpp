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

#ifndef SHAPVAL_RNG_HPP
#define SHAPVAL_RNG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "shapval/coalition.hpp"

namespace shapval {

/// SplitMix64 output function. Used to derive independent stream seeds; the
/// draws themselves come from std::mt19937_64 (the engine's sequence is fully
/// specified by the standard, so replays are byte-identical everywhere).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// FNV-1a hash of a label, used to key rng streams by method name.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Seed for the stream identified by (base seed, tag, index). Changing any
/// component yields an unrelated stream, so one method's draws never disturb
/// another's.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
  return mix64(mix64(base ^ fnv1a(tag)) ^ (0x9e3779b97f4a7c15ull * (index + 1)));
}

/// Deterministic random source.
///
/// Bounded integers use rejection sampling and normals use Box-Muller, both
/// spelled out here rather than delegated to std distributions, whose
/// algorithms are implementation-defined. Given a seed, every draw sequence
/// is therefore pinned by this file alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::uniform_index: bound must be positive");
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in (0, 1), 53-bit resolution, never exactly 0 or 1.
  double uniform_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw via Box-Muller; the paired draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform_double();
    double u2 = uniform_double();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Uniform draw from the size-k stratum of an n-client game (Floyd's
/// algorithm: k distinct clients, each size-k coalition equally likely).
inline Coalition sample_coalition(int n, int k, Rng& rng) {
  if (n < 0 || n > kMaxClients || k < 0 || k > n) {
    throw std::invalid_argument("sample_coalition: need 0 <= k <= n <= 64");
  }
  std::uint64_t bits = 0;
  for (int j = n - k; j < n; ++j) {
    std::uint64_t t = rng.uniform_index(static_cast<std::uint64_t>(j) + 1);
    if ((bits >> t) & 1u) {
      bits |= std::uint64_t{1} << j;
    } else {
      bits |= std::uint64_t{1} << t;
    }
  }
  return Coalition(bits, n);
}

/// Uniform random permutation of {0, ..., n-1} (Fisher-Yates).
inline std::vector<int> random_permutation(int n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("random_permutation: negative n");
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    std::uint64_t j = rng.uniform_index(static_cast<std::uint64_t>(i) + 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  return order;
}

/// `m` distinct size-k coalitions drawn uniformly without replacement,
/// returned in ascending bitmask order. For small strata this is a partial
/// shuffle of the full enumeration; for large ones, rejection sampling.
inline std::vector<Coalition> sample_stratum_without_replacement(int n, int k, std::uint64_t m,
                                                                 Rng& rng) {
  std::uint64_t count = binomial(n, k);
  if (m > count) {
    throw std::invalid_argument("sample_stratum_without_replacement: m=" + std::to_string(m) +
                                " exceeds C(" + std::to_string(n) + "," + std::to_string(k) +
                                ")=" + std::to_string(count));
  }
  std::vector<Coalition> out;
  if (m == 0) return out;
  if (m == count) return enumerate_stratum(n, k);  // already ascending
  if (count <= 4096) {
    std::vector<Coalition> all = enumerate_stratum(n, k);
    for (std::uint64_t i = 0; i < m; ++i) {
      std::uint64_t j = i + rng.uniform_index(count - i);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
  } else {
    std::unordered_set<std::uint64_t> seen;
    out.reserve(static_cast<std::size_t>(m));
    while (seen.size() < m) {
      Coalition s = sample_coalition(n, k, rng);
      if (seen.insert(s.bits).second) out.push_back(s);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace shapval

#endif  // SHAPVAL_RNG_HPP
