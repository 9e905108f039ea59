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

#ifndef SHAPVAL_COALITION_HPP
#define SHAPVAL_COALITION_HPP

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace shapval {

/// Maximum number of clients a Coalition bitmask can hold.
inline constexpr int kMaxClients = 64;

/// Largest stratum that enumerate_stratum() will materialize as a vector.
inline constexpr std::uint64_t kEnumerationCap = std::uint64_t{1} << 24;

/// A subset of the client set {0, ..., n-1}, stored as a bitmask.
///
/// Clients are 0-based internally; the display form is 1-based and brace
/// delimited, e.g. "{1,3}" for bits 0 and 2, and "{}" for the empty set.
struct Coalition {
  std::uint64_t bits = 0;
  int n = 0;

  Coalition() = default;
  Coalition(std::uint64_t bits_in, int n_in) : bits(bits_in), n(n_in) {
    if (n_in < 0 || n_in > kMaxClients) {
      throw std::invalid_argument("Coalition: client count must be in [0, 64], got " +
                                  std::to_string(n_in));
    }
    if (n_in < kMaxClients && (bits_in >> n_in) != 0) {
      throw std::invalid_argument("Coalition: bitmask has members outside {0,...," +
                                  std::to_string(n_in - 1) + "}");
    }
  }

  static Coalition empty(int n) { return Coalition(0, n); }
  static Coalition grand(int n) {
    return Coalition(n == kMaxClients ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1, n);
  }

  int size() const { return std::popcount(bits); }
  bool is_empty() const { return bits == 0; }

  bool contains(int client) const {
    check_client(client);
    return (bits >> client) & 1u;
  }

  /// Returns this coalition with `client` added (idempotent).
  Coalition with(int client) const {
    check_client(client);
    return Coalition(bits | (std::uint64_t{1} << client), n);
  }

  /// Returns this coalition with `client` removed (idempotent).
  Coalition without(int client) const {
    check_client(client);
    return Coalition(bits & ~(std::uint64_t{1} << client), n);
  }

  /// Returns N \ S for the same client count.
  Coalition complement() const { return Coalition(grand(n).bits & ~bits, n); }

  /// Member clients in ascending order.
  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint64_t rest = bits; rest != 0; rest &= rest - 1) {
      out.push_back(std::countr_zero(rest));
    }
    return out;
  }

  friend bool operator==(const Coalition& a, const Coalition& b) {
    return a.bits == b.bits && a.n == b.n;
  }
  friend bool operator<(const Coalition& a, const Coalition& b) { return a.bits < b.bits; }

 private:
  void check_client(int client) const {
    if (client < 0 || client >= n) {
      throw std::invalid_argument("Coalition: client index " + std::to_string(client) +
                                  " outside {0,...," + std::to_string(n - 1) + "}");
    }
  }
};

/// Canonical display form: 1-based members in ascending order, e.g. "{1,3}".
inline std::string to_string(const Coalition& s) {
  std::string out = "{";
  bool first = true;
  for (int c : s.members()) {
    if (!first) out += ',';
    out += std::to_string(c + 1);
    first = false;
  }
  out += '}';
  return out;
}

/// Parses the display form produced by to_string(). Accepts optional spaces
/// after commas. Throws std::invalid_argument on malformed text, duplicate
/// members, or members outside {1,...,n}.
inline Coalition parse_coalition(const std::string& text, int n) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("parse_coalition: " + why + " in \"" + text + "\"");
  };
  auto skip_spaces = [&] {
    while (pos < text.size() && text[pos] == ' ') ++pos;
  };
  skip_spaces();
  if (pos >= text.size() || text[pos] != '{') fail("expected '{'");
  ++pos;
  Coalition out = Coalition::empty(n);
  skip_spaces();
  if (pos < text.size() && text[pos] == '}') {
    ++pos;
  } else {
    while (true) {
      skip_spaces();
      std::size_t start = pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      if (pos == start) fail("expected client number");
      long value = std::stol(text.substr(start, pos - start));
      if (value < 1 || value > n) fail("client " + std::to_string(value) + " outside {1,...," +
                                       std::to_string(n) + "}");
      int client = static_cast<int>(value - 1);
      if (out.contains(client)) fail("duplicate client " + std::to_string(value));
      out = out.with(client);
      skip_spaces();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      if (pos < text.size() && text[pos] == '}') {
        ++pos;
        break;
      }
      fail("expected ',' or '}'");
    }
  }
  skip_spaces();
  if (pos != text.size()) fail("trailing characters");
  return out;
}

/// Exact binomial coefficient C(n, k).
///
/// Throws std::invalid_argument for negative arguments or k > n, and
/// std::overflow_error if the result (or an intermediate) would not fit in
/// 64 bits. All C(n, k) with n <= 64 fit.
inline std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0) {
    throw std::invalid_argument("binomial: negative argument");
  }
  if (k > n) {
    throw std::invalid_argument("binomial: k=" + std::to_string(k) + " exceeds n=" +
                                std::to_string(n));
  }
  if (k > n - k) k = n - k;
  unsigned __int128 result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<unsigned>(n - k + i);
    result /= static_cast<unsigned>(i);  // exact: C(n-k+i, i) is an integer
    if (result > static_cast<unsigned __int128>(~std::uint64_t{0})) {
      throw std::overflow_error("binomial: C(" + std::to_string(n) + "," + std::to_string(k) +
                                ") exceeds 64 bits");
    }
  }
  return static_cast<std::uint64_t>(result);
}

/// Number of coalitions in the size-k stratum of an n-client game.
struct Stratum {
  int n = 0;
  int k = 0;
  std::uint64_t count() const { return binomial(n, k); }
};

/// Gosper's hack: next bitmask with the same popcount, in ascending order.
/// Precondition: v != 0. The caller bounds the iteration count.
inline std::uint64_t next_same_popcount(std::uint64_t v) {
  std::uint64_t c = v & (~v + 1);
  std::uint64_t r = v + c;
  return (((r ^ v) >> 2) / c) | r;
}

/// All size-k coalitions of an n-client game, in ascending bitmask order.
/// Throws std::length_error if the stratum is too large to materialize.
inline std::vector<Coalition> enumerate_stratum(int n, int k) {
  Stratum stratum{n, k};
  std::uint64_t count = stratum.count();  // validates 0 <= k <= n
  if (count > kEnumerationCap) {
    throw std::length_error("enumerate_stratum: C(" + std::to_string(n) + "," +
                            std::to_string(k) + ")=" + std::to_string(count) +
                            " exceeds the enumeration cap");
  }
  std::vector<Coalition> out;
  out.reserve(static_cast<std::size_t>(count));
  if (k == 0) {
    out.push_back(Coalition::empty(n));
    return out;
  }
  std::uint64_t mask = (k == kMaxClients) ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
  for (std::uint64_t i = 0; i < count; ++i) {
    out.emplace_back(mask, n);
    if (i + 1 < count) mask = next_same_popcount(mask);
  }
  return out;
}

/// Maps a bitmask over the (n-1)-element index space {0,...,n-1} \ {skip}
/// back to the full n-client space. Bit b of `reduced` refers to client b when
/// b < skip and to client b+1 otherwise. The mapping is monotone, so ascending
/// reduced masks enumerate ascending full-space masks.
inline std::uint64_t expand_excluding(std::uint64_t reduced, int skip) {
  std::uint64_t low = reduced & ((std::uint64_t{1} << skip) - 1);
  std::uint64_t high =
      (skip + 1 >= kMaxClients) ? 0 : (reduced >> skip) << (skip + 1);
  return low | high;
}

}  // namespace shapval

#endif  // SHAPVAL_COALITION_HPP
