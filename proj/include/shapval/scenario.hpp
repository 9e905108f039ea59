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

#ifndef SHAPVAL_SCENARIO_HPP
#define SHAPVAL_SCENARIO_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapval/regression.hpp"
#include "shapval/rng.hpp"

namespace shapval {

/// Families of simulated federations. All draw features from N(0, I_d) and
/// targets from y = x . w_true + sigma * eps unless noted.
enum class ScenarioKind {
  kSameSizeSameDist,   // baseline: n equal shards, one distribution
  kSameSizeDiffDist,   // per-client feature mean shift mu_i ~ N(0, I_d)
  kDiffSizeSameDist,   // shard sizes proportional to the client index
  kSameSizeNoisyLabel,    // a fraction of each shard's labels is re-drawn at random
  kSameSizeNoisyFeature,  // feature entries perturbed by level * N(0,1)
};

inline std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kSameSizeSameDist: return "same_size_same_dist";
    case ScenarioKind::kSameSizeDiffDist: return "same_size_diff_dist";
    case ScenarioKind::kDiffSizeSameDist: return "diff_size_same_dist";
    case ScenarioKind::kSameSizeNoisyLabel: return "same_size_noisy_label";
    case ScenarioKind::kSameSizeNoisyFeature: return "same_size_noisy_feature";
  }
  throw std::invalid_argument("unknown scenario kind");
}

inline ScenarioKind parse_scenario_name(const std::string& name) {
  if (name == "same_size_same_dist") return ScenarioKind::kSameSizeSameDist;
  if (name == "same_size_diff_dist") return ScenarioKind::kSameSizeDiffDist;
  if (name == "diff_size_same_dist") return ScenarioKind::kDiffSizeSameDist;
  if (name == "same_size_noisy_label") return ScenarioKind::kSameSizeNoisyLabel;
  if (name == "same_size_noisy_feature") return ScenarioKind::kSameSizeNoisyFeature;
  throw std::invalid_argument("unknown scenario \"" + name + "\"");
}

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kSameSizeSameDist;
  int n = 0;                 // clients
  int t = 0;                 // per-client samples (base size for the unequal kind)
  int d = 0;                 // features
  double sigma = 0.1;        // training label noise
  double noise_level = 0.0;  // corruption level for the noisy kinds, in [0, 1]
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1 || n > kMaxClients) {
      throw std::invalid_argument("scenario n must be in [1, 64], got " + std::to_string(n));
    }
    if (t < 1) throw std::invalid_argument("scenario t must be >= 1");
    if (d < 1) throw std::invalid_argument("scenario d must be >= 1");
    if (sigma < 0.0) throw std::invalid_argument("scenario sigma must be >= 0");
    if (noise_level < 0.0 || noise_level > 1.0) {
      throw std::invalid_argument("scenario noise_level must be in [0, 1]");
    }
  }
};

/// Shard sizes per kind. The unequal kind allocates n*t total samples
/// proportionally to the 1-based client index (floors, remainder to the
/// largest clients), e.g. n=4, t=10 -> (4, 8, 12, 16).
inline std::vector<int> scenario_client_sizes(ScenarioKind kind, int n, int t) {
  std::vector<int> sizes(n, t);
  if (kind != ScenarioKind::kDiffSizeSameDist) return sizes;
  std::int64_t total = static_cast<std::int64_t>(n) * t;
  std::int64_t weight_sum = static_cast<std::int64_t>(n) * (n + 1) / 2;
  std::int64_t assigned = 0;
  for (int i = 0; i < n; ++i) {
    sizes[i] = static_cast<int>(total * (i + 1) / weight_sum);
    assigned += sizes[i];
  }
  for (std::int64_t r = total - assigned; r > 0; --r) {
    ++sizes[n - static_cast<int>(r)];  // hand leftovers to the largest clients
  }
  return sizes;
}

namespace detail {

/// `count` distinct indices from [0, t), ascending. Consumes no draws when
/// count == 0 (keeps noise-free runs bit-identical to the baseline kind).
inline std::vector<int> sample_index_subset(int t, int count, Rng& rng) {
  if (count < 0 || count > t) throw std::invalid_argument("sample_index_subset: bad count");
  if (count == 0) return {};
  std::vector<int> pool(t);
  std::iota(pool.begin(), pool.end(), 0);
  for (int j = 0; j < count; ++j) {
    std::uint64_t pick = rng.uniform_index(static_cast<std::uint64_t>(t - j));
    std::swap(pool[j], pool[j + static_cast<int>(pick)]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline Eigen::VectorXd draw_normal_vector(int d, Rng& rng) {
  Eigen::VectorXd v(d);
  for (int c = 0; c < d; ++c) v(c) = rng.normal();
  return v;
}

}  // namespace detail

/// Draws a federation. The draw order is pinned so that runs replay
/// bit-for-bit and so that the noisy-label kind at level 0 is bit-identical
/// to the baseline kind:
///   true coefficients, test features, per client (optional mean shift,
///   features row-major, per-row label noise), then kind-specific corruption.
inline RegressionFederation generate_scenario(const ScenarioConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, "scenario", 0));
  RegressionFederation fed;
  fed.n = config.n;
  fed.d = config.d;
  fed.sigma = config.sigma;

  fed.true_coefficients = detail::draw_normal_vector(config.d, rng);

  int test_rows = 10 * config.d * config.n;
  fed.test_features = Eigen::MatrixXd(test_rows, config.d);
  for (int r = 0; r < test_rows; ++r) {
    for (int c = 0; c < config.d; ++c) fed.test_features(r, c) = rng.normal();
  }
  // Held-out targets are noise-free so that a model's test MSE measures its
  // distance to the true coefficients and nothing else.
  fed.test_targets = fed.test_features * fed.true_coefficients;

  std::vector<int> sizes = scenario_client_sizes(config.kind, config.n, config.t);
  fed.features.resize(config.n);
  fed.targets.resize(config.n);
  for (int i = 0; i < config.n; ++i) {
    int rows = sizes[i];
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(config.d);
    if (config.kind == ScenarioKind::kSameSizeDiffDist) {
      shift = detail::draw_normal_vector(config.d, rng);
    }
    Eigen::MatrixXd x(rows, config.d);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < config.d; ++c) x(r, c) = rng.normal() + shift(c);
    }
    Eigen::VectorXd y(rows);
    for (int r = 0; r < rows; ++r) {
      y(r) = x.row(r).dot(fed.true_coefficients) + config.sigma * rng.normal();
    }
    fed.features[i] = std::move(x);
    fed.targets[i] = std::move(y);
  }

  if (config.kind == ScenarioKind::kSameSizeNoisyLabel) {
    for (int i = 0; i < config.n; ++i) {
      int rows = sizes[i];
      int count = static_cast<int>(config.noise_level * rows);
      std::vector<int> picked = detail::sample_index_subset(rows, count, rng);
      for (int idx : picked) {
        // Replace the label with one drawn for an unrelated feature vector:
        // the stored features stay, so the label carries no signal.
        Eigen::VectorXd ghost = detail::draw_normal_vector(config.d, rng);
        fed.targets[i](idx) =
            ghost.dot(fed.true_coefficients) + config.sigma * rng.normal();
      }
    }
  } else if (config.kind == ScenarioKind::kSameSizeNoisyFeature) {
    for (int i = 0; i < config.n; ++i) {
      for (int r = 0; r < sizes[i]; ++r) {
        for (int c = 0; c < config.d; ++c) {
          fed.features[i](r, c) += config.noise_level * rng.normal();
        }
      }
    }
  }

  fed.finalize();
  return fed;
}

/// Returns a copy in which `client` (0-based) contributes no data at all.
inline RegressionFederation with_null_client(RegressionFederation fed, int client) {
  if (client < 0 || client >= fed.n) {
    throw std::invalid_argument("null client index out of range: " + std::to_string(client));
  }
  fed.features[client] = Eigen::MatrixXd(0, fed.d);
  fed.targets[client] = Eigen::VectorXd(0);
  fed.finalize();
  return fed;
}

/// Returns a copy in which `target` holds an exact copy of `source`'s shard,
/// making the two clients interchangeable for any utility computation.
inline RegressionFederation with_duplicate(RegressionFederation fed, int source, int target) {
  if (source < 0 || source >= fed.n || target < 0 || target >= fed.n || source == target) {
    throw std::invalid_argument("bad duplicate pair (" + std::to_string(source) + ", " +
                                std::to_string(target) + ")");
  }
  fed.features[target] = fed.features[source];
  fed.targets[target] = fed.targets[source];
  fed.finalize();
  return fed;
}

}  // namespace shapval

#endif  // SHAPVAL_SCENARIO_HPP
