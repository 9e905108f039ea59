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

#ifndef SHAPVAL_REGRESSION_HPP
#define SHAPVAL_REGRESSION_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapval/coalition.hpp"
#include "shapval/utility.hpp"

namespace shapval {

/// Tiny ridge term added to every normal-equation solve so that rank-deficient
/// coalitions (e.g. fewer pooled rows than features) still produce a finite,
/// deterministic model instead of an exploding pseudo-inverse.
inline constexpr double kRidge = 1e-8;

/// Solves (gram + ridge*I) w = moment with a robust LDLT factorization.
inline Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram,
                                              const Eigen::VectorXd& moment,
                                              double ridge = kRidge) {
  if (gram.rows() != gram.cols() || gram.rows() != moment.size()) {
    throw std::invalid_argument("solve_normal_equations: dimension mismatch");
  }
  Eigen::MatrixXd a = gram;
  a.diagonal().array() += ridge;
  return a.ldlt().solve(moment);
}

/// Least-squares fit of targets on features (with the standard ridge term).
inline Eigen::VectorXd ols_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
  if (features.rows() != targets.size()) {
    throw std::invalid_argument("ols_fit: " + std::to_string(features.rows()) +
                                " feature rows vs " + std::to_string(targets.size()) +
                                " targets");
  }
  if (!features.allFinite() || !targets.allFinite()) {
    throw std::invalid_argument("ols_fit: non-finite training data");
  }
  Eigen::MatrixXd gram = features.transpose() * features;
  Eigen::VectorXd moment = features.transpose() * targets;
  return solve_normal_equations(gram, moment);
}

/// A simulated federation: per-client regression shards plus a shared held-out
/// test set. Training on a coalition pools the members' sufficient statistics
/// (Gram matrix X'X and moment vector X'y), so evaluating a coalition costs
/// O(n d^2 + d^3) regardless of sample counts. Call finalize() after any
/// change to the raw data.
struct RegressionFederation {
  int n = 0;      // clients
  int d = 0;      // features
  double sigma = 0.0;  // training label noise used at generation time

  std::vector<Eigen::MatrixXd> features;  // per client: t_i x d
  std::vector<Eigen::VectorXd> targets;   // per client: t_i
  Eigen::MatrixXd test_features;          // T x d
  Eigen::VectorXd test_targets;           // T
  Eigen::VectorXd true_coefficients;      // the d-vector the data was drawn from

  // Derived by finalize():
  std::vector<Eigen::MatrixXd> gram;      // per client: X'X
  std::vector<Eigen::VectorXd> moment;    // per client: X'y
  Eigen::MatrixXd test_gram;              // Xt'Xt
  Eigen::VectorXd test_moment;            // Xt'yt
  double test_square_sum = 0.0;           // yt'yt
  double null_utility = 0.0;              // -MSE of the all-zero model = -yt'yt/T

  int client_size(int i) const { return static_cast<int>(features.at(i).rows()); }
  int test_size() const { return static_cast<int>(test_features.rows()); }

  void finalize() {
    if (n < 1 || d < 1) throw std::invalid_argument("federation needs n >= 1 and d >= 1");
    if (static_cast<int>(features.size()) != n || static_cast<int>(targets.size()) != n) {
      throw std::invalid_argument("federation has inconsistent client counts");
    }
    if (test_features.rows() < 1) throw std::invalid_argument("federation needs a test set");
    gram.assign(n, Eigen::MatrixXd());
    moment.assign(n, Eigen::VectorXd());
    for (int i = 0; i < n; ++i) {
      if (features[i].cols() != d || features[i].rows() != targets[i].size()) {
        throw std::invalid_argument("client " + std::to_string(i + 1) + " has malformed data");
      }
      gram[i] = features[i].transpose() * features[i];
      moment[i] = features[i].transpose() * targets[i];
    }
    test_gram = test_features.transpose() * test_features;
    test_moment = test_features.transpose() * test_targets;
    test_square_sum = test_targets.squaredNorm();
    null_utility = -test_square_sum / static_cast<double>(test_features.rows());
  }

  /// Test-set mean squared error of a model, computed from the test moments:
  /// (w'Gw - 2 w'h + y'y) / T. For w = 0 this reduces bit-for-bit to
  /// -null_utility.
  double mean_squared_error(const Eigen::VectorXd& w) const {
    double quadratic = w.dot(test_gram * w);
    double cross = 2.0 * w.dot(test_moment);
    return (quadratic - cross + test_square_sum) / static_cast<double>(test_features.rows());
  }

  /// Trains on the pooled statistics of a coalition and returns the model.
  Eigen::VectorXd fit(const Coalition& s) const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(d);
    for (int i : s.members()) {
      g += gram[i];
      h += moment[i];
    }
    return solve_normal_equations(g, h);
  }
};

/// Utility oracle U(S) = -(test MSE of the model trained on S). The empty
/// coalition trains the all-zero model, so U({}) = -y'y/T exactly.
class RegressionOracle : public UtilityOracle {
 public:
  explicit RegressionOracle(std::shared_ptr<const RegressionFederation> federation)
      : federation_(std::move(federation)) {
    if (!federation_) throw std::invalid_argument("RegressionOracle: null federation");
    if (federation_->gram.size() != static_cast<std::size_t>(federation_->n)) {
      throw std::invalid_argument("RegressionOracle: federation not finalized");
    }
  }

  int client_count() const override { return federation_->n; }
  const RegressionFederation& federation() const { return *federation_; }

 protected:
  double do_evaluate(const Coalition& s) const override {
    std::uint64_t t0 = now_ns();
    Eigen::VectorXd w = federation_->fit(s);
    double value = -federation_->mean_squared_error(w);
    note_evaluation(now_ns() - t0);
    return value;
  }

 private:
  std::shared_ptr<const RegressionFederation> federation_;
};

}  // namespace shapval

#endif  // SHAPVAL_REGRESSION_HPP
