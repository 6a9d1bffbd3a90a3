/*
 * Copyright 2026 The WFC Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WFC_ORACLE_HPP_
#define WFC_ORACLE_HPP_

// Independent ground truth for tests: exact Wasserstein-1 at tiny scale,
// exact discrete mutual information and a central finite-difference gradient
// checker. Nothing here depends on the network code.

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace wfc::oracle {

// A distribution over finitely many points on the real line.
struct DiscreteDistribution {
  std::vector<double> points;
  std::vector<double> probabilities;

  // Equal weights on `points`.
  static DiscreteDistribution Empirical(std::vector<double> points);

  // Throws DataError unless probabilities are non-negative and sum to 1
  // within 1e-12.
  void Validate() const;
};

// W1 on the line: integral over u in [0, 1] of |F_p^-1(u) - F_q^-1(u)|.
double ExactW1_1d(const DiscreteDistribution& p, const DiscreteDistribution& q);

// Minimum over all n! permutations of the mean cost, i.e. optimal transport
// between two equal-weight point sets of size n. Refuses n > 8.
double ExactW1Assignment(const Eigen::MatrixXd& cost);

enum class GroundMetric { kL1, kEuclidean };

// Optimal transport between the rows of `p` and the rows of `q` (same count,
// equal weights, n <= 8).
double ExactW1Discrete(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                       GroundMetric metric);

// Joint probability table over two finite alphabets.
struct JointTable {
  Eigen::MatrixXd p;

  // Throws DataError on negative entries or a total away from 1 by > 1e-12.
  void Validate() const;
};

// Mutual information in nats with 0 * ln(0 / x) = 0.
double DiscreteMi(const JointTable& joint);

struct DataProcessingResult {
  double mi_before = 0.0;
  double mi_after = 0.0;
};

// `joint` is over (Z, S); `map[z]` in [0, output_size) is a deterministic
// function of Z. Returns MI(Z; S) and MI(h(Z); S).
DataProcessingResult DataProcessingCheck(const JointTable& joint,
                                         std::span<const int> map,
                                         int output_size);

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::vector<double> numeric;
};

enum class DifferenceScheme {
  // (f(w + h) - f(w - h)) / 2h.
  kCentral,
  // Richardson extrapolation of the central difference at h and h/2. Its
  // truncation error is O(h^4), so a larger h keeps rounding noise down.
  kRichardson,
};

// Finite differences of `loss` around `params`, compared against
// `analytic`. Per-coordinate error is
// |a - n| / max(1e-12, |a| + |n|). Throws RuntimeFailure if the loss is not
// finite.
GradcheckResult FiniteDiffGradcheck(
    const std::function<double(std::span<const double>)>& loss,
    std::span<const double> params, std::span<const double> analytic,
    double step = 1e-6, DifferenceScheme scheme = DifferenceScheme::kCentral);

}  // namespace wfc::oracle

#endif  // WFC_ORACLE_HPP_
