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

#include "wfc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wfc/error.hpp"

namespace wfc::oracle {
namespace {

constexpr double kNormalizationTolerance = 1e-12;

// Quantile function of a discrete distribution as sorted (point, cumulative
// probability) steps.
struct Quantiles {
  std::vector<double> points;
  std::vector<double> cumulative;
};

Quantiles SortedQuantiles(const DiscreteDistribution& d) {
  std::vector<std::size_t> order(d.points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return d.points[a] < d.points[b]; });
  Quantiles q;
  double total = 0.0;
  for (std::size_t i : order) {
    if (d.probabilities[i] == 0.0) continue;
    total += d.probabilities[i];
    q.points.push_back(d.points[i]);
    q.cumulative.push_back(total);
  }
  // Pin the last step to 1 so both quantile functions end together.
  if (!q.cumulative.empty()) q.cumulative.back() = 1.0;
  return q;
}

}  // namespace

DiscreteDistribution DiscreteDistribution::Empirical(std::vector<double> points) {
  DiscreteDistribution d;
  d.probabilities.assign(points.size(), 1.0 / static_cast<double>(points.size()));
  d.points = std::move(points);
  return d;
}

void DiscreteDistribution::Validate() const {
  if (points.empty() || points.size() != probabilities.size()) {
    throw DataError("distribution needs matching, non-empty points and probabilities");
  }
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw DataError("negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw DataError("probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

double ExactW1_1d(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  p.Validate();
  q.Validate();
  const Quantiles a = SortedQuantiles(p);
  const Quantiles b = SortedQuantiles(q);
  // Walk the merged breakpoints of both quantile functions.
  double total = 0.0;
  double level = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.points.size() && j < b.points.size()) {
    const double next = std::min(a.cumulative[i], b.cumulative[j]);
    total += (next - level) * std::abs(a.points[i] - b.points[j]);
    level = next;
    if (a.cumulative[i] == next) ++i;
    if (b.cumulative[j] == next) ++j;
  }
  return total;
}

double ExactW1Assignment(const Eigen::MatrixXd& cost) {
  const Eigen::Index n = cost.rows();
  if (n != cost.cols()) throw DataError("cost matrix must be square");
  if (n == 0) throw DataError("empty cost matrix");
  if (n > 8) throw ConfigError("brute-force transport refuses n > 8");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += cost(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

double ExactW1Discrete(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                       GroundMetric metric) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw DataError("point sets must have the same size and dimension");
  }
  Eigen::MatrixXd cost(p.rows(), q.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.rows(); ++j) {
      const Eigen::RowVectorXd diff = p.row(i) - q.row(j);
      cost(i, j) = metric == GroundMetric::kL1 ? diff.cwiseAbs().sum() : diff.norm();
    }
  }
  return ExactW1Assignment(cost);
}

void JointTable::Validate() const {
  if (p.size() == 0) throw DataError("empty joint table");
  if ((p.array() < 0.0).any()) throw DataError("joint table has negative entries");
  if (!p.allFinite()) throw DataError("joint table has non-finite entries");
  if (std::abs(p.sum() - 1.0) > kNormalizationTolerance) {
    throw DataError("joint table sums to " + std::to_string(p.sum()) + ", not 1");
  }
}

double DiscreteMi(const JointTable& joint) {
  joint.Validate();
  const Eigen::VectorXd row = joint.p.rowwise().sum();
  const Eigen::RowVectorXd col = joint.p.colwise().sum();
  double mi = 0.0;
  for (Eigen::Index a = 0; a < joint.p.rows(); ++a) {
    for (Eigen::Index b = 0; b < joint.p.cols(); ++b) {
      const double pab = joint.p(a, b);
      if (pab > 0.0) mi += pab * std::log(pab / (row(a) * col(b)));
    }
  }
  // Rounding can leave a tiny negative value for product tables.
  return std::max(0.0, mi);
}

DataProcessingResult DataProcessingCheck(const JointTable& joint,
                                         std::span<const int> map,
                                         int output_size) {
  joint.Validate();
  if (static_cast<Eigen::Index>(map.size()) != joint.p.rows()) {
    throw DataError("map must cover every value of Z");
  }
  if (output_size < 1) throw DataError("output alphabet must be non-empty");
  JointTable pushed{Eigen::MatrixXd::Zero(output_size, joint.p.cols())};
  for (Eigen::Index z = 0; z < joint.p.rows(); ++z) {
    const int target = map[static_cast<std::size_t>(z)];
    if (target < 0 || target >= output_size) throw DataError("map value out of range");
    pushed.p.row(target) += joint.p.row(z);
  }
  return {DiscreteMi(joint), DiscreteMi(pushed)};
}

GradcheckResult FiniteDiffGradcheck(
    const std::function<double(std::span<const double>)>& loss,
    std::span<const double> params, std::span<const double> analytic,
    double step, DifferenceScheme scheme) {
  if (params.size() != analytic.size()) {
    throw DataError("analytic gradient length does not match parameters");
  }
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  std::vector<double> probe(params.begin(), params.end());
  auto central = [&](std::size_t i, double h) {
    probe[i] = params[i] + h;
    const double plus = loss(probe);
    probe[i] = params[i] - h;
    const double minus = loss(probe);
    probe[i] = params[i];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw RuntimeFailure("non-finite loss while probing coordinate " +
                           std::to_string(i));
    }
    return (plus - minus) / (2.0 * h);
  };
  GradcheckResult result;
  result.numeric.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    double numeric = central(i, step);
    if (scheme == DifferenceScheme::kRichardson) {
      // Cancels the h^2 term of the central difference.
      numeric = (4.0 * central(i, 0.5 * step) - numeric) / 3.0;
    }
    result.numeric[i] = numeric;
    const double error = std::abs(analytic[i] - numeric) /
                         std::max(1e-12, std::abs(analytic[i]) + std::abs(numeric));
    if (error > result.max_relative_error) {
      result.max_relative_error = error;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace wfc::oracle
