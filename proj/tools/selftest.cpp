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

#include "selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wfc/neural.hpp"
#include "wfc/oracle.hpp"
#include "wfc/training.hpp"
#include "wfc/wassdep.hpp"

namespace wfc::tools {
namespace {

struct Check {
  std::string name;
  std::function<std::string(std::mt19937_64&)> run;  // empty string = pass
};

std::string W1AgreesWithAssignment(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 6);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    Matrix p(n, 1), q(n, 1);
    for (int i = 0; i < n; ++i) {
      p(i, 0) = normal(rng);
      q(i, 0) = normal(rng);
    }
    const double line = oracle::ExactW1_1d(
        oracle::DiscreteDistribution::Empirical({p.data(), p.data() + n}),
        oracle::DiscreteDistribution::Empirical({q.data(), q.data() + n}));
    const double exact = oracle::ExactW1Discrete(p, q, oracle::GroundMetric::kL1);
    if (std::abs(line - exact) > 1e-9) {
      return "trial " + std::to_string(trial) + ": " + std::to_string(line) +
             " vs " + std::to_string(exact);
    }
  }
  return {};
}

std::string DataProcessing(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(2, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int nz = size(rng), ns = size(rng), nh = size(rng);
    oracle::JointTable joint{Matrix(nz, ns)};
    for (int i = 0; i < nz; ++i)
      for (int j = 0; j < ns; ++j) joint.p(i, j) = unit(rng);
    joint.p /= joint.p.sum();
    std::vector<int> map(nz);
    for (int& m : map) m = std::uniform_int_distribution<int>(0, nh - 1)(rng);
    const auto result = oracle::DataProcessingCheck(joint, map, nh);
    if (result.mi_after > result.mi_before + 1e-12) {
      return "trial " + std::to_string(trial) + " increased MI";
    }
  }
  return {};
}

std::string CrossEntropyGradient(std::mt19937_64& rng) {
  const std::vector<int> sizes = {5, 4, 3};
  MlpParameters net = MlpInit(sizes, Activation::kTanh, rng());
  Matrix x = Matrix::Random(6, 5);
  const std::vector<int> y = {0, 1, 2, 0, 1, 2};
  const ForwardTrace trace = MlpForward(net, x);
  const auto ce = CrossEntropy(trace.logits(), y);
  const auto analytic = Flatten(MlpBackward(net, trace, ce.grad_logits));
  const auto flat = Flatten(net);
  auto loss = [&](std::span<const double> w) {
    MlpParameters probe = net;
    Unflatten(w, probe);
    return CrossEntropy(MlpForward(probe, x).logits(), y).loss;
  };
  const auto result = oracle::FiniteDiffGradcheck(loss, flat, analytic);
  if (result.max_relative_error >= 1e-6) {
    return "relative error " + std::to_string(result.max_relative_error);
  }
  return {};
}

std::string ClampHolds(std::mt19937_64& rng) {
  TrainConfig config;
  config.critic = {1, 16, Activation::kRelu};
  const std::vector<int> clf_sizes = {4, 3, 2};
  const MlpParameters classifier = MlpInit(clf_sizes, Activation::kTanh, rng());
  const std::vector<int> critic_sizes = {4, 16, 1};
  MlpParameters critic = MlpInit(critic_sizes, Activation::kRelu, rng());
  ClampWeights(critic, config.clamp);
  config.critic_optimizer.learning_rate = 1e-2;
  OptimizerState state = MakeOptimizerState(config.critic_optimizer, critic);
  for (int step = 0; step < 100; ++step) {
    const Matrix x = Matrix::Random(32, 4);
    const Matrix z_s = x.col(0).array().tanh().matrix();
    CriticStep(classifier, critic, x, z_s, config, state, rng);
    if (MaxAbsParameter(critic) > config.clamp) {
      return "step " + std::to_string(step) + " left the clamp box";
    }
  }
  return {};
}

std::string CriticBoundedByW1(std::mt19937_64& rng) {
  const std::vector<int> sizes = {2, 8, 1};
  const double c = 0.3;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    MlpParameters critic = MlpInit(sizes, Activation::kRelu, rng());
    for (auto& layer : critic.layers) {
      layer.weight = layer.weight.unaryExpr([&](double) { return normal(rng); });
      layer.bias = layer.bias.unaryExpr([&](double) { return normal(rng); });
    }
    ClampWeights(critic, c);
    const int n = 6;
    Matrix z_y(n, 1), z_s(n, 1);
    for (int i = 0; i < n; ++i) {
      z_y(i, 0) = normal(rng);
      z_s(i, 0) = normal(rng);
    }
    const auto batch = PairBatches(z_y, z_s, rng);
    const double value = CriticObjectiveValue(critic, batch);
    const double w1 =
        oracle::ExactW1Discrete(batch.dependent, batch.independent, oracle::GroundMetric::kL1);
    const double bound = ClampedLipschitzBound(critic, c) * w1;
    if (std::abs(value) > bound + 1e-12) {
      return "trial " + std::to_string(trial) + ": |" + std::to_string(value) +
             "| > " + std::to_string(bound);
    }
  }
  return {};
}

}  // namespace

bool RunSelfTest(std::ostream& out, std::uint64_t seed) {
  const std::vector<Check> checks = {
      {"w1_line_matches_assignment", W1AgreesWithAssignment},
      {"data_processing_inequality", DataProcessing},
      {"cross_entropy_gradient", CrossEntropyGradient},
      {"critic_clamp_invariant", ClampHolds},
      {"critic_within_lipschitz_w1", CriticBoundedByW1},
  };
  bool all = true;
  std::uint64_t stream = 0;
  for (const auto& check : checks) {
    std::mt19937_64 rng(DeriveSeed(seed, stream++));
    std::string failure;
    try {
      failure = check.run(rng);
    } catch (const std::exception& e) {
      failure = std::string("threw: ") + e.what();
    }
    out << (failure.empty() ? "PASS " : "FAIL ") << check.name;
    if (!failure.empty()) out << " (" << failure << ")";
    out << '\n';
    all = all && failure.empty();
  }
  return all;
}

}  // namespace wfc::tools
