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

#include "wfc/training.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "wfc/datagen.hpp"
#include "wfc/error.hpp"
#include "wfc/oracle.hpp"

namespace wfc {
namespace {

struct Splits {
  EmbeddingDataset train, validation, test;
};

Splits SmallData(std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.n_per_cell = 120;
  spec.dim = 12;
  spec.seed = seed;
  const std::array<double, 3> fractions = {0.6, 0.2, 0.2};
  auto parts = Split(GenerateSynthetic(spec), fractions, seed);
  return {parts[0], parts[1], parts[2]};
}

TrainConfig SmallConfig() {
  TrainConfig config;
  config.max_epochs = 6;
  config.patience = 100;
  config.batch_size = 32;
  config.classifier = {1, 10, Activation::kTanh};
  config.critic = {1, 12, Activation::kRelu};
  config.classifier_optimizer.learning_rate = 1e-3;
  return config;
}

DemonicModel SmallDemonic(const EmbeddingDataset& data) {
  DemonicConfig config;
  config.architecture = {1, 8, Activation::kTanh};
  config.fit.max_epochs = 20;
  return PretrainDemonic(data, config);
}

TEST(NamesTest, RoundTrip) {
  for (auto s : {LayerSelector::kFirstHidden, LayerSelector::kLastHidden, LayerSelector::kLogits}) {
    EXPECT_EQ(ParseLayerSelector(LayerSelectorName(s)), s);
  }
  EXPECT_EQ(ParseDemonicMode("hard_label"), DemonicMode::kHardLabel);
  EXPECT_EQ(ParseSelectionMetric("accuracy"), SelectionMetric::kAccuracy);
  EXPECT_THROW(ParseLayerSelector("middle"), ConfigError);
  EXPECT_NE(DeriveSeed(1, 2), DeriveSeed(2, 1));
  EXPECT_EQ(DeriveSeed(5, 9), DeriveSeed(5, 9));
}

TEST(TrainConfigTest, DefaultsFollowHyperparameterTables) {
  const TrainConfig config;
  EXPECT_EQ(config.beta, 1.0);
  EXPECT_EQ(config.critic_iters, 5);
  EXPECT_EQ(config.classifier_iters, 20);
  EXPECT_EQ(config.clamp, 0.01);
  EXPECT_EQ(config.batch_size, 128u);
  EXPECT_EQ(config.max_epochs, 10000);
  EXPECT_EQ(config.classifier.hidden_dim, 300);
  EXPECT_EQ(config.classifier.activation, Activation::kTanh);
  EXPECT_EQ(config.classifier_optimizer.kind, OptimizerKind::kAdam);
  EXPECT_EQ(config.classifier_optimizer.learning_rate, 1e-4);
  EXPECT_EQ(config.critic.hidden_dim, 512);
  EXPECT_EQ(config.critic.activation, Activation::kRelu);
  EXPECT_EQ(config.critic_optimizer.kind, OptimizerKind::kRmsProp);
  EXPECT_EQ(config.critic_optimizer.learning_rate, 5e-5);
  EXPECT_EQ(config.classifier_layer, LayerSelector::kLastHidden);

  TrainConfig bad;
  bad.clamp = 0.0;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = TrainConfig();
  bad.batch_size = 1;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = TrainConfig();
  bad.beta = -1.0;
  EXPECT_THROW(bad.Validate(), ConfigError);
}

TEST(RepresentationTest, SelectorsAndSignals) {
  const MlpParameters one = MlpInit(std::vector<int>{4, 6, 3}, Activation::kTanh, 1);
  const Matrix x = 10.0 * Matrix::Random(5, 4);
  EXPECT_EQ(ExtractRepresentation(one, x, LayerSelector::kFirstHidden),
            ExtractRepresentation(one, x, LayerSelector::kLastHidden));
  const Matrix hidden = ExtractRepresentation(one, x, LayerSelector::kLastHidden);
  EXPECT_LT(hidden.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_EQ(ExtractRepresentation(one, x, LayerSelector::kLogits),
            MlpForward(one, x).logits());

  const MlpParameters deep = MlpInit(std::vector<int>{4, 6, 5, 2}, Activation::kTanh, 1);
  EXPECT_EQ(ExtractRepresentation(deep, x, LayerSelector::kFirstHidden).cols(), 6);
  EXPECT_EQ(ExtractRepresentation(deep, x, LayerSelector::kLastHidden).cols(), 5);
  EXPECT_EQ(DemonicSignalDim(deep, DemonicMode::kLatent, LayerSelector::kLastHidden), 5);
  EXPECT_EQ(DemonicSignalDim(deep, DemonicMode::kHardLabel, LayerSelector::kLastHidden), 2);

  const MlpParameters linear = MlpInit(std::vector<int>{4, 2}, Activation::kTanh, 1);
  EXPECT_THROW(ExtractRepresentation(linear, x, LayerSelector::kFirstHidden), ConfigError);
}

TEST(RepresentationTest, HardLabelIsOneHotArgmaxWithLowTies) {
  MlpParameters demonic = MlpInit(std::vector<int>{2, 2}, Activation::kTanh, 1);
  demonic.layers[0].weight = Matrix::Identity(2, 2);
  demonic.layers[0].bias.setZero();
  Matrix x(3, 2);
  x << 2.0, -1.0,
       0.5, 0.5,
       -1.0, 3.0;
  Matrix expected(3, 2);
  expected << 1, 0,
              1, 0,
              0, 1;
  EXPECT_EQ(DemonicSignal(demonic, x, DemonicMode::kHardLabel, LayerSelector::kLogits),
            expected);
}

TEST(CriticStepTest, ClampsAndLeavesClassifierAlone) {
  TrainConfig config = SmallConfig();
  config.critic_optimizer.learning_rate = 0.05;
  const MlpParameters classifier = MlpInit(std::vector<int>{3, 5, 2}, Activation::kTanh, 2);
  const MlpParameters before = classifier;
  // z_y is the 5-wide hidden layer and z_s is the 3-wide input.
  MlpParameters critic = MlpInit(std::vector<int>{8, 12, 1}, Activation::kRelu, 3);
  ClampWeights(critic, config.clamp);
  OptimizerState state = MakeOptimizerState(config.critic_optimizer, critic);
  std::mt19937_64 rng(1);
  for (int step = 0; step < 30; ++step) {
    const Matrix x = Matrix::Random(16, 3);
    CriticStep(classifier, critic, x, x, config, state, rng);
    ASSERT_LE(MaxAbsParameter(critic), config.clamp);
  }
  EXPECT_TRUE(classifier == before);
}

TEST(CriticStepTest, AscendsOnFixedDependentPairs) {
  TrainConfig config = SmallConfig();
  config.clamp = 0.5;
  config.critic_optimizer.learning_rate = 1e-3;
  // Identity classifier layer: z_y = x, and z_s = x exactly.
  MlpParameters classifier = MlpInit(std::vector<int>{1, 1, 2}, Activation::kIdentity, 1);
  classifier.layers[0].weight.setOnes();
  classifier.layers[0].bias.setZero();
  MlpParameters critic = MlpInit(std::vector<int>{2, 12, 1}, Activation::kRelu, 3);
  ClampWeights(critic, config.clamp);
  OptimizerState state = MakeOptimizerState(config.critic_optimizer, critic);
  std::mt19937_64 rng(7);
  const Matrix x = Matrix::Random(64, 1);
  std::vector<double> values;
  for (int step = 0; step < 200; ++step) {
    values.push_back(CriticStep(classifier, critic, x, x, config, state, rng));
  }
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 20; ++i) {
    first += values[i] / 20.0;
    last += values[180 + i] / 20.0;
  }
  EXPECT_GT(last, first);
  EXPECT_GT(last, 0.0);
}

TEST(ClassifierLossTest, GradientMatchesFiniteDifferences) {
  const MlpParameters classifier = MlpInit(std::vector<int>{3, 5, 4, 2}, Activation::kTanh, 4);
  MlpParameters critic = MlpInit(std::vector<int>{6, 7, 1}, Activation::kTanh, 5);
  const Matrix x = Matrix::Random(6, 3);
  const Matrix z_s = Matrix::Random(6, 2);
  const std::vector<int> y = {0, 1, 1, 0, 1, 0};
  const std::vector<std::size_t> perm = {2, 3, 4, 5, 0, 1};
  const auto loss = ComputeClassifierLoss(classifier, critic, x, y, z_s, perm, 3.0,
                                          LayerSelector::kLastHidden);
  auto value = [&](std::span<const double> w) {
    MlpParameters probe = classifier;
    Unflatten(w, probe);
    return ComputeClassifierLoss(probe, critic, x, y, z_s, perm, 3.0,
                                 LayerSelector::kLastHidden)
        .total;
  };
  EXPECT_LT(oracle::FiniteDiffGradcheck(value, Flatten(classifier), Flatten(loss.grads))
                .max_relative_error,
            1e-6);
  EXPECT_NEAR(loss.total, loss.cross_entropy + 3.0 * loss.regularizer, 1e-15);
}

TEST(ClassifierStepTest, ZeroCriticOrZeroBetaEqualsCrossEntropy) {
  TrainConfig config = SmallConfig();
  const Matrix x = Matrix::Random(8, 3);
  const Matrix z_s = Matrix::Random(8, 2);
  const std::vector<int> y = {0, 1, 0, 1, 1, 1, 0, 0};
  const MlpParameters start = MlpInit(std::vector<int>{3, 4, 2}, Activation::kTanh, 9);
  MlpParameters zero_critic = MlpInit(std::vector<int>{6, 5, 1}, Activation::kRelu, 1);
  for (auto& layer : zero_critic.layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }

  auto step = [&](double beta, const MlpParameters& critic) {
    TrainConfig c = config;
    c.beta = beta;
    MlpParameters clf = start;
    OptimizerState state = MakeOptimizerState(c.classifier_optimizer, clf);
    std::mt19937_64 rng(3);
    ClassifierStep(clf, critic, x, y, z_s, c, state, rng);
    return clf;
  };
  const MlpParameters plain = step(0.0, zero_critic);
  EXPECT_TRUE(step(1.0, zero_critic) == plain);
  EXPECT_FALSE(plain == start);
}

TEST(TrainWfcTest, BetaZeroMatchesCrossEntropyBitwise) {
  const Splits data = SmallData();
  const DemonicModel demonic = SmallDemonic(data.train);
  TrainConfig config = SmallConfig();
  config.beta = 0.0;
  const WfcResult wfc = TrainWfc(data.train, data.validation, demonic, config);
  const WfcResult ce = TrainCrossEntropy(data.train, data.validation, config);
  EXPECT_TRUE(wfc.classifier == ce.classifier);
  ASSERT_EQ(wfc.history.epochs.size(), ce.history.epochs.size());
  for (std::size_t e = 0; e < ce.history.epochs.size(); ++e) {
    EXPECT_EQ(wfc.history.epochs[e].validation_accuracy,
              ce.history.epochs[e].validation_accuracy);
  }
}

TEST(TrainWfcTest, DemonicIsUntouchedAndRunsAreDeterministic) {
  const Splits data = SmallData(2);
  const DemonicModel demonic = SmallDemonic(data.train);
  const std::uint64_t hash = ParameterHash(demonic.params);
  TrainConfig config = SmallConfig();
  config.beta = 5.0;
  const WfcResult a = TrainWfc(data.train, data.validation, demonic, config);
  EXPECT_EQ(ParameterHash(demonic.params), hash);
  const WfcResult b = TrainWfc(data.train, data.validation, demonic, config);
  EXPECT_TRUE(a.classifier == b.classifier);
  EXPECT_TRUE(a.critic == b.critic);
  EXPECT_EQ(a.history.ToCsv(), b.history.ToCsv());
  ASSERT_EQ(a.history.epochs.size(), 6u);
  for (const auto& record : a.history.epochs) {
    EXPECT_EQ(record.critic_objectives.size(), 5u);
  }
  EXPECT_LE(MaxAbsParameter(a.critic), config.clamp);
  EXPECT_GE(a.history.best_epoch, 1);
}

TEST(TrainWfcTest, EarlyStoppingHonoursPatience) {
  const Splits data = SmallData(3);
  TrainConfig config = SmallConfig();
  config.max_epochs = 200;
  config.patience = 3;
  config.selection = SelectionMetric::kAccuracy;
  const WfcResult result = TrainCrossEntropy(data.train, data.validation, config);
  const int epochs = static_cast<int>(result.history.epochs.size());
  EXPECT_LT(epochs, 200);
  EXPECT_EQ(epochs, result.history.best_epoch + config.patience);
  double best = 0.0;
  for (const auto& r : result.history.epochs) best = std::max(best, r.validation_accuracy);
  EXPECT_EQ(result.history.epochs[result.history.best_epoch - 1].validation_accuracy, best);
  const std::string csv = result.history.ToCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,clf_loss,reg_value,val_acc,val_gap");
}

TEST(PretrainDemonicTest, SeparableDataAndTransfer) {
  SyntheticSpec a;
  a.bias_strength = 2.0;
  a.noise_std = 0.1;
  a.n_per_cell = 150;
  DemonicConfig config;
  config.architecture = {1, 16, Activation::kTanh};
  const DemonicModel model = PretrainDemonic(GenerateSynthetic(a), config);
  EXPECT_GE(model.heldout_accuracy, 99.0);
  EXPECT_TRUE(model.frozen);

  SyntheticSpec b = a;
  b.domain = 1;
  b.seed = 7;
  const EmbeddingDataset other = GenerateSynthetic(b);
  EXPECT_GE(PredictionAccuracy(model.params, other.features, other.s), 0.90);

  EmbeddingDataset single = GenerateSynthetic(a);
  std::fill(single.s.begin(), single.s.end(), 0);
  EXPECT_THROW(PretrainDemonic(single, config), ConfigError);
}

}  // namespace
}  // namespace wfc
