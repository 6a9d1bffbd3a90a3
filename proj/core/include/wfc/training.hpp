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

#ifndef WFC_TRAINING_HPP_
#define WFC_TRAINING_HPP_

// Demonic pretraining, representation extraction and the alternating
// critic / classifier loop of Wasserstein fair classification.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wfc/datagen.hpp"
#include "wfc/neural.hpp"
#include "wfc/supervised.hpp"
#include "wfc/wassdep.hpp"

namespace wfc {

enum class LayerSelector { kFirstHidden, kLastHidden, kLogits };
enum class DemonicMode { kLatent, kHardLabel };
enum class SelectionMetric { kAccuracyFairness, kAccuracy };

std::string_view LayerSelectorName(LayerSelector selector);
LayerSelector ParseLayerSelector(std::string_view name);
std::string_view DemonicModeName(DemonicMode mode);
DemonicMode ParseDemonicMode(std::string_view name);
std::string_view SelectionMetricName(SelectionMetric metric);
SelectionMetric ParseSelectionMetric(std::string_view name);

// Hidden-layer shape of an MLP; input and output sizes come from the data.
struct MlpSpec {
  int hidden_layers = 1;
  int hidden_dim = 300;
  Activation activation = Activation::kTanh;

  std::vector<int> LayerSizes(int input_dim, int output_dim) const;
};

// Mixes a run seed with a stream tag so sub-generators are independent.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

struct TrainConfig {
  int max_epochs = 10000;
  int critic_iters = 5;       // n_c
  int classifier_iters = 20;  // n_d
  std::size_t batch_size = 128;
  double beta = 1.0;
  double clamp = 0.01;
  bool clamp_biases = true;
  OptimizerConfig classifier_optimizer{OptimizerKind::kAdam, 1e-4};
  OptimizerConfig critic_optimizer{OptimizerKind::kRmsProp, 5e-5};
  MlpSpec classifier{1, 300, Activation::kTanh};
  MlpSpec critic{1, 512, Activation::kRelu};
  LayerSelector classifier_layer = LayerSelector::kLastHidden;
  LayerSelector demonic_layer = LayerSelector::kLastHidden;
  DemonicMode demonic_mode = DemonicMode::kLatent;
  bool derangement = false;
  int patience = 10;
  SelectionMetric selection = SelectionMetric::kAccuracyFairness;
  std::uint64_t seed = 1;

  void Validate() const;
};

struct DemonicConfig {
  MlpSpec architecture{1, 300, Activation::kTanh};
  SupervisedConfig fit;
  std::uint64_t seed = 1;
};

struct DemonicModel {
  MlpParameters params;
  // Percentage on a held-out slice of the pretraining data.
  double heldout_accuracy = 0.0;
  bool frozen = true;
};

// Trains an MLP to predict s from the features, then freezes it. Throws
// ConfigError when s has a single class.
DemonicModel PretrainDemonic(const EmbeddingDataset& dataset,
                             const DemonicConfig& config);

// Index into ForwardTrace::post selected by `selector`. Throws ConfigError
// for hidden selectors on a network without hidden layers.
int RepresentationIndex(const MlpParameters& model, LayerSelector selector);

Matrix ExtractRepresentation(const MlpParameters& model, const Matrix& x,
                             LayerSelector selector);

// Latent mode: the selected representation. Hard-label mode: one-hot argmax
// of the demonic logits (ties to the lower index).
Matrix DemonicSignal(const MlpParameters& demonic, const Matrix& x,
                     DemonicMode mode, LayerSelector selector);

// Width of the demonic signal for `mode` and `selector`.
int DemonicSignalDim(const MlpParameters& demonic, DemonicMode mode,
                     LayerSelector selector);

// One critic update on a batch: pair, ascend the objective, clamp. Returns
// the objective value measured before the update.
double CriticStep(const MlpParameters& classifier, MlpParameters& critic,
                  const Matrix& x, const Matrix& z_s, const TrainConfig& config,
                  OptimizerState& critic_state, std::mt19937_64& rng);

struct ClassifierLoss {
  double total = 0.0;
  double cross_entropy = 0.0;
  // Critic objective on the batch; zero when beta == 0.
  double regularizer = 0.0;
  Gradients grads;
};

// Cross entropy plus beta times the critic objective for a fixed pairing
// permutation, with gradients w.r.t. the classifier parameters.
ClassifierLoss ComputeClassifierLoss(const MlpParameters& classifier,
                                     const MlpParameters& critic,
                                     const Matrix& x, std::span<const int> y,
                                     const Matrix& z_s,
                                     std::span<const std::size_t> permutation,
                                     double beta, LayerSelector layer);

// One classifier update: draws a pairing permutation (only when beta > 0)
// and descends ComputeClassifierLoss.
ClassifierLoss ClassifierStep(MlpParameters& classifier,
                              const MlpParameters& critic, const Matrix& x,
                              std::span<const int> y, const Matrix& z_s,
                              const TrainConfig& config,
                              OptimizerState& classifier_state,
                              std::mt19937_64& rng);

struct EpochRecord {
  int epoch = 0;
  double classifier_loss = 0.0;
  // Mean critic objective over this epoch's critic steps.
  double regularizer = 0.0;
  double validation_accuracy = 0.0;
  double validation_gap = 0.0;
  std::vector<double> critic_objectives;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;

  // "epoch,clf_loss,reg_value,val_acc,val_gap" rows.
  std::string ToCsv() const;
};

struct WfcResult {
  MlpParameters classifier;
  MlpParameters critic;
  TrainHistory history;
};

// Alternates n_c critic steps and n_d classifier steps per epoch, stops
// early on the validation selection metric and returns the best classifier.
WfcResult TrainWfc(const EmbeddingDataset& train,
                   const EmbeddingDataset& validation,
                   const DemonicModel& demonic, const TrainConfig& config);

// Cross-entropy-only training with the same initialization, batching and
// early stopping as TrainWfc.
WfcResult TrainCrossEntropy(const EmbeddingDataset& train,
                            const EmbeddingDataset& validation,
                            const TrainConfig& config);

// Validation selection score for the configured metric.
double SelectionScore(SelectionMetric metric, double accuracy, double gap);

}  // namespace wfc

#endif  // WFC_TRAINING_HPP_
