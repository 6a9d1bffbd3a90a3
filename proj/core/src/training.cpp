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

#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "wfc/error.hpp"
#include "wfc/fairmetrics.hpp"
#include "wfc/io_util.hpp"

namespace wfc {
namespace {

// Stream tags for DeriveSeed.
enum SeedStream : std::uint64_t {
  kClassifierInit = 1,
  kCriticInit = 2,
  kClassifierBatches = 3,
  kCriticBatches = 4,
  kClassifierPairing = 5,
  kCriticPairing = 6,
  kDemonicInit = 7,
  kDemonicSplit = 8,
  kDemonicBatches = 9,
};

Matrix OneHot(const std::vector<int>& labels, int width) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), width);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return out;
}

struct Evaluation {
  double accuracy = 0.0;
  double gap = 0.0;
};

Evaluation EvaluateOn(const MlpParameters& classifier,
                      const EmbeddingDataset& data) {
  PredictionSet predictions;
  predictions.predicted = ArgmaxRows(MlpForward(classifier, data.features).logits());
  predictions.gold = data.y;
  predictions.group = data.s;
  predictions.num_classes = data.num_classes;
  predictions.num_groups = data.num_groups;
  Evaluation eval;
  eval.accuracy = Accuracy(predictions);
  eval.gap = Gap(EqualOpportunityPerClass(predictions));
  return eval;
}

// Shared loop. `demonic_signal` holds the frozen demonic output for every
// training row; when absent no critic is trained and no regularizer applied.
WfcResult RunLoop(const EmbeddingDataset& train,
                  const EmbeddingDataset& validation,
                  const std::optional<Matrix>& demonic_signal,
                  const TrainConfig& config) {
  config.Validate();
  train.Validate();
  validation.Validate();
  if (train.dim() != validation.dim()) {
    throw ShapeError("train and validation feature dimensions differ");
  }

  WfcResult result;
  result.classifier =
      MlpInit(config.classifier.LayerSizes(train.dim(), train.num_classes),
              config.classifier.activation, DeriveSeed(config.seed, kClassifierInit));
  OptimizerState classifier_state =
      MakeOptimizerState(config.classifier_optimizer, result.classifier);
  BatchStream classifier_batches(
      train.size(),
      {config.batch_size, DeriveSeed(config.seed, kClassifierBatches), true});
  std::mt19937_64 classifier_rng(DeriveSeed(config.seed, kClassifierPairing));

  const bool regularized = demonic_signal.has_value();
  std::optional<BatchStream> critic_batches;
  std::optional<OptimizerState> critic_state;
  std::mt19937_64 critic_rng(DeriveSeed(config.seed, kCriticPairing));
  if (regularized) {
    const int d_y = static_cast<int>(
        ExtractRepresentation(result.classifier, train.features.topRows(1),
                              config.classifier_layer)
            .cols());
    const int d_s = static_cast<int>(demonic_signal->cols());
    result.critic = MlpInit(config.critic.LayerSizes(d_y + d_s, 1),
                            config.critic.activation,
                            DeriveSeed(config.seed, kCriticInit));
    ClampWeights(result.critic, config.clamp, config.clamp_biases);
    critic_state = MakeOptimizerState(config.critic_optimizer, result.critic);
    critic_batches.emplace(
        train.size(),
        BatchPlan{config.batch_size, DeriveSeed(config.seed, kCriticBatches), true});
  }

  MlpParameters best_classifier = result.classifier;
  MlpParameters best_critic = result.critic;
  double best_score = -std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;

    if (regularized) {
      for (int t = 0; t < config.critic_iters; ++t) {
        const auto& batch = critic_batches->Next();
        record.critic_objectives.push_back(
            CriticStep(result.classifier, result.critic,
                       GatherRows(train.features, batch),
                       GatherRows(*demonic_signal, batch), config, *critic_state,
                       critic_rng));
      }
      record.regularizer =
          std::accumulate(record.critic_objectives.begin(),
                          record.critic_objectives.end(), 0.0) /
          config.critic_iters;
    }

    double loss_sum = 0.0;
    for (int t = 0; t < config.classifier_iters; ++t) {
      const auto& batch = classifier_batches.Next();
      const Matrix x = GatherRows(train.features, batch);
      const std::vector<int> y = Gather(train.y, batch);
      ClassifierLoss loss;
      if (regularized) {
        loss = ClassifierStep(result.classifier, result.critic, x, y,
                              GatherRows(*demonic_signal, batch), config,
                              classifier_state, classifier_rng);
      } else {
        TrainConfig plain = config;
        plain.beta = 0.0;
        loss = ClassifierStep(result.classifier, result.critic, x, y,
                              Matrix(x.rows(), 0), plain, classifier_state,
                              classifier_rng);
      }
      if (!std::isfinite(loss.total)) {
        throw RuntimeFailure("non-finite classifier loss at epoch " +
                             std::to_string(epoch) + ", step " +
                             std::to_string(t + 1) + " (cross entropy " +
                             io::FormatDouble(loss.cross_entropy) +
                             ", regularizer " +
                             io::FormatDouble(loss.regularizer) + ")");
      }
      loss_sum += loss.cross_entropy;
    }
    record.classifier_loss = loss_sum / config.classifier_iters;

    const Evaluation eval = EvaluateOn(result.classifier, validation);
    record.validation_accuracy = eval.accuracy;
    record.validation_gap = eval.gap;
    result.history.epochs.push_back(std::move(record));

    const double score = SelectionScore(config.selection, eval.accuracy, eval.gap);
    if (score > best_score) {
      best_score = score;
      best_classifier = result.classifier;
      best_critic = result.critic;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  result.classifier = std::move(best_classifier);
  result.critic = std::move(best_critic);
  return result;
}

}  // namespace

std::string_view LayerSelectorName(LayerSelector selector) {
  switch (selector) {
    case LayerSelector::kFirstHidden:
      return "first_hidden";
    case LayerSelector::kLastHidden:
      return "last_hidden";
    case LayerSelector::kLogits:
      return "logits";
  }
  return "unknown";
}

LayerSelector ParseLayerSelector(std::string_view name) {
  if (name == "first_hidden") return LayerSelector::kFirstHidden;
  if (name == "last_hidden") return LayerSelector::kLastHidden;
  if (name == "logits") return LayerSelector::kLogits;
  throw ConfigError("unknown layer selector '" + std::string(name) + "'");
}

std::string_view DemonicModeName(DemonicMode mode) {
  return mode == DemonicMode::kLatent ? "latent" : "hard_label";
}

DemonicMode ParseDemonicMode(std::string_view name) {
  if (name == "latent") return DemonicMode::kLatent;
  if (name == "hard_label") return DemonicMode::kHardLabel;
  throw ConfigError("unknown demonic mode '" + std::string(name) + "'");
}

std::string_view SelectionMetricName(SelectionMetric metric) {
  return metric == SelectionMetric::kAccuracyFairness ? "accuracy_fairness"
                                                      : "accuracy";
}

SelectionMetric ParseSelectionMetric(std::string_view name) {
  if (name == "accuracy_fairness") return SelectionMetric::kAccuracyFairness;
  if (name == "accuracy") return SelectionMetric::kAccuracy;
  throw ConfigError("unknown selection metric '" + std::string(name) + "'");
}

std::vector<int> MlpSpec::LayerSizes(int input_dim, int output_dim) const {
  if (hidden_layers < 0 || (hidden_layers > 0 && hidden_dim < 1)) {
    throw ConfigError("invalid hidden layer specification");
  }
  std::vector<int> sizes{input_dim};
  for (int i = 0; i < hidden_layers; ++i) sizes.push_back(hidden_dim);
  sizes.push_back(output_dim);
  return sizes;
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + stream * 0xbf58476d1ce4e5b9ULL +
                    0x94d049bb133111ebULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void TrainConfig::Validate() const {
  if (max_epochs < 1) throw ConfigError("epochs must be at least 1");
  if (critic_iters < 1) throw ConfigError("n_c must be at least 1");
  if (classifier_iters < 1) throw ConfigError("n_d must be at least 1");
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be >= 0");
  if (!(clamp > 0.0)) throw ConfigError("clamp must be > 0");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (!(classifier_optimizer.learning_rate > 0.0) ||
      !(critic_optimizer.learning_rate > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
}

double SelectionScore(SelectionMetric metric, double accuracy, double gap) {
  if (metric == SelectionMetric::kAccuracy) return accuracy;
  return 0.5 * (accuracy + FairnessFromGap(gap));
}

DemonicModel PretrainDemonic(const EmbeddingDataset& dataset,
                             const DemonicConfig& config) {
  dataset.Validate();
  std::vector<int> present(static_cast<std::size_t>(dataset.num_groups), 0);
  for (int g : dataset.s) present[g] = 1;
  if (dataset.num_groups < 2 || std::accumulate(present.begin(), present.end(), 0) < 2) {
    throw ConfigError("demonic pretraining needs at least two sensitive classes");
  }

  // train / early stopping / held-out report
  const std::array<double, 3> fractions = {0.7, 0.1, 0.2};
  const SplitResult split = StratifiedSplitIndices(
      dataset.s, dataset.num_groups, fractions,
      DeriveSeed(config.seed, kDemonicSplit));
  if (split.indices[1].empty() || split.indices[2].empty()) {
    throw DataError("too few examples to pretrain the demonic model");
  }

  DemonicModel model;
  model.params = MlpInit(
      config.architecture.LayerSizes(dataset.dim(), dataset.num_groups),
      config.architecture.activation, DeriveSeed(config.seed, kDemonicInit));
  SupervisedConfig fit = config.fit;
  fit.seed = DeriveSeed(config.seed, kDemonicBatches);
  FitSupervised(model.params, GatherRows(dataset.features, split.indices[0]),
                Gather(dataset.s, split.indices[0]),
                GatherRows(dataset.features, split.indices[1]),
                Gather(dataset.s, split.indices[1]), fit);
  model.heldout_accuracy =
      100.0 * PredictionAccuracy(model.params,
                                 GatherRows(dataset.features, split.indices[2]),
                                 Gather(dataset.s, split.indices[2]));
  model.frozen = true;
  return model;
}

int RepresentationIndex(const MlpParameters& model, LayerSelector selector) {
  switch (selector) {
    case LayerSelector::kFirstHidden:
      if (model.num_hidden() < 1) {
        throw ConfigError("first_hidden selected on a network without hidden layers");
      }
      return 1;
    case LayerSelector::kLastHidden:
      if (model.num_hidden() < 1) {
        throw ConfigError("last_hidden selected on a network without hidden layers");
      }
      return model.num_layers() - 1;
    case LayerSelector::kLogits:
      return model.num_layers();
  }
  throw ConfigError("unknown layer selector");
}

Matrix ExtractRepresentation(const MlpParameters& model, const Matrix& x,
                             LayerSelector selector) {
  const int index = RepresentationIndex(model, selector);
  ForwardTrace trace = MlpForward(model, x);
  return std::move(trace.post[index]);
}

Matrix DemonicSignal(const MlpParameters& demonic, const Matrix& x,
                     DemonicMode mode, LayerSelector selector) {
  if (mode == DemonicMode::kLatent) return ExtractRepresentation(demonic, x, selector);
  return OneHot(ArgmaxRows(MlpForward(demonic, x).logits()), demonic.output_dim());
}

int DemonicSignalDim(const MlpParameters& demonic, DemonicMode mode,
                     LayerSelector selector) {
  if (mode == DemonicMode::kHardLabel) return demonic.output_dim();
  return demonic.layer_sizes[static_cast<std::size_t>(
      RepresentationIndex(demonic, selector))];
}

double CriticStep(const MlpParameters& classifier, MlpParameters& critic,
                  const Matrix& x, const Matrix& z_s, const TrainConfig& config,
                  OptimizerState& critic_state, std::mt19937_64& rng) {
  const Matrix z_y = ExtractRepresentation(classifier, x, config.classifier_layer);
  const RepresentationBatch batch =
      PairBatches(z_y, z_s, rng, {config.derangement});
  CriticObjectiveResult objective = CriticObjective(critic, batch);
  // The critic maximizes the objective.
  objective.grads *= -1.0;
  OptimizerStep(critic, objective.grads, critic_state);
  ClampWeights(critic, config.clamp, config.clamp_biases);
  return objective.value;
}

ClassifierLoss ComputeClassifierLoss(const MlpParameters& classifier,
                                     const MlpParameters& critic,
                                     const Matrix& x, std::span<const int> y,
                                     const Matrix& z_s,
                                     std::span<const std::size_t> permutation,
                                     double beta, LayerSelector layer) {
  const ForwardTrace trace = MlpForward(classifier, x);
  const CrossEntropyResult ce = CrossEntropy(trace.logits(), y);
  ClassifierLoss loss;
  loss.cross_entropy = ce.loss;
  if (beta == 0.0) {
    loss.total = ce.loss;
    loss.grads = MlpBackward(classifier, trace, ce.grad_logits);
    return loss;
  }
  const int index = RepresentationIndex(classifier, layer);
  const RepresentationBatch batch = PairWithPermutation(
      trace.post[index], z_s,
      std::vector<std::size_t>(permutation.begin(), permutation.end()));
  loss.regularizer = CriticObjectiveValue(critic, batch);
  loss.total = ce.loss + beta * loss.regularizer;
  const RepresentationGradient injected{index, beta * RegularizerGrads(critic, batch)};
  loss.grads = MlpBackward(classifier, trace, ce.grad_logits,
                           std::span<const RepresentationGradient>(&injected, 1));
  return loss;
}

ClassifierLoss ClassifierStep(MlpParameters& classifier,
                              const MlpParameters& critic, const Matrix& x,
                              std::span<const int> y, const Matrix& z_s,
                              const TrainConfig& config,
                              OptimizerState& classifier_state,
                              std::mt19937_64& rng) {
  std::vector<std::size_t> permutation;
  if (config.beta != 0.0) {
    if (z_s.rows() != x.rows()) throw ShapeError("z_s rows do not match the batch");
    permutation = DrawPermutation(static_cast<std::size_t>(x.rows()), rng,
                                  {config.derangement});
  }
  ClassifierLoss loss = ComputeClassifierLoss(classifier, critic, x, y, z_s,
                                              permutation, config.beta,
                                              config.classifier_layer);
  if (std::isfinite(loss.total)) OptimizerStep(classifier, loss.grads, classifier_state);
  return loss;
}

std::string TrainHistory::ToCsv() const {
  std::ostringstream out;
  out << "epoch,clf_loss,reg_value,val_acc,val_gap\n";
  for (const auto& record : epochs) {
    out << record.epoch << ',' << io::FormatDouble(record.classifier_loss) << ','
        << io::FormatDouble(record.regularizer) << ','
        << io::FormatDouble(record.validation_accuracy) << ','
        << io::FormatDouble(record.validation_gap) << '\n';
  }
  return out.str();
}

WfcResult TrainWfc(const EmbeddingDataset& train,
                   const EmbeddingDataset& validation,
                   const DemonicModel& demonic, const TrainConfig& config) {
  if (demonic.params.input_dim() != train.dim()) {
    throw ShapeError("demonic model input dim does not match the data");
  }
  const Matrix signal = DemonicSignal(demonic.params, train.features,
                                      config.demonic_mode, config.demonic_layer);
  return RunLoop(train, validation, signal, config);
}

WfcResult TrainCrossEntropy(const EmbeddingDataset& train,
                            const EmbeddingDataset& validation,
                            const TrainConfig& config) {
  return RunLoop(train, validation, std::nullopt, config);
}

}  // namespace wfc
