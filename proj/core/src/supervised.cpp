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

#include "wfc/supervised.hpp"

#include <cmath>

#include "wfc/datagen.hpp"
#include "wfc/error.hpp"

namespace wfc {

double PredictionAccuracy(const MlpParameters& params, const Matrix& x,
                          std::span<const int> labels) {
  if (labels.empty()) throw DataError("accuracy of an empty set");
  const std::vector<int> predicted = ArgmaxRows(MlpForward(params, x).logits());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    correct += predicted[i] == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

SupervisedResult FitSupervised(MlpParameters& params, const Matrix& train_x,
                               std::span<const int> train_labels,
                               const Matrix& val_x,
                               std::span<const int> val_labels,
                               const SupervisedConfig& config) {
  if (train_labels.empty() || val_labels.empty()) {
    throw DataError("supervised training needs non-empty train and validation sets");
  }
  if (config.max_epochs < 1 || config.patience < 1) {
    throw ConfigError("max_epochs and patience must be positive");
  }
  OptimizerState state = MakeOptimizerState(config.optimizer, params);
  const BatchPlan plan{std::max<std::size_t>(2, config.batch_size), config.seed, false};

  auto validation_loss = [&]() {
    return CrossEntropy(MlpForward(params, val_x).logits(), val_labels).loss;
  };
  SupervisedResult result;
  MlpParameters best = params;
  double best_loss = validation_loss();
  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (const auto& batch :
         MakeBatches(train_labels.size(), plan, static_cast<std::uint64_t>(epoch))) {
      const ForwardTrace trace = MlpForward(params, GatherRows(train_x, batch));
      const CrossEntropyResult ce =
          CrossEntropy(trace.logits(), Gather(train_labels, batch));
      if (!std::isfinite(ce.loss)) {
        throw RuntimeFailure("non-finite loss during supervised training at epoch " +
                             std::to_string(epoch));
      }
      OptimizerStep(params, MlpBackward(params, trace, ce.grad_logits), state);
    }
    result.epochs_run = epoch;
    const double loss = validation_loss();
    if (loss < best_loss) {
      best_loss = loss;
      result.best_epoch = epoch;
      best = params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  result.best_validation_loss = best_loss;
  params = std::move(best);
  result.best_validation_accuracy = PredictionAccuracy(params, val_x, val_labels);
  return result;
}

}  // namespace wfc
