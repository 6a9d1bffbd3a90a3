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

#ifndef WFC_SUPERVISED_HPP_
#define WFC_SUPERVISED_HPP_

// Plain cross-entropy training with early stopping on validation accuracy.
// Used for the demonic model and for leakage probes.

#include <cstdint>
#include <span>
#include <vector>

#include "wfc/neural.hpp"

namespace wfc {

struct SupervisedConfig {
  OptimizerConfig optimizer{OptimizerKind::kAdam, 1e-3};
  std::size_t batch_size = 128;
  int max_epochs = 200;
  int patience = 10;
  std::uint64_t seed = 0;
};

struct SupervisedResult {
  double best_validation_loss = 0.0;
  double best_validation_accuracy = 0.0;  // fraction in [0, 1]
  int best_epoch = 0;
  int epochs_run = 0;
};

// Trains `params` in place. Stops once the validation cross-entropy has not
// improved for `patience` epochs and restores the parameters of the epoch
// with the lowest validation loss.
SupervisedResult FitSupervised(MlpParameters& params, const Matrix& train_x,
                               std::span<const int> train_labels,
                               const Matrix& val_x,
                               std::span<const int> val_labels,
                               const SupervisedConfig& config);

// Fraction of rows whose argmax logit equals the label.
double PredictionAccuracy(const MlpParameters& params, const Matrix& x,
                          std::span<const int> labels);

}  // namespace wfc

#endif  // WFC_SUPERVISED_HPP_
