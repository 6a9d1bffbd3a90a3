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

#ifndef WFC_FAIRMETRICS_HPP_
#define WFC_FAIRMETRICS_HPP_

// Group-fairness evaluation: accuracy, per-class equality of opportunity,
// GAP, distance to a utopia point and representation leakage.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wfc/neural.hpp"

namespace wfc {

struct PredictionSet {
  std::vector<int> predicted;
  std::vector<int> gold;
  std::vector<int> group;
  int num_classes = 0;
  int num_groups = 0;

  void Validate() const;
};

// Percentage of correct predictions, in [0, 100].
double Accuracy(const PredictionSet& predictions);

// P(pred = c | gold = c, s = a) - P(pred = c | gold = c, s = b). Throws
// UndefinedMetricError naming the cell if either conditioning cell is empty.
double EqualOpportunity(const PredictionSet& predictions, int cls, int group_a,
                        int group_b);

// One EO value per class. With two groups this is EqualOpportunity(c, 0, 1).
// With more groups each class gets the largest |TPR(s = g) - TPR(s != g)|
// over groups (one-vs-rest).
std::vector<double> EqualOpportunityPerClass(const PredictionSet& predictions);

// Root mean square of the per-class EO values.
double Gap(std::span<const double> eo_per_class);

// Fairness on the 0-100 scale used in result tables: 100 * (1 - GAP).
inline double FairnessFromGap(double gap) { return 100.0 * (1.0 - gap); }

struct UtopiaPoint {
  double accuracy = 0.0;
  double fairness = 0.0;
};

// Euclidean distance from (accuracy, fairness) to the utopia point. Both
// axes on the 0-100 scale.
double Dto(double accuracy, double fairness, const UtopiaPoint& utopia);

struct ProbeConfig {
  int hidden_dim = 300;
  Activation activation = Activation::kTanh;
  double learning_rate = 1e-3;
  double train_fraction = 0.8;
  int max_epochs = 200;
  int patience = 10;
  std::size_t batch_size = 128;
};

// Held-out accuracy (0-100) of a fresh probe trained to predict s from
// `representations`. The probe's early stopping uses a slice of the probe
// training split; the reported accuracy comes from the untouched 20%.
double Leakage(const Matrix& representations, std::span<const int> s,
               int num_groups, const ProbeConfig& config,
               std::uint64_t split_seed);

struct FairnessReport {
  double accuracy = 0.0;
  std::vector<double> eo_per_class;
  double gap = 0.0;
  double fairness = 0.0;
  // Filled in when a utopia point is known; NaN otherwise.
  double dto = 0.0;
  // NaN when not measured.
  double leakage = 0.0;
  std::map<std::string, std::string> metadata;

  // Flat "key=value" lines.
  std::string ToKeyValue() const;
};

// Accuracy, EO, GAP and fairness; leakage and dto left as NaN.
FairnessReport EvaluatePredictions(const PredictionSet& predictions);

}  // namespace wfc

#endif  // WFC_FAIRMETRICS_HPP_
