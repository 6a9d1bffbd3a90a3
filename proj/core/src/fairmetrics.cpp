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

#include "wfc/fairmetrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "wfc/datagen.hpp"
#include "wfc/error.hpp"
#include "wfc/io_util.hpp"
#include "wfc/supervised.hpp"

namespace wfc {
namespace {

// Recall of class `cls` among rows with gold == cls whose group satisfies
// `in_group`.
template <typename Pred>
double ConditionalRecall(const PredictionSet& p, int cls, Pred in_group,
                         const std::string& cell_name) {
  std::size_t total = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p.gold.size(); ++i) {
    if (p.gold[i] != cls || !in_group(p.group[i])) continue;
    ++total;
    hits += p.predicted[i] == cls;
  }
  if (total == 0) {
    throw UndefinedMetricError("equal opportunity undefined: no examples in " +
                               cell_name);
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::string CellName(int cls, const std::string& group) {
  return "cell (y=" + std::to_string(cls) + ", s" + group + ")";
}

}  // namespace

void PredictionSet::Validate() const {
  if (predicted.size() != gold.size() || gold.size() != group.size()) {
    throw DataError("prediction, gold and group lengths differ");
  }
  if (num_classes < 1 || num_groups < 1) {
    throw DataError("prediction set must declare class and group counts");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] < 0 || predicted[i] >= num_classes || gold[i] < 0 ||
        gold[i] >= num_classes || group[i] < 0 || group[i] >= num_groups) {
      throw DataError("prediction row " + std::to_string(i) + " out of range");
    }
  }
}

double Accuracy(const PredictionSet& predictions) {
  predictions.Validate();
  if (predictions.gold.empty()) throw DataError("accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.gold.size(); ++i) {
    correct += predictions.predicted[i] == predictions.gold[i];
  }
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(predictions.gold.size());
}

double EqualOpportunity(const PredictionSet& predictions, int cls, int group_a,
                        int group_b) {
  predictions.Validate();
  if (cls < 0 || cls >= predictions.num_classes || group_a < 0 ||
      group_a >= predictions.num_groups || group_b < 0 ||
      group_b >= predictions.num_groups) {
    throw DataError("class or group index out of range");
  }
  const double a = ConditionalRecall(
      predictions, cls, [&](int g) { return g == group_a; },
      CellName(cls, "=" + std::to_string(group_a)));
  const double b = ConditionalRecall(
      predictions, cls, [&](int g) { return g == group_b; },
      CellName(cls, "=" + std::to_string(group_b)));
  return a - b;
}

std::vector<double> EqualOpportunityPerClass(const PredictionSet& predictions) {
  predictions.Validate();
  if (predictions.num_groups < 2) {
    throw ConfigError("equal opportunity needs at least two groups");
  }
  std::vector<double> eo(static_cast<std::size_t>(predictions.num_classes));
  for (int c = 0; c < predictions.num_classes; ++c) {
    if (predictions.num_groups == 2) {
      eo[c] = EqualOpportunity(predictions, c, 0, 1);
      continue;
    }
    double worst = 0.0;
    for (int g = 0; g < predictions.num_groups; ++g) {
      const double in = ConditionalRecall(
          predictions, c, [&](int h) { return h == g; },
          CellName(c, "=" + std::to_string(g)));
      const double out = ConditionalRecall(
          predictions, c, [&](int h) { return h != g; },
          CellName(c, "!=" + std::to_string(g)));
      worst = std::max(worst, std::abs(in - out));
    }
    eo[c] = worst;
  }
  return eo;
}

double Gap(std::span<const double> eo_per_class) {
  if (eo_per_class.empty()) return 0.0;
  double sum = 0.0;
  for (double eo : eo_per_class) sum += eo * eo;
  return std::sqrt(sum / static_cast<double>(eo_per_class.size()));
}

double Dto(double accuracy, double fairness, const UtopiaPoint& utopia) {
  return std::hypot(utopia.accuracy - accuracy, utopia.fairness - fairness);
}

double Leakage(const Matrix& representations, std::span<const int> s,
               int num_groups, const ProbeConfig& config,
               std::uint64_t split_seed) {
  if (static_cast<std::size_t>(representations.rows()) != s.size()) {
    throw ShapeError("representation rows do not match attribute count");
  }
  if (num_groups < 2) throw ConfigError("leakage needs at least two groups");
  std::vector<int> present(static_cast<std::size_t>(num_groups), 0);
  for (int g : s) {
    if (g < 0 || g >= num_groups) throw DataError("attribute out of range");
    present[g] = 1;
  }
  if (std::count(present.begin(), present.end(), 1) < 2) {
    throw ConfigError("leakage undefined: sensitive attribute has a single class");
  }
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw ConfigError("probe train_fraction must lie in (0, 1)");
  }

  // train / early-stopping slice / held-out evaluation
  const double stop_share = config.train_fraction / 8.0;
  const std::array<double, 3> fractions = {config.train_fraction - stop_share,
                                           stop_share,
                                           1.0 - config.train_fraction};
  const SplitResult split =
      StratifiedSplitIndices(s, num_groups, fractions, split_seed);
  if (split.indices[1].empty() || split.indices[2].empty()) {
    throw DataError("too few examples to train a leakage probe");
  }

  const std::array<int, 3> sizes = {static_cast<int>(representations.cols()),
                                    config.hidden_dim, num_groups};
  MlpParameters probe = MlpInit(sizes, config.activation, split_seed ^ 0x9e3779b97f4a7c15ULL);
  SupervisedConfig fit;
  fit.optimizer = {OptimizerKind::kAdam, config.learning_rate};
  fit.batch_size = config.batch_size;
  fit.max_epochs = config.max_epochs;
  fit.patience = config.patience;
  fit.seed = split_seed + 17;
  FitSupervised(probe, GatherRows(representations, split.indices[0]),
                Gather(s, split.indices[0]),
                GatherRows(representations, split.indices[1]),
                Gather(s, split.indices[1]), fit);
  return 100.0 * PredictionAccuracy(probe,
                                    GatherRows(representations, split.indices[2]),
                                    Gather(s, split.indices[2]));
}

FairnessReport EvaluatePredictions(const PredictionSet& predictions) {
  FairnessReport report;
  report.accuracy = Accuracy(predictions);
  report.eo_per_class = EqualOpportunityPerClass(predictions);
  report.gap = Gap(report.eo_per_class);
  report.fairness = FairnessFromGap(report.gap);
  report.dto = std::numeric_limits<double>::quiet_NaN();
  report.leakage = std::numeric_limits<double>::quiet_NaN();
  if (predictions.num_groups > 2) report.metadata["eo_mode"] = "one_vs_rest_max";
  return report;
}

std::string FairnessReport::ToKeyValue() const {
  std::ostringstream out;
  out << "accuracy=" << io::FormatDouble(accuracy) << '\n';
  out << "fairness=" << io::FormatDouble(fairness) << '\n';
  out << "gap=" << io::FormatDouble(gap) << '\n';
  out << "dto=" << io::FormatDouble(dto) << '\n';
  out << "leakage=" << io::FormatDouble(leakage) << '\n';
  out << "eo_per_class=";
  for (std::size_t c = 0; c < eo_per_class.size(); ++c) {
    out << (c ? "," : "") << io::FormatDouble(eo_per_class[c]);
  }
  out << '\n';
  for (const auto& [key, value] : metadata) out << key << '=' << value << '\n';
  return out.str();
}

}  // namespace wfc
