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

#ifndef WFC_HARNESS_HPP_
#define WFC_HARNESS_HPP_

// Experiment protocols (fair classification, demonic transfer, layer and
// hard-label ablations, beta sweep), aggregation over seeds and
// comparison tables with distance-to-utopia.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wfc/config.hpp"
#include "wfc/fairmetrics.hpp"
#include "wfc/training.hpp"

namespace wfc {

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  FairnessReport report;
  // Demonic accuracy (percent) on the task's test split.
  double demonic_accuracy = 0.0;
  TrainHistory history;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
  int count = 0;
};

MetricSummary Summarize(std::span<const double> values);

// One configuration evaluated over every seed.
struct ArmReport {
  std::string name;
  std::vector<SeedOutcome> seeds;
  // Keyed by metric name: accuracy, fairness, gap, leakage,
  // demonic_accuracy. Only successful seeds contribute.
  std::map<std::string, MetricSummary> aggregates;
  double wall_clock_seconds = 0.0;

  void Aggregate();
};

struct RunReport {
  Task task = Task::kFairClassification;
  std::vector<ArmReport> arms;
  std::string config_echo;
  double wall_clock_seconds = 0.0;
};

// Utopia = (best mean accuracy, best mean fairness) across the rows.
enum class UtopiaPolicy { kBestObserved };

struct ComparisonRow {
  std::string name;
  MetricSummary accuracy;
  MetricSummary fairness;
  MetricSummary leakage;
  double dto = 0.0;
};

struct ComparisonTable {
  UtopiaPoint utopia;
  std::vector<ComparisonRow> rows;

  // Columns: Model, Accuracy, Fairness, DTO, Leakage.
  std::string Render() const;
};

ComparisonTable CompareReports(std::span<const ArmReport> arms,
                               UtopiaPolicy policy = UtopiaPolicy::kBestObserved);

// Accuracy, EO, GAP and fairness of `classifier` on `test`, plus leakage of
// its last hidden representation (or logits without hidden layers).
FairnessReport EvaluateClassifier(const MlpParameters& classifier,
                                  const EmbeddingDataset& test,
                                  const ProbeConfig& probe,
                                  std::uint64_t probe_seed);

// Runs every arm of the task for every seed. A failing seed is recorded and
// the others proceed. When spec.out_dir is set, report files are written.
RunReport RunExperiment(const ExperimentSpec& spec);

// report.csv: one row per (arm, seed) plus mean and std rows per arm. The
// DTO column uses the utopia built from this report's arms.
std::string ReportCsv(const RunReport& report);
std::string ReportText(const RunReport& report);
void WriteReportFiles(const RunReport& report, const std::string& out_dir);

// Reads the per-seed rows of a report.csv back into arms (aggregates
// recomputed). Throws DataError on malformed files.
std::vector<ArmReport> ReadReportCsv(const std::string& path);

}  // namespace wfc

#endif  // WFC_HARNESS_HPP_
