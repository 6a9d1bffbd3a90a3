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

#include "wfc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "wfc/datagen.hpp"
#include "wfc/error.hpp"
#include "wfc/io_util.hpp"
#include "wfc/supervised.hpp"

namespace wfc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kCsvHeader =
    "arm,seed,status,accuracy,fairness,gap,dto,leakage,demonic_accuracy";

enum SeedStream : std::uint64_t {
  kDemonicPretrain = 200,
  kTransferData = 300,
  kDemonicSubset = 400,
  kProbe = 500,
};

struct Arm {
  std::string name;
  TrainConfig config;
  bool transfer_demonic = false;
};

std::vector<Arm> ArmsFor(const ExperimentSpec& spec) {
  std::vector<Arm> arms;
  const TrainConfig& base = spec.train;
  switch (spec.task) {
    case Task::kFairClassification:
      arms.push_back({"wfc", base});
      break;
    case Task::kBetaSweep:
      for (double beta : spec.betas) {
        Arm arm{"beta=" + io::FormatDouble(beta), base};
        arm.config.beta = beta;
        arms.push_back(std::move(arm));
      }
      break;
    case Task::kLayerAblation:
      for (LayerSelector layer : spec.layers) {
        Arm arm{"layer=" + std::string(LayerSelectorName(layer)), base};
        arm.config.classifier_layer = layer;
        arm.config.demonic_layer = layer;
        arms.push_back(std::move(arm));
      }
      break;
    case Task::kHardLabelAblation:
      for (DemonicMode mode : {DemonicMode::kLatent, DemonicMode::kHardLabel}) {
        Arm arm{"demonic=" + std::string(DemonicModeName(mode)), base};
        arm.config.demonic_mode = mode;
        arms.push_back(std::move(arm));
      }
      break;
    case Task::kDemonicTransfer:
      arms.push_back({"in_domain", base, false});
      arms.push_back({"transfer", base, true});
      break;
  }
  return arms;
}

std::string DirectoryName(const std::string& arm) {
  std::string out = arm;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  }
  return out;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
  out << text;
}

struct SeedData {
  EmbeddingDataset train;
  EmbeddingDataset validation;
  EmbeddingDataset test;
};

SeedData PrepareData(const ExperimentSpec& spec, std::uint64_t seed,
                     const std::optional<EmbeddingDataset>& loaded) {
  EmbeddingDataset full;
  if (loaded) {
    full = *loaded;
  } else {
    SyntheticSpec synthetic = spec.synthetic;
    synthetic.seed = seed;
    full = GenerateSynthetic(synthetic);
  }
  auto parts = Split(full, spec.split, seed);
  return {std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
}

DemonicModel InDomainDemonic(const ExperimentSpec& spec, std::uint64_t seed,
                             const EmbeddingDataset& train) {
  DemonicConfig config = spec.demonic;
  config.seed = DeriveSeed(seed, kDemonicPretrain);
  if (spec.demonic_source.fraction >= 1.0) return PretrainDemonic(train, config);
  const std::array<double, 2> fractions = {spec.demonic_source.fraction,
                                           1.0 - spec.demonic_source.fraction};
  const SplitResult subset = StratifiedSplitIndices(
      train.s, train.num_groups, fractions, DeriveSeed(seed, kDemonicSubset));
  return PretrainDemonic(train.Subset(subset.indices[0]), config);
}

DemonicModel TransferDemonic(const ExperimentSpec& spec, std::uint64_t seed) {
  EmbeddingDataset source;
  if (!spec.demonic_source.data_path.empty()) {
    source = LoadDataset(spec.demonic_source.data_path);
  } else {
    if (!spec.data_path.empty()) {
      throw ConfigError(
          "demonic_transfer on file data needs demonic.data (an external dataset)");
    }
    SyntheticSpec synthetic = spec.synthetic;
    synthetic.domain = spec.demonic_source.synthetic_domain;
    synthetic.seed = DeriveSeed(seed, kTransferData);
    source = GenerateSynthetic(synthetic);
  }
  DemonicConfig config = spec.demonic;
  config.seed = DeriveSeed(seed, kDemonicPretrain + 1);
  return PretrainDemonic(source, config);
}

std::string Fixed(double value, int precision = 2) {
  if (std::isnan(value)) return "nan";
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << value;
  return out.str();
}

std::string MeanStd(const MetricSummary& m) {
  return Fixed(m.mean) + " +- " + Fixed(m.stddev);
}

}  // namespace

MetricSummary Summarize(std::span<const double> values) {
  MetricSummary summary;
  summary.count = static_cast<int>(values.size());
  if (values.empty()) {
    summary.mean = summary.stddev = kNaN;
    return summary;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  summary.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - summary.mean) * (v - summary.mean);
    summary.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return summary;
}

void ArmReport::Aggregate() {
  std::map<std::string, std::vector<double>> columns;
  for (const auto& outcome : seeds) {
    if (!outcome.ok) continue;
    columns["accuracy"].push_back(outcome.report.accuracy);
    columns["fairness"].push_back(outcome.report.fairness);
    columns["gap"].push_back(outcome.report.gap);
    columns["leakage"].push_back(outcome.report.leakage);
    columns["demonic_accuracy"].push_back(outcome.demonic_accuracy);
  }
  aggregates.clear();
  for (const char* key : {"accuracy", "fairness", "gap", "leakage", "demonic_accuracy"}) {
    aggregates[key] = Summarize(columns[key]);
  }
}

ComparisonTable CompareReports(std::span<const ArmReport> arms, UtopiaPolicy policy) {
  (void)policy;  // kBestObserved is the only policy.
  ComparisonTable table;
  table.utopia = {-std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  for (const auto& arm : arms) {
    ComparisonRow row;
    row.name = arm.name;
    const auto get = [&arm](const char* key) {
      const auto it = arm.aggregates.find(key);
      return it == arm.aggregates.end() ? MetricSummary{kNaN, kNaN, 0} : it->second;
    };
    row.accuracy = get("accuracy");
    row.fairness = get("fairness");
    row.leakage = get("leakage");
    if (row.accuracy.count > 0) {
      table.utopia.accuracy = std::max(table.utopia.accuracy, row.accuracy.mean);
      table.utopia.fairness = std::max(table.utopia.fairness, row.fairness.mean);
    }
    table.rows.push_back(std::move(row));
  }
  for (auto& row : table.rows) {
    row.dto = row.accuracy.count > 0
                  ? Dto(row.accuracy.mean, row.fairness.mean, table.utopia)
                  : kNaN;
  }
  return table;
}

std::string ComparisonTable::Render() const {
  std::size_t width = 5;
  for (const auto& row : rows) width = std::max(width, row.name.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width) + 2) << "Model"
      << std::setw(18) << "Accuracy(^)" << std::setw(18) << "Fairness(^)"
      << std::setw(10) << "DTO(v)" << "Leakage(v)" << '\n';
  for (const auto& row : rows) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << row.name
        << std::setw(18) << MeanStd(row.accuracy) << std::setw(18)
        << MeanStd(row.fairness) << std::setw(10) << Fixed(row.dto)
        << MeanStd(row.leakage) << '\n';
  }
  out << "utopia: accuracy=" << Fixed(utopia.accuracy)
      << " fairness=" << Fixed(utopia.fairness) << '\n';
  return out.str();
}

FairnessReport EvaluateClassifier(const MlpParameters& classifier,
                                  const EmbeddingDataset& test,
                                  const ProbeConfig& probe,
                                  std::uint64_t probe_seed) {
  test.Validate();
  const ForwardTrace trace = MlpForward(classifier, test.features);
  PredictionSet predictions{ArgmaxRows(trace.logits()), test.y, test.s,
                            test.num_classes, test.num_groups};
  FairnessReport report = EvaluatePredictions(predictions);
  const int index = classifier.num_hidden() > 0 ? classifier.num_layers() - 1
                                                : classifier.num_layers();
  report.leakage = Leakage(trace.post[index], test.s, test.num_groups, probe, probe_seed);
  report.metadata["leakage_layer"] =
      classifier.num_hidden() > 0 ? "last_hidden" : "logits";
  report.metadata["probe"] = "hidden=" + std::to_string(probe.hidden_dim) +
                             ",lr=" + io::FormatDouble(probe.learning_rate) +
                             ",epochs=" + std::to_string(probe.max_epochs) +
                             ",patience=" + std::to_string(probe.patience);
  return report;
}

RunReport RunExperiment(const ExperimentSpec& spec) {
  spec.Validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.task = spec.task;
  report.config_echo = FormatConfig(spec);

  const std::vector<Arm> arms = ArmsFor(spec);
  report.arms.resize(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) report.arms[a].name = arms[a].name;

  std::optional<EmbeddingDataset> loaded;
  if (!spec.data_path.empty()) loaded = LoadDataset(spec.data_path);
  std::optional<DemonicModel> fixed_demonic;
  if (!spec.demonic_source.model_path.empty()) {
    fixed_demonic = DemonicModel{LoadModel(spec.demonic_source.model_path), 0.0, true};
  }

  const bool multi_arm = arms.size() > 1;
  std::vector<double> arm_seconds(arms.size(), 0.0);
  for (std::uint64_t seed : spec.seeds) {
    std::optional<SeedData> data;
    std::optional<DemonicModel> in_domain;
    std::optional<DemonicModel> transfer;
    std::string setup_error;
    try {
      data = PrepareData(spec, seed, loaded);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }

    for (std::size_t a = 0; a < arms.size(); ++a) {
      const auto arm_start = std::chrono::steady_clock::now();
      SeedOutcome outcome;
      outcome.seed = seed;
      try {
        if (!data) throw RuntimeFailure(setup_error);
        const DemonicModel* demonic = nullptr;
        // A supplied checkpoint stands in for the transferred model in the
        // transfer task and for every demonic model elsewhere.
        const bool use_fixed = fixed_demonic && (spec.task != Task::kDemonicTransfer ||
                                                 arms[a].transfer_demonic);
        if (use_fixed) {
          demonic = &*fixed_demonic;
        } else if (arms[a].transfer_demonic) {
          if (!transfer) transfer = TransferDemonic(spec, seed);
          demonic = &*transfer;
        } else {
          if (!in_domain) in_domain = InDomainDemonic(spec, seed, data->train);
          demonic = &*in_domain;
        }

        TrainConfig config = arms[a].config;
        config.seed = seed;
        WfcResult result = TrainWfc(data->train, data->validation, *demonic, config);
        outcome.report = EvaluateClassifier(result.classifier, data->test,
                                            spec.probe, DeriveSeed(seed, kProbe));
        outcome.demonic_accuracy =
            100.0 * PredictionAccuracy(demonic->params, data->test.features, data->test.s);
        outcome.report.metadata["best_epoch"] = std::to_string(result.history.best_epoch);
        outcome.report.metadata["epochs_run"] =
            std::to_string(result.history.epochs.size());
        outcome.history = std::move(result.history);
        outcome.ok = true;

        if (!spec.out_dir.empty()) {
          std::filesystem::path dir = spec.out_dir;
          if (multi_arm) dir /= DirectoryName(arms[a].name);
          std::filesystem::create_directories(dir);
          const std::string suffix = std::to_string(seed);
          WriteText(dir / ("history_" + suffix + ".csv"), outcome.history.ToCsv());
          if (spec.write_models) {
            SaveModel(result.classifier, (dir / ("model_" + suffix + ".wfc")).string());
          }
        }
      } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
      }
      report.arms[a].seeds.push_back(std::move(outcome));
      arm_seconds[a] += std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - arm_start)
                            .count();
    }
  }
  for (std::size_t a = 0; a < arms.size(); ++a) {
    report.arms[a].wall_clock_seconds = arm_seconds[a];
    report.arms[a].Aggregate();
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!spec.out_dir.empty()) WriteReportFiles(report, spec.out_dir);
  return report;
}

std::string ReportCsv(const RunReport& report) {
  const ComparisonTable table = CompareReports(report.arms);
  std::ostringstream out;
  out << kCsvHeader << '\n';
  const auto f = [](double v) { return io::FormatDouble(v); };
  for (std::size_t a = 0; a < report.arms.size(); ++a) {
    const ArmReport& arm = report.arms[a];
    for (const auto& s : arm.seeds) {
      out << arm.name << ',' << s.seed << ',';
      if (!s.ok) {
        out << "failed,,,,,,\n";
        continue;
      }
      out << "ok," << f(s.report.accuracy) << ',' << f(s.report.fairness) << ','
          << f(s.report.gap) << ','
          << f(Dto(s.report.accuracy, s.report.fairness, table.utopia)) << ','
          << f(s.report.leakage) << ',' << f(s.demonic_accuracy) << '\n';
    }
    const auto agg = [&arm](const char* key) { return arm.aggregates.at(key); };
    out << arm.name << ",mean,aggregate," << f(agg("accuracy").mean) << ','
        << f(agg("fairness").mean) << ',' << f(agg("gap").mean) << ','
        << f(table.rows[a].dto) << ',' << f(agg("leakage").mean) << ','
        << f(agg("demonic_accuracy").mean) << '\n';
    out << arm.name << ",std,aggregate," << f(agg("accuracy").stddev) << ','
        << f(agg("fairness").stddev) << ',' << f(agg("gap").stddev) << ",,"
        << f(agg("leakage").stddev) << ',' << f(agg("demonic_accuracy").stddev)
        << '\n';
  }
  return out.str();
}

std::string ReportText(const RunReport& report) {
  std::ostringstream out;
  out << "task: " << TaskName(report.task) << "\n\n";
  out << CompareReports(report.arms).Render() << '\n';
  for (const auto& arm : report.arms) {
    out << "[" << arm.name << "] wall_clock=" << Fixed(arm.wall_clock_seconds, 1)
        << "s\n";
    for (const auto& s : arm.seeds) {
      out << "  seed " << s.seed << ": ";
      if (!s.ok) {
        out << "FAILED: " << s.error << '\n';
        continue;
      }
      out << "accuracy=" << Fixed(s.report.accuracy)
          << " fairness=" << Fixed(s.report.fairness)
          << " gap=" << Fixed(s.report.gap, 4)
          << " leakage=" << Fixed(s.report.leakage)
          << " demonic_accuracy=" << Fixed(s.demonic_accuracy)
          << " best_epoch=" << s.report.metadata.at("best_epoch") << '\n';
    }
  }
  out << "\nwall_clock_seconds=" << Fixed(report.wall_clock_seconds, 1) << "\n\n";
  out << "# configuration\n" << report.config_echo;
  return out.str();
}

void WriteReportFiles(const RunReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  WriteText(std::filesystem::path(out_dir) / "report.csv", ReportCsv(report));
  WriteText(std::filesystem::path(out_dir) / "report.txt", ReportText(report));
}

std::vector<ArmReport> ReadReportCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw DataError(path + ": line 1: not a report.csv header");
  }
  std::vector<ArmReport> arms;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::Trim(line).empty()) continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    const auto fields = io::SplitString(line, ',');
    if (fields.size() != 9) throw DataError(where + ": expected 9 fields");
    if (fields[2] == "aggregate") continue;
    auto it = std::find_if(arms.begin(), arms.end(),
                           [&](const ArmReport& a) { return a.name == fields[0]; });
    if (it == arms.end()) {
      arms.push_back({fields[0], {}, {}, 0.0});
      it = std::prev(arms.end());
    }
    SeedOutcome outcome;
    outcome.seed = static_cast<std::uint64_t>(io::ParseInt(fields[1], where));
    outcome.ok = fields[2] == "ok";
    if (outcome.ok) {
      outcome.report.accuracy = io::ParseDouble(fields[3], where);
      outcome.report.fairness = io::ParseDouble(fields[4], where);
      outcome.report.gap = io::ParseDouble(fields[5], where);
      outcome.report.leakage = io::ParseDouble(fields[7], where);
      outcome.demonic_accuracy = io::ParseDouble(fields[8], where);
    } else if (fields[2] != "failed") {
      throw DataError(where + ": unknown status '" + fields[2] + "'");
    }
    it->seeds.push_back(std::move(outcome));
  }
  for (auto& arm : arms) arm.Aggregate();
  return arms;
}

}  // namespace wfc
