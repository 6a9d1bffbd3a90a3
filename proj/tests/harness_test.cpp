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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "wfc/error.hpp"

namespace wfc {
namespace {

ArmReport ArmWith(const std::string& name, double accuracy, double fairness) {
  ArmReport arm;
  arm.name = name;
  SeedOutcome outcome;
  outcome.ok = true;
  outcome.report.accuracy = accuracy;
  outcome.report.fairness = fairness;
  outcome.report.gap = 1.0 - fairness / 100.0;
  outcome.report.leakage = 60.0;
  arm.seeds.push_back(outcome);
  arm.Aggregate();
  return arm;
}

ExperimentSpec TinySpec(Task task) {
  ExperimentSpec spec;
  spec.task = task;
  spec.seeds = {1, 2};
  spec.synthetic.n_per_cell = 60;
  spec.synthetic.dim = 8;
  spec.train.max_epochs = 3;
  spec.train.batch_size = 32;
  spec.train.classifier = {1, 6, Activation::kTanh};
  spec.train.critic = {1, 6, Activation::kRelu};
  spec.demonic.architecture = {1, 6, Activation::kTanh};
  spec.demonic.fit.max_epochs = 5;
  spec.demonic_source.fraction = 0.5;
  spec.probe.hidden_dim = 6;
  spec.probe.max_epochs = 5;
  spec.split = {0.6, 0.2, 0.2};
  spec.betas = {0.0, 2.0};
  return spec;
}

TEST(SummarizeTest, SampleStandardDeviation) {
  const std::vector<double> values = {1.0, 2.0, 4.0};
  const MetricSummary s = Summarize(values);
  EXPECT_NEAR(s.mean, 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.stddev, std::sqrt(((4.0 / 3) * (4.0 / 3) + (1.0 / 3) * (1.0 / 3) +
                                   (5.0 / 3) * (5.0 / 3)) / 2.0),
              1e-12);
  EXPECT_EQ(s.count, 3);
  EXPECT_EQ(Summarize(std::vector<double>{5.0}).stddev, 0.0);
  EXPECT_TRUE(std::isnan(Summarize(std::vector<double>{}).mean));
}

TEST(CompareTest, SingleReportIsItsOwnUtopia) {
  const std::vector<ArmReport> arms = {ArmWith("only", 75.2, 91.4)};
  const ComparisonTable table = CompareReports(arms);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].dto, 0.0);
}

TEST(CompareTest, TwoReportsUseBestObservedUtopia) {
  const std::vector<ArmReport> arms = {ArmWith("a", 75.2, 91.4), ArmWith("b", 76.2, 90.1)};
  const ComparisonTable table = CompareReports(arms);
  EXPECT_EQ(table.utopia.accuracy, 76.2);
  EXPECT_EQ(table.utopia.fairness, 91.4);
  EXPECT_NEAR(table.rows[0].dto, 1.0, 1e-9);
  EXPECT_NEAR(table.rows[1].dto, 1.3, 1e-9);

  const std::string text = table.Render();
  const auto acc = text.find("Accuracy"), fair = text.find("Fairness"),
             dto = text.find("DTO"), leak = text.find("Leakage");
  ASSERT_NE(leak, std::string::npos);
  EXPECT_LT(acc, fair);
  EXPECT_LT(fair, dto);
  EXPECT_LT(dto, leak);
}

class RunExperimentTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_ = std::filesystem::temp_directory_path() /
                               ("wfc_run_" + std::to_string(::getpid()));
  void TearDown() override { std::filesystem::remove_all(dir_); }

  static std::string Slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

TEST_F(RunExperimentTest, FairClassificationWritesReports) {
  ExperimentSpec spec = TinySpec(Task::kFairClassification);
  spec.out_dir = dir_.string();
  const RunReport report = RunExperiment(spec);
  ASSERT_EQ(report.arms.size(), 1u);
  const ArmReport& arm = report.arms[0];
  ASSERT_EQ(arm.seeds.size(), 2u);
  std::vector<double> accuracy;
  for (const auto& s : arm.seeds) {
    ASSERT_TRUE(s.ok) << s.error;
    accuracy.push_back(s.report.accuracy);
  }
  EXPECT_NEAR(arm.aggregates.at("accuracy").mean, Summarize(accuracy).mean, 1e-12);
  EXPECT_NEAR(arm.aggregates.at("accuracy").stddev, Summarize(accuracy).stddev, 1e-12);
  for (const char* name : {"report.csv", "report.txt", "history_1.csv", "history_2.csv",
                           "model_1.wfc", "model_2.wfc"}) {
    EXPECT_TRUE(std::filesystem::exists(dir_ / name)) << name;
  }
  EXPECT_EQ(Slurp(dir_ / "report.csv"), ReportCsv(report));

  const auto back = ReadReportCsv((dir_ / "report.csv").string());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].seeds.size(), 2u);
  EXPECT_EQ(back[0].aggregates.at("gap").mean, arm.aggregates.at("gap").mean);
}

TEST_F(RunExperimentTest, ReportCsvIsReproducible) {
  ExperimentSpec spec = TinySpec(Task::kBetaSweep);
  const std::string first = ReportCsv(RunExperiment(spec));
  EXPECT_EQ(ReportCsv(RunExperiment(spec)), first);
}

TEST_F(RunExperimentTest, FailingSeedIsRecordedAndOthersProceed) {
  // The transfer domain is only checked when its data is generated, so
  // the transfer arm fails per seed while the in-domain arm runs.
  ExperimentSpec spec = TinySpec(Task::kDemonicTransfer);
  spec.demonic_source.synthetic_domain = -1;
  const RunReport report = RunExperiment(spec);
  ASSERT_EQ(report.arms.size(), 2u);
  for (const auto& s : report.arms[0].seeds) EXPECT_TRUE(s.ok) << s.error;
  for (const auto& s : report.arms[1].seeds) {
    EXPECT_FALSE(s.ok);
    EXPECT_FALSE(s.error.empty());
  }
  EXPECT_NE(ReportCsv(report).find("transfer,1,failed"), std::string::npos);
}

TEST_F(RunExperimentTest, AblationArms) {
  ExperimentSpec layers = TinySpec(Task::kLayerAblation);
  layers.seeds = {4};
  const RunReport by_layer = RunExperiment(layers);
  ASSERT_EQ(by_layer.arms.size(), 3u);
  EXPECT_EQ(by_layer.arms[0].name, "layer=first_hidden");
  const auto& first = by_layer.arms[0].seeds[0].report;
  const auto& last = by_layer.arms[1].seeds[0].report;
  EXPECT_EQ(first.accuracy, last.accuracy);
  EXPECT_EQ(first.gap, last.gap);
  EXPECT_EQ(first.leakage, last.leakage);

  ExperimentSpec hard = TinySpec(Task::kHardLabelAblation);
  hard.seeds = {4};
  const RunReport by_mode = RunExperiment(hard);
  ASSERT_EQ(by_mode.arms.size(), 2u);
  for (const auto& arm : by_mode.arms) EXPECT_TRUE(arm.seeds[0].ok) << arm.seeds[0].error;
}

TEST(ReadReportCsvTest, RejectsMalformedFiles) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("wfc_bad_report_" + std::to_string(::getpid()) + ".csv");
  std::ofstream(path) << "not,a,report\n";
  EXPECT_THROW(ReadReportCsv(path.string()), DataError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace wfc
