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

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "wfc/datagen.hpp"
#include "wfc/error.hpp"

namespace wfc {
namespace {

// Twenty examples, counted by hand:
//   class 1, s = 0: 5 examples, 2 predicted 1  -> TPR 2/5
//   class 1, s = 1: 5 examples, 1 predicted 1  -> TPR 1/5
//   class 0, s = 0: 5 examples, 3 predicted 0  -> TPR 3/5
//   class 0, s = 1: 5 examples, 3 predicted 0  -> TPR 3/5
PredictionSet TwentyExamples() {
  PredictionSet p;
  p.num_classes = 2;
  p.num_groups = 2;
  auto add = [&p](int gold, int group, int correct, int total) {
    for (int i = 0; i < total; ++i) {
      p.gold.push_back(gold);
      p.group.push_back(group);
      p.predicted.push_back(i < correct ? gold : 1 - gold);
    }
  };
  add(1, 0, 2, 5);
  add(1, 1, 1, 5);
  add(0, 0, 3, 5);
  add(0, 1, 3, 5);
  return p;
}

TEST(EqualOpportunityTest, HandCountedFixture) {
  const PredictionSet p = TwentyExamples();
  ASSERT_EQ(p.gold.size(), 20u);
  EXPECT_EQ(EqualOpportunity(p, 1, 0, 1), 0.2);
  EXPECT_EQ(EqualOpportunity(p, 0, 0, 1), 0.0);
  EXPECT_EQ(EqualOpportunityPerClass(p), (std::vector<double>{0.0, 0.2}));
  EXPECT_EQ(Accuracy(p), 45.0);
}

TEST(EqualOpportunityTest, EmptyCellIsUndefined) {
  PredictionSet p;
  p.num_classes = 2;
  p.num_groups = 2;
  p.gold = {1, 1, 0};
  p.group = {0, 0, 1};
  p.predicted = {1, 0, 0};
  try {
    EqualOpportunity(p, 1, 0, 1);
    FAIL() << "expected UndefinedMetricError";
  } catch (const UndefinedMetricError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("s=1"), std::string::npos) << what;
  }
  p.gold.clear();
  p.group.clear();
  p.predicted.clear();
  EXPECT_THROW(Accuracy(p), DataError);
}

TEST(EqualOpportunityTest, OneVsRestForManyGroups) {
  PredictionSet p;
  p.num_classes = 2;
  p.num_groups = 3;
  // Class 0 TPR per group: 1, 1/2, 0. Against the rest: 1 vs 1/4,
  // 1/2 vs 1/3, 0 vs 2/3, so the largest gap is 0.75. Class 1 is always
  // right.
  p.gold = {0, 0, 0, 0, 0, 1, 1, 1};
  p.group = {0, 1, 1, 2, 2, 0, 1, 2};
  p.predicted = {0, 0, 1, 1, 1, 1, 1, 1};
  const auto eo = EqualOpportunityPerClass(p);
  ASSERT_EQ(eo.size(), 2u);
  EXPECT_NEAR(eo[0], 0.75, 1e-15);
  EXPECT_EQ(eo[1], 0.0);
}

TEST(GapTest, WorkedExamples) {
  EXPECT_NEAR(Gap(std::vector<double>{0.2, 0.0}), 0.141421, 1e-6);
  EXPECT_EQ(Gap(std::vector<double>{0.0, 0.0, 0.0}), 0.0);
  // One class at EO 1 among 28.
  std::vector<double> eo(28, 0.0);
  eo[3] = 1.0;
  EXPECT_NEAR(Gap(eo), std::sqrt(1.0 / 28.0), 1e-15);
  EXPECT_NEAR(FairnessFromGap(Gap(std::vector<double>{0.2, 0.0})), 85.8579, 1e-4);
}

TEST(DtoTest, ReferenceRowAndSymmetry) {
  EXPECT_NEAR(Dto(82.3, 85.1, {83.7, 90.6}), 5.675, 0.01);
  EXPECT_NEAR(Dto(75.2, 91.4, {76.2, 91.4}), 1.0, 1e-12);
  EXPECT_EQ(Dto(80.0, 90.0, {80.0, 90.0}), 0.0);
  EXPECT_NEAR(Dto(84.7, 95.6, {83.7, 90.6}), Dto(82.7, 85.6, {83.7, 90.6}), 1e-12);
}

TEST(LeakageTest, SeparableAndRandomInputs) {
  SyntheticSpec spec;
  spec.n_per_cell = 200;
  spec.correlation = 0.0;
  spec.bias_strength = 2.0;
  spec.noise_std = 0.1;
  const EmbeddingDataset d = GenerateSynthetic(spec);
  ProbeConfig probe;
  probe.hidden_dim = 32;
  EXPECT_GE(Leakage(d.features, d.s, 2, probe, 1), 99.0);
  EXPECT_EQ(Leakage(d.features, d.s, 2, probe, 1), Leakage(d.features, d.s, 2, probe, 1));

  const std::vector<int> single(d.size(), 0);
  EXPECT_THROW(Leakage(d.features, single, 2, probe, 1), ConfigError);
}

TEST(ReportTest, EvaluatePredictionsAndKeyValue) {
  const FairnessReport report = EvaluatePredictions(TwentyExamples());
  EXPECT_EQ(report.accuracy, 45.0);
  EXPECT_NEAR(report.gap, 0.141421, 1e-6);
  EXPECT_NEAR(report.fairness, 100.0 * (1.0 - report.gap), 1e-12);
  EXPECT_TRUE(std::isnan(report.leakage));
  EXPECT_TRUE(std::isnan(report.dto));
  const std::string text = report.ToKeyValue();
  EXPECT_NE(text.find("accuracy=45\n"), std::string::npos) << text;
  EXPECT_NE(text.find("gap="), std::string::npos);
}

}  // namespace
}  // namespace wfc
