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

#include "wfc/datagen.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "wfc/error.hpp"
#include "wfc/fairmetrics.hpp"

namespace wfc {
namespace {

const std::string kData = WFC_TEST_DATA_DIR;

EmbeddingDataset Tiny() {
  EmbeddingDataset d;
  d.features.resize(2, 3);
  d.features << 0.5, -1.25, 3.0,
                -0.125, 2.0, 1e-3;
  d.y = {1, 0};
  d.s = {0, 1};
  d.num_classes = 2;
  d.num_groups = 2;
  return d;
}

void ExpectSameData(const EmbeddingDataset& a, const EmbeddingDataset& b) {
  ASSERT_EQ(a.features.rows(), b.features.rows());
  ASSERT_EQ(a.features.cols(), b.features.cols());
  for (Eigen::Index i = 0; i < a.features.size(); ++i) {
    EXPECT_EQ(a.features.data()[i], b.features.data()[i]);
  }
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.s, b.s);
  EXPECT_EQ(a.num_classes, b.num_classes);
  EXPECT_EQ(a.num_groups, b.num_groups);
}

class DatasetFileTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_ = std::filesystem::temp_directory_path() /
                               ("wfc_data_" + std::to_string(::getpid()));
  void SetUp() override { std::filesystem::create_directories(dir_); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
};

TEST_F(DatasetFileTest, HandWrittenFixtureLoads) {
  ExpectSameData(LoadDataset(kData + "/tiny.txt"), Tiny());
}

TEST_F(DatasetFileTest, TextAndBinaryRoundTrip) {
  SyntheticSpec spec;
  spec.n_per_cell = 20;
  spec.dim = 7;
  const EmbeddingDataset data = GenerateSynthetic(spec);
  for (DatasetFormat format : {DatasetFormat::kText, DatasetFormat::kBinary}) {
    const std::string path = (dir_ / "d.bin").string();
    SaveDataset(data, path, format);
    ExpectSameData(LoadDataset(path), data);
  }
}

TEST_F(DatasetFileTest, ErrorsNameTheLine) {
  try {
    LoadDataset(kData + "/bad_label.txt");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    LoadDataset(kData + "/short_row.txt");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  const std::string path = (dir_ / "header.txt").string();
  std::ofstream(path) << "WFCDATA v2 n=1 d=1 classes=1 groups=1\n0,0,0\n";
  EXPECT_THROW(LoadDataset(path), DataError);
  EXPECT_THROW(LoadDataset((dir_ / "none.txt").string()), DataError);
}

TEST_F(DatasetFileTest, LabelEqualToClassCountIsRejected) {
  EmbeddingDataset d = Tiny();
  d.num_classes = 28;
  d.y = {28, 0};
  EXPECT_THROW(d.Validate(), DataError);
}

TEST(SyntheticTest, DeterministicWithExpectedCounts) {
  SyntheticSpec spec;
  spec.n_per_cell = 100;
  const EmbeddingDataset a = GenerateSynthetic(spec);
  const EmbeddingDataset b = GenerateSynthetic(spec);
  ExpectSameData(a, b);
  EXPECT_EQ(SyntheticCellCount(spec, 0, 0), 170);
  EXPECT_EQ(SyntheticCellCount(spec, 0, 1), 30);
  const auto counts = a.CellCounts();
  EXPECT_EQ(counts, (std::vector<std::size_t>{170, 30, 30, 170}));
  spec.seed = 2;
  EXPECT_FALSE(GenerateSynthetic(spec).features.isApprox(a.features));
}

TEST(SyntheticTest, MeansFollowTheConstruction) {
  SyntheticSpec spec;
  spec.n_per_cell = 2000;
  spec.correlation = 0.0;
  spec.noise_std = 0.5;
  spec.bias_strength = 2.0;
  const EmbeddingDataset d = GenerateSynthetic(spec);
  // Group means differ by bias * (nu_0 - nu_1); orthonormal directions give
  // a distance of bias * sqrt(2).
  Vector mean0 = Vector::Zero(spec.dim), mean1 = Vector::Zero(spec.dim);
  int n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.s[i] == 0) {
      mean0 += d.features.row(static_cast<Eigen::Index>(i)).transpose();
      ++n0;
    } else {
      mean1 += d.features.row(static_cast<Eigen::Index>(i)).transpose();
      ++n1;
    }
  }
  const double distance = (mean0 / n0 - mean1 / n1).norm();
  EXPECT_NEAR(distance, 2.0 * std::sqrt(2.0), 0.1);
}

TEST(SyntheticTest, ProbeAccuracyTracksBiasStrength) {
  ProbeConfig probe;
  probe.hidden_dim = 16;
  probe.max_epochs = 60;
  auto leakage = [&](double bias, double noise, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_per_cell = 250;
    spec.correlation = 0.0;
    spec.bias_strength = bias;
    spec.noise_std = noise;
    spec.seed = seed;
    const EmbeddingDataset d = GenerateSynthetic(spec);
    return Leakage(d.features, d.s, d.num_groups, probe, seed);
  };
  EXPECT_NEAR(leakage(0.0, 1.0, 1), 50.0, 6.0);
  EXPECT_GE(leakage(2.0, 0.1, 1), 99.0);
  double previous = 0.0;
  for (double bias : {0.0, 0.5, 1.0, 2.0}) {
    double mean = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) mean += leakage(bias, 1.0, seed) / 3.0;
    EXPECT_GE(mean, previous - 1.0) << "bias " << bias;
    previous = mean;
  }
}

TEST(SyntheticTest, DomainsShareSensitiveDirections) {
  SyntheticSpec a;
  a.n_per_cell = 10;
  SyntheticSpec b = a;
  b.domain = 1;
  b.class_separation = 0.0;
  a.class_separation = 0.0;
  b.noise_std = a.noise_std = 1e-9;
  const EmbeddingDataset da = GenerateSynthetic(a);
  const EmbeddingDataset db = GenerateSynthetic(b);
  // Without class signal and noise, a row is nu_s in either domain.
  EXPECT_LT((da.features.row(0) - db.features.row(0)).norm() +
                (da.s[0] == db.s[0] ? 0.0 : 1.0),
            1e-6);
  EXPECT_THROW(([] {
                 SyntheticSpec bad;
                 bad.correlation = 1.5;
                 bad.Validate();
               })(),
               ConfigError);
}

TEST(SplitTest, SizesCoverageAndDisjointness) {
  SyntheticSpec spec;
  spec.n_per_cell = 250;
  spec.correlation = 0.0;
  const EmbeddingDataset data = GenerateSynthetic(spec);
  const std::array<double, 3> fractions = {0.8, 0.1, 0.1};
  const SplitResult split = SplitIndices(data, fractions, 3);
  ASSERT_EQ(split.indices.size(), 3u);
  EXPECT_EQ(split.indices[0].size(), 800u);
  EXPECT_EQ(split.indices[1].size(), 100u);
  EXPECT_EQ(split.indices[2].size(), 100u);
  std::vector<std::size_t> all;
  for (const auto& part : split.indices) all.insert(all.end(), part.begin(), part.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(data.size());
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(all, expected);
  EXPECT_EQ(SplitIndices(data, fractions, 3).indices, split.indices);
  EXPECT_TRUE(split.warnings.empty());
}

TEST(SplitTest, CellProportionsArePreserved) {
  SyntheticSpec spec;
  spec.n_per_cell = 137;
  const EmbeddingDataset data = GenerateSynthetic(spec);
  const std::array<double, 3> fractions = {0.6, 0.25, 0.15};
  const auto parts = Split(data, fractions, 9);
  const auto global = data.CellCounts();
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto counts = parts[p].CellCounts();
    for (std::size_t c = 0; c < global.size(); ++c) {
      EXPECT_NEAR(static_cast<double>(counts[c]), fractions[p] * global[c], 2.0);
    }
  }
}

TEST(SplitTest, IdentityAndTinyCells) {
  const EmbeddingDataset data = Tiny();
  const std::array<double, 1> whole = {1.0};
  EXPECT_EQ(SplitIndices(data, whole, 1).indices[0].size(), 2u);
  const std::array<double, 3> three = {0.8, 0.1, 0.1};
  const SplitResult split = SplitIndices(data, three, 1);
  EXPECT_EQ(split.indices[0].size(), 2u);
  EXPECT_EQ(split.warnings.size(), 2u);
  const std::array<double, 2> bad = {0.5, 0.6};
  EXPECT_THROW(SplitIndices(data, bad, 1), ConfigError);
}

TEST(BatchTest, PartitionAndDropLast) {
  const auto batches = MakeBatches(10, {5, 1, false}, 0);
  ASSERT_EQ(batches.size(), 2u);
  std::set<std::size_t> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  EXPECT_EQ(seen.size(), 10u);

  const auto dropped = MakeBatches(10, {4, 1, true}, 0);
  ASSERT_EQ(dropped.size(), 2u);
  EXPECT_EQ(dropped[0].size() + dropped[1].size(), 8u);

  const auto ragged = MakeBatches(10, {4, 1, false}, 0);
  EXPECT_EQ(ragged.back().size(), 2u);

  EXPECT_EQ(MakeBatches(10, {5, 1, false}, 3), MakeBatches(10, {5, 1, false}, 3));
  EXPECT_NE(MakeBatches(10, {5, 1, false}, 3), MakeBatches(10, {5, 1, false}, 4));
  EXPECT_THROW(MakeBatches(10, {1, 1, false}, 0), ConfigError);
}

TEST(BatchTest, StreamReshufflesPerEpoch) {
  BatchStream stream(6, {3, 2, true});
  const auto first = stream.Next();
  stream.Next();
  EXPECT_EQ(stream.epoch(), 0u);
  const auto third = stream.Next();
  EXPECT_EQ(stream.epoch(), 1u);
  EXPECT_EQ(first, MakeBatches(6, {3, 2, true}, 0)[0]);
  EXPECT_EQ(third, MakeBatches(6, {3, 2, true}, 1)[0]);
  EXPECT_THROW(BatchStream(2, {3, 2, true}), ConfigError);
}

}  // namespace
}  // namespace wfc
