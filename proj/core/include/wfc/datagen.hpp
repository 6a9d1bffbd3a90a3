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

#ifndef WFC_DATAGEN_HPP_
#define WFC_DATAGEN_HPP_

// Embedding datasets: in-memory representation, text/binary file formats,
// stratified splits, seeded batching and a synthetic generator that encodes
// the sensitive attribute linearly.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wfc/neural.hpp"

namespace wfc {

// n examples with d features, a target label y in [0, num_classes) and a
// sensitive attribute s in [0, num_groups).
struct EmbeddingDataset {
  Matrix features;
  std::vector<int> y;
  std::vector<int> s;
  int num_classes = 0;
  int num_groups = 0;
  std::vector<std::string> class_names;
  std::vector<std::string> group_names;

  std::size_t size() const { return y.size(); }
  int dim() const { return static_cast<int>(features.cols()); }

  // Throws DataError naming the first offending row.
  void Validate() const;

  EmbeddingDataset Subset(std::span<const std::size_t> indices) const;

  // Count of examples in each (y, s) cell, indexed [y * num_groups + s].
  std::vector<std::size_t> CellCounts() const;
};

struct SyntheticSpec {
  int num_classes = 2;
  int num_groups = 2;
  // Examples per (y, s) cell before the correlation reweighting.
  int n_per_cell = 250;
  int dim = 64;
  double class_separation = 1.0;
  double bias_strength = 1.0;
  double noise_std = 1.0;
  // Cells with y % num_groups == s get n_per_cell * (1 + correlation)
  // examples, the others n_per_cell * (1 - correlation).
  double correlation = 0.7;
  // Seeds the noise and the cell order.
  std::uint64_t seed = 1;
  // Seeds the orthonormal direction sets. Datasets sharing this seed share
  // the sensitive directions.
  std::uint64_t direction_seed = 2024;
  // Selects which block of class directions to use; different domains share
  // sensitive directions but have orthogonal class directions.
  int domain = 0;

  void Validate() const;
};

// x = class_separation * mu_y + bias_strength * nu_s + N(0, noise_std^2 I).
EmbeddingDataset GenerateSynthetic(const SyntheticSpec& spec);

// Number of examples in cell (y, s) under `spec`.
int SyntheticCellCount(const SyntheticSpec& spec, int y, int s);

enum class DatasetFormat { kText, kBinary };

// Text: header line "WFCDATA v1 n=<n> d=<d> classes=<C> groups=<S>" then one
// line per row "f1,...,fd,y,s". Binary: the same header plus "format=binary",
// then float64 features row-major, int32 y, int32 s, all little-endian.
void SaveDataset(const EmbeddingDataset& dataset, const std::string& path,
                 DatasetFormat format = DatasetFormat::kText);
// The format is read from the header line.
EmbeddingDataset LoadDataset(const std::string& path);

struct SplitResult {
  std::vector<std::vector<std::size_t>> indices;
  std::vector<std::string> warnings;
};

// Stratified by (y, s) cell. Fractions must be positive and sum to 1. Cells
// smaller than the number of splits go entirely to the first split.
// Stratified split of [0, strata.size()) where strata[i] in [0, num_strata).
SplitResult StratifiedSplitIndices(std::span<const int> strata, int num_strata,
                                   std::span<const double> fractions,
                                   std::uint64_t seed);

SplitResult SplitIndices(const EmbeddingDataset& dataset,
                         std::span<const double> fractions, std::uint64_t seed);

std::vector<EmbeddingDataset> Split(const EmbeddingDataset& dataset,
                                    std::span<const double> fractions,
                                    std::uint64_t seed,
                                    std::vector<std::string>* warnings = nullptr);

struct BatchPlan {
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  bool drop_last = false;

  void Validate() const;
};

// Seeded permutation of [0, n) for `epoch`, chunked into batches.
std::vector<std::vector<std::size_t>> MakeBatches(std::size_t n,
                                                  const BatchPlan& plan,
                                                  std::uint64_t epoch);

// Endless batch sequence: walks the batches of one epoch, then reshuffles
// with the next epoch number.
class BatchStream {
 public:
  BatchStream(std::size_t n, BatchPlan plan);

  const std::vector<std::size_t>& Next();

  std::uint64_t epoch() const { return epoch_; }

 private:
  std::size_t n_;
  BatchPlan plan_;
  std::uint64_t epoch_ = 0;
  std::size_t cursor_ = 0;
  std::vector<std::vector<std::size_t>> batches_;
};

// Rows of `m` selected by `indices`.
Matrix GatherRows(const Matrix& m, std::span<const std::size_t> indices);
std::vector<int> Gather(std::span<const int> values,
                        std::span<const std::size_t> indices);

}  // namespace wfc

#endif  // WFC_DATAGEN_HPP_
