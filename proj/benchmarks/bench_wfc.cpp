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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "wfc/datagen.hpp"
#include "wfc/fairmetrics.hpp"
#include "wfc/neural.hpp"
#include "wfc/training.hpp"
#include "wfc/wassdep.hpp"

namespace {

constexpr int kBatch = 128;
constexpr int kDim = 64;

void BM_ClassifierForward(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  const std::vector<int> sizes = {kDim, hidden, 2};
  const wfc::MlpParameters net = wfc::MlpInit(sizes, wfc::Activation::kTanh, 1);
  const wfc::Matrix x = wfc::Matrix::Random(kBatch, kDim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wfc::MlpForward(net, x));
  }
}
BENCHMARK(BM_ClassifierForward)->Arg(64)->Arg(300);

void BM_CriticStep(benchmark::State& state) {
  wfc::TrainConfig config;
  config.critic.hidden_dim = static_cast<int>(state.range(0));
  const std::vector<int> clf_sizes = {kDim, 300, 2};
  const wfc::MlpParameters classifier =
      wfc::MlpInit(clf_sizes, wfc::Activation::kTanh, 1);
  const std::vector<int> critic_sizes = {600, config.critic.hidden_dim, 1};
  wfc::MlpParameters critic = wfc::MlpInit(critic_sizes, wfc::Activation::kRelu, 2);
  wfc::OptimizerState opt = wfc::MakeOptimizerState(config.critic_optimizer, critic);
  const wfc::Matrix x = wfc::Matrix::Random(kBatch, kDim);
  const wfc::Matrix z_s = wfc::Matrix::Random(kBatch, 300);
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wfc::CriticStep(classifier, critic, x, z_s, config, opt, rng));
  }
}
BENCHMARK(BM_CriticStep)->Arg(64)->Arg(512);

void BM_ClassifierStep(benchmark::State& state) {
  wfc::TrainConfig config;
  const std::vector<int> clf_sizes = {kDim, 300, 2};
  wfc::MlpParameters classifier = wfc::MlpInit(clf_sizes, wfc::Activation::kTanh, 1);
  const std::vector<int> critic_sizes = {600, 512, 1};
  const wfc::MlpParameters critic =
      wfc::MlpInit(critic_sizes, wfc::Activation::kRelu, 2);
  wfc::OptimizerState opt =
      wfc::MakeOptimizerState(config.classifier_optimizer, classifier);
  const wfc::Matrix x = wfc::Matrix::Random(kBatch, kDim);
  const wfc::Matrix z_s = wfc::Matrix::Random(kBatch, 300);
  std::vector<int> y(kBatch);
  for (int i = 0; i < kBatch; ++i) y[i] = i % 2;
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wfc::ClassifierStep(classifier, critic, x, y, z_s, config, opt, rng));
  }
}
BENCHMARK(BM_ClassifierStep);

void BM_Leakage(benchmark::State& state) {
  wfc::SyntheticSpec spec;
  spec.n_per_cell = 100;
  const wfc::EmbeddingDataset data = wfc::GenerateSynthetic(spec);
  wfc::ProbeConfig probe;
  probe.max_epochs = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wfc::Leakage(data.features, data.s, data.num_groups, probe, 1));
  }
}
BENCHMARK(BM_Leakage)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
