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

#ifndef WFC_CONFIG_HPP_
#define WFC_CONFIG_HPP_

// Experiment specification and its flat "key=value" configuration format.
// Lines are "key=value"; '#' starts a comment; nested settings use dotted
// keys such as "critic.lr=5e-5".

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wfc/datagen.hpp"
#include "wfc/fairmetrics.hpp"
#include "wfc/training.hpp"

namespace wfc {

enum class Task {
  kFairClassification,
  kDemonicTransfer,
  kLayerAblation,
  kHardLabelAblation,
  kBetaSweep,
};

std::string_view TaskName(Task task);
Task ParseTask(std::string_view name);

struct DemonicSource {
  // Share of the training split used to pretrain an in-domain demonic model.
  double fraction = 0.2;
  // Pretrained demonic checkpoint; skips pretraining when set.
  std::string model_path;
  // External dataset for demonic transfer. When empty and the task data is
  // synthetic, the transfer domain is generated with `synthetic_domain`.
  std::string data_path;
  int synthetic_domain = 1;
};

struct ExperimentSpec {
  Task task = Task::kFairClassification;
  // Empty means synthetic data generated from `synthetic`, one draw per seed.
  std::string data_path;
  SyntheticSpec synthetic;
  TrainConfig train;
  DemonicConfig demonic;
  DemonicSource demonic_source;
  ProbeConfig probe;
  std::array<double, 3> split = {0.8, 0.1, 0.1};
  std::vector<std::uint64_t> seeds = {1};
  std::vector<double> betas = {1.0, 5.0, 10.0, 20.0};
  std::vector<LayerSelector> layers = {LayerSelector::kFirstHidden,
                                       LayerSelector::kLastHidden,
                                       LayerSelector::kLogits};
  std::string out_dir;
  bool write_models = true;

  // Throws ConfigError on inconsistent settings or missing paths.
  void Validate() const;
};

// Ordered key/value pairs as they appear in a config source.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Parses config text. Throws ConfigError naming the line on malformed input.
ConfigEntries ParseConfigText(std::string_view text);
ConfigEntries ReadConfigFile(const std::string& path);

// Applies entries in order on top of `spec`. Throws ConfigError naming the
// key for unknown keys or unparseable values.
void ApplyConfig(const ConfigEntries& entries, ExperimentSpec& spec);

// Defaults, then the file (if any), then `overrides`. `task` must be set by
// one of the two sources.
ExperimentSpec ParseConfig(const std::string& path, const ConfigEntries& overrides);

// Every recognized key with its current value, in a stable order.
ConfigEntries DescribeConfig(const ExperimentSpec& spec);

std::string FormatConfig(const ExperimentSpec& spec);

}  // namespace wfc

#endif  // WFC_CONFIG_HPP_
