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

#include "wfc/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "wfc/error.hpp"
#include "wfc/io_util.hpp"

namespace wfc {
namespace {

struct KeyHandler {
  std::string key;
  std::function<void(ExperimentSpec&, std::string_view)> set;
  std::function<std::string(const ExperimentSpec&)> get;
};

double AsDouble(std::string_view value) {
  return io::ParseDouble(value, "number");
}

long AsInt(std::string_view value) { return io::ParseInt(value, "integer"); }

int AsPositiveInt(std::string_view value) {
  const long v = AsInt(value);
  if (v < 1) throw DataError("must be a positive integer");
  return static_cast<int>(v);
}

std::uint64_t AsSeed(std::string_view value) {
  const long v = AsInt(value);
  if (v < 0) throw DataError("seeds must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool AsBool(std::string_view value) {
  value = io::Trim(value);
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw DataError("expected a boolean");
}

std::string Str(double v) { return io::FormatDouble(v); }
std::string Str(bool v) { return v ? "true" : "false"; }
template <typename T>
std::string Str(T v) requires std::is_integral_v<T> { return std::to_string(v); }

template <typename T, typename Fn>
std::string Join(const std::vector<T>& values, Fn&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format(values[i]);
  }
  return out;
}

// `select_spec` and `select_opt` are generic lambdas usable on const and
// non-const specs.
void AddMlpKeys(std::vector<KeyHandler>& table, const std::string& prefix,
                auto select_spec) {
  table.push_back({prefix + ".hidden_layers",
                   [=](ExperimentSpec& s, std::string_view v) {
                     const long layers = AsInt(v);
                     if (layers < 0) throw DataError("must be >= 0");
                     select_spec(s).hidden_layers = static_cast<int>(layers);
                   },
                   [=](const ExperimentSpec& s) {
                     return Str(select_spec(s).hidden_layers);
                   }});
  table.push_back({prefix + ".hidden_dim",
                   [=](ExperimentSpec& s, std::string_view v) {
                     select_spec(s).hidden_dim = AsPositiveInt(v);
                   },
                   [=](const ExperimentSpec& s) {
                     return Str(select_spec(s).hidden_dim);
                   }});
  table.push_back({prefix + ".activation",
                   [=](ExperimentSpec& s, std::string_view v) {
                     select_spec(s).activation = ParseActivation(io::Trim(v));
                   },
                   [=](const ExperimentSpec& s) {
                     return std::string(ActivationName(
                         select_spec(s).activation));
                   }});
}

void AddOptimizerKeys(std::vector<KeyHandler>& table, const std::string& prefix,
                      auto select_opt) {
  table.push_back({prefix + ".optimizer",
                   [=](ExperimentSpec& s, std::string_view v) {
                     select_opt(s).kind = ParseOptimizer(io::Trim(v));
                   },
                   [=](const ExperimentSpec& s) {
                     return std::string(OptimizerName(
                         select_opt(s).kind));
                   }});
  table.push_back({prefix + ".lr",
                   [=](ExperimentSpec& s, std::string_view v) {
                     const double lr = AsDouble(v);
                     if (!(lr > 0.0)) throw DataError("must be positive");
                     select_opt(s).learning_rate = lr;
                   },
                   [=](const ExperimentSpec& s) {
                     return Str(select_opt(s).learning_rate);
                   }});
}

const std::vector<KeyHandler>& Handlers() {
  static const std::vector<KeyHandler> table = [] {
    std::vector<KeyHandler> t;
    using S = ExperimentSpec;
    auto add = [&t](std::string key, std::function<void(S&, std::string_view)> set,
                    std::function<std::string(const S&)> get) {
      t.push_back({std::move(key), std::move(set), std::move(get)});
    };

    add("task", [](S& s, std::string_view v) { s.task = ParseTask(io::Trim(v)); },
        [](const S& s) { return std::string(TaskName(s.task)); });
    add("data", [](S& s, std::string_view v) { s.data_path = io::Trim(v); },
        [](const S& s) { return s.data_path; });
    add("out", [](S& s, std::string_view v) { s.out_dir = io::Trim(v); },
        [](const S& s) { return s.out_dir; });
    add("seed", [](S& s, std::string_view v) { s.seeds = {AsSeed(v)}; },
        [](const S& s) { return Str(s.seeds.front()); });
    add("seeds",
        [](S& s, std::string_view v) {
          s.seeds.clear();
          for (const auto& f : io::SplitString(v, ',')) s.seeds.push_back(AsSeed(f));
        },
        [](const S& s) { return Join(s.seeds, [](auto x) { return Str(x); }); });
    add("write_models", [](S& s, std::string_view v) { s.write_models = AsBool(v); },
        [](const S& s) { return Str(s.write_models); });
    add("split",
        [](S& s, std::string_view v) {
          const auto fields = io::SplitString(v, ',');
          if (fields.size() != 3) throw DataError("expected three fractions");
          for (std::size_t i = 0; i < 3; ++i) s.split[i] = AsDouble(fields[i]);
        },
        [](const S& s) {
          return Str(s.split[0]) + "," + Str(s.split[1]) + "," + Str(s.split[2]);
        });

    add("beta",
        [](S& s, std::string_view v) {
          const double beta = AsDouble(v);
          if (!(beta >= 0.0)) throw DataError("must be >= 0");
          s.train.beta = beta;
        },
        [](const S& s) { return Str(s.train.beta); });
    add("betas",
        [](S& s, std::string_view v) {
          s.betas.clear();
          for (const auto& f : io::SplitString(v, ',')) {
            const double beta = AsDouble(f);
            if (!(beta >= 0.0)) throw DataError("must be >= 0");
            s.betas.push_back(beta);
          }
        },
        [](const S& s) { return Join(s.betas, [](double x) { return Str(x); }); });
    add("n_c", [](S& s, std::string_view v) { s.train.critic_iters = AsPositiveInt(v); },
        [](const S& s) { return Str(s.train.critic_iters); });
    add("n_d",
        [](S& s, std::string_view v) { s.train.classifier_iters = AsPositiveInt(v); },
        [](const S& s) { return Str(s.train.classifier_iters); });
    add("batch_size",
        [](S& s, std::string_view v) {
          const int n = AsPositiveInt(v);
          if (n < 2) throw DataError("must be at least 2");
          s.train.batch_size = static_cast<std::size_t>(n);
        },
        [](const S& s) { return Str(s.train.batch_size); });
    add("epochs", [](S& s, std::string_view v) { s.train.max_epochs = AsPositiveInt(v); },
        [](const S& s) { return Str(s.train.max_epochs); });
    add("patience", [](S& s, std::string_view v) { s.train.patience = AsPositiveInt(v); },
        [](const S& s) { return Str(s.train.patience); });
    add("clamp",
        [](S& s, std::string_view v) {
          const double c = AsDouble(v);
          if (!(c > 0.0)) throw DataError("must be positive");
          s.train.clamp = c;
        },
        [](const S& s) { return Str(s.train.clamp); });
    add("clamp_biases", [](S& s, std::string_view v) { s.train.clamp_biases = AsBool(v); },
        [](const S& s) { return Str(s.train.clamp_biases); });
    add("derangement", [](S& s, std::string_view v) { s.train.derangement = AsBool(v); },
        [](const S& s) { return Str(s.train.derangement); });
    add("selection",
        [](S& s, std::string_view v) { s.train.selection = ParseSelectionMetric(io::Trim(v)); },
        [](const S& s) { return std::string(SelectionMetricName(s.train.selection)); });
    add("layer",
        [](S& s, std::string_view v) {
          s.train.classifier_layer = s.train.demonic_layer = ParseLayerSelector(io::Trim(v));
        },
        [](const S& s) { return std::string(LayerSelectorName(s.train.classifier_layer)); });
    add("layers",
        [](S& s, std::string_view v) {
          s.layers.clear();
          for (const auto& f : io::SplitString(v, ',')) {
            s.layers.push_back(ParseLayerSelector(io::Trim(f)));
          }
        },
        [](const S& s) {
          return Join(s.layers, [](LayerSelector l) { return std::string(LayerSelectorName(l)); });
        });

    AddMlpKeys(t, "classifier", [](auto& s) -> auto& { return s.train.classifier; });
    AddOptimizerKeys(t, "classifier",
                     [](auto& s) -> auto& { return s.train.classifier_optimizer; });
    add("classifier.layer",
        [](S& s, std::string_view v) { s.train.classifier_layer = ParseLayerSelector(io::Trim(v)); },
        [](const S& s) { return std::string(LayerSelectorName(s.train.classifier_layer)); });

    AddMlpKeys(t, "critic", [](auto& s) -> auto& { return s.train.critic; });
    AddOptimizerKeys(t, "critic",
                     [](auto& s) -> auto& { return s.train.critic_optimizer; });

    AddMlpKeys(t, "demonic", [](auto& s) -> auto& { return s.demonic.architecture; });
    AddOptimizerKeys(t, "demonic",
                     [](auto& s) -> auto& { return s.demonic.fit.optimizer; });
    add("demonic.layer",
        [](S& s, std::string_view v) { s.train.demonic_layer = ParseLayerSelector(io::Trim(v)); },
        [](const S& s) { return std::string(LayerSelectorName(s.train.demonic_layer)); });
    add("demonic.mode",
        [](S& s, std::string_view v) { s.train.demonic_mode = ParseDemonicMode(io::Trim(v)); },
        [](const S& s) { return std::string(DemonicModeName(s.train.demonic_mode)); });
    add("demonic.epochs",
        [](S& s, std::string_view v) { s.demonic.fit.max_epochs = AsPositiveInt(v); },
        [](const S& s) { return Str(s.demonic.fit.max_epochs); });
    add("demonic.patience",
        [](S& s, std::string_view v) { s.demonic.fit.patience = AsPositiveInt(v); },
        [](const S& s) { return Str(s.demonic.fit.patience); });
    add("demonic.fraction",
        [](S& s, std::string_view v) {
          const double f = AsDouble(v);
          if (!(f > 0.0 && f <= 1.0)) throw DataError("must lie in (0, 1]");
          s.demonic_source.fraction = f;
        },
        [](const S& s) { return Str(s.demonic_source.fraction); });
    add("demonic.path",
        [](S& s, std::string_view v) { s.demonic_source.model_path = io::Trim(v); },
        [](const S& s) { return s.demonic_source.model_path; });
    add("demonic.data",
        [](S& s, std::string_view v) { s.demonic_source.data_path = io::Trim(v); },
        [](const S& s) { return s.demonic_source.data_path; });
    add("demonic.domain",
        [](S& s, std::string_view v) {
          const long d = AsInt(v);
          if (d < 0) throw DataError("must be >= 0");
          s.demonic_source.synthetic_domain = static_cast<int>(d);
        },
        [](const S& s) { return Str(s.demonic_source.synthetic_domain); });

    add("synthetic.classes",
        [](S& s, std::string_view v) { s.synthetic.num_classes = AsPositiveInt(v); },
        [](const S& s) { return Str(s.synthetic.num_classes); });
    add("synthetic.groups",
        [](S& s, std::string_view v) { s.synthetic.num_groups = AsPositiveInt(v); },
        [](const S& s) { return Str(s.synthetic.num_groups); });
    add("synthetic.n_per_cell",
        [](S& s, std::string_view v) { s.synthetic.n_per_cell = AsPositiveInt(v); },
        [](const S& s) { return Str(s.synthetic.n_per_cell); });
    add("synthetic.dim",
        [](S& s, std::string_view v) { s.synthetic.dim = AsPositiveInt(v); },
        [](const S& s) { return Str(s.synthetic.dim); });
    add("synthetic.class_separation",
        [](S& s, std::string_view v) { s.synthetic.class_separation = AsDouble(v); },
        [](const S& s) { return Str(s.synthetic.class_separation); });
    add("synthetic.bias_strength",
        [](S& s, std::string_view v) { s.synthetic.bias_strength = AsDouble(v); },
        [](const S& s) { return Str(s.synthetic.bias_strength); });
    add("synthetic.noise_std",
        [](S& s, std::string_view v) { s.synthetic.noise_std = AsDouble(v); },
        [](const S& s) { return Str(s.synthetic.noise_std); });
    add("synthetic.correlation",
        [](S& s, std::string_view v) { s.synthetic.correlation = AsDouble(v); },
        [](const S& s) { return Str(s.synthetic.correlation); });
    add("synthetic.direction_seed",
        [](S& s, std::string_view v) { s.synthetic.direction_seed = AsSeed(v); },
        [](const S& s) { return Str(s.synthetic.direction_seed); });

    add("probe.hidden_dim",
        [](S& s, std::string_view v) { s.probe.hidden_dim = AsPositiveInt(v); },
        [](const S& s) { return Str(s.probe.hidden_dim); });
    add("probe.lr",
        [](S& s, std::string_view v) {
          const double lr = AsDouble(v);
          if (!(lr > 0.0)) throw DataError("must be positive");
          s.probe.learning_rate = lr;
        },
        [](const S& s) { return Str(s.probe.learning_rate); });
    add("probe.epochs",
        [](S& s, std::string_view v) { s.probe.max_epochs = AsPositiveInt(v); },
        [](const S& s) { return Str(s.probe.max_epochs); });
    add("probe.patience",
        [](S& s, std::string_view v) { s.probe.patience = AsPositiveInt(v); },
        [](const S& s) { return Str(s.probe.patience); });
    add("probe.train_fraction",
        [](S& s, std::string_view v) { s.probe.train_fraction = AsDouble(v); },
        [](const S& s) { return Str(s.probe.train_fraction); });
    return t;
  }();
  return table;
}

}  // namespace

std::string_view TaskName(Task task) {
  switch (task) {
    case Task::kFairClassification:
      return "fair_classification";
    case Task::kDemonicTransfer:
      return "demonic_transfer";
    case Task::kLayerAblation:
      return "layer_ablation";
    case Task::kHardLabelAblation:
      return "hard_label_ablation";
    case Task::kBetaSweep:
      return "beta_sweep";
  }
  return "unknown";
}

Task ParseTask(std::string_view name) {
  for (Task t : {Task::kFairClassification, Task::kDemonicTransfer,
                 Task::kLayerAblation, Task::kHardLabelAblation, Task::kBetaSweep}) {
    if (TaskName(t) == name) return t;
  }
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

void ExperimentSpec::Validate() const {
  train.Validate();
  synthetic.Validate();
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  double total = 0.0;
  for (double f : split) {
    if (!(f > 0.0)) throw ConfigError("split fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  if (task == Task::kBetaSweep && betas.empty()) {
    throw ConfigError("beta_sweep needs at least one beta");
  }
  if (task == Task::kLayerAblation && layers.empty()) {
    throw ConfigError("layer_ablation needs at least one layer");
  }
  if (!(probe.train_fraction > 0.0 && probe.train_fraction < 1.0)) {
    throw ConfigError("probe.train_fraction must lie in (0, 1)");
  }
  for (const std::string* path :
       {&data_path, &demonic_source.model_path, &demonic_source.data_path}) {
    if (!path->empty() && !std::filesystem::exists(*path)) {
      throw ConfigError("path does not exist: " + *path);
    }
  }
}

ConfigEntries ParseConfigText(std::string_view text) {
  ConfigEntries entries;
  int line_no = 0;
  for (const auto& raw : io::SplitString(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = io::Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key(io::Trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    entries.emplace_back(key, std::string(io::Trim(line.substr(eq + 1))));
  }
  return entries;
}

ConfigEntries ReadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfigText(text.str());
}

void ApplyConfig(const ConfigEntries& entries, ExperimentSpec& spec) {
  const auto& handlers = Handlers();
  for (const auto& [key, value] : entries) {
    const auto it = std::find_if(handlers.begin(), handlers.end(),
                                 [&](const KeyHandler& h) { return h.key == key; });
    if (it == handlers.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->set(spec, value);
    } catch (const Error& e) {
      throw ConfigError("invalid value for '" + key + "': '" + value + "' (" +
                        e.what() + ")");
    }
  }
}

ExperimentSpec ParseConfig(const std::string& path, const ConfigEntries& overrides) {
  ConfigEntries entries;
  if (!path.empty()) entries = ReadConfigFile(path);
  entries.insert(entries.end(), overrides.begin(), overrides.end());
  const bool has_task = std::any_of(entries.begin(), entries.end(),
                                    [](const auto& e) { return e.first == "task"; });
  if (!has_task) throw ConfigError("missing required key 'task'");
  ExperimentSpec spec;
  ApplyConfig(entries, spec);
  spec.Validate();
  return spec;
}

ConfigEntries DescribeConfig(const ExperimentSpec& spec) {
  ConfigEntries out;
  for (const auto& handler : Handlers()) {
    if (handler.key == "seed") continue;
    out.emplace_back(handler.key, handler.get(spec));
  }
  return out;
}

std::string FormatConfig(const ExperimentSpec& spec) {
  std::string out;
  for (const auto& [key, value] : DescribeConfig(spec)) {
    out += key + "=" + value + "\n";
  }
  return out;
}

}  // namespace wfc
