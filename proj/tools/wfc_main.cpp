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

// Command-line front end: data generation, demonic pretraining, experiment
// runs, evaluation and report comparison.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selftest.hpp"
#include "wfc/config.hpp"
#include "wfc/datagen.hpp"
#include "wfc/error.hpp"
#include "wfc/fairmetrics.hpp"
#include "wfc/harness.hpp"
#include "wfc/io_util.hpp"
#include "wfc/neural.hpp"
#include "wfc/supervised.hpp"
#include "wfc/training.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

// Flags shared by the experiment subcommands. Each one maps to a config key
// and overrides the config file.
struct CommonFlags {
  std::string config;
  std::string task;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::optional<double> beta;
  std::string out;
  std::string demonic;
  std::string data;
  std::string layer;
  std::string demonic_mode;
  std::vector<std::string> set;

  void Attach(CLI::App* app) {
    app->add_option("--config", config, "key=value config file");
    app->add_option("--task", task,
                    "fair_classification, demonic_transfer, layer_ablation, "
                    "hard_label_ablation or beta_sweep");
    app->add_option("--seed", seed, "single run seed");
    app->add_option("--seeds", seeds, "comma-separated run seeds");
    app->add_option("--beta", beta, "regularization weight");
    app->add_option("--out", out, "output directory");
    app->add_option("--demonic", demonic, "pretrained demonic checkpoint");
    app->add_option("--data", data, "dataset file (text or binary)");
    app->add_option("--layer", layer, "first_hidden, last_hidden or logits");
    app->add_option("--demonic-mode", demonic_mode, "latent or hard_label");
    app->add_option("--set", set, "extra key=value override (repeatable)");
  }

  wfc::ConfigEntries Overrides() const {
    wfc::ConfigEntries entries;
    auto put = [&entries](const char* key, const std::string& value) {
      if (!value.empty()) entries.emplace_back(key, value);
    };
    put("task", task);
    if (seed) entries.emplace_back("seed", std::to_string(*seed));
    put("seeds", seeds);
    if (beta) entries.emplace_back("beta", wfc::io::FormatDouble(*beta));
    put("out", out);
    put("demonic.path", demonic);
    put("data", data);
    put("layer", layer);
    put("demonic.mode", demonic_mode);
    for (const auto& line : set) {
      const auto parsed = wfc::ParseConfigText(line);
      if (parsed.size() != 1) {
        throw wfc::ConfigError("--set expects one key=value, got '" + line + "'");
      }
      entries.push_back(parsed.front());
    }
    return entries;
  }
};

// Applies a config file and overrides without requiring a task; used by
// the subcommands that only read part of the spec.
wfc::ExperimentSpec LooseSpec(const CommonFlags& flags) {
  wfc::ConfigEntries entries;
  if (!flags.config.empty()) entries = wfc::ReadConfigFile(flags.config);
  const auto overrides = flags.Overrides();
  entries.insert(entries.end(), overrides.begin(), overrides.end());
  wfc::ExperimentSpec spec;
  wfc::ApplyConfig(entries, spec);
  return spec;
}

int FinishRun(const wfc::RunReport& report) {
  std::cout << wfc::ReportText(report);
  int failures = 0;
  for (const auto& arm : report.arms) {
    for (const auto& seed : arm.seeds) {
      if (!seed.ok) {
        std::cerr << "arm " << arm.name << " seed " << seed.seed
                  << " failed: " << seed.error << '\n';
        ++failures;
      }
    }
  }
  return failures == 0 ? kExitOk : kExitRuntime;
}

int GenData(const CommonFlags& flags, const std::string& path, int domain,
            const std::string& format) {
  wfc::ExperimentSpec spec = LooseSpec(flags);
  wfc::SyntheticSpec synthetic = spec.synthetic;
  synthetic.seed = spec.seeds.front();
  synthetic.domain = domain;
  wfc::DatasetFormat kind;
  if (format == "text") {
    kind = wfc::DatasetFormat::kText;
  } else if (format == "binary") {
    kind = wfc::DatasetFormat::kBinary;
  } else {
    throw wfc::ConfigError("invalid value for 'format': '" + format + "'");
  }
  const wfc::EmbeddingDataset dataset = wfc::GenerateSynthetic(synthetic);
  wfc::SaveDataset(dataset, path, kind);
  std::cout << "wrote " << dataset.size() << " rows (d=" << dataset.dim()
            << ", domain " << domain << ") to " << path << '\n';
  return kExitOk;
}

int TrainDemonic(const CommonFlags& flags, const std::string& path) {
  wfc::ExperimentSpec spec = LooseSpec(flags);
  wfc::EmbeddingDataset dataset;
  if (!spec.data_path.empty()) {
    dataset = wfc::LoadDataset(spec.data_path);
  } else {
    wfc::SyntheticSpec synthetic = spec.synthetic;
    synthetic.seed = spec.seeds.front();
    synthetic.domain = spec.demonic_source.synthetic_domain;
    dataset = wfc::GenerateSynthetic(synthetic);
  }
  wfc::DemonicConfig config = spec.demonic;
  config.seed = spec.seeds.front();
  const wfc::DemonicModel model = wfc::PretrainDemonic(dataset, config);
  wfc::SaveModel(model.params, path);
  std::cout << "heldout_s_accuracy=" << model.heldout_accuracy << '\n'
            << "wrote " << path << '\n';
  return kExitOk;
}

int Eval(const CommonFlags& flags, const std::string& model_path) {
  wfc::ExperimentSpec spec = LooseSpec(flags);
  if (spec.data_path.empty()) throw wfc::ConfigError("missing required key 'data'");
  const wfc::MlpParameters model = wfc::LoadModel(model_path);
  const wfc::EmbeddingDataset data = wfc::LoadDataset(spec.data_path);
  const wfc::FairnessReport report =
      wfc::EvaluateClassifier(model, data, spec.probe, spec.seeds.front());
  const std::string text = report.ToKeyValue();
  std::cout << text;
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    std::ofstream(std::filesystem::path(spec.out_dir) / "report.txt") << text;
  }
  return kExitOk;
}

int Compare(const std::vector<std::string>& paths) {
  std::vector<wfc::ArmReport> arms;
  for (const auto& path : paths) {
    for (auto& arm : wfc::ReadReportCsv(path)) {
      if (paths.size() > 1) {
        arm.name = std::filesystem::path(path).parent_path().filename().string() +
                   "/" + arm.name;
      }
      arms.push_back(std::move(arm));
    }
  }
  std::cout << wfc::CompareReports(arms).Render();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein fair classification on fixed embeddings"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string path;
  std::string format = "text";
  std::string model_path;
  int domain = 0;
  std::vector<std::string> reports;
  std::uint64_t selftest_seed = 1;

  CLI::App* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  flags.Attach(gen);
  gen->add_option("--file", path, "output dataset path")->required();
  gen->add_option("--domain", domain, "synthetic domain index");
  gen->add_option("--format", format, "text or binary");

  CLI::App* demonic = app.add_subcommand("train-demonic", "pretrain a demonic model");
  flags.Attach(demonic);
  demonic->add_option("--file", path, "output checkpoint path")->required();

  CLI::App* train = app.add_subcommand("train", "run an experiment task");
  flags.Attach(train);

  CLI::App* sweep = app.add_subcommand("sweep", "run the beta sweep");
  flags.Attach(sweep);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a classifier checkpoint");
  flags.Attach(eval);
  eval->add_option("--model", model_path, "classifier checkpoint")->required();

  CLI::App* compare = app.add_subcommand("compare", "compare report.csv files");
  compare->add_option("reports", reports, "report.csv paths")->required();

  CLI::App* selftest = app.add_subcommand("selftest", "run oracle invariant checks");
  selftest->add_option("--seed", selftest_seed, "check seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return GenData(flags, path, domain, format);
    if (*demonic) return TrainDemonic(flags, path);
    if (*train) {
      return FinishRun(wfc::RunExperiment(wfc::ParseConfig(flags.config, flags.Overrides())));
    }
    if (*sweep) {
      auto overrides = flags.Overrides();
      overrides.insert(overrides.begin(), {"task", "beta_sweep"});
      return FinishRun(wfc::RunExperiment(wfc::ParseConfig(flags.config, overrides)));
    }
    if (*eval) return Eval(flags, model_path);
    if (*compare) return Compare(reports);
    if (*selftest) {
      return wfc::tools::RunSelfTest(std::cout, selftest_seed) ? kExitOk : kExitRuntime;
    }
  } catch (const wfc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
