/*
 * Copyright 2026 The plumestack Authors.
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

// plumestack: generate | train | evaluate | predict | tune | report
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "plumestack/pipeline.hpp"

namespace {

using plumestack::PipelineConfig;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> preset;
  std::optional<int> layers;
  std::string input;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool stack_flags) {
  cmd->add_option("--config", f.config, "YAML pipeline configuration");
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
  if (stack_flags) {
    cmd->add_option("--preset", f.preset, "stack preset; selects its task")
        ->check(CLI::IsMember(plumestack::preset_names()));
    cmd->add_option("--layers", f.layers, "number of bagged layers (regression: 1-4)");
    cmd->add_option("--input", f.input, "train from this CSV instead of a generated scenario");
  }
}

PipelineConfig resolve(const CommonFlags& f) {
  PipelineConfig cfg = f.config.empty() ? PipelineConfig{} : plumestack::load_pipeline_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.input.empty()) {
    cfg.input_csv = f.input;
    cfg.scenario.reset();
  }
  if (f.preset) {
    const auto preset = plumestack::make_preset(*f.preset);
    auto& task_cfg = preset.task == plumestack::Task::classification ? cfg.classification
                                                                     : cfg.regression;
    task_cfg.preset = *f.preset;
    task_cfg.layers.reset();
    cfg.task = std::string(plumestack::to_string(preset.task));
  }
  if (f.layers) {
    cfg.regression.depth = *f.layers;
    if (cfg.task == "classification") cfg.classification.depth = *f.layers;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stacked tree ensembles for plume detection and concentration regression"};
  app.require_subcommand(1);

  CommonFlags gen_flags, train_flags, tune_flags;
  auto* generate = app.add_subcommand("generate", "write a synthetic plume scenario CSV");
  add_common(generate, gen_flags, false);

  auto* train = app.add_subcommand("train", "fit the configured stacks and write artifacts");
  add_common(train, train_flags, true);

  std::string artifact, data, out_dir = ".", detector;
  auto* evaluate = app.add_subcommand("evaluate", "score an artifact on a labelled CSV");
  evaluate->add_option("--artifact", artifact, "model artifact")->required();
  evaluate->add_option("--data", data, "labelled CSV")->required();
  evaluate->add_option("--out", out_dir, "report directory");

  bool grid = false;
  auto* predict = app.add_subcommand("predict", "predict a CSV, optionally as per-timestep grids");
  predict->add_option("--artifact", artifact, "model artifact")->required();
  predict->add_option("--data", data, "input CSV")->required();
  predict->add_option("--out", out_dir, "output directory");
  predict->add_flag("--grid", grid, "also write one grid file per timestep");
  predict->add_option("--detector", detector, "classification artifact gating regression output");

  auto* tune = app.add_subcommand("tune", "hyperparameter search from the config's search section");
  add_common(tune, tune_flags, false);

  std::string run_dir = ".";
  auto* report = app.add_subcommand("report", "re-evaluate a training run and write report.md");
  report->add_option("--out", run_dir, "training output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) {
      plumestack::cmd_generate(resolve(gen_flags));
    } else if (train->parsed()) {
      plumestack::cmd_train(resolve(train_flags));
    } else if (evaluate->parsed()) {
      std::cout << plumestack::cmd_evaluate(artifact, data, out_dir).markdown();
    } else if (predict->parsed()) {
      plumestack::PredictOptions options;
      options.grid = grid;
      if (!detector.empty()) options.detector = detector;
      plumestack::cmd_predict(artifact, data, out_dir, options);
    } else if (tune->parsed()) {
      plumestack::cmd_tune(resolve(tune_flags));
    } else if (report->parsed()) {
      plumestack::cmd_report(run_dir);
    }
  } catch (const plumestack::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const plumestack::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
