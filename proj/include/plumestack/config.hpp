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

// Pipeline configuration read from a YAML document.
//
//   seed: 0
//   out: runs/default
//   task: both                 # classification | regression | both
//   train_fraction: 0.8
//   k_folds: 5
//   holdout_minutes: [1020, 1032, 1044]
//   scenario: {grid_size: 61, n_timesteps: 61, wind: {mean_speed_ms: 4}}
//   input: data.csv            # instead of scenario
//   classification: {preset: paper-classification, ensemble_size: 27}
//   regression:
//     preset: paper-regression
//     depth: 2
//     layers:                  # replaces the preset's layers
//       - members:
//           - {name: LGBM, family: gbm, hyperparameters: {num_boost_round: 200}}
//   search:
//     task: classification
//     model: {name: LGBM, family: gbm}
//     max_budget: 27
//     eta: 3
//     total_budget: 300
//     params:
//       - {name: learning_rate, type: real, low: 0.01, high: 0.3, log: true}
//       - {name: num_leaves, type: integer, low: 8, high: 128}

#ifndef PLUMESTACK_CONFIG_HPP
#define PLUMESTACK_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plumestack/ensemble.hpp"
#include "plumestack/plume.hpp"
#include "plumestack/tuning.hpp"

namespace plumestack {

struct TaskConfig {
  std::string preset;
  std::optional<int> depth;
  std::optional<int> ensemble_size;
  std::optional<std::string> metric;
  std::optional<std::vector<StackLayerConfig>> layers;
};

struct TuneConfig {
  Task task = Task::classification;
  ModelSpec model;
  SearchSpace space;
  SearchOptions options;
  double total_budget = 0.0;  // 0: one full Hyperband cycle
  double validation_fraction = 0.2;
};

struct PipelineConfig {
  std::optional<ScenarioConfig> scenario;
  std::optional<std::filesystem::path> input_csv;
  std::string task = "both";
  TaskConfig classification{"paper-classification", {}, {}, {}, {}};
  TaskConfig regression{"paper-regression", {}, {}, {}, {}};
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  int k_folds = 5;
  std::vector<double> holdout_minutes{1020.0, 1032.0, 1044.0};
  std::filesystem::path out = "out";
  std::optional<TuneConfig> search;

  bool wants(Task t) const;
  // Throws UsageError when both data sources are set or a value is invalid.
  void validate() const;
};

PipelineConfig parse_pipeline_config(const std::string& yaml_text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace plumestack

#endif  // PLUMESTACK_CONFIG_HPP
