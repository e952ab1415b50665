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

// End-to-end workflow behind the command-line subcommands: data preparation,
// training, evaluation reports, prediction and grid export, tuning.

#ifndef PLUMESTACK_PIPELINE_HPP
#define PLUMESTACK_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plumestack/artifact.hpp"
#include "plumestack/config.hpp"
#include "plumestack/metrics.hpp"
#include "plumestack/presets.hpp"

namespace plumestack {

// ---------------------------------------------------------------------------
// Preparation
// ---------------------------------------------------------------------------

// The scenario described by the config (generated with the "generate"
// substream of the master seed) or the configured CSV.
Dataset load_or_generate(const PipelineConfig& cfg);

struct HoldoutSplit {
  Dataset kept;
  Dataset held_out;  // every row whose time is a held-out minute
};

HoldoutSplit split_holdout(const Dataset& ds, const std::vector<double>& minutes);

struct PreparedTask {
  Task task = Task::classification;
  std::vector<std::string> features;
  std::string target;
  Index source_rows = 0;   // rows entering this branch
  Index positives = 0;     // rows with tracer > 0
  Dataset train;           // model space (standardized for regression)
  Dataset test;            // physical units, raw features + target
  std::optional<Standardizer> standardizer;
};

struct PreparedData {
  std::vector<std::string> features;  // after the constant-column drop
  std::vector<std::string> dropped;
  PreparedTask classification;
  PreparedTask regression;
};

// Shared pass: drop metadata and constant feature columns. Then the
// classification branch labels and undersamples; the regression branch keeps
// tracer > 0 rows and standardizes features and target with train
// statistics. Both split train_fraction : rest (classification stratified).
PreparedData prepare(const Dataset& scenario, double train_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training and reports
// ---------------------------------------------------------------------------

struct ResolvedStack {
  std::string preset;
  std::vector<StackLayerConfig> layers;
  StackOptions options;
};

ResolvedStack resolve_stack(const TaskConfig& cfg, Task task, std::uint64_t seed, int k_folds);

ModelArtifact train_task(const PreparedTask& data, const ResolvedStack& stack,
                         std::uint64_t master_seed);

struct ReportRow {
  std::string model;
  ClassificationReport classification;
  RegressionReport regression;
  std::optional<double> validation;
};

struct EvaluationReport {
  Task task = Task::classification;
  std::vector<ReportRow> rows;  // sorted by headline metric, best first

  double headline(const ReportRow& row) const;
  const ReportRow& row(const std::string& model) const;
  std::string csv() const;
  std::string markdown() const;
};

// Per-member and per-layer ensemble rows on a labelled dataset in physical
// units. Classification reads "leakage" or derives it from the tracer;
// regression scores in standardized target units.
EvaluationReport evaluate_artifact(const ModelArtifact& artifact, const Dataset& test);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

// scenario.csv and scenario_stats.json in cfg.out.
void cmd_generate(const PipelineConfig& cfg);

// Artifacts, test splits, holdout rows, reports and train_log.json in cfg.out.
void cmd_train(const PipelineConfig& cfg);

// <stem>_report.csv / .md in out_dir.
EvaluationReport cmd_evaluate(const std::filesystem::path& artifact_path,
                              const std::filesystem::path& data_path,
                              const std::filesystem::path& out_dir);

struct PredictOptions {
  bool grid = false;
  // Classification artifact gating regression output to detected cells.
  std::optional<std::filesystem::path> detector;
};

// predictions.csv; with grid, one long-format file per timestep.
void cmd_predict(const std::filesystem::path& artifact_path,
                 const std::filesystem::path& data_path, const std::filesystem::path& out_dir,
                 const PredictOptions& options);

// tune_history.csv and tune_result.json in cfg.out.
SearchResult cmd_tune(const PipelineConfig& cfg);

// Re-evaluates the artifacts of a training run and writes report.md.
void cmd_report(const std::filesystem::path& run_dir);

}  // namespace plumestack

#endif  // PLUMESTACK_PIPELINE_HPP
