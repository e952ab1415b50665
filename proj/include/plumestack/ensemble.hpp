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

// k-fold bagging with out-of-fold (OOF) capture, multi-layer stacking and
// greedy weighted-ensemble selection.

#ifndef PLUMESTACK_ENSEMBLE_HPP
#define PLUMESTACK_ENSEMBLE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plumestack/learners.hpp"
#include "plumestack/tabular.hpp"

namespace plumestack {

struct FoldAssignment {
  Index n_rows = 0;
  int k = 0;
  std::vector<int> fold_of_row;
  std::uint64_t seed = 0;
  bool stratified = false;

  std::vector<Index> rows_in(int fold) const;
  std::vector<Index> rows_outside(int fold) const;
  std::vector<Index> fold_sizes() const;
};

// Deterministic given seed. Fold sizes differ by at most one; with labels,
// every class is spread over the folds as evenly as possible.
FoldAssignment kfold_assign(Index n_rows, int k, std::uint64_t seed,
                            const std::optional<Vector>& stratify_labels = {});

struct BaggedModel {
  ModelSpec spec;
  std::vector<FittedModel> fold_models;
  Vector oof;
  // Training rows of each fold model (not persisted).
  std::vector<std::vector<Index>> fold_train_rows;

  // Mean over fold models.
  Vector predict(const Matrix& X) const;
};

BaggedModel fit_bagged(const ModelSpec& spec, const Matrix& X, const Vector& y,
                       const FoldAssignment& folds);

enum class StackMode { training_oof, inference };

// Raw features followed by one column per lower-layer member, in declaration
// order.
Matrix build_stack_features(const Matrix& raw, const std::vector<BaggedModel>& lower,
                            StackMode mode);

enum class MetricKind { accuracy, r2, mse, log_loss, auc_roc };

struct SelectionMetric {
  MetricKind kind = MetricKind::accuracy;

  std::string name() const;
  bool higher_is_better() const;
  double evaluate(const Vector& y, const Vector& pred) const;
  // Strict improvement of `candidate` over `incumbent`.
  bool better(double candidate, double incumbent) const;
};

SelectionMetric parse_metric(const std::string& name);
SelectionMetric default_metric(Task task);

struct WeightedEnsemble {
  std::vector<double> weights;  // one per candidate, >= 0, sum 1
  std::vector<int> counts;      // selection multiplicities
  int iterations = 0;           // greedy steps run
  int ensemble_size = 0;        // length of the kept selection prefix
  std::string metric;
  double score = 0.0;           // metric of the final weighted average
  std::vector<double> trajectory;
  std::vector<int> selection;

  Vector combine(const std::vector<Vector>& member_predictions) const;
};

// Forward selection with replacement over OOF columns (n rows x m
// candidates). Every step adds the candidate that scores best in the running
// average, ties to the lowest index. The result keeps the best-scoring prefix
// of the selection (earliest on ties), so its score never falls below the
// best single candidate.
WeightedEnsemble greedy_weighted_ensemble(const Matrix& candidates, const Vector& y,
                                          const SelectionMetric& metric, int iterations);

struct StackLayerConfig {
  std::vector<ModelSpec> members;
};

struct StackOptions {
  int k_folds = 5;
  std::uint64_t seed = 0;  // fold assignment
  int ensemble_iterations = 27;
  std::optional<SelectionMetric> metric;  // default per task
  // Classification defaults to stratified folds.
  std::optional<bool> stratify;
  // Called with a member's display label before it is fitted.
  std::function<void(const std::string&)> progress;
};

class StackedEnsemble {
 public:
  Task task = Task::classification;
  std::vector<std::string> feature_names;
  std::vector<std::vector<BaggedModel>> layers;
  // layer_ensembles[l] combines layer l's members; the last one is the
  // model's output.
  std::vector<WeightedEnsemble> layer_ensembles;
  FoldAssignment folds;

  // Inference-mode outputs of every member, layer by layer.
  std::vector<std::vector<Vector>> member_predictions(const Matrix& X) const;
  Vector predict(const Matrix& X) const;
  // Display name such as "LGBM_BAG_L2" or "WeightedEnsemble_L3".
  static std::string member_label(const std::string& name, std::size_t layer);
  static std::string ensemble_label(std::size_t layer);
};

StackedEnsemble fit_stack(const Matrix& X, const Vector& y,
                          std::vector<std::string> feature_names,
                          const std::vector<StackLayerConfig>& layers, Task task,
                          const StackOptions& options);

// Target = ds.target_name(); every other column is a feature.
StackedEnsemble fit_stack(const Dataset& train, const std::vector<StackLayerConfig>& layers,
                          Task task, const StackOptions& options);

// Checks the raw feature names, then replays the layers.
Vector predict_stack(const StackedEnsemble& model, const Dataset& ds);

}  // namespace plumestack

#endif  // PLUMESTACK_ENSEMBLE_HPP
