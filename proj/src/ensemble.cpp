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

#include "plumestack/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "plumestack/metrics.hpp"

namespace plumestack {

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

std::vector<Index> FoldAssignment::rows_in(int fold) const {
  std::vector<Index> rows;
  for (Index r = 0; r < n_rows; ++r) {
    if (fold_of_row[static_cast<std::size_t>(r)] == fold) rows.push_back(r);
  }
  return rows;
}

std::vector<Index> FoldAssignment::rows_outside(int fold) const {
  std::vector<Index> rows;
  for (Index r = 0; r < n_rows; ++r) {
    if (fold_of_row[static_cast<std::size_t>(r)] != fold) rows.push_back(r);
  }
  return rows;
}

std::vector<Index> FoldAssignment::fold_sizes() const {
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (const int f : fold_of_row) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldAssignment kfold_assign(Index n_rows, int k, std::uint64_t seed,
                            const std::optional<Vector>& stratify_labels) {
  if (k < 2) throw UsageError("k-fold needs k >= 2, got " + std::to_string(k));
  if (k > n_rows) {
    throw DataError("k-fold with k = " + std::to_string(k) + " over only " +
                    std::to_string(n_rows) + " rows");
  }
  FoldAssignment folds;
  folds.n_rows = n_rows;
  folds.k = k;
  folds.seed = seed;
  folds.fold_of_row.assign(static_cast<std::size_t>(n_rows), 0);
  Rng rng(seed, "fold");

  std::vector<Index> order;
  if (!stratify_labels) {
    order = rng.permutation(n_rows);
  } else {
    if (stratify_labels->size() != n_rows) throw DataError("stratify labels: length mismatch");
    folds.stratified = true;
    std::map<double, std::vector<Index>> classes;
    for (Index r = 0; r < n_rows; ++r) classes[(*stratify_labels)[r]].push_back(r);
    // Each class occupies a contiguous run of the round-robin sequence.
    for (auto& [label, rows] : classes) {
      rng.shuffle(rows);
      order.insert(order.end(), rows.begin(), rows.end());
    }
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    folds.fold_of_row[static_cast<std::size_t>(order[i])] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Bagging
// ---------------------------------------------------------------------------

Vector BaggedModel::predict(const Matrix& X) const {
  Vector acc = Vector::Zero(X.rows());
  for (const auto& m : fold_models) acc += m.predict(X);
  return acc / static_cast<double>(fold_models.size());
}

namespace {

Matrix take_rows(const Matrix& X, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), X.cols());
  for (Index c = 0; c < X.cols(); ++c) {
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i), c) = X(rows[i], c);
  }
  return out;
}

Vector take(const Vector& y, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Index>(i)] = y[rows[i]];
  return out;
}

}  // namespace

BaggedModel fit_bagged(const ModelSpec& spec, const Matrix& X, const Vector& y,
                       const FoldAssignment& folds) {
  if (folds.n_rows != X.rows() || y.size() != X.rows()) {
    throw DataError("fold assignment covers " + std::to_string(folds.n_rows) +
                    " rows, data has " + std::to_string(X.rows()));
  }
  BaggedModel bag;
  bag.spec = spec;
  bag.oof = Vector::Zero(X.rows());
  for (int fold = 0; fold < folds.k; ++fold) {
    const auto train = folds.rows_outside(fold);
    const auto held = folds.rows_in(fold);
    const Vector y_train = take(y, train);
    if (spec.task == Task::classification) {
      const double mean = y_train.mean();
      if (mean <= 0.0 || mean >= 1.0) {
        throw DataError("'" + spec.name + "': training fold " + std::to_string(fold) +
                        " holds a single class");
      }
    }
    ModelSpec fold_spec = spec;
    fold_spec.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(fold));
    auto model = fit(take_rows(X, train), y_train, fold_spec);
    const Vector held_pred = model.predict(take_rows(X, held));
    for (std::size_t i = 0; i < held.size(); ++i) bag.oof[held[i]] = held_pred[static_cast<Index>(i)];
    bag.fold_models.push_back(std::move(model));
    bag.fold_train_rows.push_back(train);
  }
  return bag;
}

Matrix build_stack_features(const Matrix& raw, const std::vector<BaggedModel>& lower,
                            StackMode mode) {
  Matrix out(raw.rows(), raw.cols() + static_cast<Index>(lower.size()));
  out.leftCols(raw.cols()) = raw;
  for (std::size_t m = 0; m < lower.size(); ++m) {
    const Index c = raw.cols() + static_cast<Index>(m);
    if (mode == StackMode::training_oof) {
      if (lower[m].oof.size() != raw.rows()) {
        throw DataError("member '" + lower[m].spec.name + "' has " +
                        std::to_string(lower[m].oof.size()) + " OOF rows, expected " +
                        std::to_string(raw.rows()));
      }
      out.col(c) = lower[m].oof;
    } else {
      out.col(c) = lower[m].predict(raw);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selection metrics
// ---------------------------------------------------------------------------

std::string SelectionMetric::name() const {
  switch (kind) {
    case MetricKind::accuracy: return "accuracy";
    case MetricKind::r2: return "r2";
    case MetricKind::mse: return "mse";
    case MetricKind::log_loss: return "log_loss";
    case MetricKind::auc_roc: return "auc_roc";
  }
  return "?";
}

bool SelectionMetric::higher_is_better() const {
  return kind != MetricKind::mse && kind != MetricKind::log_loss;
}

bool SelectionMetric::better(double candidate, double incumbent) const {
  return higher_is_better() ? candidate > incumbent : candidate < incumbent;
}

double SelectionMetric::evaluate(const Vector& y, const Vector& pred) const {
  switch (kind) {
    case MetricKind::accuracy:
      return accuracy_of_scores(y, pred);
    case MetricKind::r2:
      return r2_score(y, pred);
    case MetricKind::mse:
      return (y - pred).squaredNorm() / static_cast<double>(y.size());
    case MetricKind::log_loss: {
      double total = 0.0;
      for (Index i = 0; i < y.size(); ++i) {
        const double p = std::clamp(pred[i], 1e-7, 1.0 - 1e-7);
        total -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
      }
      return total / static_cast<double>(y.size());
    }
    case MetricKind::auc_roc:
      return auc_roc(y, pred);
  }
  return 0.0;
}

SelectionMetric parse_metric(const std::string& name) {
  for (const auto kind : {MetricKind::accuracy, MetricKind::r2, MetricKind::mse,
                          MetricKind::log_loss, MetricKind::auc_roc}) {
    if (SelectionMetric{kind}.name() == name) return SelectionMetric{kind};
  }
  throw UsageError("unknown metric '" + name + "'");
}

SelectionMetric default_metric(Task task) {
  return SelectionMetric{task == Task::classification ? MetricKind::accuracy : MetricKind::r2};
}

// ---------------------------------------------------------------------------
// Greedy weighted ensemble
// ---------------------------------------------------------------------------

Vector WeightedEnsemble::combine(const std::vector<Vector>& member_predictions) const {
  if (member_predictions.size() != weights.size()) {
    throw DataError("weighted ensemble expects " + std::to_string(weights.size()) +
                    " members, got " + std::to_string(member_predictions.size()));
  }
  Vector out = Vector::Zero(member_predictions.empty() ? 0 : member_predictions[0].size());
  for (std::size_t m = 0; m < weights.size(); ++m) {
    if (weights[m] > 0.0) out += weights[m] * member_predictions[m];
  }
  return out;
}

// Each step adds the candidate whose inclusion gives the best metric of the
// uniform average over the selection (ties: lowest index). When no candidate
// strictly improves on the current selection, the best single candidate is
// re-added instead. The kept selection is the prefix with the best recorded
// metric (earliest on ties), so the result never scores below the best single
// candidate.
WeightedEnsemble greedy_weighted_ensemble(const Matrix& candidates, const Vector& y,
                                          const SelectionMetric& metric, int iterations) {
  if (iterations < 1) throw UsageError("ensemble iterations must be >= 1");
  const Index m = candidates.cols();
  if (m < 1) throw DataError("greedy ensemble needs at least one candidate");
  if (candidates.rows() != y.size()) throw DataError("greedy ensemble: row mismatch");

  auto column = [&](Index c) -> Vector { return candidates.col(c); };
  double best_single_score = metric.evaluate(y, column(0));
  for (Index c = 1; c < m; ++c) {
    const double s = metric.evaluate(y, column(c));
    if (metric.better(s, best_single_score)) best_single_score = s;
  }

  WeightedEnsemble ens;
  ens.metric = metric.name();
  ens.iterations = iterations;
  Vector sum = Vector::Zero(y.size());
  double current = 0.0;
  for (int step = 0; step < iterations; ++step) {
    const double size = static_cast<double>(step + 1);
    Index pick = 0;
    double pick_score = 0.0;
    for (Index c = 0; c < m; ++c) {
      const double s = metric.evaluate(y, (sum + candidates.col(c)) / size);
      if (c == 0 || metric.better(s, pick_score)) {
        pick = c;
        pick_score = s;
      }
    }
    sum += candidates.col(pick);
    current = metric.evaluate(y, sum / size);
    ens.selection.push_back(static_cast<int>(pick));
    ens.trajectory.push_back(current);
  }

  std::size_t keep = 1;
  for (std::size_t i = 1; i < ens.trajectory.size(); ++i) {
    if (metric.better(ens.trajectory[i], ens.trajectory[keep - 1])) keep = i + 1;
  }
  auto finalize = [&](std::size_t prefix) {
    ens.counts.assign(static_cast<std::size_t>(m), 0);
    for (std::size_t i = 0; i < prefix; ++i) ++ens.counts[static_cast<std::size_t>(ens.selection[i])];
    ens.ensemble_size = static_cast<int>(prefix);
    ens.weights.assign(static_cast<std::size_t>(m), 0.0);
    for (Index c = 0; c < m; ++c) {
      ens.weights[static_cast<std::size_t>(c)] =
          static_cast<double>(ens.counts[static_cast<std::size_t>(c)]) / static_cast<double>(prefix);
    }
    std::vector<Vector> cols;
    for (Index c = 0; c < m; ++c) cols.push_back(column(c));
    ens.score = metric.evaluate(y, ens.combine(cols));
  };
  finalize(keep);
  // Rounding in the weighted sum can differ from the running average; never
  // let that push the result below the best single candidate.
  if (metric.better(best_single_score, ens.score)) finalize(1);
  return ens;
}

// ---------------------------------------------------------------------------
// Stacking
// ---------------------------------------------------------------------------

std::string StackedEnsemble::member_label(const std::string& name, std::size_t layer) {
  return name + "_BAG_L" + std::to_string(layer + 1);
}

std::string StackedEnsemble::ensemble_label(std::size_t layer) {
  return "WeightedEnsemble_L" + std::to_string(layer + 2);
}

std::vector<std::vector<Vector>> StackedEnsemble::member_predictions(const Matrix& X) const {
  if (X.cols() != static_cast<Index>(feature_names.size())) {
    throw DataError("stack expects " + std::to_string(feature_names.size()) +
                    " raw features, got " + std::to_string(X.cols()));
  }
  std::vector<std::vector<Vector>> out;
  Matrix features = X;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l > 0) features = build_stack_features(X, layers[l - 1], StackMode::inference);
    std::vector<Vector> preds;
    for (const auto& member : layers[l]) preds.push_back(member.predict(features));
    out.push_back(std::move(preds));
  }
  return out;
}

Vector StackedEnsemble::predict(const Matrix& X) const {
  const auto preds = member_predictions(X);
  return layer_ensembles.back().combine(preds.back());
}

StackedEnsemble fit_stack(const Matrix& X, const Vector& y,
                          std::vector<std::string> feature_names,
                          const std::vector<StackLayerConfig>& layers, Task task,
                          const StackOptions& options) {
  if (layers.empty()) throw UsageError("a stack needs at least one layer");
  for (const auto& layer : layers) {
    if (layer.members.empty()) throw UsageError("stack layer without members");
  }
  if (static_cast<Index>(feature_names.size()) != X.cols()) {
    throw DataError("feature names do not match the feature matrix");
  }
  if (X.cols() == 0) throw DataError("cannot fit a stack on zero features");

  StackedEnsemble stack;
  stack.task = task;
  stack.feature_names = std::move(feature_names);
  const bool stratify = options.stratify.value_or(task == Task::classification);
  stack.folds = kfold_assign(X.rows(), options.k_folds, options.seed,
                             stratify ? std::optional<Vector>(y) : std::nullopt);
  const SelectionMetric metric = options.metric.value_or(default_metric(task));

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Matrix features = l == 0 ? X
                                   : build_stack_features(X, stack.layers.back(),
                                                          StackMode::training_oof);
    std::vector<BaggedModel> members;
    for (const auto& spec : layers[l].members) {
      if (spec.task != task) {
        throw UsageError("member '" + spec.name + "' has the wrong task");
      }
      if (options.progress) options.progress(StackedEnsemble::member_label(spec.name, l));
      members.push_back(fit_bagged(spec, features, y, stack.folds));
    }
    Matrix oof(X.rows(), static_cast<Index>(members.size()));
    for (std::size_t m = 0; m < members.size(); ++m) oof.col(static_cast<Index>(m)) = members[m].oof;
    stack.layer_ensembles.push_back(
        greedy_weighted_ensemble(oof, y, metric, options.ensemble_iterations));
    stack.layers.push_back(std::move(members));
  }
  return stack;
}

StackedEnsemble fit_stack(const Dataset& train, const std::vector<StackLayerConfig>& layers,
                          Task task, const StackOptions& options) {
  if (!train.target_name()) throw DataError("training data has no target column");
  std::vector<std::string> features;
  for (const auto& name : train.column_names()) {
    if (name != *train.target_name()) features.push_back(name);
  }
  return fit_stack(train.feature_matrix(features), train.column(*train.target_name()),
                   features, layers, task, options);
}

Vector predict_stack(const StackedEnsemble& model, const Dataset& ds) {
  for (const auto& name : model.feature_names) {
    if (!ds.has_column(name)) throw DataError("input lacks feature column '" + name + "'");
  }
  return model.predict(ds.feature_matrix(model.feature_names));
}

}  // namespace plumestack
