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

// Base learners: CART, random forest, extra trees, gradient-boosted trees and
// k-nearest neighbors. Binary classification models output the
// positive-class score in [0, 1]; regression models output reals.

#ifndef PLUMESTACK_LEARNERS_HPP
#define PLUMESTACK_LEARNERS_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "plumestack/core.hpp"

namespace plumestack {

enum class Family { tree, random_forest, extra_trees, gbm, knn };
enum class Task { classification, regression };
enum class Criterion { gini, entropy, squared_error };
enum class KnnWeights { uniform, distance };

std::string_view to_string(Family f);
std::string_view to_string(Task t);
std::string_view to_string(Criterion c);
std::string_view to_string(KnnWeights w);
Family parse_family(std::string_view s);
Task parse_task(std::string_view s);
Criterion parse_criterion(std::string_view s);
KnnWeights parse_knn_weights(std::string_view s);

struct Hyperparameters {
  // Trees and forests.
  std::optional<int> max_depth;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int n_estimators = 100;
  // Unset: gini for classification, squared_error for regression.
  std::optional<Criterion> criterion;
  std::optional<int> max_leaf_nodes;
  // Features drawn per split. 0 picks the default: ceil(sqrt(d)) for
  // classification forests, all features otherwise.
  int max_features = 0;
  bool bootstrap = true;  // random_forest only

  // Gradient boosting.
  int num_boost_round = 100;
  double learning_rate = 0.1;
  int num_leaves = 31;
  double feature_fraction = 1.0;
  int min_data_in_leaf = 20;
  bool extra_trees = false;

  // Nearest neighbors.
  int k_neighbors = 5;
  KnnWeights weights = KnnWeights::uniform;

  bool operator==(const Hyperparameters&) const = default;
};

struct ModelSpec {
  std::string name;
  Family family = Family::tree;
  Task task = Task::classification;
  Hyperparameters hp;
  std::uint64_t seed = 0;

  // Throws UsageError when a hyperparameter is out of range.
  void validate() const;
  Criterion criterion() const;
  bool operator==(const ModelSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

// Impurity of a binary class histogram (gini / entropy) ...
double impurity(std::span<const double> class_counts, Criterion criterion);
// ... or of regression targets (squared_error: population variance).
double impurity_of_targets(std::span<const double> targets, Criterion criterion);

struct TreeNode {
  double threshold = 0.0;
  double value = 0.0;
  int feature = -1;  // < 0 marks a leaf
  int left = -1;
  int right = -1;
  std::int32_t n_samples = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Flat node list; node 0 is the root. Rows with x[feature] <= threshold go
// left.
struct Tree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double predict(const Row& x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
  int depth() const;
  int leaf_count() const;
  bool operator==(const Tree&) const = default;
};

// ---------------------------------------------------------------------------
// Fitted models
// ---------------------------------------------------------------------------

// Trees averaged at prediction time (single CART, random forest, extra trees).
struct ForestState {
  std::vector<Tree> trees;
  bool operator==(const ForestState&) const = default;
};

// Additive model; leaf values already carry the learning rate.
struct BoostState {
  double init = 0.0;
  std::vector<Tree> trees;
  std::vector<double> train_loss;  // after each round
  double initial_loss = 0.0;
  bool operator==(const BoostState&) const = default;
};

struct NeighborState {
  Matrix points;
  Vector targets;
  bool operator==(const NeighborState&) const = default;
};

class FittedModel {
 public:
  using State = std::variant<ForestState, BoostState, NeighborState>;

  FittedModel() = default;
  FittedModel(ModelSpec spec, Index n_features, State state)
      : spec_(std::move(spec)), n_features_(n_features), state_(std::move(state)) {}

  const ModelSpec& spec() const { return spec_; }
  Index n_features() const { return n_features_; }
  const State& state() const { return state_; }

  // Throws DataError on a feature-count mismatch.
  Vector predict(const Matrix& X) const;

  bool operator==(const FittedModel&) const = default;

 private:
  ModelSpec spec_;
  Index n_features_ = 0;
  State state_;
};

FittedModel fit_tree(const Matrix& X, const Vector& y, const ModelSpec& spec);
FittedModel fit_forest(const Matrix& X, const Vector& y, const ModelSpec& spec);
FittedModel fit_gbm(const Matrix& X, const Vector& y, const ModelSpec& spec);
FittedModel fit_knn(const Matrix& X, const Vector& y, const ModelSpec& spec);

// Dispatches on spec.family.
FittedModel fit(const Matrix& X, const Vector& y, const ModelSpec& spec);

inline Vector predict(const FittedModel& model, const Matrix& X) {
  return model.predict(X);
}

// Scores >= 0.5 are class 1.
Vector to_labels(const Vector& scores);

}  // namespace plumestack

#endif  // PLUMESTACK_LEARNERS_HPP
