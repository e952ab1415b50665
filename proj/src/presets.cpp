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

#include "plumestack/presets.hpp"

#include <charconv>
#include <functional>

#include "plumestack/tabular.hpp"

namespace plumestack {

namespace {

ModelSpec member(std::string name, Family family, Task task,
                 const std::function<void(Hyperparameters&)>& tweak = {}) {
  ModelSpec spec;
  spec.name = std::move(name);
  spec.family = family;
  spec.task = task;
  if (tweak) tweak(spec.hp);
  spec.validate();
  return spec;
}

// Large-leaf gradient boosting shared by both tasks.
void lgbm_large(Hyperparameters& hp, int rounds) {
  hp.learning_rate = 0.03;
  hp.num_leaves = 128;
  hp.feature_fraction = 0.9;
  hp.min_data_in_leaf = 5;
  hp.num_boost_round = rounds;
}

void lgbm(Hyperparameters& hp, int rounds) {
  hp.learning_rate = 0.05;
  hp.num_boost_round = rounds;
}

void lgbm_xt(Hyperparameters& hp, int rounds) {
  hp.learning_rate = 0.05;
  hp.extra_trees = true;
  hp.num_boost_round = rounds;
}

// Depth-limited boosting standing in for the symmetric-tree engine.
void catboost(Hyperparameters& hp, int rounds) {
  hp.learning_rate = 0.05;
  hp.max_depth = 6;
  hp.num_leaves = 64;
  hp.num_boost_round = rounds;
}

// Depth-wise boosting standing in for the second-order engine.
void xgboost(Hyperparameters& hp, int rounds) {
  hp.learning_rate = 0.1;
  hp.max_depth = 6;
  hp.num_leaves = 64;
  hp.min_data_in_leaf = 1;
  hp.num_boost_round = rounds;
}

void forest(Hyperparameters& hp, Criterion criterion) {
  hp.n_estimators = 300;
  hp.max_leaf_nodes = 15000;
  hp.criterion = criterion;
}

std::vector<ModelSpec> classification_members() {
  const Task t = Task::classification;
  return {
      member("LGBM_Large", Family::gbm, t, [](auto& hp) { lgbm_large(hp, 508); }),
      member("LGBM", Family::gbm, t, [](auto& hp) { lgbm(hp, 900); }),
      member("XGBoost", Family::gbm, t, [](auto& hp) { xgboost(hp, 300); }),
      member("ET_Gini", Family::extra_trees, t, [](auto& hp) { forest(hp, Criterion::gini); }),
      member("RF_Gini", Family::random_forest, t, [](auto& hp) { forest(hp, Criterion::gini); }),
      member("LGBM_XT", Family::gbm, t, [](auto& hp) { lgbm_xt(hp, 500); }),
      member("RF_Entropy", Family::random_forest, t,
             [](auto& hp) { forest(hp, Criterion::entropy); }),
      member("ET_Entropy", Family::extra_trees, t,
             [](auto& hp) { forest(hp, Criterion::entropy); }),
      member("CatBoost", Family::gbm, t, [](auto& hp) { catboost(hp, 1000); }),
      member("KNN_Distance", Family::knn, t, [](auto& hp) { hp.weights = KnnWeights::distance; }),
      member("KNN_Uniform", Family::knn, t),
  };
}

std::vector<ModelSpec> regression_base_members() {
  const Task t = Task::regression;
  const auto mse = Criterion::squared_error;
  return {
      member("RF_MSE", Family::random_forest, t, [mse](auto& hp) { forest(hp, mse); }),
      member("LGBM_XT", Family::gbm, t, [](auto& hp) { lgbm_xt(hp, 3668); }),
      member("ET_MSE", Family::extra_trees, t, [mse](auto& hp) { forest(hp, mse); }),
      member("KNN_Uniform", Family::knn, t),
      member("CatBoost", Family::gbm, t, [](auto& hp) { catboost(hp, 9226); }),
      member("LGBM_Large", Family::gbm, t, [](auto& hp) { lgbm_large(hp, 489); }),
      member("KNN_Distance", Family::knn, t, [](auto& hp) { hp.weights = KnnWeights::distance; }),
      member("LGBM", Family::gbm, t, [](auto& hp) { lgbm(hp, 602); }),
      member("XGBoost", Family::gbm, t, [](auto& hp) { xgboost(hp, 300); }),
  };
}

std::vector<ModelSpec> regression_stacker_members() {
  const Task t = Task::regression;
  const auto mse = Criterion::squared_error;
  return {
      member("LGBM", Family::gbm, t, [](auto& hp) { lgbm(hp, 58); }),
      member("CatBoost", Family::gbm, t, [](auto& hp) { catboost(hp, 714); }),
      member("ET_MSE", Family::extra_trees, t, [mse](auto& hp) { forest(hp, mse); }),
      member("LGBM_Large", Family::gbm, t, [](auto& hp) { lgbm_large(hp, 172); }),
      member("XGBoost", Family::gbm, t, [](auto& hp) { xgboost(hp, 100); }),
      member("RF_MSE", Family::random_forest, t, [mse](auto& hp) { forest(hp, mse); }),
      member("LGBM_XT", Family::gbm, t, [](auto& hp) { lgbm_xt(hp, 300); }),
  };
}

std::vector<ModelSpec> quick_members(Task t) {
  const bool clf = t == Task::classification;
  const auto crit = clf ? Criterion::gini : Criterion::squared_error;
  return {
      member("LGBM", Family::gbm, t, [](auto& hp) { lgbm(hp, 100); }),
      member(clf ? "RF_Gini" : "RF_MSE", Family::random_forest, t, [crit](auto& hp) {
        hp.n_estimators = 40;
        hp.criterion = crit;
      }),
      member(clf ? "ET_Gini" : "ET_MSE", Family::extra_trees, t, [crit](auto& hp) {
        hp.n_estimators = 40;
        hp.criterion = crit;
      }),
      member("KNN_Distance", Family::knn, t, [](auto& hp) { hp.weights = KnnWeights::distance; }),
      member("KNN_Uniform", Family::knn, t),
  };
}

std::vector<StackLayerConfig> stacked(std::vector<ModelSpec> base, std::vector<ModelSpec> stacker,
                                      int depth) {
  if (depth < 1 || depth > 4) throw UsageError("stack depth must lie in [1, 4]");
  std::vector<StackLayerConfig> layers{{std::move(base)}};
  for (int l = 1; l < depth; ++l) layers.push_back({stacker});
  return layers;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"paper-classification", "paper-regression", "quick-classification",
          "quick-regression"};
}

StackPreset make_preset(const std::string& name, std::optional<int> depth) {
  StackPreset p;
  p.name = name;
  if (name == "paper-classification") {
    p.task = Task::classification;
    p.layers = stacked(classification_members(), {}, depth.value_or(1));
    if (p.layers.size() > 1) throw UsageError("paper-classification has a single layer");
    p.ensemble_iterations = 27;
  } else if (name == "paper-regression") {
    p.task = Task::regression;
    p.layers = stacked(regression_base_members(), regression_stacker_members(), depth.value_or(2));
    p.ensemble_iterations = 100;
  } else if (name == "quick-classification") {
    p.task = Task::classification;
    p.layers = stacked(quick_members(p.task), {}, depth.value_or(1));
    if (p.layers.size() > 1) throw UsageError("quick-classification has a single layer");
    p.ensemble_iterations = 27;
  } else if (name == "quick-regression") {
    p.task = Task::regression;
    auto stacker = quick_members(p.task);
    stacker.resize(3);  // tree members only
    p.layers = stacked(quick_members(p.task), stacker, depth.value_or(2));
    p.ensemble_iterations = 100;
  } else {
    throw UsageError("unknown preset '" + name + "'");
  }
  return p;
}

void seed_members(std::vector<StackLayerConfig>& layers, std::uint64_t master_seed) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (auto& spec : layers[l].members) {
      spec.seed = derive_seed(master_seed, "model:" + StackedEnsemble::member_label(spec.name, l));
    }
  }
}

// ---------------------------------------------------------------------------
// Textual hyperparameters
// ---------------------------------------------------------------------------

namespace {

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("'" + key + "' expects an integer, got '" + text + "'");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw UsageError("'" + key + "' expects true or false, got '" + text + "'");
}

std::optional<int> parse_optional_int(const std::string& key, const std::string& text) {
  if (text == "none" || text == "null" || text.empty()) return std::nullopt;
  return parse_int(key, text);
}

std::string optional_text(const std::optional<int>& v) {
  return v ? std::to_string(*v) : "none";
}

}  // namespace

void set_hyperparameter(Hyperparameters& hp, const std::string& key, const std::string& value) {
  if (key == "max_depth") {
    hp.max_depth = parse_optional_int(key, value);
  } else if (key == "min_samples_split") {
    hp.min_samples_split = parse_int(key, value);
  } else if (key == "min_samples_leaf") {
    hp.min_samples_leaf = parse_int(key, value);
  } else if (key == "n_estimators") {
    hp.n_estimators = parse_int(key, value);
  } else if (key == "criterion") {
    if (value == "none" || value == "default") {
      hp.criterion.reset();
    } else {
      hp.criterion = parse_criterion(value);
    }
  } else if (key == "max_leaf_nodes") {
    hp.max_leaf_nodes = parse_optional_int(key, value);
  } else if (key == "max_features") {
    hp.max_features = parse_int(key, value);
  } else if (key == "bootstrap") {
    hp.bootstrap = parse_bool(key, value);
  } else if (key == "num_boost_round") {
    hp.num_boost_round = parse_int(key, value);
  } else if (key == "learning_rate") {
    hp.learning_rate = parse_double(key, value);
  } else if (key == "num_leaves") {
    hp.num_leaves = parse_int(key, value);
  } else if (key == "feature_fraction") {
    hp.feature_fraction = parse_double(key, value);
  } else if (key == "min_data_in_leaf") {
    hp.min_data_in_leaf = parse_int(key, value);
  } else if (key == "extra_trees") {
    hp.extra_trees = parse_bool(key, value);
  } else if (key == "k_neighbors") {
    hp.k_neighbors = parse_int(key, value);
  } else if (key == "weights") {
    hp.weights = parse_knn_weights(value);
  } else {
    throw UsageError("unknown hyperparameter '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> hyperparameter_entries(const Hyperparameters& hp) {
  return {
      {"max_depth", optional_text(hp.max_depth)},
      {"min_samples_split", std::to_string(hp.min_samples_split)},
      {"min_samples_leaf", std::to_string(hp.min_samples_leaf)},
      {"n_estimators", std::to_string(hp.n_estimators)},
      {"criterion", hp.criterion ? std::string(to_string(*hp.criterion)) : "default"},
      {"max_leaf_nodes", optional_text(hp.max_leaf_nodes)},
      {"max_features", std::to_string(hp.max_features)},
      {"bootstrap", hp.bootstrap ? "true" : "false"},
      {"num_boost_round", std::to_string(hp.num_boost_round)},
      {"learning_rate", format_real(hp.learning_rate)},
      {"num_leaves", std::to_string(hp.num_leaves)},
      {"feature_fraction", format_real(hp.feature_fraction)},
      {"min_data_in_leaf", std::to_string(hp.min_data_in_leaf)},
      {"extra_trees", hp.extra_trees ? "true" : "false"},
      {"k_neighbors", std::to_string(hp.k_neighbors)},
      {"weights", std::string(to_string(hp.weights))},
  };
}

}  // namespace plumestack
