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

#include <set>

#include "doctest.h"
#include "plumestack/config.hpp"
#include "plumestack/presets.hpp"

using namespace plumestack;

namespace {

std::vector<std::string> names_of(const StackLayerConfig& layer) {
  std::vector<std::string> out;
  for (const auto& m : layer.members) out.push_back(m.name);
  return out;
}

}  // namespace

TEST_CASE("classification preset members and settings") {
  const auto p = make_preset("paper-classification");
  CHECK(p.task == Task::classification);
  CHECK(p.ensemble_iterations == 27);
  REQUIRE(p.layers.size() == 1);
  const auto names = names_of(p.layers[0]);
  CHECK(names.size() == 11);
  const std::set<std::string> got(names.begin(), names.end());
  for (const char* n : {"LGBM_Large", "LGBM", "XGBoost", "ET_Gini", "RF_Gini", "RF_Entropy",
                        "ET_Entropy", "LGBM_XT", "CatBoost", "KNN_Distance", "KNN_Uniform"}) {
    CHECK(got.count(n) == 1);
  }
  for (const auto& m : p.layers[0].members) {
    CHECK(m.task == Task::classification);
    CHECK_NOTHROW(m.validate());
    if (m.name == "LGBM_Large") {
      CHECK(m.hp.learning_rate == 0.03);
      CHECK(m.hp.num_leaves == 128);
      CHECK(m.hp.feature_fraction == 0.9);
      CHECK(m.hp.min_data_in_leaf == 5);
      CHECK(m.hp.num_boost_round == 508);
    }
    if (m.name == "RF_Gini" || m.name == "ET_Entropy") {
      CHECK(m.hp.n_estimators == 300);
      CHECK(m.hp.max_leaf_nodes == 15000);
    }
  }
  CHECK_THROWS_AS(make_preset("paper-classification", 2), UsageError);
}

TEST_CASE("regression preset depth") {
  const auto p = make_preset("paper-regression");
  CHECK(p.task == Task::regression);
  CHECK(p.ensemble_iterations == 100);
  REQUIRE(p.layers.size() == 2);
  CHECK(p.layers[0].members.size() == 9);
  CHECK(p.layers[1].members.size() == 7);
  CHECK(make_preset("paper-regression", 1).layers.size() == 1);
  CHECK(make_preset("paper-regression", 4).layers.size() == 4);
  CHECK_THROWS_AS(make_preset("paper-regression", 5), UsageError);
  CHECK_THROWS_AS(make_preset("paper-regression", 0), UsageError);
  CHECK_THROWS_AS(make_preset("nope"), UsageError);
  for (const auto& name : preset_names()) CHECK_NOTHROW(make_preset(name));
}

TEST_CASE("member seeds come from layer-qualified names") {
  auto layers = make_preset("paper-regression").layers;
  seed_members(layers, 42);
  CHECK(layers[0].members[0].seed ==
        derive_seed(42, "model:" + layers[0].members[0].name + "_BAG_L1"));
  std::set<std::uint64_t> seeds;
  for (const auto& l : layers) {
    for (const auto& m : l.members) seeds.insert(m.seed);
  }
  CHECK(seeds.size() == 16);
}

TEST_CASE("hyperparameter text round trip") {
  Hyperparameters hp;
  hp.max_depth = 7;
  hp.criterion = Criterion::entropy;
  hp.learning_rate = 0.0375;
  hp.weights = KnnWeights::distance;
  hp.extra_trees = true;
  Hyperparameters back;
  for (const auto& [k, v] : hyperparameter_entries(hp)) set_hyperparameter(back, k, v);
  CHECK(back == hp);
  set_hyperparameter(back, "max_depth", "none");
  CHECK_FALSE(back.max_depth.has_value());
  CHECK_THROWS_AS(set_hyperparameter(back, "max_dept", "3"), UsageError);
  CHECK_THROWS_AS(set_hyperparameter(back, "learning_rate", "fast"), UsageError);
}

TEST_CASE("pipeline config parsing") {
  const auto cfg = parse_pipeline_config(R"(
seed: 9
out: runs/x
task: regression
train_fraction: 0.75
k_folds: 4
holdout_minutes: [1020]
scenario: {grid_size: 21, n_timesteps: 5, wind: {mean_speed_ms: 3}}
regression:
  preset: paper-regression
  depth: 3
  ensemble_size: 50
  layers:
    - members:
        - {name: LGBM, family: gbm, hyperparameters: {num_boost_round: 20, learning_rate: 0.2}}
search:
  task: classification
  model: {name: LGBM, family: gbm}
  max_budget: 9
  total_budget: 100
  params:
    - {name: learning_rate, type: real, low: 0.01, high: 0.3, log: true}
    - {name: weights, type: categorical, choices: [uniform, distance]}
)");
  CHECK(cfg.seed == 9);
  CHECK(cfg.out == "runs/x");
  CHECK_FALSE(cfg.wants(Task::classification));
  CHECK(cfg.wants(Task::regression));
  CHECK(cfg.k_folds == 4);
  REQUIRE(cfg.scenario);
  CHECK(cfg.scenario->grid_size == 21);
  CHECK(cfg.scenario->wind.mean_speed_ms == 3.0);
  CHECK(cfg.regression.depth == 3);
  REQUIRE(cfg.regression.layers);
  const auto& m = cfg.regression.layers->at(0).members.at(0);
  CHECK(m.task == Task::regression);
  CHECK(m.hp.num_boost_round == 20);
  CHECK(m.hp.learning_rate == 0.2);
  REQUIRE(cfg.search);
  CHECK(cfg.search->space.dimension() == 2);
  CHECK(cfg.search->options.max_budget == 9.0);
  CHECK(cfg.search->model.task == Task::classification);
}

TEST_CASE("pipeline config errors") {
  CHECK_THROWS_AS(parse_pipeline_config("seeed: 1"), UsageError);
  CHECK_THROWS_AS(parse_pipeline_config("task: all"), UsageError);
  CHECK_THROWS_AS(parse_pipeline_config("train_fraction: 1.5"), UsageError);
  CHECK_THROWS_AS(parse_pipeline_config("k_folds: 1"), UsageError);
  CHECK_THROWS_AS(parse_pipeline_config("scenario: {grid_size: 21}\ninput: a.csv"), UsageError);
  CHECK_THROWS_AS(parse_pipeline_config("seed: [1, 2"), UsageError);
  CHECK_THROWS_AS(parse_pipeline_config("scenario: {grid_size: 2}"), UsageError);
  CHECK_THROWS_AS(
      parse_pipeline_config("regression: {layers: [{members: [{name: A, family: svm}]}]}"),
      UsageError);
  CHECK_THROWS_AS(load_pipeline_config("/nonexistent/plumestack.yaml"), UsageError);
}
