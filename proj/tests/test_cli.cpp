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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "plumestack/tabular.hpp"
#include "test_support.hpp"

using namespace plumestack;
using plumestack::testing::read_file;
using plumestack::testing::TempDir;
using plumestack::testing::write_text;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PLUMESTACK_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

const char* kConfig = R"(seed: 3
k_folds: 3
holdout_minutes: [690, 696, 702]
scenario: {grid_size: 21, n_timesteps: 12, target_positive_fraction: 0.05}
classification: {preset: quick-classification}
regression: {preset: quick-regression, depth: 1}
search:
  task: classification
  model: {name: LGBM, family: gbm, hyperparameters: {min_data_in_leaf: 5}}
  max_budget: 9
  total_budget: 60
  params:
    - {name: learning_rate, type: real, low: 0.01, high: 0.3, log: true}
    - {name: num_leaves, type: integer, low: 4, high: 32}
)";

// One trained run shared by the tests below.
struct Run {
  TempDir dir{"cli"};
  std::filesystem::path config = dir / "config.yaml";
  std::filesystem::path out = dir / "run";
  int status = -1;
  Run() {
    write_text(config, kConfig);
    status = run("train --config " + quoted(config) + " --out " + quoted(out));
  }
};

Run& trained() {
  static Run r;
  return r;
}

}  // namespace

TEST_CASE("generate writes the canonical schema deterministically") {
  TempDir dir("cli");
  write_text(dir / "c.yaml", kConfig);
  REQUIRE(run("generate --config " + quoted(dir / "c.yaml") + " --out " + quoted(dir / "a")) == 0);
  REQUIRE(run("generate --config " + quoted(dir / "c.yaml") + " --out " + quoted(dir / "b")) == 0);
  const auto a = read_file(dir / "a" / "scenario.csv");
  CHECK(a == read_file(dir / "b" / "scenario.csv"));
  std::string header = a.substr(0, a.find('\n'));
  std::string expected;
  for (const auto& c : scenario_schema()) expected += (expected.empty() ? "" : ",") + c;
  CHECK(header == expected);
  const auto stats = nlohmann::json::parse(read_file(dir / "a" / "scenario_stats.json"));
  const double max = stats["columns"][kTracerColumn]["max"].get<double>();
  CHECK(max >= 0.2);
  CHECK(max <= 2.0);
  REQUIRE(run("generate --config " + quoted(dir / "c.yaml") + " --seed 4 --out " + quoted(dir / "c")) == 0);
  CHECK(read_file(dir / "c" / "scenario.csv") != a);
}

TEST_CASE("train writes artifacts, reports and a log") {
  auto& r = trained();
  REQUIRE(r.status == 0);
  for (const char* f : {"classification.plm", "regression.plm", "classification_report.csv",
                        "regression_report.md", "classification_test.csv", "holdout.csv",
                        "train_log.json"}) {
    CHECK(std::filesystem::exists(r.out / f));
  }
  const auto log = nlohmann::json::parse(read_file(r.out / "train_log.json"));
  CHECK(log["master_seed"] == 3);
  CHECK(log["holdout_rows"] == 3 * 21 * 21);
  CHECK(log["dropped_constant_columns"][0] == "precipitation_rate");
  CHECK(log["regression"]["layers"][0]["members"].size() == 5);
  CHECK(log["classification"]["layers"][0]["ensemble"]["weights"].size() >= 1);
}

TEST_CASE("same seed gives byte-identical outputs") {
  auto& r = trained();
  REQUIRE(r.status == 0);
  const auto again = r.dir / "again";
  REQUIRE(run("train --config " + quoted(r.config) + " --out " + quoted(again)) == 0);
  for (const char* f : {"classification.plm", "regression.plm", "classification_report.csv",
                        "regression_report.csv", "train_log.json", "holdout.csv"}) {
    CHECK(read_file(r.out / f) == read_file(again / f));
  }
}

TEST_CASE("evaluate reproduces the training report") {
  auto& r = trained();
  REQUIRE(r.status == 0);
  const auto eval = r.dir / "eval";
  for (const char* task : {"classification", "regression"}) {
    const std::string t = task;
    REQUIRE(run("evaluate --artifact " + quoted(r.out / (t + ".plm")) + " --data " +
                quoted(r.out / (t + "_test.csv")) + " --out " + quoted(eval)) == 0);
    CHECK(read_file(eval / (t + "_report.csv")) == read_file(r.out / (t + "_report.csv")));
  }
  REQUIRE(run("report --out " + quoted(r.out)) == 0);
  const auto md = read_file(r.out / "report.md");
  CHECK(md.find("WeightedEnsemble_L2") != std::string::npos);
}

TEST_CASE("predict writes labels, scores and grid files") {
  auto& r = trained();
  REQUIRE(r.status == 0);
  const auto pred = r.dir / "pred";
  REQUIRE(run("predict --artifact " + quoted(r.out / "classification.plm") + " --data " +
              quoted(r.out / "holdout.csv") + " --out " + quoted(pred) + " --grid") == 0);
  const auto p = load_csv(pred / "predictions.csv");
  const auto holdout = load_csv(r.out / "holdout.csv");
  CHECK(p.n_rows() == holdout.n_rows());
  const Vector label = p.column("prediction");
  const Vector score = p.column("score");
  CHECK(((label.array() == 0.0) || (label.array() == 1.0)).all());
  CHECK((score.array() >= 0.0).all());
  CHECK((score.array() <= 1.0).all());
  Index grid_rows = 0;
  for (const char* f : {"grid_1130.csv", "grid_1136.csv", "grid_1142.csv"}) {
    REQUIRE(std::filesystem::exists(pred / f));
    const auto g = load_csv(pred / f);
    CHECK(g.column_names() ==
          std::vector<std::string>{"latitude", "longitude", "actual", "predicted"});
    grid_rows += g.n_rows();
  }
  CHECK(grid_rows == holdout.n_rows());

  const auto reg = r.dir / "reg";
  REQUIRE(run("predict --artifact " + quoted(r.out / "regression.plm") + " --data " +
              quoted(r.out / "holdout.csv") + " --out " + quoted(reg) + " --detector " +
              quoted(r.out / "classification.plm")) == 0);
  const auto rp = load_csv(reg / "predictions.csv");
  const Vector detected = rp.column("detected");
  const Vector conc = rp.column("prediction");
  for (Index i = 0; i < conc.size(); ++i) {
    if (detected[i] == 0.0) CHECK(conc[i] == 0.0);
  }
  // Physical units: predicted concentrations sit on the tracer's ppm scale.
  double max_pred = 0.0;
  for (Index i = 0; i < conc.size(); ++i) {
    if (detected[i] == 1.0) max_pred = std::max(max_pred, conc[i]);
  }
  CHECK(max_pred > 0.1);
  CHECK(max_pred < 5.0);
}

TEST_CASE("tune writes its history and result") {
  auto& r = trained();
  const auto out = r.dir / "tune";
  REQUIRE(run("tune --config " + quoted(r.config) + " --out " + quoted(out)) == 0);
  const auto result = nlohmann::json::parse(read_file(out / "tune_result.json"));
  std::istringstream history(read_file(out / "tune_history.csv"));
  std::string line;
  std::getline(history, line);
  CHECK(line == "trial_id,learning_rate,num_leaves,budget,objective,status,bracket,rung");
  int rows = 0;
  double best_seen = -1.0;
  while (std::getline(history, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) cells.push_back(cell);
    REQUIRE(cells.size() == 8);
    if (cells[5] == "completed") best_seen = std::max(best_seen, std::stod(cells[4]));
  }
  CHECK(rows == result["evaluations"].get<int>());
  const double best = result["best_objective"].get<double>();
  CHECK(best == best_seen);
  CHECK(best > 0.5);
  CHECK(best <= 1.0);
}

TEST_CASE("exit codes") {
  auto& r = trained();
  TempDir dir("cli");
  CHECK(run("") == 1);
  CHECK(run("train --bogus") == 1);
  CHECK(run("train --preset nope") == 1);
  write_text(dir / "bad.yaml", "seeed: 1\n");
  CHECK(run("train --config " + quoted(dir / "bad.yaml")) == 1);
  CHECK(run("evaluate --artifact " + quoted(dir / "missing.plm") + " --data " +
            quoted(r.out / "classification_test.csv")) == 2);
  write_text(dir / "broken.plm", read_file(r.out / "classification.plm").substr(0, 100));
  CHECK(run("evaluate --artifact " + quoted(dir / "broken.plm") + " --data " +
            quoted(r.out / "classification_test.csv")) == 2);
  write_text(dir / "schema.csv", "a,b\n1,2\n");
  CHECK(run("predict --artifact " + quoted(r.out / "classification.plm") + " --data " +
            quoted(dir / "schema.csv") + " --out " + quoted(dir.path())) == 2);
  write_text(dir / "nontracer.yaml", "scenario: {grid_size: 21, n_timesteps: 3, "
                                     "release_rate_kg_s: 1.0e-30, floor_ppm: 0.001}\n");
  CHECK(run("generate --config " + quoted(dir / "nontracer.yaml") + " --out " + quoted(dir.path())) == 2);
  CHECK(run("report --out " + quoted(dir / "empty")) == 2);
}
