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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plumestack/pipeline.hpp"

using namespace plumestack;
namespace fs = std::filesystem;

namespace {

int g_failed = 0;

void report(int id, const std::string& name, bool passed, const std::string& detail) {
  if (!passed) ++g_failed;
  std::cout << (passed ? "PASS" : "FAIL") << "  " << std::setw(2) << id << "  " << std::left
            << std::setw(34) << name << std::right << " " << detail << std::endl;
}

std::string num(double v, int precision = 6) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() /
                   ("plumestack_acceptance_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  }
  return m;
}

// ---------------------------------------------------------------------------
// 1. Metric oracle equivalence
// ---------------------------------------------------------------------------

struct DirectMetrics {
  long double accuracy, precision, recall, f1, mcc;
};

DirectMetrics direct_metrics(long double tp, long double tn, long double fp, long double fn) {
  auto safe = [](long double num, long double den) { return den == 0 ? 0.0L : num / den; };
  DirectMetrics d;
  d.accuracy = (tp + tn) / (tp + fp + tn + fn);
  d.precision = safe(tp, tp + fp);
  d.recall = safe(tp, tp + fn);
  d.f1 = safe(tp, tp + (fp + fn) / 2);
  d.mcc = safe(tp * tn - fp * fn, std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)));
  return d;
}

double pair_count_auc(const Vector& y, const Vector& s) {
  long double score = 0, pairs = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1.0) continue;
    for (Index j = 0; j < y.size(); ++j) {
      if (y[j] != 0.0) continue;
      pairs += 1;
      score += s[i] > s[j] ? 1.0L : (s[i] == s[j] ? 0.5L : 0.0L);
    }
  }
  return static_cast<double>(score / pairs);
}

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    ConfusionMatrix cm;
    // Every fourth matrix has an empty cell to exercise the zero conventions.
    cm.tp = static_cast<std::int64_t>(rng.below(trial % 4 == 0 ? 1 : 5000));
    cm.tn = static_cast<std::int64_t>(rng.below(5000));
    cm.fp = static_cast<std::int64_t>(rng.below(trial % 7 == 0 ? 1 : 5000));
    cm.fn = static_cast<std::int64_t>(rng.below(5000)) + 1;
    const auto r = classification_metrics(cm);
    const auto d = direct_metrics(cm.tp, cm.tn, cm.fp, cm.fn);
    for (const auto& [got, want] : {std::pair{r.accuracy, d.accuracy}, {r.precision, d.precision},
                                    {r.recall, d.recall}, {r.f1, d.f1}, {r.mcc, d.mcc}}) {
      worst = std::max(worst, static_cast<double>(std::abs(got - want)));
    }
  }
  double worst_auc = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(499));
    Vector y(n), s(n);
    const auto levels = 2 + rng.below(40);
    for (Index i = 0; i < n; ++i) {
      y[i] = static_cast<double>(rng.below(2));
      s[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
    }
    y[0] = 0.0;
    y[1] = 1.0;
    worst_auc = std::max(worst_auc, std::abs(auc_roc(y, s) - pair_count_auc(y, s)));
  }
  const double elapsed = seconds_since(t0);
  report(1, "metric_oracle_equivalence", worst <= 1e-12 && worst_auc <= 1e-12 && elapsed < 10.0,
         "max|metric-oracle|=" + num(worst, 3) + " max|auc-pairs|=" + num(worst_auc, 3) +
             " time=" + num(elapsed, 3) + "s (tol 1e-12, < 10 s)");
}

// ---------------------------------------------------------------------------
// 2. Hand values
// ---------------------------------------------------------------------------

void criterion_2() {
  ConfusionMatrix cm;
  cm.tp = 50;
  cm.tn = 40;
  cm.fp = 10;
  cm.fn = 0;
  const auto c = classification_metrics(cm);
  const Vector y = (Vector(3) << 1, 2, 3).finished();
  const Vector p = (Vector(3) << 1, 2, 2).finished();
  const auto r = regression_metrics(y, p);
  const bool ok = std::abs(c.accuracy - 0.9) <= 1e-4 && std::abs(c.f1 - 0.9091) <= 1e-4 &&
                  std::abs(c.mcc - 0.8165) <= 1e-4 && std::abs(r.r2 - 0.5) <= 1e-4 &&
                  std::abs(r.rmse - 0.5774) <= 1e-4;
  report(2, "hand_value_checks", ok,
         "acc=" + num(c.accuracy, 5) + " f1=" + num(c.f1, 5) + " mcc=" + num(c.mcc, 5) +
             " r2=" + num(r.r2, 5) + " rmse=" + num(r.rmse, 5) + " (tol 1e-4)");
}

// ---------------------------------------------------------------------------
// 3. Preprocessing fidelity
// ---------------------------------------------------------------------------

void criterion_3() {
  PipelineConfig cfg;
  const Dataset ds = load_or_generate(cfg);
  const Index positives = (ds.column(kTracerColumn).array() > 0.0).count();
  const double fraction = static_cast<double>(positives) / static_cast<double>(ds.n_rows());
  const auto p = prepare(ds, 0.8, cfg.seed);
  const auto& c = p.classification;
  const auto& r = p.regression;
  const Index balanced = c.train.n_rows() + c.test.n_rows();
  const double balanced_pos =
      c.train.column(kLeakageColumn).sum() + c.test.column(kLeakageColumn).sum();
  const bool dropped = p.dropped == std::vector<std::string>{"precipitation_rate"};
  const bool split_ok =
      c.train.n_rows() == std::llround(0.8 * static_cast<double>(balanced)) &&
      r.train.n_rows() == std::llround(0.8 * static_cast<double>(positives)) &&
      r.train.n_rows() + r.test.n_rows() == positives;
  double worst_mean = 0.0, worst_std = 0.0;
  std::vector<std::string> scaled = r.features;
  scaled.push_back(kTracerColumn);
  for (const auto& name : scaled) {
    const Vector v = r.train.column(name);
    long double sum = 0;
    for (Index i = 0; i < v.size(); ++i) sum += v[i];
    const long double mean = sum / v.size();
    long double sq = 0;
    for (Index i = 0; i < v.size(); ++i) sq += (v[i] - mean) * (v[i] - mean);
    worst_mean = std::max(worst_mean, static_cast<double>(std::abs(mean)));
    worst_std = std::max(worst_std, static_cast<double>(std::abs(std::sqrt(sq / v.size()) - 1)));
  }
  const bool ok = fraction >= 0.0235 && fraction <= 0.0353 && balanced == 2 * positives &&
                  balanced_pos == static_cast<double>(positives) && dropped && split_ok &&
                  worst_mean <= 1e-9 && worst_std <= 1e-9;
  report(3, "preprocessing_fidelity", ok,
         "positives=" + std::to_string(positives) + "/" + std::to_string(ds.n_rows()) + " (" +
             num(100 * fraction, 4) + "%) balanced=" + std::to_string(balanced) +
             " split=" + std::to_string(c.train.n_rows()) + "/" + std::to_string(c.test.n_rows()) +
             " dropped=" + (dropped ? "precipitation_rate" : "?") + " max|mean|=" +
             num(worst_mean, 3) + " max|std-1|=" + num(worst_std, 3));
}

// ---------------------------------------------------------------------------
// 4. Ensemble dominance over 20 seeds
// ---------------------------------------------------------------------------

void criterion_4() {
  int held = 0;
  double worst_margin = 1e300;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PipelineConfig cfg;
    cfg.seed = seed;
    ScenarioConfig sc;
    sc.grid_size = 41;
    sc.n_timesteps = 30;
    cfg.scenario = sc;
    const auto p = prepare(load_or_generate(cfg), cfg.train_fraction, seed);
    TaskConfig tc{"quick-classification", {}, {}, {}, {}};
    const auto artifact = train_task(p.classification, resolve_stack(tc, Task::classification, seed, 5), seed);
    const double ensemble = artifact.validation.at("WeightedEnsemble_L2");
    double best_member = 0.0;
    for (const auto& [label, value] : artifact.validation) {
      if (label.rfind("WeightedEnsemble", 0) != 0) best_member = std::max(best_member, value);
    }
    worst_margin = std::min(worst_margin, ensemble - best_member);
    if (ensemble >= best_member) ++held;
  }
  report(4, "ensemble_dominance_20_seeds", held == 20,
         std::to_string(held) + "/20 seeds ensemble OOF accuracy >= best member; min margin=" +
             num(worst_margin, 4));
}

// ---------------------------------------------------------------------------
// 5. Synthetic-analog performance band (full presets, default scenario)
// ---------------------------------------------------------------------------

struct FullRun {
  std::optional<EvaluationReport> classification;
  std::optional<EvaluationReport> regression;
};

FullRun criterion_5() {
  const auto dir = scratch_dir("full");
  PipelineConfig cfg;
  cfg.out = dir;
  const auto t0 = std::chrono::steady_clock::now();
  cmd_train(cfg);
  const double elapsed = seconds_since(t0);

  FullRun run;
  run.classification = evaluate_artifact(load_artifact(dir / "classification.plm"),
                                         load_csv(dir / "classification_test.csv"));
  run.regression = evaluate_artifact(load_artifact(dir / "regression.plm"),
                                     load_csv(dir / "regression_test.csv"));
  fs::remove_all(dir);
  const auto& ce = run.classification->row("WeightedEnsemble_L2").classification;
  const auto& re = run.regression->row("WeightedEnsemble_L3").regression;
  report(5, "synthetic_performance_band",
         ce.accuracy >= 0.90 && ce.auc_roc >= 0.95 && re.r2 >= 0.75 && elapsed < 900.0,
         "cls acc=" + num(ce.accuracy, 4) + " auc=" + num(ce.auc_roc, 4) + " reg R2=" +
             num(re.r2, 4) + " time=" + num(elapsed, 4) + "s (>=0.90, >=0.95, >=0.75, <900 s)");
  return run;
}

// ---------------------------------------------------------------------------
// 6. KNN ranks last on both tasks over 5 seeds
// ---------------------------------------------------------------------------

// Best KNN member and worst other base member by the headline test metric.
std::pair<double, double> knn_vs_trees(const EvaluationReport& rep) {
  double best_knn = -1e300, worst_tree = 1e300;
  for (const auto& row : rep.rows) {
    if (row.model.rfind("WeightedEnsemble", 0) == 0) continue;
    if (row.model.size() < 3 || row.model.compare(row.model.size() - 3, 3, "_L1") != 0) continue;
    const double v = rep.headline(row);
    if (row.model.rfind("KNN", 0) == 0) best_knn = std::max(best_knn, v);
    else worst_tree = std::min(worst_tree, v);
  }
  return {best_knn, worst_tree};
}

// Base layer of the full presets; seed 0 reuses the criterion 5 run.
void criterion_6(const FullRun& seed0) {
  int held = 0;
  std::ostringstream detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::optional<PreparedData> p;
    bool seed_ok = true;
    for (const Task task : {Task::classification, Task::regression}) {
      const bool clf = task == Task::classification;
      const auto& reused = clf ? seed0.classification : seed0.regression;
      std::optional<EvaluationReport> rep;
      if (seed == 0 && reused) {
        rep = reused;
      } else {
        if (!p) {
          PipelineConfig cfg;
          cfg.seed = seed;
          const auto data = split_holdout(load_or_generate(cfg), cfg.holdout_minutes).kept;
          p = prepare(data, cfg.train_fraction, seed);
        }
        const TaskConfig tc{clf ? "paper-classification" : "paper-regression", 1, {}, {}, {}};
        const auto& d = clf ? p->classification : p->regression;
        rep = evaluate_artifact(train_task(d, resolve_stack(tc, task, seed, 5), seed), d.test);
      }
      const auto [knn, trees] = knn_vs_trees(*rep);
      seed_ok = seed_ok && knn < trees;
      detail << (clf ? " c" : " r") << seed << ":" << num(knn, 3) << "<" << num(trees, 3);
    }
    if (seed_ok) ++held;
  }
  report(6, "knn_ranks_last_5_seeds", held == 5,
         std::to_string(held) + "/5 seeds; best KNN < worst other base member:" + detail.str());
}

// ---------------------------------------------------------------------------
// 7. Learner invariants
// ---------------------------------------------------------------------------

void criterion_7() {
  Rng rng(707);
  // Boosting loss.
  int loss_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 50 + static_cast<Index>(rng.below(150));
    const Index d = 1 + static_cast<Index>(rng.below(6));
    const Matrix X = random_matrix(n, d, rng);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y[i] = std::sin(2 * X(i, 0)) + 0.5 * X(i, d - 1) + 0.3 * rng.normal();
    ModelSpec s;
    s.name = "gbm";
    s.family = Family::gbm;
    s.task = Task::regression;
    s.seed = static_cast<std::uint64_t>(trial);
    s.hp.learning_rate = rng.uniform(0.005, 0.1);
    s.hp.num_boost_round = 40;
    s.hp.num_leaves = 2 + static_cast<int>(rng.below(30));
    s.hp.min_data_in_leaf = 1 + static_cast<int>(rng.below(10));
    s.hp.feature_fraction = rng.uniform(0.3, 1.0);
    const auto model = fit_gbm(X, y, s);
    const auto& st = std::get<BoostState>(model.state());
    bool mono = true;
    double prev = st.initial_loss;
    for (double l : st.train_loss) {
      mono = mono && l <= prev;
      prev = l;
    }
    if (mono) ++loss_ok;
  }

  // Single tree vs one-tree forest.
  int forest_ok = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix X = random_matrix(150, 4, rng);
    Vector y(150);
    for (Index i = 0; i < 150; ++i) y[i] = X(i, 0) * X(i, 1) + 0.1 * rng.normal();
    ModelSpec t;
    t.name = "cart";
    t.task = trial % 2 ? Task::classification : Task::regression;
    if (t.task == Task::classification) y = (y.array() > 0.0).cast<double>().matrix();
    ModelSpec f = t;
    f.family = Family::random_forest;
    f.hp.n_estimators = 1;
    f.hp.bootstrap = false;
    f.hp.max_features = 4;
    if (fit_tree(X, y, t).predict(X) == fit_forest(X, y, f).predict(X)) ++forest_ok;
  }

  // Monotone transforms.
  int mono_ok = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix X = random_matrix(200, 3, rng);
    Vector y(200);
    for (Index i = 0; i < 200; ++i) y[i] = static_cast<double>(X(i, 0) - X(i, 2) > 0.2);
    Matrix Xt(200, 3);
    Xt.col(0) = X.col(0).array().exp().matrix();
    Xt.col(1) = X.col(1).array().cube().matrix();
    Xt.col(2) = (X.col(2).array() * 4.0 + 1.0).matrix();
    ModelSpec t;
    t.name = "cart";
    t.task = Task::classification;
    if (fit_tree(X, y, t).predict(X) == fit_tree(Xt, y, t).predict(Xt)) ++mono_ok;
  }

  // k = 1 memorization.
  const Matrix P = random_matrix(300, 5, rng);
  Vector targets(300);
  for (Index i = 0; i < 300; ++i) targets[i] = rng.normal();
  ModelSpec k;
  k.name = "knn";
  k.family = Family::knn;
  k.task = Task::regression;
  k.hp.k_neighbors = 1;
  const bool memorized = fit_knn(P, targets, k).predict(P) == targets;

  // XOR at depth 2.
  Matrix Xx(4, 2);
  Xx << 0, 0, 0, 1, 1, 0, 1, 1;
  const Vector yx = (Vector(4) << 0, 1, 1, 0).finished();
  ModelSpec xs;
  xs.name = "cart";
  const auto xor_model = fit_tree(Xx, yx, xs);
  const bool xor_ok = to_labels(xor_model.predict(Xx)) == yx &&
                      std::get<ForestState>(xor_model.state()).trees[0].depth() == 2;

  report(7, "learner_invariants",
         loss_ok == 100 && forest_ok == 10 && mono_ok == 10 && memorized && xor_ok,
         "loss-monotone " + std::to_string(loss_ok) + "/100, tree==forest " +
             std::to_string(forest_ok) + "/10, monotone-invariant " + std::to_string(mono_ok) +
             "/10, knn k=1 " + (memorized ? "ok" : "bad") + ", xor depth 2 " +
             (xor_ok ? "ok" : "bad"));
}

// ---------------------------------------------------------------------------
// 8. Stacking bookkeeping
// ---------------------------------------------------------------------------

void criterion_8() {
  Rng rng(808);
  std::int64_t checked = 0, violations = 0;
  for (int run = 0; run < 10; ++run) {
    const Index n = 60 + static_cast<Index>(rng.below(200));
    const Matrix X = random_matrix(n, 5, rng);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y[i] = X(i, 0) + X(i, 1) * X(i, 2) + 0.2 * rng.normal();
    const Task task = run % 2 ? Task::classification : Task::regression;
    if (task == Task::classification) y = (y.array() > 0.0).cast<double>().matrix();
    auto layers = make_preset(task == Task::classification ? "quick-classification" : "quick-regression")
                      .layers;
    if (task == Task::classification) layers.push_back(layers.front());
    for (auto& l : layers) {
      for (auto& m : l.members) {
        m.hp.n_estimators = 4;
        m.hp.num_boost_round = 8;
        m.hp.min_data_in_leaf = 3;
      }
    }
    seed_members(layers, static_cast<std::uint64_t>(run));
    StackOptions opts;
    opts.k_folds = 2 + run % 4;
    opts.seed = static_cast<std::uint64_t>(run);
    opts.ensemble_iterations = 10;
    const auto stack = fit_stack(X, y, std::vector<std::string>{"a", "b", "c", "d", "e"}, layers,
                                 task, opts);
    Matrix features = X;
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
      for (const auto& bag : stack.layers[l]) {
        for (int f = 0; f < stack.folds.k; ++f) {
          const auto& trained = bag.fold_train_rows[static_cast<std::size_t>(f)];
          const std::set<Index> rows(trained.begin(), trained.end());
          for (Index r = 0; r < n; ++r) {
            const bool in_fold = stack.folds.fold_of_row[static_cast<std::size_t>(r)] == f;
            if (!in_fold) continue;
            ++checked;
            const bool excluded = rows.count(r) == 0;
            const bool produced =
                bag.oof[r] == bag.fold_models[static_cast<std::size_t>(f)].predict(features.row(r))[0];
            if (!excluded || !produced) ++violations;
          }
        }
        if (bag.fold_models.front().n_features() != features.cols()) ++violations;
      }
      Matrix next(n, X.cols() + static_cast<Index>(stack.layers[l].size()));
      next.leftCols(X.cols()) = X;
      for (std::size_t m = 0; m < stack.layers[l].size(); ++m) {
        next.col(X.cols() + static_cast<Index>(m)) = stack.layers[l][m].oof;
      }
      features = next;
    }
  }

  // The regression preset's second layer on ten raw features.
  auto layers = make_preset("paper-regression").layers;
  for (auto& l : layers) {
    for (auto& m : l.members) {
      m.hp.n_estimators = 2;
      m.hp.num_boost_round = 2;
      m.hp.min_data_in_leaf = 5;
    }
  }
  const Matrix X = random_matrix(120, 10, rng);
  Vector y = X.rowwise().sum();
  StackOptions opts;
  opts.ensemble_iterations = 5;
  std::vector<std::string> names;
  for (int i = 0; i < 10; ++i) names.push_back("f" + std::to_string(i));
  const auto stack = fit_stack(X, y, names, layers, Task::regression, opts);
  const Index l2_features = stack.layers[1].front().fold_models.front().n_features();
  report(8, "stacking_bookkeeping", violations == 0 && checked > 0 && l2_features == 19,
         std::to_string(checked) + " OOF rows checked, " + std::to_string(violations) +
             " violations; paper-regression L2 features=" + std::to_string(l2_features) +
             " (expect 19)");
}

// ---------------------------------------------------------------------------
// 9. Greedy ensemble vs exhaustive simplex grid
// ---------------------------------------------------------------------------

void criterion_9() {
  Rng rng(909);
  const auto mse = parse_metric("mse");
  int within = 0, not_below = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 100 + static_cast<Index>(rng.below(200));
    Vector y(n);
    Matrix c(n, 3);
    const double shared = rng.uniform(0.0, 0.8);
    for (Index r = 0; r < n; ++r) {
      y[r] = rng.normal();
      const double common = rng.normal();
      for (Index m = 0; m < 3; ++m) {
        const double scale = rng.uniform(0.2, 1.0);
        c(r, m) = y[r] + scale * (shared * common + (1.0 - shared) * rng.normal()) +
                  0.1 * static_cast<double>(m);
      }
    }
    const auto ens = greedy_weighted_ensemble(c, y, mse, 10);
    // Independent loss of the chosen weights.
    long double greedy_loss = 0;
    for (Index r = 0; r < n; ++r) {
      long double pred = 0;
      for (Index m = 0; m < 3; ++m) pred += ens.weights[static_cast<std::size_t>(m)] * c(r, m);
      greedy_loss += (pred - y[r]) * (pred - y[r]);
    }
    greedy_loss /= n;
    long double grid = 1e300, best_single = 1e300;
    for (int i = 0; i <= 10; ++i) {
      for (int j = 0; i + j <= 10; ++j) {
        const int k = 10 - i - j;
        long double loss = 0;
        for (Index r = 0; r < n; ++r) {
          const long double pred = (i * c(r, 0) + j * c(r, 1) + k * c(r, 2)) / 10.0L;
          loss += (pred - y[r]) * (pred - y[r]);
        }
        loss /= n;
        grid = std::min(grid, loss);
        if (i == 10 || j == 10 || k == 10) best_single = std::min(best_single, loss);
      }
    }
    const double ratio = static_cast<double>(greedy_loss / grid);
    worst_ratio = std::max(worst_ratio, ratio);
    if (greedy_loss <= grid * 1.02L) ++within;
    if (greedy_loss <= best_single * (1.0L + 1e-12L)) ++not_below;
  }
  report(9, "greedy_vs_simplex_grid", within == 50 && not_below == 50,
         std::to_string(within) + "/50 within 2% of grid optimum (worst ratio " +
             num(worst_ratio, 5) + "), " + std::to_string(not_below) +
             "/50 no worse than best single");
}

// ---------------------------------------------------------------------------
// 10. Hyperband schedule and BOHB vs random search
// ---------------------------------------------------------------------------

double quadratic(const Config& c, double budget) {
  const double x = std::get<double>(c.at("x"));
  const double lr = std::get<double>(c.at("lr"));
  const double n = static_cast<double>(std::get<long long>(c.at("n")));
  return 10.0 - 20.0 * (x - 0.3) * (x - 0.3) - std::pow(std::log10(lr) + 2.0, 2.0) -
         std::pow((n - 60.0) / 50.0, 2.0) - 1.0 / budget;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

void criterion_10() {
  const auto b = hyperband_schedule(9.0, 3);
  std::vector<std::pair<int, double>> starts;
  for (const auto& br : b) starts.emplace_back(br.rungs.front().n_configs, br.rungs.front().budget);
  const bool table = starts == std::vector<std::pair<int, double>>{{9, 1.0}, {5, 3.0}, {3, 9.0}};

  SearchSpace space;
  space.add_real("x", 0.0, 1.0).add_real("lr", 1e-3, 1.0, true).add_integer("n", 1, 100);

  // Promotion counts in an executed search.
  SearchOptions opts;
  opts.max_budget = 9.0;
  const auto res = run_search(space, quadratic, 200.0, Mode::maximize, 1, opts);
  bool promotion = true;
  std::size_t i = 0;
  for (const auto& br : res.brackets_run) {
    for (std::size_t r = 0; r < br.rungs.size(); ++r) {
      int count = 0;
      while (i < res.history.size() && res.history[i].rung == static_cast<int>(r) &&
             res.history[i].bracket == br.s && count < br.rungs[r].n_configs) {
        ++count;
        ++i;
      }
      promotion = promotion && count == br.rungs[r].n_configs;
      if (r > 0) promotion = promotion && br.rungs[r].n_configs == br.rungs[r - 1].n_configs / 3;
    }
  }
  promotion = promotion && i == res.history.size();

  std::vector<double> bohb, random;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto r = run_search(space, quadratic, 846.0, Mode::maximize, rep);
    bohb.push_back(*r.best.objective);
    Rng rng(rep, "random-search");
    double best = -1e300;
    for (int t = 0; t < 100; ++t) best = std::max(best, quadratic(sample_uniform(space, rng), 27.0));
    random.push_back(best);
  }
  const double mb = median(bohb), mr = median(random);
  report(10, "hyperband_and_bohb", table && promotion && mb > mr && mb >= 9.5,
         std::string("bracket table ") + (table ? "ok" : "bad") + ", promotions " +
             (promotion ? "floor(n/3)" : "bad") + ", median best BOHB=" + num(mb, 5) +
             " vs random=" + num(mr, 5) + " (optimum 10)");
}

// ---------------------------------------------------------------------------
// 11. Determinism and persistence
// ---------------------------------------------------------------------------

void criterion_11() {
  const auto dir = scratch_dir("determinism");
  PipelineConfig cfg;
  cfg.seed = 11;
  ScenarioConfig sc;
  sc.grid_size = 31;
  sc.n_timesteps = 20;
  cfg.scenario = sc;
  cfg.holdout_minutes = {690.0};
  cfg.classification.preset = "quick-classification";
  cfg.regression.preset = "quick-regression";
  cfg.out = dir / "a";
  cmd_train(cfg);
  cfg.out = dir / "b";
  cmd_train(cfg);
  int identical = 0, compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    ++compared;
    if (read_file(entry.path()) == read_file(dir / "b" / entry.path().filename())) ++identical;
  }

  bool round_trip = true;
  for (const char* task : {"classification", "regression"}) {
    const auto path = dir / "a" / (std::string(task) + ".plm");
    const auto loaded = load_artifact(path);
    Rng rng(1111);
    const auto base = load_csv(dir / "a" / (std::string(task) + "_test.csv"));
    Matrix values(1000, static_cast<Index>(loaded.feature_names.size()));
    for (Index c = 0; c < values.cols(); ++c) {
      const Vector col = base.column(loaded.feature_names[static_cast<std::size_t>(c)]);
      const double lo = col.minCoeff(), hi = col.maxCoeff();
      for (Index r = 0; r < 1000; ++r) values(r, c) = rng.uniform(lo - 0.1 * (hi - lo), hi + 0.1 * (hi - lo));
    }
    const Dataset rows(loaded.feature_names, values);
    save_artifact(dir / "copy.plm", loaded);
    const auto again = load_artifact(dir / "copy.plm");
    round_trip = round_trip && predict_physical(loaded, rows) == predict_physical(again, rows) &&
                 read_file(path) == read_file(dir / "copy.plm");
  }
  fs::remove_all(dir);
  report(11, "determinism_and_persistence", identical == compared && compared > 0 && round_trip,
         std::to_string(identical) + "/" + std::to_string(compared) +
             " output files byte-identical; save/load on 1000 rows " +
             (round_trip ? "bit-identical" : "differs"));
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number; none runs all of them.
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  std::cout << "plumestack acceptance suite" << std::endl;
  auto guard = [&selected](int id, const char* name, const auto& fn) {
    if (!selected.empty() && selected.count(id) == 0) return;
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, name, false, std::string("threw: ") + e.what());
    }
  };
  guard(1, "metric_oracle_equivalence", criterion_1);
  guard(2, "hand_value_checks", criterion_2);
  guard(3, "preprocessing_fidelity", criterion_3);
  guard(4, "ensemble_dominance_20_seeds", criterion_4);
  FullRun full;
  guard(5, "synthetic_performance_band", [&full] { full = criterion_5(); });
  guard(6, "knn_ranks_last_5_seeds", [&full] { criterion_6(full); });
  guard(7, "learner_invariants", criterion_7);
  guard(8, "stacking_bookkeeping", criterion_8);
  guard(9, "greedy_vs_simplex_grid", criterion_9);
  guard(10, "hyperband_and_bohb", criterion_10);
  guard(11, "determinism_and_persistence", criterion_11);
  std::cout << (g_failed == 0 ? "all criteria passed" : std::to_string(g_failed) + " criteria failed")
            << std::endl;
  return g_failed == 0 ? 0 : 1;
}
