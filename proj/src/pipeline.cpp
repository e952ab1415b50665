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

#include "plumestack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace plumestack {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string task_stem(Task t) { return std::string(to_string(t)); }

void log_line(const std::string& msg) { std::cerr << "[plumestack] " << msg << std::endl; }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Preparation
// ---------------------------------------------------------------------------

Dataset load_or_generate(const PipelineConfig& cfg) {
  if (cfg.input_csv) return load_csv(*cfg.input_csv);
  ScenarioConfig scenario = cfg.scenario.value_or(ScenarioConfig{});
  scenario.seed = derive_seed(cfg.seed, "generate");
  return generate_scenario(scenario);
}

HoldoutSplit split_holdout(const Dataset& ds, const std::vector<double>& minutes) {
  if (minutes.empty() || !ds.has_column("time")) return {ds, ds.select_rows({})};
  const Vector time = ds.column("time");
  std::vector<Index> kept, held;
  for (Index r = 0; r < ds.n_rows(); ++r) {
    const bool hold = std::find(minutes.begin(), minutes.end(), time[r]) != minutes.end();
    (hold ? held : kept).push_back(r);
  }
  return {ds.select_rows(kept), ds.select_rows(held)};
}

PreparedData prepare(const Dataset& scenario, double train_fraction, std::uint64_t seed) {
  if (!scenario.has_column(kTracerColumn)) {
    throw DataError(std::string("input lacks the '") + kTracerColumn + "' column");
  }
  std::vector<std::string> candidates;
  const auto& meta = metadata_columns();
  for (const auto& name : scenario.column_names()) {
    if (name == kTracerColumn || name == kLeakageColumn) continue;
    if (std::find(meta.begin(), meta.end(), name) != meta.end()) continue;
    candidates.push_back(name);
  }
  if (candidates.empty()) throw DataError("input has no feature columns");

  std::vector<std::string> kept_columns = candidates;
  kept_columns.push_back(kTracerColumn);
  const auto drop = drop_constant_columns(scenario.select_columns(kept_columns), candidates);
  PreparedData out;
  out.dropped = drop.dropped;
  for (const auto& name : candidates) {
    if (std::find(drop.dropped.begin(), drop.dropped.end(), name) == drop.dropped.end()) {
      out.features.push_back(name);
    }
  }
  if (out.features.empty()) throw DataError("every feature column is constant");
  const Dataset base = drop.dataset.with_target(std::string(kTracerColumn));
  const Vector tracer = base.column(kTracerColumn);
  const Index positives = (tracer.array() > 0.0).count();

  // Classification branch.
  {
    auto& c = out.classification;
    c.task = Task::classification;
    c.features = out.features;
    c.target = kLeakageColumn;
    c.source_rows = base.n_rows();
    c.positives = positives;
    const Dataset labelled = derive_binary_label(base, kTracerColumn, kLeakageColumn);
    const Dataset balanced = undersample_majority(labelled, kLeakageColumn, seed);
    auto split = random_split(balanced, train_fraction, seed, std::string(kLeakageColumn));
    c.train = std::move(split.train);
    c.test = std::move(split.test);
  }

  // Regression branch.
  {
    auto& r = out.regression;
    r.task = Task::regression;
    r.features = out.features;
    r.target = kTracerColumn;
    r.source_rows = base.n_rows();
    r.positives = positives;
    std::vector<Index> rows;
    for (Index i = 0; i < tracer.size(); ++i) {
      if (tracer[i] > 0.0) rows.push_back(i);
    }
    if (rows.size() < 4) throw DataError("too few rows with tracer > 0 for regression");
    auto split = random_split(base.select_rows(rows), train_fraction, seed);
    std::vector<std::string> scaled = out.features;
    scaled.push_back(kTracerColumn);
    r.standardizer = fit_standardizer(split.train, scaled);
    r.train = r.standardizer->apply(split.train);
    r.test = std::move(split.test);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

ResolvedStack resolve_stack(const TaskConfig& cfg, Task task, std::uint64_t seed, int k_folds) {
  ResolvedStack r;
  if (cfg.layers) {
    r.preset = "custom";
    r.layers = *cfg.layers;
    r.options.ensemble_iterations = 27;
  } else {
    const auto preset = make_preset(cfg.preset, cfg.depth);
    if (preset.task != task) {
      throw UsageError("preset '" + cfg.preset + "' is not a " + std::string(to_string(task)) +
                       " preset");
    }
    r.preset = preset.name;
    r.layers = preset.layers;
    r.options.ensemble_iterations = preset.ensemble_iterations;
  }
  for (const auto& layer : r.layers) {
    for (const auto& m : layer.members) {
      if (m.task != task) throw UsageError("member '" + m.name + "' has the wrong task");
    }
  }
  if (cfg.ensemble_size) r.options.ensemble_iterations = *cfg.ensemble_size;
  if (cfg.metric) r.options.metric = parse_metric(*cfg.metric);
  r.options.k_folds = k_folds;
  r.options.seed = seed;
  seed_members(r.layers, seed);
  return r;
}

ModelArtifact train_task(const PreparedTask& data, const ResolvedStack& stack,
                         std::uint64_t master_seed) {
  const Vector y = data.train.column(data.target);
  if (data.task == Task::classification) {
    const double mean = y.mean();
    if (mean <= 0.0 || mean >= 1.0) throw DataError("training data holds a single class");
  }
  ModelArtifact a;
  a.task = data.task;
  a.preset = stack.preset;
  a.feature_names = data.features;
  a.target_name = data.target;
  a.standardizer = data.standardizer;
  a.master_seed = master_seed;
  a.data_fingerprint = fingerprint(data.train);
  a.stack = fit_stack(data.train.feature_matrix(data.features), y, data.features, stack.layers,
                      data.task, stack.options);
  const SelectionMetric metric = stack.options.metric.value_or(default_metric(data.task));
  for (std::size_t l = 0; l < a.stack.layers.size(); ++l) {
    for (const auto& bag : a.stack.layers[l]) {
      a.validation[StackedEnsemble::member_label(bag.spec.name, l)] = metric.evaluate(y, bag.oof);
    }
    a.validation[StackedEnsemble::ensemble_label(l)] = a.stack.layer_ensembles[l].score;
  }
  return a;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

double EvaluationReport::headline(const ReportRow& row) const {
  return task == Task::classification ? row.classification.accuracy : row.regression.r2;
}

const ReportRow& EvaluationReport::row(const std::string& model) const {
  for (const auto& r : rows) {
    if (r.model == model) return r;
  }
  throw DataError("report has no row '" + model + "'");
}

std::string EvaluationReport::csv() const {
  std::ostringstream out;
  auto cell = [](const ClassificationReport& c, const char* metric, double v) {
    return c.is_degenerate(metric) ? std::string("NA") : format_real(v);
  };
  if (task == Task::classification) {
    out << "Model,Accuracy (%),F1,AUC_ROC,Precision,Recall,MCC\n";
    for (const auto& r : rows) {
      const auto& c = r.classification;
      out << r.model << ',' << format_real(100.0 * c.accuracy) << ',' << cell(c, "f1", c.f1) << ','
          << cell(c, "auc_roc", c.auc_roc) << ',' << cell(c, "precision", c.precision) << ','
          << cell(c, "recall", c.recall) << ',' << cell(c, "mcc", c.mcc) << '\n';
    }
  } else {
    out << "Model,RMSE,MSE,Test R2,Validation R2\n";
    for (const auto& r : rows) {
      const auto& g = r.regression;
      out << r.model << ',' << format_real(g.rmse) << ',' << format_real(g.mse) << ','
          << format_real(g.r2) << ',' << (r.validation ? format_real(*r.validation) : "NA")
          << '\n';
    }
  }
  return out.str();
}

std::string EvaluationReport::markdown() const {
  std::ostringstream out;
  auto cell = [](const ClassificationReport& c, const char* metric, double v) {
    return c.is_degenerate(metric) ? std::string("n/a") : fixed(v, 3);
  };
  if (task == Task::classification) {
    out << "| Model | Accuracy (%) | F1 | AUC_ROC | Precision | Recall | MCC |\n"
        << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      const auto& c = r.classification;
      out << "| " << r.model << " | " << fixed(100.0 * c.accuracy, 1) << " | "
          << cell(c, "f1", c.f1) << " | " << cell(c, "auc_roc", c.auc_roc) << " | "
          << cell(c, "precision", c.precision) << " | " << cell(c, "recall", c.recall) << " | "
          << cell(c, "mcc", c.mcc) << " |\n";
    }
  } else {
    out << "| Model | RMSE | MSE | Test R2 | Validation R2 |\n|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      const auto& g = r.regression;
      out << "| " << r.model << " | " << fixed(g.rmse, 3) << " | " << fixed(g.mse, 3) << " | "
          << fixed(g.r2, 3) << " | " << (r.validation ? fixed(*r.validation, 3) : "n/a")
          << " |\n";
    }
  }
  return out.str();
}

namespace {

Matrix model_space_features(const ModelArtifact& a, const Dataset& ds) {
  for (const auto& name : a.feature_names) {
    if (!ds.has_column(name)) {
      throw DataError("input lacks feature column '" + name + "' required by the model");
    }
  }
  Matrix X = ds.feature_matrix(a.feature_names);
  if (a.standardizer) {
    for (std::size_t c = 0; c < a.feature_names.size(); ++c) {
      X.col(static_cast<Index>(c)) =
          a.standardizer->apply_column(a.feature_names[c], X.col(static_cast<Index>(c)));
    }
  }
  return X;
}

Vector truth_of(const ModelArtifact& a, const Dataset& ds) {
  if (a.task == Task::classification) {
    if (ds.has_column(kLeakageColumn)) return ds.column(kLeakageColumn);
    if (ds.has_column(kTracerColumn)) {
      return (ds.column(kTracerColumn).array() > 0.0).cast<double>();
    }
    throw DataError("evaluation data needs a 'leakage' or tracer column");
  }
  if (!ds.has_column(a.target_name)) {
    throw DataError("evaluation data lacks the target column '" + a.target_name + "'");
  }
  const Vector y = ds.column(a.target_name);
  return a.standardizer ? a.standardizer->apply_column(a.target_name, y) : y;
}

}  // namespace

EvaluationReport evaluate_artifact(const ModelArtifact& a, const Dataset& test) {
  const Vector y = truth_of(a, test);
  const auto preds = a.stack.member_predictions(model_space_features(a, test));
  EvaluationReport report;
  report.task = a.task;
  auto add = [&](const std::string& label, const Vector& pred) {
    ReportRow row;
    row.model = label;
    if (a.task == Task::classification) {
      row.classification = evaluate_scores(y, pred);
    } else {
      row.regression = regression_metrics(y, pred);
    }
    if (const auto it = a.validation.find(label); it != a.validation.end()) {
      row.validation = it->second;
    }
    report.rows.push_back(std::move(row));
  };
  for (std::size_t l = preds.size(); l-- > 0;) {
    add(StackedEnsemble::ensemble_label(l), a.stack.layer_ensembles[l].combine(preds[l]));
    for (std::size_t m = 0; m < preds[l].size(); ++m) {
      add(StackedEnsemble::member_label(a.stack.layers[l][m].spec.name, l), preds[l][m]);
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [&report](const ReportRow& x, const ReportRow& z) {
                     return report.headline(x) > report.headline(z);
                   });
  return report;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

json stats_json(const ScenarioSummary& s) {
  json columns = json::object();
  for (const auto& c : s.columns) {
    columns[c.name] = {{"min", c.min}, {"q1", c.q1}, {"median", c.median}, {"q3", c.q3},
                       {"max", c.max}};
  }
  return {{"rows", s.n_rows}, {"positive_tracer", s.positive_tracer}, {"columns", columns}};
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

json hyperparameters_json(const ModelSpec& spec) {
  json hp = json::object();
  for (const auto& [k, v] : hyperparameter_entries(spec.hp)) hp[k] = v;
  return hp;
}

json training_log(const ModelArtifact& a, const PreparedTask& data, const EvaluationReport& test) {
  json layers = json::array();
  for (std::size_t l = 0; l < a.stack.layers.size(); ++l) {
    json members = json::array();
    for (const auto& bag : a.stack.layers[l]) {
      const auto label = StackedEnsemble::member_label(bag.spec.name, l);
      members.push_back({{"label", label},
                         {"family", to_string(bag.spec.family)},
                         {"seed", bag.spec.seed},
                         {"hyperparameters", hyperparameters_json(bag.spec)},
                         {"oof_metric", a.validation.at(label)}});
    }
    const auto& ens = a.stack.layer_ensembles[l];
    json weights = json::object();
    for (std::size_t m = 0; m < ens.weights.size(); ++m) {
      if (ens.weights[m] > 0.0) {
        weights[StackedEnsemble::member_label(a.stack.layers[l][m].spec.name, l)] = ens.weights[m];
      }
    }
    layers.push_back({{"layer", l + 1},
                      {"n_features", a.stack.layers[l].front().fold_models.front().n_features()},
                      {"members", members},
                      {"ensemble",
                       {{"label", StackedEnsemble::ensemble_label(l)},
                        {"metric", ens.metric},
                        {"oof_score", ens.score},
                        {"iterations", ens.iterations},
                        {"ensemble_size", ens.ensemble_size},
                        {"weights", weights}}}});
  }
  json rows = json::array();
  for (const auto& r : test.rows) {
    if (a.task == Task::classification) {
      const auto& c = r.classification;
      rows.push_back({{"model", r.model}, {"accuracy", c.accuracy}, {"f1", c.f1},
                      {"auc_roc", c.auc_roc}, {"precision", c.precision}, {"recall", c.recall},
                      {"mcc", c.mcc}, {"degenerate", c.degenerate}});
    } else {
      const auto& g = r.regression;
      rows.push_back({{"model", r.model}, {"rmse", g.rmse}, {"mse", g.mse}, {"r2", g.r2},
                      {"validation_r2", r.validation ? json(*r.validation) : json(nullptr)}});
    }
  }
  return {{"preset", a.preset},
          {"features", a.feature_names},
          {"target", a.target_name},
          {"source_rows", data.source_rows},
          {"positives", data.positives},
          {"train_rows", data.train.n_rows()},
          {"test_rows", data.test.n_rows()},
          {"data_fingerprint", a.data_fingerprint},
          {"folds", a.stack.folds.k},
          {"layers", layers},
          {"test", rows}};
}

}  // namespace

void cmd_generate(const PipelineConfig& cfg) {
  if (cfg.input_csv) throw UsageError("generate works from a scenario, not an input CSV");
  fs::create_directories(cfg.out);
  const Dataset ds = load_or_generate(cfg);
  write_csv(cfg.out / "scenario.csv", ds);
  write_json(cfg.out / "scenario_stats.json", stats_json(scenario_stats(ds)));
  log_line("wrote " + std::to_string(ds.n_rows()) + " rows to " + (cfg.out / "scenario.csv").string());
}

void cmd_train(const PipelineConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out);
  const Dataset data = load_or_generate(cfg);
  const auto holdout = split_holdout(data, cfg.holdout_minutes);
  if (holdout.held_out.n_rows() > 0) write_csv(cfg.out / "holdout.csv", holdout.held_out);
  const PreparedData prepared = prepare(holdout.kept, cfg.train_fraction, cfg.seed);
  log_line("features: " + std::to_string(prepared.features.size()) + ", dropped constant: " +
           std::to_string(prepared.dropped.size()));

  json log = {{"master_seed", cfg.seed},
              {"data_rows", data.n_rows()},
              {"holdout_rows", holdout.held_out.n_rows()},
              {"holdout_minutes", cfg.holdout_minutes},
              {"dropped_constant_columns", prepared.dropped}};
  for (const Task task : {Task::classification, Task::regression}) {
    if (!cfg.wants(task)) continue;
    const auto& data_t = task == Task::classification ? prepared.classification : prepared.regression;
    const auto& task_cfg = task == Task::classification ? cfg.classification : cfg.regression;
    ResolvedStack stack = resolve_stack(task_cfg, task, cfg.seed, cfg.k_folds);
    const auto started = std::chrono::steady_clock::now();
    stack.options.progress = [&started](const std::string& label) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      log_line("  fitting " + label + " (" + fixed(s, 1) + " s elapsed)");
    };
    log_line("training " + task_stem(task) + " stack '" + stack.preset + "' on " +
             std::to_string(data_t.train.n_rows()) + " rows");
    const ModelArtifact artifact = train_task(data_t, stack, cfg.seed);
    save_artifact(cfg.out / (task_stem(task) + ".plm"), artifact);
    write_csv(cfg.out / (task_stem(task) + "_test.csv"), data_t.test);
    const auto report = evaluate_artifact(artifact, data_t.test);
    write_file_atomic(cfg.out / (task_stem(task) + "_report.csv"), report.csv());
    write_file_atomic(cfg.out / (task_stem(task) + "_report.md"), report.markdown());
    log[task_stem(task)] = training_log(artifact, data_t, report);
    log_line(task_stem(task) + " done: best row " + report.rows.front().model);
  }
  write_json(cfg.out / "train_log.json", log);
}

EvaluationReport cmd_evaluate(const fs::path& artifact_path, const fs::path& data_path,
                              const fs::path& out_dir) {
  const ModelArtifact a = load_artifact(artifact_path);
  const Dataset test = load_csv(data_path);
  const auto report = evaluate_artifact(a, test);
  fs::create_directories(out_dir);
  const auto stem = artifact_path.stem().string();
  write_file_atomic(out_dir / (stem + "_report.csv"), report.csv());
  write_file_atomic(out_dir / (stem + "_report.md"), report.markdown());
  return report;
}

namespace {

std::string clock_label(double minutes) {
  const auto total = static_cast<long long>(std::llround(minutes));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld%02lld", (total / 60) % 24, total % 60);
  return buf;
}

}  // namespace

void cmd_predict(const fs::path& artifact_path, const fs::path& data_path, const fs::path& out_dir,
                 const PredictOptions& options) {
  const ModelArtifact a = load_artifact(artifact_path);
  const Dataset input = load_csv(data_path);
  const Vector raw = predict_physical(a, input);

  std::vector<std::string> names;
  std::vector<Vector> columns;
  for (const auto& meta : metadata_columns()) {
    if (input.has_column(meta)) {
      names.push_back(meta);
      columns.push_back(input.column(meta));
    }
  }
  Vector prediction = raw;
  if (a.task == Task::classification) {
    names.push_back("score");
    columns.push_back(raw);
    prediction = to_labels(raw);
  } else if (options.detector) {
    const ModelArtifact detector = load_artifact(*options.detector);
    if (detector.task != Task::classification) {
      throw UsageError("--detector must be a classification artifact");
    }
    const Vector detected = to_labels(predict_model_space(detector, input));
    prediction = (detected.array() > 0.0).select(raw, 0.0);
    names.push_back("detected");
    columns.push_back(detected);
  }
  names.push_back("prediction");
  columns.push_back(prediction);

  Matrix values(input.n_rows(), static_cast<Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) values.col(static_cast<Index>(c)) = columns[c];
  fs::create_directories(out_dir);
  write_csv(out_dir / "predictions.csv", Dataset(names, std::move(values)));

  if (!options.grid) return;
  for (const char* needed : {"time", "latitude", "longitude"}) {
    if (!input.has_column(needed)) {
      throw DataError(std::string("grid export needs a '") + needed + "' column");
    }
  }
  std::optional<Vector> actual;
  if (a.task == Task::regression && input.has_column(a.target_name)) {
    actual = input.column(a.target_name);
  } else if (a.task == Task::classification &&
             (input.has_column(kLeakageColumn) || input.has_column(kTracerColumn))) {
    actual = truth_of(a, input);
  }
  const Vector time = input.column("time");
  std::map<double, std::vector<Index>> by_time;
  for (Index r = 0; r < time.size(); ++r) by_time[time[r]].push_back(r);
  for (const auto& [minutes, rows] : by_time) {
    std::vector<std::string> grid_names{"latitude", "longitude"};
    if (actual) grid_names.push_back("actual");
    grid_names.push_back("predicted");
    Matrix g(static_cast<Index>(rows.size()), static_cast<Index>(grid_names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = rows[i];
      const auto gi = static_cast<Index>(i);
      Index c = 0;
      g(gi, c++) = input.values()(r, input.column_index("latitude"));
      g(gi, c++) = input.values()(r, input.column_index("longitude"));
      if (actual) g(gi, c++) = (*actual)[r];
      g(gi, c) = prediction[r];
    }
    write_csv(out_dir / ("grid_" + clock_label(minutes) + ".csv"), Dataset(grid_names, std::move(g)));
  }
}

SearchResult cmd_tune(const PipelineConfig& cfg) {
  if (!cfg.search) throw UsageError("tune needs a 'search' section in the config");
  const TuneConfig& t = *cfg.search;
  fs::create_directories(cfg.out);
  const Dataset data = load_or_generate(cfg);
  const PreparedData prepared =
      prepare(split_holdout(data, cfg.holdout_minutes).kept, cfg.train_fraction, cfg.seed);
  const PreparedTask& task_data =
      t.task == Task::classification ? prepared.classification : prepared.regression;
  const auto stratify = t.task == Task::classification ? std::optional<std::string>(task_data.target)
                                                       : std::nullopt;
  const auto split = random_split(task_data.train, 1.0 - t.validation_fraction,
                                  derive_seed(cfg.seed, "tune"), stratify);
  const Matrix X = split.train.feature_matrix(task_data.features);
  const Vector y = split.train.column(task_data.target);
  const Matrix Xv = split.test.feature_matrix(task_data.features);
  const Vector yv = split.test.column(task_data.target);
  const SelectionMetric metric = default_metric(t.task);
  const std::vector<Index> order = Rng(cfg.seed, "tune-subset").permutation(X.rows());

  auto evaluate = [&](ModelSpec spec, double budget) {
    spec.seed = derive_seed(cfg.seed, "model:" + spec.name);
    Matrix Xs = X;
    Vector ys = y;
    switch (spec.family) {
      case Family::gbm:
        spec.hp.num_boost_round = std::max(1, static_cast<int>(std::lround(budget)));
        break;
      case Family::random_forest:
      case Family::extra_trees:
        spec.hp.n_estimators = std::max(1, static_cast<int>(std::lround(budget)));
        break;
      case Family::tree:
      case Family::knn: {
        const double frac = std::min(1.0, budget / t.options.max_budget);
        const auto n = std::max<Index>(
            std::min<Index>(X.rows(), std::max(spec.hp.k_neighbors, 2)),
            static_cast<Index>(std::ceil(frac * static_cast<double>(X.rows()))));
        Xs.resize(n, X.cols());
        ys.resize(n);
        for (Index i = 0; i < n; ++i) {
          Xs.row(i) = X.row(order[static_cast<std::size_t>(i)]);
          ys[i] = y[order[static_cast<std::size_t>(i)]];
        }
        break;
      }
    }
    spec.validate();
    return metric.evaluate(yv, fit(Xs, ys, spec).predict(Xv));
  };

  const Objective objective = [&](const Config& config, double budget) {
    ModelSpec spec = t.model;
    for (const auto& [name, value] : config) set_hyperparameter(spec.hp, name, format_param(value));
    return evaluate(spec, budget);
  };
  double total = t.total_budget;
  if (total <= 0.0) {
    for (const auto& b : hyperband_schedule(t.options.max_budget, t.options.eta)) {
      total += b.total_budget();
    }
  }
  log_line("tuning " + t.model.name + " over " + std::to_string(t.space.dimension()) +
           " parameters, total budget " + format_real(total));
  const SearchResult result = run_search(t.space, objective, total, Mode::maximize, cfg.seed, t.options);
  const double baseline = evaluate(t.model, t.options.max_budget);

  write_history_csv(cfg.out / "tune_history.csv", t.space, result.history);
  json best = json::object();
  for (const auto& [name, value] : result.best.config) best[name] = format_param(value);
  write_json(cfg.out / "tune_result.json",
             {{"model", t.model.name},
              {"metric", metric.name()},
              {"best_config", best},
              {"best_budget", result.best.budget},
              {"best_objective", *result.best.objective},
              {"baseline_objective", baseline},
              {"evaluations", result.history.size()},
              {"brackets", result.brackets_run.size()}});
  log_line("best " + metric.name() + " " + format_real(*result.best.objective) + " vs baseline " +
           format_real(baseline));
  return result;
}

void cmd_report(const fs::path& run_dir) {
  std::ostringstream md;
  md << "# plumestack report\n";
  bool any = false;
  for (const Task task : {Task::classification, Task::regression}) {
    const auto artifact_path = run_dir / (task_stem(task) + ".plm");
    const auto test_path = run_dir / (task_stem(task) + "_test.csv");
    if (!fs::exists(artifact_path) || !fs::exists(test_path)) continue;
    any = true;
    const ModelArtifact a = load_artifact(artifact_path);
    const auto report = evaluate_artifact(a, load_csv(test_path));
    md << "\n## " << (task == Task::classification ? "Classification" : "Regression")
       << " (preset " << a.preset << ", seed " << a.master_seed << ")\n\n"
       << report.markdown();
    for (std::size_t l = 0; l < a.stack.layer_ensembles.size(); ++l) {
      const auto& ens = a.stack.layer_ensembles[l];
      md << "\n" << StackedEnsemble::ensemble_label(l) << " (ensemble size " << ens.ensemble_size
         << "):";
      for (std::size_t m = 0; m < ens.weights.size(); ++m) {
        if (ens.weights[m] > 0.0) {
          md << ' ' << StackedEnsemble::member_label(a.stack.layers[l][m].spec.name, l) << '='
             << fixed(ens.weights[m], 3);
        }
      }
      md << '\n';
    }
  }
  if (!any) throw DataError("no trained artifacts found in '" + run_dir.string() + "'");
  write_file_atomic(run_dir / "report.md", md.str());
}

}  // namespace plumestack
