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

#include "plumestack/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "plumestack/presets.hpp"

namespace plumestack {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw UsageError("config: " + where + ": " + msg);
}

void require_map(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) fail(where, "expected a mapping");
}

void check_keys(const YAML::Node& node, const std::string& where,
                const std::set<std::string>& allowed) {
  require_map(node, where);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

template <typename T>
T get(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(where, "invalid value '" + YAML::Dump(node) + "'");
  }
}

template <typename T>
void read_if(const YAML::Node& map, const char* key, T& target, const std::string& where) {
  if (const auto n = map[key]) target = get<T>(n, where + "." + key);
}

ScenarioConfig parse_scenario(const YAML::Node& node) {
  const std::string w = "scenario";
  check_keys(node, w,
             {"grid_size", "cell_m", "n_timesteps", "step_minutes", "start_minutes",
              "release_lat", "release_lon", "release_rate_kg_s", "release_height_m", "wind",
              "dispersion", "target_positive_fraction", "floor_ppm", "peak_ppm", "low_ppm",
              "correlation_cells", "tracer_coupling", "coupling_halo_decades"});
  ScenarioConfig cfg;
  read_if(node, "grid_size", cfg.grid_size, w);
  read_if(node, "cell_m", cfg.cell_m, w);
  read_if(node, "n_timesteps", cfg.n_timesteps, w);
  read_if(node, "step_minutes", cfg.step_minutes, w);
  read_if(node, "start_minutes", cfg.start_minutes, w);
  read_if(node, "release_lat", cfg.release_lat, w);
  read_if(node, "release_lon", cfg.release_lon, w);
  read_if(node, "release_rate_kg_s", cfg.release_rate_kg_s, w);
  read_if(node, "release_height_m", cfg.release_height_m, w);
  read_if(node, "target_positive_fraction", cfg.target_positive_fraction, w);
  read_if(node, "peak_ppm", cfg.peak_ppm, w);
  read_if(node, "low_ppm", cfg.low_ppm, w);
  read_if(node, "correlation_cells", cfg.correlation_cells, w);
  read_if(node, "tracer_coupling", cfg.tracer_coupling, w);
  read_if(node, "coupling_halo_decades", cfg.coupling_halo_decades, w);
  if (const auto f = node["floor_ppm"]) cfg.floor_ppm = get<double>(f, w + ".floor_ppm");
  if (const auto wind = node["wind"]) {
    check_keys(wind, w + ".wind", {"initial_direction_deg", "final_direction_deg", "mean_speed_ms"});
    read_if(wind, "initial_direction_deg", cfg.wind.initial_direction_deg, w + ".wind");
    read_if(wind, "final_direction_deg", cfg.wind.final_direction_deg, w + ".wind");
    read_if(wind, "mean_speed_ms", cfg.wind.mean_speed_ms, w + ".wind");
  }
  if (const auto d = node["dispersion"]) {
    check_keys(d, w + ".dispersion", {"a_y", "b_y", "a_z", "b_z"});
    read_if(d, "a_y", cfg.dispersion.a_y, w + ".dispersion");
    read_if(d, "b_y", cfg.dispersion.b_y, w + ".dispersion");
    read_if(d, "a_z", cfg.dispersion.a_z, w + ".dispersion");
    read_if(d, "b_z", cfg.dispersion.b_z, w + ".dispersion");
  }
  return cfg;
}

ModelSpec parse_member(const YAML::Node& node, Task task, const std::string& where) {
  check_keys(node, where, {"name", "family", "hyperparameters"});
  if (!node["name"] || !node["family"]) fail(where, "members need 'name' and 'family'");
  ModelSpec spec;
  spec.name = get<std::string>(node["name"], where + ".name");
  spec.family = parse_family(get<std::string>(node["family"], where + ".family"));
  spec.task = task;
  if (const auto hp = node["hyperparameters"]) {
    require_map(hp, where + ".hyperparameters");
    for (const auto& kv : hp) {
      set_hyperparameter(spec.hp, kv.first.as<std::string>(),
                         get<std::string>(kv.second, where + ".hyperparameters"));
    }
  }
  spec.validate();
  return spec;
}

TaskConfig parse_task_config(const YAML::Node& node, Task task, TaskConfig cfg,
                             const std::string& where) {
  check_keys(node, where, {"preset", "depth", "ensemble_size", "metric", "layers"});
  read_if(node, "preset", cfg.preset, where);
  if (const auto d = node["depth"]) cfg.depth = get<int>(d, where + ".depth");
  if (const auto e = node["ensemble_size"]) cfg.ensemble_size = get<int>(e, where + ".ensemble_size");
  if (const auto m = node["metric"]) cfg.metric = get<std::string>(m, where + ".metric");
  if (const auto layers = node["layers"]) {
    if (!layers.IsSequence() || layers.size() == 0) fail(where + ".layers", "expected a list");
    std::vector<StackLayerConfig> parsed;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto lw = where + ".layers[" + std::to_string(l) + "]";
      check_keys(layers[l], lw, {"members"});
      const auto members = layers[l]["members"];
      if (!members || !members.IsSequence() || members.size() == 0) {
        fail(lw, "expected a non-empty 'members' list");
      }
      StackLayerConfig layer;
      for (std::size_t m = 0; m < members.size(); ++m) {
        layer.members.push_back(
            parse_member(members[m], task, lw + ".members[" + std::to_string(m) + "]"));
      }
      parsed.push_back(std::move(layer));
    }
    cfg.layers = std::move(parsed);
  }
  return cfg;
}

TuneConfig parse_search(const YAML::Node& node) {
  const std::string w = "search";
  check_keys(node, w,
             {"task", "model", "max_budget", "eta", "total_budget", "gamma", "n_candidates",
              "min_bandwidth", "random_fraction", "bandwidth_factor", "model_based",
              "validation_fraction", "params"});
  TuneConfig t;
  if (const auto task = node["task"]) t.task = parse_task(get<std::string>(task, w + ".task"));
  if (!node["model"]) fail(w, "missing 'model'");
  t.model = parse_member(node["model"], t.task, w + ".model");
  read_if(node, "max_budget", t.options.max_budget, w);
  read_if(node, "eta", t.options.eta, w);
  read_if(node, "total_budget", t.total_budget, w);
  read_if(node, "gamma", t.options.sampler.gamma, w);
  read_if(node, "n_candidates", t.options.sampler.n_candidates, w);
  read_if(node, "min_bandwidth", t.options.sampler.min_bandwidth, w);
  read_if(node, "random_fraction", t.options.sampler.random_fraction, w);
  read_if(node, "bandwidth_factor", t.options.sampler.bandwidth_factor, w);
  read_if(node, "model_based", t.options.model_based, w);
  read_if(node, "validation_fraction", t.validation_fraction, w);
  const auto params = node["params"];
  if (!params || !params.IsSequence() || params.size() == 0) fail(w, "expected a 'params' list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto pw = w + ".params[" + std::to_string(i) + "]";
    const auto p = params[i];
    check_keys(p, pw, {"name", "type", "low", "high", "log", "choices"});
    if (!p["name"] || !p["type"]) fail(pw, "needs 'name' and 'type'");
    const auto name = get<std::string>(p["name"], pw + ".name");
    const auto type = get<std::string>(p["type"], pw + ".type");
    bool log = false;
    read_if(p, "log", log, pw);
    if (type == "categorical") {
      if (!p["choices"]) fail(pw, "categorical parameters need 'choices'");
      t.space.add_categorical(name, get<std::vector<std::string>>(p["choices"], pw + ".choices"));
    } else if (type == "real" || type == "integer") {
      if (!p["low"] || !p["high"]) fail(pw, "numeric parameters need 'low' and 'high'");
      if (type == "real") {
        t.space.add_real(name, get<double>(p["low"], pw), get<double>(p["high"], pw), log);
      } else {
        t.space.add_integer(name, get<long long>(p["low"], pw), get<long long>(p["high"], pw), log);
      }
    } else {
      fail(pw, "type must be real, integer or categorical");
    }
  }
  t.space.validate();
  if (!(t.validation_fraction > 0.0 && t.validation_fraction < 1.0)) {
    fail(w, "validation_fraction must lie in (0, 1)");
  }
  if (t.total_budget < 0.0) fail(w, "total_budget must be >= 0");
  return t;
}

}  // namespace

bool PipelineConfig::wants(Task t) const {
  return task == "both" || task == to_string(t);
}

void PipelineConfig::validate() const {
  if (scenario && input_csv) throw UsageError("config: set either 'scenario' or 'input', not both");
  if (task != "both" && task != "classification" && task != "regression") {
    throw UsageError("config: task must be classification, regression or both");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("config: train_fraction must lie in (0, 1)");
  }
  if (k_folds < 2) throw UsageError("config: k_folds must be >= 2");
  if (scenario) scenario->validate();
  for (const auto* t : {&classification, &regression}) {
    if (t->ensemble_size && *t->ensemble_size < 1) {
      throw UsageError("config: ensemble_size must be >= 1");
    }
    if (t->metric) parse_metric(*t->metric);
  }
}

PipelineConfig parse_pipeline_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw UsageError(std::string("config: YAML parse error: ") + e.what());
  }
  PipelineConfig cfg;
  if (root.IsNull()) return cfg;
  check_keys(root, "config",
             {"seed", "out", "task", "train_fraction", "k_folds", "holdout_minutes", "scenario",
              "input", "classification", "regression", "search"});
  read_if(root, "seed", cfg.seed, "config");
  if (const auto o = root["out"]) cfg.out = get<std::string>(o, "config.out");
  read_if(root, "task", cfg.task, "config");
  read_if(root, "train_fraction", cfg.train_fraction, "config");
  read_if(root, "k_folds", cfg.k_folds, "config");
  read_if(root, "holdout_minutes", cfg.holdout_minutes, "config");
  if (const auto s = root["scenario"]) cfg.scenario = parse_scenario(s);
  if (const auto i = root["input"]) cfg.input_csv = get<std::string>(i, "config.input");
  if (const auto c = root["classification"]) {
    cfg.classification =
        parse_task_config(c, Task::classification, cfg.classification, "classification");
  }
  if (const auto r = root["regression"]) {
    cfg.regression = parse_task_config(r, Task::regression, cfg.regression, "regression");
  }
  if (const auto s = root["search"]) cfg.search = parse_search(s);
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pipeline_config(buf.str());
}

}  // namespace plumestack
