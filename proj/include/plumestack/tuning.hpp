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

// Hyperband scheduling with successive halving, and a kernel-density
// configuration sampler (BOHB).

#ifndef PLUMESTACK_TUNING_HPP
#define PLUMESTACK_TUNING_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "plumestack/core.hpp"

namespace plumestack {

struct ParamDomain {
  enum class Kind { real, integer, categorical };

  std::string name;
  Kind kind = Kind::real;
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  std::vector<std::string> choices;  // categorical only
};

class SearchSpace {
 public:
  SearchSpace& add_real(std::string name, double lo, double hi, bool log = false);
  SearchSpace& add_integer(std::string name, long long lo, long long hi, bool log = false);
  SearchSpace& add_categorical(std::string name, std::vector<std::string> choices);

  const std::vector<ParamDomain>& params() const { return params_; }
  std::size_t dimension() const { return params_.size(); }
  // Throws UsageError on empty ranges, non-positive log bounds or duplicates.
  void validate() const;

 private:
  std::vector<ParamDomain> params_;
};

using ParamValue = std::variant<double, long long, std::string>;
using Config = std::map<std::string, ParamValue>;

std::string format_param(const ParamValue& value);
double param_as_double(const ParamValue& value);

// Maps a config into the unit hypercube (log ranges in log space; categorical
// values to their index).
std::vector<double> to_unit(const SearchSpace& space, const Config& config);
Config from_unit(const SearchSpace& space, const std::vector<double>& unit);

enum class TrialStatus { completed, failed };
enum class Mode { maximize, minimize };

struct Trial {
  int id = 0;
  Config config;
  double budget = 0.0;
  std::optional<double> objective;  // set for completed trials only
  TrialStatus status = TrialStatus::completed;
  int bracket = 0;  // s
  int rung = 0;

  // Failed trials rank worst.
  double ranking_value(Mode mode) const;
};

struct Rung {
  int n_configs = 0;
  double budget = 0.0;
  bool operator==(const Rung&) const = default;
};

struct Bracket {
  int s = 0;
  std::vector<Rung> rungs;
  int evaluations() const;
  double total_budget() const;
};

// Brackets s = s_max ... 0 with s_max = floor(log_eta R).
std::vector<Bracket> hyperband_schedule(double max_budget, int eta);

struct SamplerOptions {
  double gamma = 0.15;
  int n_candidates = 24;
  double min_bandwidth = 1e-3;
  // Share of draws taken uniformly once the model is active.
  double random_fraction = 1.0 / 3.0;
  // Kernel widening applied when drawing candidates, not when scoring them.
  double bandwidth_factor = 3.0;
  // Observations needed at a budget before the density model is used;
  // unset means dimension + 1.
  std::optional<int> min_points;
};

// Uniform draw until some budget holds enough completed trials; afterwards a
// random_fraction of draws stay uniform and the rest take the best of
// n_candidates draws from the good-trial density by the ratio good density /
// bad density, fitted at the largest such budget.
Config sample_config(const SearchSpace& space, const std::vector<Trial>& history,
                     Rng& rng, Mode mode = Mode::maximize,
                     const SamplerOptions& options = {});

Config sample_uniform(const SearchSpace& space, Rng& rng);

using Objective = std::function<double(const Config&, double budget)>;

struct SearchOptions {
  double max_budget = 27.0;  // R
  int eta = 3;
  SamplerOptions sampler;
  // Uniform sampling throughout (plain Hyperband) when false.
  bool model_based = true;
};

struct SearchResult {
  Trial best;
  std::vector<Trial> history;
  std::vector<Bracket> brackets_run;
};

// Runs brackets in schedule order, cycling, while the summed budget of the
// next bracket fits in total_budget; the first bracket always runs. A throwing
// objective marks its trial failed.
SearchResult run_search(const SearchSpace& space, const Objective& objective,
                        double total_budget, Mode mode, std::uint64_t seed,
                        const SearchOptions& options = {});

// Columns: trial_id, one per parameter, budget, objective, status, bracket,
// rung.
std::string history_csv(const SearchSpace& space, const std::vector<Trial>& history);
void write_history_csv(const std::filesystem::path& path, const SearchSpace& space,
                       const std::vector<Trial>& history);

}  // namespace plumestack

#endif  // PLUMESTACK_TUNING_HPP
