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

#include "plumestack/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "plumestack/tabular.hpp"

namespace plumestack {

// ---------------------------------------------------------------------------
// Search space
// ---------------------------------------------------------------------------

SearchSpace& SearchSpace::add_real(std::string name, double lo, double hi, bool log) {
  params_.push_back({std::move(name), ParamDomain::Kind::real, lo, hi, log, {}});
  return *this;
}

SearchSpace& SearchSpace::add_integer(std::string name, long long lo, long long hi,
                                      bool log) {
  params_.push_back({std::move(name), ParamDomain::Kind::integer, static_cast<double>(lo),
                     static_cast<double>(hi), log, {}});
  return *this;
}

SearchSpace& SearchSpace::add_categorical(std::string name, std::vector<std::string> choices) {
  ParamDomain p;
  p.name = std::move(name);
  p.kind = ParamDomain::Kind::categorical;
  p.choices = std::move(choices);
  params_.push_back(std::move(p));
  return *this;
}

void SearchSpace::validate() const {
  std::set<std::string> seen;
  for (const auto& p : params_) {
    if (!seen.insert(p.name).second) throw UsageError("duplicate search parameter '" + p.name + "'");
    if (p.kind == ParamDomain::Kind::categorical) {
      if (p.choices.empty()) throw UsageError("'" + p.name + "' has no choices");
      for (const auto& c : p.choices) {
        if (c.empty() || c.find_first_of(",\n\"") != std::string::npos) {
          throw UsageError("'" + p.name + "': invalid choice '" + c + "'");
        }
      }
      continue;
    }
    if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || p.lo > p.hi) {
      throw UsageError("'" + p.name + "' has an empty range");
    }
    if (p.log && !(p.lo > 0.0)) throw UsageError("'" + p.name + "': log range must be positive");
  }
}

std::string format_param(const ParamValue& value) {
  if (const auto* d = std::get_if<double>(&value)) return format_real(*d);
  if (const auto* i = std::get_if<long long>(&value)) return std::to_string(*i);
  return std::get<std::string>(value);
}

double param_as_double(const ParamValue& value) {
  if (const auto* d = std::get_if<double>(&value)) return *d;
  if (const auto* i = std::get_if<long long>(&value)) return static_cast<double>(*i);
  throw UsageError("categorical value '" + std::get<std::string>(value) + "' is not numeric");
}

namespace {

double to_unit_scalar(const ParamDomain& p, double v) {
  if (p.hi == p.lo) return 0.0;
  if (p.log) return (std::log(v) - std::log(p.lo)) / (std::log(p.hi) - std::log(p.lo));
  return (v - p.lo) / (p.hi - p.lo);
}

double from_unit_scalar(const ParamDomain& p, double u) {
  u = std::clamp(u, 0.0, 1.0);
  if (p.log) return std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)));
  return p.lo + u * (p.hi - p.lo);
}

std::size_t choice_index(const ParamDomain& p, const ParamValue& v) {
  const auto* s = std::get_if<std::string>(&v);
  if (!s) throw UsageError("'" + p.name + "' expects a categorical value");
  const auto it = std::find(p.choices.begin(), p.choices.end(), *s);
  if (it == p.choices.end()) throw UsageError("'" + p.name + "': unknown choice '" + *s + "'");
  return static_cast<std::size_t>(it - p.choices.begin());
}

}  // namespace

// Categorical entries of the unit vector hold the choice index.
std::vector<double> to_unit(const SearchSpace& space, const Config& config) {
  std::vector<double> unit;
  for (const auto& p : space.params()) {
    const auto it = config.find(p.name);
    if (it == config.end()) throw UsageError("config lacks '" + p.name + "'");
    if (p.kind == ParamDomain::Kind::categorical) {
      unit.push_back(static_cast<double>(choice_index(p, it->second)));
    } else {
      unit.push_back(to_unit_scalar(p, param_as_double(it->second)));
    }
  }
  return unit;
}

Config from_unit(const SearchSpace& space, const std::vector<double>& unit) {
  Config config;
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    const auto& p = space.params()[d];
    switch (p.kind) {
      case ParamDomain::Kind::real:
        config[p.name] = from_unit_scalar(p, unit[d]);
        break;
      case ParamDomain::Kind::integer: {
        const double v = std::round(from_unit_scalar(p, unit[d]));
        config[p.name] = static_cast<long long>(std::clamp(v, p.lo, p.hi));
        break;
      }
      case ParamDomain::Kind::categorical: {
        const auto i = std::min(static_cast<std::size_t>(std::max(0.0, unit[d])),
                                p.choices.size() - 1);
        config[p.name] = p.choices[i];
        break;
      }
    }
  }
  return config;
}

double Trial::ranking_value(Mode mode) const {
  if (status == TrialStatus::completed && objective) return *objective;
  return mode == Mode::maximize ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Hyperband
// ---------------------------------------------------------------------------

int Bracket::evaluations() const {
  int total = 0;
  for (const auto& r : rungs) total += r.n_configs;
  return total;
}

double Bracket::total_budget() const {
  double total = 0.0;
  for (const auto& r : rungs) total += r.n_configs * r.budget;
  return total;
}

std::vector<Bracket> hyperband_schedule(double max_budget, int eta) {
  if (!(max_budget >= 1.0) || !std::isfinite(max_budget)) {
    throw UsageError("hyperband needs max_budget >= 1");
  }
  if (eta < 2) throw UsageError("hyperband needs eta >= 2");
  // Integer search avoids floating-point log rounding at exact powers.
  int s_max = 0;
  double power = static_cast<double>(eta);
  while (power <= max_budget * (1.0 + 1e-12)) {
    ++s_max;
    power *= eta;
  }
  std::vector<Bracket> brackets;
  for (int s = s_max; s >= 0; --s) {
    Bracket b;
    b.s = s;
    const double eta_s = std::pow(static_cast<double>(eta), s);
    int n = static_cast<int>(std::ceil((s_max + 1.0) / (s + 1.0) * eta_s - 1e-9));
    double budget = max_budget / eta_s;
    for (int i = 0; i <= s && n > 0; ++i) {
      b.rungs.push_back({n, budget});
      n /= eta;
      budget *= eta;
    }
    brackets.push_back(std::move(b));
  }
  return brackets;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

Config sample_uniform(const SearchSpace& space, Rng& rng) {
  Config config;
  for (const auto& p : space.params()) {
    switch (p.kind) {
      case ParamDomain::Kind::real:
        config[p.name] = from_unit_scalar(p, rng.uniform());
        break;
      case ParamDomain::Kind::integer: {
        if (p.log) {
          const double v = std::exp(rng.uniform(std::log(p.lo), std::log(p.hi + 1.0)));
          config[p.name] = static_cast<long long>(std::clamp(std::floor(v), p.lo, p.hi));
        } else {
          const auto width = static_cast<std::uint64_t>(p.hi - p.lo) + 1;
          config[p.name] = static_cast<long long>(p.lo) + static_cast<long long>(rng.below(width));
        }
        break;
      }
      case ParamDomain::Kind::categorical:
        config[p.name] = p.choices[static_cast<std::size_t>(rng.below(p.choices.size()))];
        break;
    }
  }
  return config;
}

namespace {

// Product-kernel density over unit-space points: Gaussian per numeric
// dimension, smoothed frequencies per categorical one.
class Density {
 public:
  Density(const SearchSpace& space, std::vector<std::vector<double>> points,
          double min_bandwidth)
      : space_(space), points_(std::move(points)) {
    const std::size_t d = space.dimension();
    const auto n = static_cast<double>(points_.size());
    const double scott = std::pow(n, -1.0 / (static_cast<double>(d) + 4.0));
    bandwidth_.assign(d, min_bandwidth);
    frequencies_.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      const auto& p = space.params()[k];
      if (p.kind == ParamDomain::Kind::categorical) {
        const auto m = p.choices.size();
        frequencies_[k].assign(m, 1.0);
        for (const auto& x : points_) frequencies_[k][static_cast<std::size_t>(x[k])] += 1.0;
        for (auto& f : frequencies_[k]) f /= n + static_cast<double>(m);
        continue;
      }
      double mean = 0.0;
      for (const auto& x : points_) mean += x[k];
      mean /= n;
      double var = 0.0;
      for (const auto& x : points_) var += (x[k] - mean) * (x[k] - mean);
      const double sd = points_.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
      bandwidth_[k] = std::max(min_bandwidth, sd * scott);
    }
  }

  std::vector<double> draw(Rng& rng, double bandwidth_factor) const {
    const auto& centre = points_[static_cast<std::size_t>(rng.below(points_.size()))];
    std::vector<double> x(centre.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (space_.params()[k].kind == ParamDomain::Kind::categorical) {
        double u = rng.uniform();
        std::size_t c = 0;
        while (c + 1 < frequencies_[k].size() && u >= frequencies_[k][c]) u -= frequencies_[k][c++];
        x[k] = static_cast<double>(c);
        continue;
      }
      double v = centre[k];
      for (int attempt = 0; attempt < 16; ++attempt) {
        v = centre[k] + bandwidth_factor * bandwidth_[k] * rng.normal();
        if (v >= 0.0 && v <= 1.0) break;
      }
      x[k] = std::clamp(v, 0.0, 1.0);
    }
    return x;
  }

  double log_density(const std::vector<double>& x) const {
    double categorical = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (space_.params()[k].kind == ParamDomain::Kind::categorical) {
        categorical += std::log(frequencies_[k][static_cast<std::size_t>(x[k])]);
      }
    }
    std::vector<double> terms;
    terms.reserve(points_.size());
    for (const auto& c : points_) {
      double t = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (space_.params()[k].kind == ParamDomain::Kind::categorical) continue;
        const double z = (x[k] - c[k]) / bandwidth_[k];
        t += -0.5 * z * z - std::log(bandwidth_[k] * std::sqrt(2.0 * std::numbers::pi));
      }
      terms.push_back(t);
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (const double t : terms) sum += std::exp(t - top);
    return categorical + top + std::log(sum / static_cast<double>(points_.size()));
  }

 private:
  const SearchSpace& space_;
  std::vector<std::vector<double>> points_;
  std::vector<double> bandwidth_;
  std::vector<std::vector<double>> frequencies_;
};

}  // namespace

Config sample_config(const SearchSpace& space, const std::vector<Trial>& history, Rng& rng,
                     Mode mode, const SamplerOptions& options) {
  const int min_points =
      options.min_points.value_or(static_cast<int>(space.dimension()) + 1);
  std::map<double, std::vector<const Trial*>> by_budget;
  for (const auto& t : history) {
    if (t.status == TrialStatus::completed && t.objective) by_budget[t.budget].push_back(&t);
  }
  const std::vector<const Trial*>* chosen = nullptr;
  for (auto it = by_budget.rbegin(); it != by_budget.rend(); ++it) {
    if (static_cast<int>(it->second.size()) >= std::max(min_points, 2)) {
      chosen = &it->second;
      break;
    }
  }
  if (!chosen || space.dimension() == 0) return sample_uniform(space, rng);

  if (rng.uniform() < options.random_fraction) return sample_uniform(space, rng);

  std::vector<const Trial*> ranked = *chosen;
  std::stable_sort(ranked.begin(), ranked.end(), [mode](const Trial* a, const Trial* b) {
    return mode == Mode::maximize ? *a->objective > *b->objective
                                  : *a->objective < *b->objective;
  });
  // Each group keeps at least min_points trials; with few trials they overlap.
  const std::size_t n = ranked.size();
  const auto floor_points = std::min<std::size_t>(static_cast<std::size_t>(min_points), n);
  const std::size_t n_good = std::max(
      floor_points, static_cast<std::size_t>(std::floor(options.gamma * static_cast<double>(n))));
  const std::size_t n_bad = std::max(floor_points, n - n_good);
  std::vector<std::vector<double>> good, bad;
  for (std::size_t i = 0; i < n_good; ++i) good.push_back(to_unit(space, ranked[i]->config));
  for (std::size_t i = n - n_bad; i < n; ++i) bad.push_back(to_unit(space, ranked[i]->config));
  const Density good_density(space, std::move(good), options.min_bandwidth);
  const Density bad_density(space, std::move(bad), options.min_bandwidth);

  std::vector<double> best;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < options.n_candidates; ++c) {
    auto x = good_density.draw(rng, options.bandwidth_factor);
    const double ratio = good_density.log_density(x) - bad_density.log_density(x);
    if (best.empty() || ratio > best_ratio) {
      best = std::move(x);
      best_ratio = ratio;
    }
  }
  return from_unit(space, best);
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

SearchResult run_search(const SearchSpace& space, const Objective& objective,
                        double total_budget, Mode mode, std::uint64_t seed,
                        const SearchOptions& options) {
  space.validate();
  if (!(total_budget > 0.0)) throw UsageError("total_budget must be positive");
  const auto schedule = hyperband_schedule(options.max_budget, options.eta);
  Rng rng(seed, "sample");
  SearchResult result;
  auto& history = result.history;
  double spent = 0.0;

  for (std::size_t b = 0;; ++b) {
    const Bracket& bracket = schedule[b % schedule.size()];
    if (b > 0 && spent + bracket.total_budget() > total_budget * (1.0 + 1e-12)) break;
    spent += bracket.total_budget();
    result.brackets_run.push_back(bracket);

    std::vector<Config> configs;
    for (int i = 0; i < bracket.rungs.front().n_configs; ++i) {
      configs.push_back(options.model_based ? sample_config(space, history, rng, mode, options.sampler)
                                            : sample_uniform(space, rng));
    }
    for (std::size_t r = 0; r < bracket.rungs.size(); ++r) {
      const Rung& rung = bracket.rungs[r];
      std::vector<std::size_t> rung_trials;
      for (const auto& config : configs) {
        Trial t;
        t.id = static_cast<int>(history.size());
        t.config = config;
        t.budget = rung.budget;
        t.bracket = bracket.s;
        t.rung = static_cast<int>(r);
        try {
          const double value = objective(config, rung.budget);
          if (std::isnan(value)) throw DataError("objective returned NaN");
          t.objective = value;
        } catch (const std::exception&) {
          t.status = TrialStatus::failed;
        }
        rung_trials.push_back(history.size());
        history.push_back(std::move(t));
      }
      if (r + 1 == bracket.rungs.size()) break;
      std::stable_sort(rung_trials.begin(), rung_trials.end(), [&](std::size_t a, std::size_t c) {
        const double va = history[a].ranking_value(mode);
        const double vc = history[c].ranking_value(mode);
        return mode == Mode::maximize ? va > vc : va < vc;
      });
      configs.clear();
      for (int i = 0; i < bracket.rungs[r + 1].n_configs; ++i) {
        configs.push_back(history[rung_trials[static_cast<std::size_t>(i)]].config);
      }
    }
  }

  const Trial* best = nullptr;
  for (const auto& t : history) {
    if (t.status != TrialStatus::completed) continue;
    if (!best || (mode == Mode::maximize ? *t.objective > *best->objective
                                         : *t.objective < *best->objective)) {
      best = &t;
    }
  }
  if (!best) throw DataError("every trial of the search failed");
  result.best = *best;
  return result;
}

std::string history_csv(const SearchSpace& space, const std::vector<Trial>& history) {
  std::ostringstream out;
  out << "trial_id";
  for (const auto& p : space.params()) out << ',' << p.name;
  out << ",budget,objective,status,bracket,rung\n";
  for (const auto& t : history) {
    out << t.id;
    for (const auto& p : space.params()) out << ',' << format_param(t.config.at(p.name));
    out << ',' << format_real(t.budget) << ',';
    if (t.objective) out << format_real(*t.objective);
    out << ',' << (t.status == TrialStatus::completed ? "completed" : "failed") << ','
        << t.bracket << ',' << t.rung << '\n';
  }
  return out.str();
}

void write_history_csv(const std::filesystem::path& path, const SearchSpace& space,
                       const std::vector<Trial>& history) {
  write_file_atomic(path, history_csv(space, history));
}

}  // namespace plumestack
