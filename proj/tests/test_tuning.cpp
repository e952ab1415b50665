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

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "plumestack/tuning.hpp"

using namespace plumestack;

namespace {

SearchSpace quadratic_space() {
  SearchSpace space;
  space.add_real("x", 0.0, 1.0).add_real("lr", 1e-3, 1.0, true).add_integer("n", 1, 100);
  return space;
}

// Optimum 10 at x = 0.3, lr = 0.01, n = 60; lower budgets shift the value down.
double quadratic(const Config& c, double budget) {
  const double x = std::get<double>(c.at("x"));
  const double lr = std::get<double>(c.at("lr"));
  const double n = static_cast<double>(std::get<long long>(c.at("n")));
  return 10.0 - 20.0 * (x - 0.3) * (x - 0.3) - std::pow(std::log10(lr) + 2.0, 2.0) -
         std::pow((n - 60.0) / 50.0, 2.0) - 1.0 / budget;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("hyperband table for R = 9, eta = 3") {
  const auto b = hyperband_schedule(9.0, 3);
  REQUIRE(b.size() == 3);
  CHECK(b[0].s == 2);
  CHECK(b[0].rungs == std::vector<Rung>{{9, 1.0}, {3, 3.0}, {1, 9.0}});
  CHECK(b[1].rungs == std::vector<Rung>{{5, 3.0}, {1, 9.0}});
  CHECK(b[2].rungs == std::vector<Rung>{{3, 9.0}});
  CHECK(b[0].evaluations() == 13);
  CHECK(b[0].total_budget() == 27.0);
}

TEST_CASE("hyperband degenerate and geometric schedules") {
  const auto one = hyperband_schedule(1.0, 3);
  REQUIRE(one.size() == 1);
  CHECK(one[0].rungs == std::vector<Rung>{{1, 1.0}});

  for (int eta : {2, 3, 4}) {
    for (double R : {8.0, 27.0, 81.0, 100.0}) {
      const auto schedule = hyperband_schedule(R, eta);
      const int s_max = static_cast<int>(std::floor(std::log(R) / std::log(eta) + 1e-9));
      REQUIRE(static_cast<int>(schedule.size()) == s_max + 1);
      for (const auto& br : schedule) {
        const double first = R * std::pow(eta, -br.s);
        const int n0 = static_cast<int>(std::ceil((s_max + 1.0) / (br.s + 1.0) * std::pow(eta, br.s) - 1e-9));
        CHECK(br.rungs.front().n_configs == n0);
        for (std::size_t i = 0; i < br.rungs.size(); ++i) {
          CHECK(br.rungs[i].budget == doctest::Approx(first * std::pow(eta, static_cast<double>(i))));
          if (i > 0) CHECK(br.rungs[i].n_configs == br.rungs[i - 1].n_configs / eta);
        }
      }
    }
  }
  CHECK_THROWS_AS(hyperband_schedule(0.5, 3), UsageError);
  CHECK_THROWS_AS(hyperband_schedule(9.0, 1), UsageError);
}

TEST_CASE("search space validation") {
  SearchSpace bad;
  bad.add_real("a", 2.0, 1.0);
  CHECK_THROWS_AS(bad.validate(), UsageError);
  SearchSpace bad_log;
  bad_log.add_real("a", 0.0, 1.0, true);
  CHECK_THROWS_AS(bad_log.validate(), UsageError);
  SearchSpace dup;
  dup.add_real("a", 0.0, 1.0).add_integer("a", 1, 2);
  CHECK_THROWS_AS(dup.validate(), UsageError);
  SearchSpace empty_choices;
  empty_choices.add_categorical("c", {});
  CHECK_THROWS_AS(empty_choices.validate(), UsageError);
}

TEST_CASE("uniform samples respect domains and log scaling") {
  SearchSpace space;
  space.add_real("lr", 1e-3, 1e-1, true).add_integer("k", 3, 7).add_categorical("w", {"uniform", "distance"});
  Rng rng(1);
  std::vector<int> bins(10, 0);
  std::set<long long> ks;
  std::set<std::string> ws;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const auto c = sample_config(space, {}, rng);
    const double lr = std::get<double>(c.at("lr"));
    REQUIRE(lr >= 1e-3);
    REQUIRE(lr <= 1e-1);
    const double u = (std::log10(lr) + 3.0) / 2.0;
    ++bins[static_cast<std::size_t>(std::min(9, static_cast<int>(u * 10)))];
    ks.insert(std::get<long long>(c.at("k")));
    ws.insert(std::get<std::string>(c.at("w")));
  }
  for (int b : bins) CHECK(std::abs(b - draws / 10) < 5 * std::sqrt(draws / 10.0));
  CHECK(ks == std::set<long long>{3, 4, 5, 6, 7});
  CHECK(ws == std::set<std::string>{"uniform", "distance"});
}

TEST_CASE("unit-cube mapping round-trips") {
  const auto space = quadratic_space();
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto c = sample_uniform(space, rng);
    const auto u = to_unit(space, c);
    for (double v : u) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const auto back = from_unit(space, u);
    CHECK(std::get<long long>(back.at("n")) == std::get<long long>(c.at("n")));
    CHECK(std::get<double>(back.at("lr")) == doctest::Approx(std::get<double>(c.at("lr"))).epsilon(1e-12));
  }
}

TEST_CASE("single-point space returns that config") {
  SearchSpace space;
  space.add_real("a", 0.5, 0.5).add_integer("b", 4, 4);
  const auto r = run_search(space, [](const Config&, double b) { return b; }, 50.0,
                            Mode::maximize, 1, SearchOptions{9.0, 3, {}, true});
  CHECK(std::get<double>(r.best.config.at("a")) == 0.5);
  CHECK(std::get<long long>(r.best.config.at("b")) == 4);
}

TEST_CASE("history length matches the schedule for a constant objective") {
  const auto space = quadratic_space();
  SearchOptions opts;
  opts.max_budget = 9.0;
  for (double total : {27.0, 81.0, 200.0}) {
    const auto r = run_search(space, [](const Config&, double) { return 1.0; }, total,
                              Mode::maximize, 3, opts);
    int evaluations = 0;
    double spent = 0.0;
    for (const auto& b : r.brackets_run) {
      evaluations += b.evaluations();
      spent += b.total_budget();
    }
    CHECK(static_cast<int>(r.history.size()) == evaluations);
    CHECK(spent <= std::max(total, r.brackets_run.front().total_budget()));
    CHECK(*r.best.objective == 1.0);
  }
}

TEST_CASE("promotion keeps the top floor(n / eta) of each rung") {
  const auto space = quadratic_space();
  for (auto mode : {Mode::maximize, Mode::minimize}) {
    SearchOptions opts;
    opts.max_budget = 27.0;
    const auto r = run_search(space, quadratic, 500.0, mode, 4, opts);
    // Split the history into bracket runs, then rungs.
    std::vector<std::vector<std::vector<const Trial*>>> runs;
    for (const auto& t : r.history) {
      if (runs.empty() || (t.rung == 0 && !runs.back().back().empty() &&
                           (runs.back().back().front()->rung != 0 ||
                            runs.back().back().front()->bracket != t.bracket))) {
        runs.emplace_back();
      }
      auto& rungs = runs.back();
      if (rungs.empty() || rungs.back().front()->rung != t.rung) rungs.emplace_back();
      rungs.back().push_back(&t);
    }
    for (const auto& rungs : runs) {
      for (std::size_t i = 0; i + 1 < rungs.size(); ++i) {
        CHECK(rungs[i + 1].size() == rungs[i].size() / 3);
        std::vector<const Trial*> promoted, dropped;
        for (const auto* t : rungs[i]) {
          const bool up = std::any_of(rungs[i + 1].begin(), rungs[i + 1].end(),
                                      [&](const Trial* u) { return u->config == t->config; });
          (up ? promoted : dropped).push_back(t);
        }
        for (const auto* p : promoted) {
          for (const auto* d : dropped) {
            if (mode == Mode::maximize) CHECK(*p->objective >= *d->objective);
            else CHECK(*p->objective <= *d->objective);
          }
        }
      }
    }
    double extreme = *r.history.front().objective;
    for (const auto& t : r.history) {
      extreme = mode == Mode::maximize ? std::max(extreme, *t.objective) : std::min(extreme, *t.objective);
    }
    CHECK(*r.best.objective == extreme);
  }
}

TEST_CASE("failed trials rank worst and the search continues") {
  const auto space = quadratic_space();
  const auto objective = [](const Config& c, double budget) {
    if (std::get<double>(c.at("x")) < 0.5) throw std::runtime_error("diverged");
    return quadratic(c, budget);
  };
  const auto r = run_search(space, objective, 100.0, Mode::maximize, 5);
  const auto failed = std::count_if(r.history.begin(), r.history.end(),
                                    [](const Trial& t) { return t.status == TrialStatus::failed; });
  CHECK(failed > 0);
  CHECK(r.best.status == TrialStatus::completed);
  CHECK(std::get<double>(r.best.config.at("x")) >= 0.5);
  for (const auto& t : r.history) CHECK(t.objective.has_value() == (t.status == TrialStatus::completed));
  CHECK_THROWS_AS(run_search(space, [](const Config&, double) -> double { throw std::runtime_error("x"); },
                             100.0, Mode::maximize, 5),
                  DataError);
}

TEST_CASE("search is deterministic including the density model") {
  const auto space = quadratic_space();
  const auto a = run_search(space, quadratic, 400.0, Mode::maximize, 6);
  const auto b = run_search(space, quadratic, 400.0, Mode::maximize, 6);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].config == b.history[i].config);
  }
  CHECK(history_csv(space, a.history) == history_csv(space, b.history));
}

TEST_CASE("model-based search beats uniform random search on a quadratic") {
  const auto space = quadratic_space();
  std::vector<double> bohb, random;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto r = run_search(space, quadratic, 846.0, Mode::maximize, rep);
    CHECK(r.history.size() >= 100);
    bohb.push_back(*r.best.objective);
    Rng rng(rep, "random-search");
    double best = -1e300;
    for (int i = 0; i < 100; ++i) best = std::max(best, quadratic(sample_uniform(space, rng), 27.0));
    random.push_back(best);
  }
  CHECK(median(bohb) > median(random));
  CHECK(median(bohb) >= 0.95 * 10.0);
}

TEST_CASE("history csv layout") {
  SearchSpace space;
  space.add_real("lr", 0.01, 0.3, true).add_categorical("w", {"uniform", "distance"});
  const auto r = run_search(space, [](const Config&, double b) { return b; }, 20.0,
                            Mode::maximize, 7, SearchOptions{9.0, 3, {}, false});
  const auto csv = history_csv(space, r.history);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "trial_id,lr,w,budget,objective,status,bracket,rung");
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == r.history.size() + 1);
}
