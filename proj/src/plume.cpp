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

#include "plumestack/plume.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace plumestack {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMetersPerDegLat = 111320.0;
// Methane density near 25 C and 1 atm, kg/m^3.
constexpr double kMethaneDensity = 0.657;
constexpr double kMinWindSpeed = 0.5;

double normalized_time(const ScenarioConfig& cfg, int t) {
  return cfg.n_timesteps > 1 ? static_cast<double>(t) / (cfg.n_timesteps - 1)
                             : 0.0;
}

// White noise smoothed by a separable Gaussian kernel, rescaled to zero mean
// and unit standard deviation over the grid.
Matrix smooth_noise(int n, double correlation, Rng& rng) {
  Matrix white(n, n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < n; ++r) white(r, c) = rng.normal();
  }
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * correlation)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * k * k / (correlation * correlation));
    kernel[static_cast<std::size_t>(k + radius)] = w;
    total += w;
  }
  for (auto& w : kernel) w /= total;

  auto clamp = [n](int i) { return std::clamp(i, 0, n - 1); };
  Matrix pass(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * white(r, clamp(c + k));
      }
      pass(r, c) = acc;
    }
  }
  Matrix out(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * pass(clamp(r + k), c);
      }
      out(r, c) = acc;
    }
  }
  const double mean = out.mean();
  out.array() -= mean;
  const double sd = std::sqrt(out.squaredNorm() / static_cast<double>(out.size()));
  if (sd > 0.0) out /= sd;
  return out;
}

enum Field : std::size_t {
  kElevation,
  kTemperature,
  kHumidity,
  kPressure,
  kVapor,
  kTke,
  kSensible,
  kLatent,
  kWindSpeed,
  kWindDir,
  kVertical,
  kFieldCount
};

// Diurnal shapes over local hour.
double diurnal(double hour) {
  return std::sin(std::numbers::pi * (hour - 9.0) / 12.0);
}
double solar(double hour) {
  return std::max(0.0, std::sin(std::numbers::pi * (hour - 6.5) / 13.0));
}

}  // namespace

void ScenarioConfig::validate() const {
  if (grid_size < 4) throw UsageError("grid_size must be at least 4");
  if (!(cell_m > 0.0)) throw UsageError("cell_m must be positive");
  if (n_timesteps < 1) throw UsageError("n_timesteps must be at least 1");
  if (!(step_minutes > 0.0)) throw UsageError("step_minutes must be positive");
  if (!(release_rate_kg_s > 0.0)) throw UsageError("release_rate must be positive");
  if (!(release_height_m >= 0.0)) throw UsageError("release_height must be >= 0");
  if (!(target_positive_fraction > 0.0 && target_positive_fraction < 0.5)) {
    throw UsageError("target_positive_fraction must lie in (0, 0.5)");
  }
  if (!(low_ppm > 0.0 && peak_ppm > low_ppm)) {
    throw UsageError("need 0 < low_ppm < peak_ppm");
  }
  if (!(correlation_cells > 0.0)) throw UsageError("correlation_cells must be positive");
  if (floor_ppm && !(*floor_ppm >= 0.0)) throw UsageError("floor_ppm must be >= 0");
  // The release sits at the domain center, so it is inside by construction
  // unless the coordinates themselves are invalid.
  if (std::abs(release_lat) >= 89.0 || std::abs(release_lon) > 180.0) {
    throw UsageError("release point is outside the valid coordinate range");
  }
}

double wind_heading_deg(const ScenarioConfig& cfg, int timestep) {
  double delta = cfg.wind.final_direction_deg - cfg.wind.initial_direction_deg;
  delta = std::remainder(delta, 360.0);  // shortest rotation
  const double from = cfg.wind.initial_direction_deg +
                      delta * normalized_time(cfg, timestep);
  return std::fmod(from + 180.0 + 720.0, 360.0);
}

double wind_speed_ms(const ScenarioConfig& cfg, int timestep) {
  const double tau = normalized_time(cfg, timestep);
  return std::max(kMinWindSpeed, cfg.wind.mean_speed_ms *
                                     (1.0 + 0.1 * std::sin(2.0 * std::numbers::pi * tau)));
}

double cell_east_m(const ScenarioConfig& cfg, int column) {
  return (column - 0.5 * (cfg.grid_size - 1)) * cfg.cell_m;
}

double cell_north_m(const ScenarioConfig& cfg, int row) {
  return (row - 0.5 * (cfg.grid_size - 1)) * cfg.cell_m;
}

Matrix plume_field(const ScenarioConfig& cfg, int timestep) {
  const int n = cfg.grid_size;
  const double phi = wind_heading_deg(cfg, timestep) * kDegToRad;
  const double sin_phi = std::sin(phi), cos_phi = std::cos(phi);
  const double u = wind_speed_ms(cfg, timestep);
  const auto& d = cfg.dispersion;
  const double h2 = cfg.release_height_m * cfg.release_height_m;

  Matrix field = Matrix::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    const double east = cell_east_m(cfg, c);
    for (int r = 0; r < n; ++r) {
      const double north = cell_north_m(cfg, r);
      const double downwind = east * sin_phi + north * cos_phi;
      if (downwind < 1.0) continue;
      const double crosswind = east * cos_phi - north * sin_phi;
      const double sy = d.a_y * std::pow(downwind, d.b_y);
      const double sz = d.a_z * std::pow(downwind, d.b_z);
      const double kg_m3 = cfg.release_rate_kg_s /
                           (std::numbers::pi * u * sy * sz) *
                           std::exp(-crosswind * crosswind / (2.0 * sy * sy)) *
                           std::exp(-h2 / (2.0 * sz * sz));
      field(r, c) = kg_m3 / kMethaneDensity * 1e6;
    }
  }
  return field;
}

Dataset generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const int n = cfg.grid_size;
  const int steps = cfg.n_timesteps;
  const Index cells = static_cast<Index>(n) * n;
  const auto& schema = scenario_schema();
  Matrix out(cells * steps, static_cast<Index>(schema.size()));

  std::array<Matrix, kFieldCount> statics;
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    Rng rng(derive_seed(derive_seed(cfg.seed, "static"), f));
    statics[f] = smooth_noise(n, cfg.correlation_cells, rng);
  }

  const double lat_rad = cfg.release_lat * kDegToRad;
  const double meters_per_deg_lon = kMetersPerDegLat * std::cos(lat_rad);

  parallel_for(steps, [&](Index t_index) {
    const int t = static_cast<int>(t_index);
    const double tau = normalized_time(cfg, t);
    const double minutes = cfg.start_minutes + t * cfg.step_minutes;
    const double hour = minutes / 60.0;
    const double sun = solar(hour);
    const double day = diurnal(hour);
    const double from_dir =
        std::fmod(wind_heading_deg(cfg, t) + 180.0, 360.0) * kDegToRad;

    std::array<Matrix, kFieldCount> noise;
    Rng rng(derive_seed(derive_seed(cfg.seed, "timestep"),
                        static_cast<std::uint64_t>(t)));
    for (std::size_t f = 0; f < kFieldCount; ++f) {
      noise[f] = 0.8 * statics[f] + 0.6 * smooth_noise(n, cfg.correlation_cells, rng);
    }
    const Matrix tracer = plume_field(cfg, t);

    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const double xi = static_cast<double>(c) / (n - 1);   // east
        const double eta = static_cast<double>(r) / (n - 1);  // north
        const double diag = 0.5 * (xi + eta);                 // SW -> NE
        const double land = 0.5 * (xi - eta + 1.0);           // NW -> SE
        const double elevation = 30.0 + 98.0 * diag + 2.0 * statics[kElevation](r, c);

        const double temperature = 296.0 + 6.0 * day - 0.0065 * elevation +
                                   1.5 * land + 0.3 * noise[kTemperature](r, c);
        const double humidity =
            std::clamp(70.0 - 2.2 * (temperature - 296.0) + 10.0 * (1.0 - diag) +
                           1.5 * noise[kHumidity](r, c),
                       5.0, 100.0);
        const double pressure = 101325.0 - 11.8 * elevation - 40.0 * tau +
                                3.0 * noise[kPressure](r, c);
        const double celsius = temperature - 273.15;
        const double saturation =
            3.8 * std::exp(17.27 * celsius / (celsius + 237.3));  // g/kg
        const double vapor =
            humidity / 100.0 * saturation + 0.1 * noise[kVapor](r, c);
        const double tke = std::max(
            0.01, 0.4 + 1.2 * sun * (0.8 + 0.4 * land) + 0.1 * noise[kTke](r, c));
        const double sensible =
            250.0 * sun * (0.7 + 0.6 * land) + 10.0 * noise[kSensible](r, c);
        const double latent = 180.0 * sun * (0.6 + 0.8 * (1.0 - diag)) +
                              8.0 * noise[kLatent](r, c);
        const double speed =
            std::max(kMinWindSpeed,
                     wind_speed_ms(cfg, t) * (1.0 + 0.15 * (elevation - 79.0) / 49.0) +
                         0.3 * noise[kWindSpeed](r, c));
        const double dir = from_dir + 4.0 * kDegToRad * noise[kWindDir](r, c);
        const double wind_u = -speed * std::sin(dir);
        const double wind_v = -speed * std::cos(dir);
        const double wind_w = 0.02 * (wind_u + wind_v) + 0.05 * noise[kVertical](r, c);

        const double north_m = cell_north_m(cfg, r);
        const double east_m = cell_east_m(cfg, c);
        const Index row = static_cast<Index>(t) * cells + static_cast<Index>(r) * n + c;
        out(row, 0) = minutes;
        out(row, 1) = cfg.release_lat + north_m / kMetersPerDegLat;
        out(row, 2) = cfg.release_lon + east_m / meters_per_deg_lon;
        out(row, 3) = temperature;
        out(row, 4) = humidity;
        out(row, 5) = pressure;
        out(row, 6) = vapor;
        out(row, 7) = tke;
        out(row, 8) = 0.0;  // precipitation never occurs in this regime
        out(row, 9) = sensible;
        out(row, 10) = latent;
        out(row, 11) = wind_u;
        out(row, 12) = wind_v;
        out(row, 13) = wind_w;
        out(row, 14) = tracer(r, c);
      }
    }
  });

  // Clamp below the floor, then map survivors log-linearly into
  // [low_ppm, peak_ppm].
  auto tracer = out.col(14);
  const Index total = tracer.size();
  double floor = 0.0;
  if (cfg.floor_ppm) {
    floor = *cfg.floor_ppm;
  } else {
    const auto wanted = static_cast<Index>(
        std::llround(cfg.target_positive_fraction * static_cast<double>(total)));
    std::vector<double> sorted(tracer.data(), tracer.data() + total);
    if (wanted < total) {
      std::nth_element(sorted.begin(), sorted.begin() + wanted, sorted.end(),
                       std::greater<>());
      floor = sorted[static_cast<std::size_t>(wanted)];
    }
  }
  Index positives = 0;
  double lowest = 0.0, highest = 0.0;
  for (Index i = 0; i < total; ++i) {
    if (tracer[i] > floor) {
      lowest = positives == 0 ? tracer[i] : std::min(lowest, tracer[i]);
      highest = std::max(highest, tracer[i]);
      ++positives;
    }
  }
  const double achieved = static_cast<double>(positives) / static_cast<double>(total);
  if (std::abs(achieved - cfg.target_positive_fraction) >
      0.2 * cfg.target_positive_fraction) {
    throw DataError("unreachable positive fraction: target " +
                    format_real(cfg.target_positive_fraction) + ", achieved " +
                    format_real(achieved));
  }
  const double base = floor > 0.0 ? floor : lowest;
  const double span = std::log(highest / base);

  // The release stirs the air it passes through: turbulence and vertical
  // motion rise with log exposure, starting a decade and more below the floor.
  if (cfg.tracer_coupling > 0.0 && highest > 0.0) {
    const double onset = base * std::exp(-cfg.coupling_halo_decades * std::log(10.0));
    const double range = std::log(highest / onset);
    for (Index i = 0; i < total; ++i) {
      if (!(tracer[i] > onset)) continue;
      const double exposure = std::log(tracer[i] / onset) / range;
      out(i, 7) += cfg.tracer_coupling * exposure;
      out(i, 13) += 0.25 * cfg.tracer_coupling * exposure;
    }
  }

  const double ratio = std::log(cfg.peak_ppm / cfg.low_ppm);
  for (Index i = 0; i < total; ++i) {
    if (tracer[i] > floor) {
      const double x = span > 0.0 ? std::log(tracer[i] / base) / span : 1.0;
      tracer[i] = std::clamp(cfg.low_ppm * std::exp(ratio * x), cfg.low_ppm, cfg.peak_ppm);
    } else {
      tracer[i] = 0.0;
    }
  }
  return Dataset(schema, std::move(out));
}

// ---------------------------------------------------------------------------

const ColumnSummary& ScenarioSummary::column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw DataError("summary has no column '" + name + "'");
}

ScenarioSummary scenario_stats(const Dataset& ds) {
  if (ds.n_rows() == 0) throw DataError("cannot summarize an empty dataset");
  ScenarioSummary summary;
  summary.n_rows = ds.n_rows();
  const auto n = static_cast<std::size_t>(ds.n_rows());
  std::vector<double> sorted(n);
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };
  for (Index c = 0; c < ds.n_cols(); ++c) {
    const auto col = ds.values().col(c);
    std::copy(col.data(), col.data() + n, sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    ColumnSummary s;
    s.name = ds.column_names()[static_cast<std::size_t>(c)];
    s.min = sorted.front();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.max = sorted.back();
    summary.columns.push_back(s);
  }
  if (ds.has_column(kTracerColumn)) {
    summary.positive_tracer = (ds.column(kTracerColumn).array() > 0.0).count();
  }
  return summary;
}

}  // namespace plumestack
