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

// Synthetic release scenario: smooth meteorological fields on a square grid
// plus a ground-level Gaussian plume from a single elevated point source.

#ifndef PLUMESTACK_PLUME_HPP
#define PLUMESTACK_PLUME_HPP

#include <optional>
#include <string>
#include <vector>

#include "plumestack/core.hpp"
#include "plumestack/tabular.hpp"

namespace plumestack {

struct WindRegime {
  // Meteorological convention: the direction the wind blows FROM, degrees
  // clockwise from north. 292.5 is WNW, 225 is SW.
  double initial_direction_deg = 292.5;
  double final_direction_deg = 225.0;
  double mean_speed_ms = 4.0;
};

struct DispersionCoefficients {
  // sigma = a * x^b with x the downwind distance in meters.
  double a_y = 0.08;
  double b_y = 0.894;
  double a_z = 0.06;
  double b_z = 0.915;
};

struct ScenarioConfig {
  int grid_size = 61;
  double cell_m = 125.0;
  int n_timesteps = 61;
  double step_minutes = 6.0;
  double start_minutes = 684.0;  // 11:24 local time
  double release_lat = 33.25;
  double release_lon = -81.65;
  double release_rate_kg_s = 147000.0 / 3600.0;
  double release_height_m = 20.0;
  WindRegime wind;
  DispersionCoefficients dispersion;
  double target_positive_fraction = 8850.0 / 301340.0;
  // Absolute floor on the physical concentration (ppm-V). Unset means the
  // floor is placed at the quantile that meets target_positive_fraction.
  std::optional<double> floor_ppm;
  double peak_ppm = 2.0;
  double low_ppm = 0.2;
  double correlation_cells = 8.0;
  // Strength of the release's imprint on turbulent kinetic energy (m^2/s^2 at
  // peak exposure) and vertical wind, and how many decades below the floor
  // the imprint begins. Zero disables it.
  double tracer_coupling = 0.3;
  double coupling_halo_decades = 2.0;
  std::uint64_t seed = 0;

  // Throws UsageError when an invariant is violated.
  void validate() const;
};

// Wind heading (direction the air moves TOWARD), degrees clockwise from north.
double wind_heading_deg(const ScenarioConfig& cfg, int timestep);
double wind_speed_ms(const ScenarioConfig& cfg, int timestep);

// Cell-center offsets from the release point in meters (east, north).
double cell_east_m(const ScenarioConfig& cfg, int column);
double cell_north_m(const ScenarioConfig& cfg, int row);

// Unclamped physical concentration (ppm-V) at each cell for one timestep,
// rows = north index, columns = east index. Linear in the release rate.
Matrix plume_field(const ScenarioConfig& cfg, int timestep);

// One row per (timestep, cell) with the canonical scenario schema.
// Throws DataError when the positive fraction misses its target by > 20%.
Dataset generate_scenario(const ScenarioConfig& cfg);

struct ColumnSummary {
  std::string name;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct ScenarioSummary {
  Index n_rows = 0;
  Index positive_tracer = 0;
  std::vector<ColumnSummary> columns;
  const ColumnSummary& column(const std::string& name) const;
};

// Five-number summary per column (linear-interpolated quartiles).
ScenarioSummary scenario_stats(const Dataset& ds);

}  // namespace plumestack

#endif  // PLUMESTACK_PLUME_HPP
