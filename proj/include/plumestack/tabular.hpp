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

#ifndef PLUMESTACK_TABULAR_HPP
#define PLUMESTACK_TABULAR_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plumestack/core.hpp"

namespace plumestack {

// Canonical scenario column order.
const std::vector<std::string>& scenario_schema();

// Columns carried as metadata and never used as features.
const std::vector<std::string>& metadata_columns();

inline constexpr const char* kTracerColumn = "tracer_concentration";
inline constexpr const char* kLeakageColumn = "leakage";

// Named real-valued columns over a common row set. Immutable once built:
// every transformation returns a new Dataset.
class Dataset {
 public:
  Dataset() = default;
  // Validates unique names, matching shape and finiteness.
  Dataset(std::vector<std::string> column_names, Matrix values,
          std::optional<std::string> target_name = std::nullopt);

  Index n_rows() const { return values_.rows(); }
  Index n_cols() const { return values_.cols(); }
  const std::vector<std::string>& column_names() const { return names_; }
  const Matrix& values() const { return values_; }
  const std::optional<std::string>& target_name() const { return target_; }

  bool has_column(const std::string& name) const;
  // Throws DataError when absent.
  Index column_index(const std::string& name) const;
  Vector column(const std::string& name) const;

  // Rows in the given order; indices may repeat.
  Dataset select_rows(const std::vector<Index>& rows) const;
  Dataset select_columns(const std::vector<std::string>& names) const;
  Matrix feature_matrix(const std::vector<std::string>& names) const;

  Dataset with_column(const std::string& name, const Vector& values) const;
  Dataset without_columns(const std::vector<std::string>& names) const;
  Dataset with_target(std::optional<std::string> target) const;

 private:
  std::vector<std::string> names_;
  Matrix values_;
  std::optional<std::string> target_;
};

// Reads a comma-separated file with one header row. When `declared_schema` is
// non-empty the header must contain exactly those names (any order); columns
// are returned in declared order.
Dataset load_csv(const std::filesystem::path& path,
                 const std::vector<std::string>& declared_schema = {});

// Shortest round-trip representation, so reloading is bit-exact.
void write_csv(const std::filesystem::path& path, const Dataset& ds);
std::string format_real(double value);

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

// Adds `new_label` = 1 where `source` > 0 else 0, drops `source` and makes the
// label the target.
Dataset derive_binary_label(const Dataset& ds, const std::string& source,
                            const std::string& new_label);

// Keeps every minority row and an equal-size uniform draw of majority rows.
// Output rows keep their input order.
Dataset undersample_majority(const Dataset& ds, const std::string& label,
                             std::uint64_t seed);

struct ConstantColumnDrop {
  Dataset dataset;
  std::vector<std::string> dropped;
};

ConstantColumnDrop drop_constant_columns(
    const Dataset& ds, const std::vector<std::string>& feature_columns);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
  std::uint64_t seed = 0;
};

SplitResult random_split(const Dataset& ds, double train_fraction,
                         std::uint64_t seed,
                         const std::optional<std::string>& stratify_on = {});

struct ColumnStats {
  double mean = 0.0;
  double std = 0.0;  // population convention
  bool constant() const { return std == 0.0; }
};

// (x - mean) / std per declared column, with train-set statistics.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<std::string> columns, std::vector<ColumnStats> stats)
      : columns_(std::move(columns)), stats_(std::move(stats)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<ColumnStats>& stats() const { return stats_; }
  const ColumnStats& stats_for(const std::string& column) const;
  std::vector<std::string> flagged_constant() const;

  Dataset apply(const Dataset& ds) const;
  Dataset invert(const Dataset& ds) const;

  Vector apply_column(const std::string& column, const Vector& values) const;
  Vector invert_column(const std::string& column, const Vector& values) const;

 private:
  std::vector<std::string> columns_;
  std::vector<ColumnStats> stats_;
};

Standardizer fit_standardizer(const Dataset& train,
                              const std::vector<std::string>& feature_columns);

inline Dataset apply_standardizer(const Standardizer& std,
                                  const Dataset& ds) {
  return std.apply(ds);
}

// FNV-1a over column names and the raw bytes of every value.
std::uint64_t fingerprint(const Dataset& ds);

}  // namespace plumestack

#endif  // PLUMESTACK_TABULAR_HPP
