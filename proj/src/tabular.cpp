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

#include "plumestack/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace plumestack {

const std::vector<std::string>& scenario_schema() {
  static const std::vector<std::string> schema = {
      "time",
      "latitude",
      "longitude",
      "temperature",
      "relative_humidity",
      "pressure",
      "water_vapor",
      "turbulent_kinetic_energy",
      "precipitation_rate",
      "sensible_heat_flux",
      "latent_heat_flux",
      "wind_u",
      "wind_v",
      "wind_w",
      "tracer_concentration"};
  return schema;
}

const std::vector<std::string>& metadata_columns() {
  static const std::vector<std::string> meta = {"time", "latitude",
                                                "longitude"};
  return meta;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

Dataset::Dataset(std::vector<std::string> column_names, Matrix values,
                 std::optional<std::string> target_name)
    : names_(std::move(column_names)),
      values_(std::move(values)),
      target_(std::move(target_name)) {
  if (static_cast<Index>(names_.size()) != values_.cols()) {
    throw DataError("dataset has " + std::to_string(names_.size()) +
                    " names for " + std::to_string(values_.cols()) +
                    " columns");
  }
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) {
      throw DataError("duplicate column name '" + name + "'");
    }
  }
  if (!values_.allFinite()) {
    for (Index c = 0; c < values_.cols(); ++c) {
      for (Index r = 0; r < values_.rows(); ++r) {
        if (!std::isfinite(values_(r, c))) {
          throw DataError("non-finite value at row " + std::to_string(r) +
                          ", column '" + names_[static_cast<std::size_t>(c)] +
                          "'");
        }
      }
    }
  }
  if (target_ && !seen.contains(*target_)) {
    throw DataError("target column '" + *target_ + "' is not in the dataset");
  }
}

bool Dataset::has_column(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

Index Dataset::column_index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("missing column '" + name + "'");
  return static_cast<Index>(it - names_.begin());
}

Vector Dataset::column(const std::string& name) const {
  return values_.col(column_index(name));
}

Dataset Dataset::select_rows(const std::vector<Index>& rows) const {
  Matrix out(static_cast<Index>(rows.size()), values_.cols());
  for (Index c = 0; c < values_.cols(); ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out(static_cast<Index>(r), c) = values_(rows[r], c);
    }
  }
  Dataset ds;
  ds.names_ = names_;
  ds.values_ = std::move(out);
  ds.target_ = target_;
  return ds;
}

Dataset Dataset::select_columns(const std::vector<std::string>& names) const {
  Dataset ds;
  ds.names_ = names;
  ds.values_ = feature_matrix(names);
  if (target_ && std::find(names.begin(), names.end(), *target_) != names.end()) {
    ds.target_ = target_;
  }
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) throw DataError("duplicate column selected");
  return ds;
}

Matrix Dataset::feature_matrix(const std::vector<std::string>& names) const {
  Matrix out(values_.rows(), static_cast<Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    out.col(static_cast<Index>(j)) = values_.col(column_index(names[j]));
  }
  return out;
}

Dataset Dataset::with_column(const std::string& name,
                             const Vector& values) const {
  if (values.size() != n_rows()) {
    throw DataError("column '" + name + "' has " +
                    std::to_string(values.size()) + " rows, expected " +
                    std::to_string(n_rows()));
  }
  auto names = names_;
  Matrix out(values_.rows(), values_.cols() + 1);
  out.leftCols(values_.cols()) = values_;
  out.col(values_.cols()) = values;
  names.push_back(name);
  return Dataset(std::move(names), std::move(out), target_);
}

Dataset Dataset::without_columns(const std::vector<std::string>& names) const {
  std::vector<std::string> keep;
  for (const auto& n : names_) {
    if (std::find(names.begin(), names.end(), n) == names.end()) {
      keep.push_back(n);
    }
  }
  return select_columns(keep);
}

Dataset Dataset::with_target(std::optional<std::string> target) const {
  Dataset ds = *this;
  if (target && !has_column(*target)) {
    throw DataError("target column '" + *target + "' is not in the dataset");
  }
  ds.target_ = std::move(target);
  return ds;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path,
                 const std::vector<std::string>& declared_schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("'" + path.string() + "' is empty (no header row)");
  }
  if (line.size() >= 3 && std::memcmp(line.data(), "\xEF\xBB\xBF", 3) == 0) {
    line.erase(0, 3);
  }
  std::vector<std::string> header;
  for (const auto cell : split_line(line)) header.emplace_back(trim(cell));
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (!seen.insert(h).second) {
        throw DataError("duplicate column name '" + h + "' in '" +
                        path.string() + "'");
      }
    }
    if (!declared_schema.empty()) {
      const std::set<std::string> want(declared_schema.begin(),
                                       declared_schema.end());
      if (want != seen) {
        throw DataError("header of '" + path.string() +
                        "' does not match the declared schema");
      }
    }
  }

  const auto n_cols = header.size();
  std::vector<double> cells;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto parts = split_line(line);
    if (parts.size() != n_cols) {
      throw DataError("row " + std::to_string(row) + " has " +
                      std::to_string(parts.size()) + " cells, expected " +
                      std::to_string(n_cols));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      const auto text = trim(parts[c]);
      double value = 0.0;
      const auto* first = text.data();
      const auto* last = text.data() + text.size();
      if (!text.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (text.empty() || ec != std::errc() || ptr != last ||
          !std::isfinite(value)) {
        throw DataError("non-numeric cell '" + std::string(text) + "' at row " +
                        std::to_string(row) + ", column '" + header[c] + "'");
      }
      cells.push_back(value);
    }
  }

  Matrix values(static_cast<Index>(row), static_cast<Index>(n_cols));
  for (std::size_t r = 0; r < row; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      values(static_cast<Index>(r), static_cast<Index>(c)) = cells[r * n_cols + c];
    }
  }
  Dataset ds(header, std::move(values));
  if (!declared_schema.empty()) return ds.select_columns(declared_schema);
  return ds;
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_csv(const std::filesystem::path& path, const Dataset& ds) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    const auto& names = ds.column_names();
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (c) out << ',';
      out << names[c];
    }
    out << '\n';
    std::string line;
    char buf[64];
    for (Index r = 0; r < ds.n_rows(); ++r) {
      line.clear();
      for (Index c = 0; c < ds.n_cols(); ++c) {
        if (c) line.push_back(',');
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), ds.values()(r, c));
        line.append(buf, ptr);
      }
      line.push_back('\n');
      out << line;
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

Dataset derive_binary_label(const Dataset& ds, const std::string& source,
                            const std::string& new_label) {
  const Vector src = ds.column(source);
  const Vector label = (src.array() > 0.0).cast<double>();
  return ds.without_columns({source}).with_column(new_label, label).with_target(
      new_label);
}

namespace {

// Row indices per class of a 0/1 column; throws on non-binary values.
std::pair<std::vector<Index>, std::vector<Index>> split_by_class(
    const Vector& label, const std::string& name) {
  std::vector<Index> zeros, ones;
  for (Index r = 0; r < label.size(); ++r) {
    if (label[r] == 0.0) {
      zeros.push_back(r);
    } else if (label[r] == 1.0) {
      ones.push_back(r);
    } else {
      throw DataError("column '" + name + "' is not binary (row " +
                      std::to_string(r) + " = " + format_real(label[r]) + ")");
    }
  }
  return {zeros, ones};
}

}  // namespace

Dataset undersample_majority(const Dataset& ds, const std::string& label,
                             std::uint64_t seed) {
  if (ds.n_rows() == 0) throw DataError("cannot undersample an empty dataset");
  auto [zeros, ones] = split_by_class(ds.column(label), label);
  if (zeros.empty() || ones.empty()) {
    throw DataError("undersampling needs both classes in '" + label + "'");
  }
  const bool ones_minority = ones.size() <= zeros.size();
  auto& minority = ones_minority ? ones : zeros;
  auto& majority = ones_minority ? zeros : ones;

  Rng rng(seed, "undersample");
  // Partial Fisher-Yates: the first minority.size() slots are a uniform draw.
  for (std::size_t i = 0; i < minority.size(); ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(majority.size() - i));
    std::swap(majority[i], majority[j]);
  }
  std::vector<Index> keep(minority.begin(), minority.end());
  keep.insert(keep.end(), majority.begin(),
              majority.begin() + static_cast<std::ptrdiff_t>(minority.size()));
  std::sort(keep.begin(), keep.end());
  return ds.select_rows(keep);
}

ConstantColumnDrop drop_constant_columns(
    const Dataset& ds, const std::vector<std::string>& feature_columns) {
  std::vector<std::string> dropped;
  for (const auto& name : feature_columns) {
    const auto col = ds.values().col(ds.column_index(name));
    if (col.size() == 0 || (col.array() == col[0]).all()) {
      dropped.push_back(name);
    }
  }
  return {ds.without_columns(dropped), dropped};
}

SplitResult random_split(const Dataset& ds, double train_fraction,
                         std::uint64_t seed,
                         const std::optional<std::string>& stratify_on) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1), got " +
                     format_real(train_fraction));
  }
  const Index n = ds.n_rows();
  if (n < 2) throw DataError("splitting needs at least 2 rows");
  const auto n_train =
      static_cast<Index>(std::llround(train_fraction * static_cast<double>(n)));

  Rng rng(seed, "split");
  std::vector<Index> train, test;
  if (!stratify_on) {
    const auto perm = rng.permutation(n);
    train.assign(perm.begin(), perm.begin() + n_train);
    test.assign(perm.begin() + n_train, perm.end());
  } else {
    auto [zeros, ones] = split_by_class(ds.column(*stratify_on), *stratify_on);
    if (zeros.size() < 2 || ones.size() < 2) {
      throw DataError("stratified split needs at least 2 rows per class");
    }
    // Largest-remainder allocation keeps the total exact.
    const double want0 = train_fraction * static_cast<double>(zeros.size());
    const double want1 = train_fraction * static_cast<double>(ones.size());
    auto take0 = static_cast<Index>(std::floor(want0));
    auto take1 = static_cast<Index>(std::floor(want1));
    while (take0 + take1 < n_train) {
      if (want0 - static_cast<double>(take0) >= want1 - static_cast<double>(take1)) {
        ++take0;
      } else {
        ++take1;
      }
    }
    rng.shuffle(zeros);
    rng.shuffle(ones);
    train.assign(zeros.begin(), zeros.begin() + take0);
    train.insert(train.end(), ones.begin(), ones.begin() + take1);
    test.assign(zeros.begin() + take0, zeros.end());
    test.insert(test.end(), ones.begin() + take1, ones.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  SplitResult out;
  out.train = ds.select_rows(train);
  out.test = ds.select_rows(test);
  out.train_rows = std::move(train);
  out.test_rows = std::move(test);
  out.seed = seed;
  return out;
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

Standardizer fit_standardizer(const Dataset& train,
                              const std::vector<std::string>& feature_columns) {
  if (train.n_rows() == 0) {
    throw DataError("cannot fit a standardizer on an empty dataset");
  }
  std::vector<ColumnStats> stats;
  const auto n = static_cast<double>(train.n_rows());
  for (const auto& name : feature_columns) {
    const auto col = train.values().col(train.column_index(name));
    ColumnStats s;
    s.mean = col.sum() / n;
    if ((col.array() == col[0]).all()) {
      s.mean = col[0];
      s.std = 0.0;
    } else {
      s.std = std::sqrt((col.array() - s.mean).square().sum() / n);
    }
    stats.push_back(s);
  }
  return Standardizer(feature_columns, std::move(stats));
}

const ColumnStats& Standardizer::stats_for(const std::string& column) const {
  const auto it = std::find(columns_.begin(), columns_.end(), column);
  if (it == columns_.end()) {
    throw DataError("standardizer has no column '" + column + "'");
  }
  return stats_[static_cast<std::size_t>(it - columns_.begin())];
}

std::vector<std::string> Standardizer::flagged_constant() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (stats_[i].constant()) out.push_back(columns_[i]);
  }
  return out;
}

Vector Standardizer::apply_column(const std::string& column,
                                  const Vector& values) const {
  const auto& s = stats_for(column);
  if (s.constant()) return Vector::Zero(values.size());
  return (values.array() - s.mean) / s.std;
}

Vector Standardizer::invert_column(const std::string& column,
                                   const Vector& values) const {
  const auto& s = stats_for(column);
  if (s.constant()) return Vector::Constant(values.size(), s.mean);
  return values.array() * s.std + s.mean;
}

Dataset Standardizer::apply(const Dataset& ds) const {
  Matrix values = ds.values();
  for (const auto& name : columns_) {
    const Index c = ds.column_index(name);
    values.col(c) = apply_column(name, values.col(c));
  }
  return Dataset(ds.column_names(), std::move(values), ds.target_name());
}

Dataset Standardizer::invert(const Dataset& ds) const {
  Matrix values = ds.values();
  for (const auto& name : columns_) {
    const Index c = ds.column_index(name);
    values.col(c) = invert_column(name, values.col(c));
  }
  return Dataset(ds.column_names(), std::move(values), ds.target_name());
}

std::uint64_t fingerprint(const Dataset& ds) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& name : ds.column_names()) {
    feed(name.data(), name.size());
    feed("\0", 1);
  }
  const Index rows = ds.n_rows();
  feed(&rows, sizeof(rows));
  for (Index c = 0; c < ds.n_cols(); ++c) {
    for (Index r = 0; r < rows; ++r) {
      const double v = ds.values()(r, c);
      feed(&v, sizeof(v));
    }
  }
  return h;
}

}  // namespace plumestack
