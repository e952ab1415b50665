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

// Versioned, checksummed binary container for a trained stack.
//
// Layout: magic "PLMSTACK", u32 format version, u64 payload length, payload,
// u32 CRC-32 of the payload. All integers are little-endian; reals are stored
// as their IEEE-754 bit patterns, so a round trip is bit-exact.

#ifndef PLUMESTACK_ARTIFACT_HPP
#define PLUMESTACK_ARTIFACT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plumestack/ensemble.hpp"
#include "plumestack/tabular.hpp"

namespace plumestack {

inline constexpr std::uint32_t kArtifactVersion = 1;

struct ModelArtifact {
  std::uint32_t format_version = kArtifactVersion;
  Task task = Task::classification;
  std::string preset;
  // Raw feature columns in model order, and the target column of the
  // training data ("leakage" or the tracer column).
  std::vector<std::string> feature_names;
  std::string target_name;
  // Regression only: statistics of the features and the target.
  std::optional<Standardizer> standardizer;
  StackedEnsemble stack;
  std::uint64_t master_seed = 0;
  std::uint64_t data_fingerprint = 0;
  // Selection metric on out-of-fold predictions, keyed by display label.
  std::map<std::string, double> validation;
};

std::string serialize_artifact(const ModelArtifact& artifact);
// Throws DataError on bad magic, unsupported version, length or checksum
// mismatch.
ModelArtifact deserialize_artifact(const std::string& bytes);

void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact);
ModelArtifact load_artifact(const std::filesystem::path& path);

// Model-space predictions on a dataset holding the raw feature columns:
// scores for classification, standardized values for regression.
Vector predict_model_space(const ModelArtifact& artifact, const Dataset& ds);
// As above, with regression mapped back to physical units.
Vector predict_physical(const ModelArtifact& artifact, const Dataset& ds);

}  // namespace plumestack

#endif  // PLUMESTACK_ARTIFACT_HPP
