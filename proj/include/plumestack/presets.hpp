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

// Built-in stack presets and the textual form of hyperparameters.

#ifndef PLUMESTACK_PRESETS_HPP
#define PLUMESTACK_PRESETS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plumestack/ensemble.hpp"
#include "plumestack/learners.hpp"

namespace plumestack {

struct StackPreset {
  std::string name;
  Task task = Task::classification;
  std::vector<StackLayerConfig> layers;
  int ensemble_iterations = 27;
};

// "paper-classification": one bagged layer of eleven members, weighted with
// 27 greedy steps.
// "paper-regression": nine base members, seven stacker members per further
// layer, weighted with 100 greedy steps. `depth` (1 to 4, default 2) counts
// the bagged layers.
// "quick-classification" / "quick-regression": one member per family with
// small budgets, for smoke runs.
std::vector<std::string> preset_names();
StackPreset make_preset(const std::string& name, std::optional<int> depth = std::nullopt);

// Seeds every member from its layer-qualified display name.
void seed_members(std::vector<StackLayerConfig>& layers, std::uint64_t master_seed);

// Keys match the Hyperparameters field names. Throws UsageError on unknown
// keys or unparsable values.
void set_hyperparameter(Hyperparameters& hp, const std::string& key, const std::string& value);
// Every field as (key, value) text; round-trips through set_hyperparameter.
std::vector<std::pair<std::string, std::string>> hyperparameter_entries(const Hyperparameters& hp);

}  // namespace plumestack

#endif  // PLUMESTACK_PRESETS_HPP
