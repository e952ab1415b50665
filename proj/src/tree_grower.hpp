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

// Best-first exact tree growth over presorted columns. Shared by CART,
// forests and the boosting rounds.

#ifndef PLUMESTACK_TREE_GROWER_HPP
#define PLUMESTACK_TREE_GROWER_HPP

#include <optional>
#include <span>
#include <vector>

#include "plumestack/learners.hpp"

namespace plumestack::detail {

// Per feature, the active row indices sorted by (value, row).
struct SortedColumns {
  std::vector<std::vector<int>> order;
};

SortedColumns presort(const Matrix& X);

// Keeps only rows whose weight is positive, preserving order.
SortedColumns restrict_rows(const SortedColumns& all, std::span<const double> weights);

struct GrowOptions {
  Criterion criterion = Criterion::squared_error;
  std::optional<int> max_depth;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  std::optional<int> max_leaves;
  // Features drawn per split; 0 or >= candidate count means all candidates.
  int features_per_split = 0;
  // One uniform threshold per candidate feature instead of exhaustive search.
  bool random_thresholds = false;
  // Candidate features; empty means all columns.
  std::vector<int> allowed_features;
};

struct GrownTree {
  Tree tree;
  // Leaf node index per training row; -1 for rows outside the active set.
  std::vector<int> leaf_of_row;
};

// `sorted` is consumed (partitioned in place). Leaf values are the weighted
// target means.
GrownTree grow_tree(const Matrix& X, SortedColumns sorted,
                    std::span<const double> targets,
                    std::span<const double> weights, const GrowOptions& options,
                    Rng& rng);

}  // namespace plumestack::detail

#endif  // PLUMESTACK_TREE_GROWER_HPP
