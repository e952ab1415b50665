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

#include "plumestack/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tree_grower.hpp"

namespace plumestack {

namespace {

constexpr double kScoreClip = 1e-7;

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::pair<std::string_view, Enum> (&table)[N],
                std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw UsageError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

constexpr std::pair<std::string_view, Family> kFamilies[] = {
    {"tree", Family::tree},
    {"random_forest", Family::random_forest},
    {"extra_trees", Family::extra_trees},
    {"gbm", Family::gbm},
    {"knn", Family::knn}};
constexpr std::pair<std::string_view, Task> kTasks[] = {
    {"classification", Task::classification}, {"regression", Task::regression}};
constexpr std::pair<std::string_view, Criterion> kCriteria[] = {
    {"gini", Criterion::gini},
    {"entropy", Criterion::entropy},
    {"squared_error", Criterion::squared_error}};
constexpr std::pair<std::string_view, KnnWeights> kWeights[] = {
    {"uniform", KnnWeights::uniform}, {"distance", KnnWeights::distance}};

template <typename Enum, std::size_t N>
std::string_view name_of(Enum e, const std::pair<std::string_view, Enum> (&table)[N]) {
  for (const auto& [name, value] : table) {
    if (value == e) return name;
  }
  return "?";
}

void check_inputs(const Matrix& X, const Vector& y, const ModelSpec& spec) {
  spec.validate();
  if (X.cols() == 0) throw DataError("'" + spec.name + "': zero features");
  if (X.rows() == 0) throw DataError("'" + spec.name + "': no training rows");
  if (X.rows() != y.size()) {
    throw DataError("'" + spec.name + "': " + std::to_string(X.rows()) +
                    " rows but " + std::to_string(y.size()) + " targets");
  }
  if (spec.task == Task::classification) {
    for (Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) {
        throw DataError("'" + spec.name + "': classification targets must be 0/1");
      }
    }
  }
}

int default_features_per_split(const ModelSpec& spec, Index d) {
  if (spec.hp.max_features > 0) return spec.hp.max_features;
  if (spec.family == Family::tree) return 0;
  const double dd = static_cast<double>(d);
  return spec.task == Task::classification ? static_cast<int>(std::ceil(std::sqrt(dd))) : 0;
}

detail::GrowOptions cart_options(const ModelSpec& spec, Index d) {
  detail::GrowOptions opt;
  opt.criterion = spec.criterion();
  opt.max_depth = spec.hp.max_depth;
  opt.min_samples_split = spec.hp.min_samples_split;
  opt.min_samples_leaf = spec.hp.min_samples_leaf;
  opt.max_leaves = spec.hp.max_leaf_nodes;
  opt.features_per_split = default_features_per_split(spec, d);
  opt.random_thresholds = spec.family == Family::extra_trees;
  return opt;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double log_loss(const Vector& y, const Vector& raw) {
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double p = std::clamp(sigmoid(raw[i]), kScoreClip, 1.0 - kScoreClip);
    total -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return total / static_cast<double>(y.size());
}

double mean_squared(const Vector& y, const Vector& f) {
  return (y - f).squaredNorm() / static_cast<double>(y.size());
}

constexpr Index kPredictBlock = 256;

template <typename RowFn>
Vector predict_rows(Index n, const RowFn& fn) {
  Vector out(n);
  const Index blocks = (n + kPredictBlock - 1) / kPredictBlock;
  parallel_for(blocks, [&](Index b) {
    const Index end = std::min(n, (b + 1) * kPredictBlock);
    for (Index r = b * kPredictBlock; r < end; ++r) out[r] = fn(r);
  });
  return out;
}

}  // namespace

std::string_view to_string(Family f) { return name_of(f, kFamilies); }
std::string_view to_string(Task t) { return name_of(t, kTasks); }
std::string_view to_string(Criterion c) { return name_of(c, kCriteria); }
std::string_view to_string(KnnWeights w) { return name_of(w, kWeights); }
Family parse_family(std::string_view s) { return parse_enum(s, kFamilies, "family"); }
Task parse_task(std::string_view s) { return parse_enum(s, kTasks, "task"); }
Criterion parse_criterion(std::string_view s) {
  return parse_enum(s, kCriteria, "criterion");
}
KnnWeights parse_knn_weights(std::string_view s) {
  return parse_enum(s, kWeights, "weights");
}

Criterion ModelSpec::criterion() const {
  if (hp.criterion) return *hp.criterion;
  return task == Task::classification ? Criterion::gini : Criterion::squared_error;
}

void ModelSpec::validate() const {
  auto fail = [this](const std::string& msg) {
    throw UsageError("model '" + name + "': " + msg);
  };
  if (hp.max_depth && *hp.max_depth < 0) fail("max_depth must be >= 0");
  if (hp.min_samples_split < 2) fail("min_samples_split must be >= 2");
  if (hp.min_samples_leaf < 1) fail("min_samples_leaf must be >= 1");
  if (hp.n_estimators < 1) fail("n_estimators must be >= 1");
  if (hp.max_leaf_nodes && *hp.max_leaf_nodes < 2) fail("max_leaf_nodes must be >= 2");
  if (hp.max_features < 0) fail("max_features must be >= 0");
  if (hp.num_boost_round < 1) fail("num_boost_round must be >= 1");
  if (!(hp.learning_rate > 0.0 && hp.learning_rate <= 1.0)) {
    fail("learning_rate must lie in (0, 1]");
  }
  if (hp.num_leaves < 2) fail("num_leaves must be >= 2");
  if (!(hp.feature_fraction > 0.0 && hp.feature_fraction <= 1.0)) {
    fail("feature_fraction must lie in (0, 1]");
  }
  if (hp.min_data_in_leaf < 1) fail("min_data_in_leaf must be >= 1");
  if (hp.k_neighbors < 1) fail("k_neighbors must be >= 1");
  const Criterion c = criterion();
  if (family != Family::gbm && family != Family::knn) {
    if (task == Task::regression && c != Criterion::squared_error) {
      fail("regression trees need criterion squared_error");
    }
    if (task == Task::classification && c == Criterion::squared_error) {
      fail("classification trees need criterion gini or entropy");
    }
  }
}

// ---------------------------------------------------------------------------

double impurity(std::span<const double> class_counts, Criterion criterion) {
  double total = 0.0;
  for (const double c : class_counts) total += c;
  if (class_counts.empty() || total <= 0.0) {
    throw DataError("impurity of an empty sample");
  }
  double out = criterion == Criterion::gini ? 1.0 : 0.0;
  for (const double c : class_counts) {
    const double p = c / total;
    switch (criterion) {
      case Criterion::gini:
        out -= p * p;
        break;
      case Criterion::entropy:
        if (p > 0.0) out -= p * std::log2(p);
        break;
      case Criterion::squared_error:
        throw UsageError("squared_error applies to regression targets");
    }
  }
  return out;
}

double impurity_of_targets(std::span<const double> targets, Criterion criterion) {
  if (targets.empty()) throw DataError("impurity of an empty sample");
  if (criterion != Criterion::squared_error) {
    double ones = 0.0;
    for (const double t : targets) ones += t;
    const double counts[2] = {static_cast<double>(targets.size()) - ones, ones};
    return impurity(counts, criterion);
  }
  const double n = static_cast<double>(targets.size());
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / n;
  double ss = 0.0;
  for (const double t : targets) ss += (t - mean) * (t - mean);
  return ss / n;
}

int Tree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes[i].is_leaf()) {
      depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

int Tree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                        [](const TreeNode& n) { return n.is_leaf(); }));
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

FittedModel fit_tree(const Matrix& X, const Vector& y, const ModelSpec& spec) {
  check_inputs(X, y, spec);
  const std::vector<double> ones(static_cast<std::size_t>(X.rows()), 1.0);
  Rng rng(derive_seed(spec.seed, std::uint64_t{0}));
  auto grown = detail::grow_tree(X, detail::presort(X), std::span(y.data(), y.size()),
                                 ones, cart_options(spec, X.cols()), rng);
  ForestState state;
  state.trees.push_back(std::move(grown.tree));
  return FittedModel(spec, X.cols(), std::move(state));
}

FittedModel fit_forest(const Matrix& X, const Vector& y, const ModelSpec& spec) {
  check_inputs(X, y, spec);
  const auto sorted = detail::presort(X);
  const auto options = cart_options(spec, X.cols());
  const bool bootstrap = spec.family == Family::random_forest && spec.hp.bootstrap;
  const auto n = static_cast<std::size_t>(X.rows());

  ForestState state;
  state.trees.resize(static_cast<std::size_t>(spec.hp.n_estimators));
  parallel_for(spec.hp.n_estimators, [&](Index t) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(t)));
    std::vector<double> weights(n, bootstrap ? 0.0 : 1.0);
    if (bootstrap) {
      for (std::size_t i = 0; i < n; ++i) weights[rng.below(n)] += 1.0;
    }
    auto active = bootstrap ? detail::restrict_rows(sorted, weights) : sorted;
    auto grown = detail::grow_tree(X, std::move(active), std::span(y.data(), y.size()),
                                   weights, options, rng);
    state.trees[static_cast<std::size_t>(t)] = std::move(grown.tree);
  });
  return FittedModel(spec, X.cols(), std::move(state));
}

FittedModel fit_gbm(const Matrix& X, const Vector& y, const ModelSpec& spec) {
  check_inputs(X, y, spec);
  const bool classify = spec.task == Task::classification;
  const Index n = X.rows();
  const Index d = X.cols();
  const auto& hp = spec.hp;

  BoostState state;
  const double mean = y.mean();
  if (classify) {
    if (mean <= 0.0 || mean >= 1.0) {
      throw DataError("'" + spec.name + "': classification target has a single class");
    }
    state.init = std::log(mean / (1.0 - mean));
  } else {
    state.init = mean;
  }
  Vector raw = Vector::Constant(n, state.init);
  state.initial_loss = classify ? log_loss(y, raw) : mean_squared(y, raw);

  const auto sorted = detail::presort(X);
  const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  std::vector<double> residual(static_cast<std::size_t>(n));
  std::vector<double> hessian(static_cast<std::size_t>(n));

  detail::GrowOptions opt;
  opt.criterion = Criterion::squared_error;
  opt.max_depth = hp.max_depth;
  opt.min_samples_split = 2;
  opt.min_samples_leaf = hp.min_data_in_leaf;
  opt.max_leaves = hp.num_leaves;
  opt.random_thresholds = hp.extra_trees;
  const int per_round = std::max(
      1, static_cast<int>(std::ceil(hp.feature_fraction * static_cast<double>(d))));

  state.trees.reserve(static_cast<std::size_t>(hp.num_boost_round));
  state.train_loss.reserve(static_cast<std::size_t>(hp.num_boost_round));
  for (int round = 0; round < hp.num_boost_round; ++round) {
    for (Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (classify) {
        const double p = sigmoid(raw[i]);
        residual[k] = y[i] - p;
        hessian[k] = p * (1.0 - p);
      } else {
        residual[k] = y[i] - raw[i];
      }
    }
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(round)));
    opt.allowed_features.clear();
    if (per_round < d) {
      std::vector<int> all(static_cast<std::size_t>(d));
      std::iota(all.begin(), all.end(), 0);
      rng.shuffle(all);
      opt.allowed_features.assign(all.begin(), all.begin() + per_round);
    }
    auto grown = detail::grow_tree(X, sorted, residual, ones, opt, rng);
    auto& tree = grown.tree;

    if (classify) {
      // One Newton step per leaf.
      std::vector<double> g(tree.nodes.size(), 0.0), h(tree.nodes.size(), 0.0);
      for (Index i = 0; i < n; ++i) {
        const auto leaf = static_cast<std::size_t>(grown.leaf_of_row[static_cast<std::size_t>(i)]);
        g[leaf] += residual[static_cast<std::size_t>(i)];
        h[leaf] += hessian[static_cast<std::size_t>(i)];
      }
      for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        if (tree.nodes[k].is_leaf()) tree.nodes[k].value = g[k] / std::max(h[k], 1e-12);
      }
    }
    for (auto& node : tree.nodes) {
      node.value = node.is_leaf() ? node.value * hp.learning_rate : 0.0;
    }
    for (Index i = 0; i < n; ++i) {
      raw[i] += tree.nodes[static_cast<std::size_t>(
                               grown.leaf_of_row[static_cast<std::size_t>(i)])]
                    .value;
    }
    state.train_loss.push_back(classify ? log_loss(y, raw) : mean_squared(y, raw));
    state.trees.push_back(std::move(tree));
  }
  return FittedModel(spec, d, std::move(state));
}

FittedModel fit_knn(const Matrix& X, const Vector& y, const ModelSpec& spec) {
  check_inputs(X, y, spec);
  if (spec.hp.k_neighbors > X.rows()) {
    throw DataError("'" + spec.name + "': k_neighbors = " +
                    std::to_string(spec.hp.k_neighbors) + " exceeds " +
                    std::to_string(X.rows()) + " training rows");
  }
  return FittedModel(spec, X.cols(), NeighborState{X, y});
}

FittedModel fit(const Matrix& X, const Vector& y, const ModelSpec& spec) {
  switch (spec.family) {
    case Family::tree:
      return fit_tree(X, y, spec);
    case Family::random_forest:
    case Family::extra_trees:
      return fit_forest(X, y, spec);
    case Family::gbm:
      return fit_gbm(X, y, spec);
    case Family::knn:
      return fit_knn(X, y, spec);
  }
  throw UsageError("unknown family");
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

namespace {

struct PredictVisitor {
  const Matrix& X;
  const ModelSpec& spec;

  Vector operator()(const ForestState& s) const {
    const double scale = 1.0 / static_cast<double>(s.trees.size());
    return predict_rows(X.rows(), [&](Index r) {
      const auto row = X.row(r);
      double acc = 0.0;
      for (const auto& tree : s.trees) acc += tree.predict(row);
      return acc * scale;
    });
  }

  Vector operator()(const BoostState& s) const {
    const bool classify = spec.task == Task::classification;
    return predict_rows(X.rows(), [&](Index r) {
      const auto row = X.row(r);
      double acc = s.init;
      for (const auto& tree : s.trees) acc += tree.predict(row);
      return classify ? sigmoid(acc) : acc;
    });
  }

  Vector operator()(const NeighborState& s) const {
    using RowMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor points = s.points;
    const Index n = points.rows();
    const auto k = static_cast<std::size_t>(spec.hp.k_neighbors);
    const bool by_distance = spec.hp.weights == KnnWeights::distance;
    return predict_rows(X.rows(), [&](Index r) {
      std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> q = X.row(r);
      for (Index i = 0; i < n; ++i) {
        dist[static_cast<std::size_t>(i)] = {(points.row(i) - q).squaredNorm(), i};
      }
      std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       dist.end());
      std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
      if (!by_distance) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += s.targets[dist[j].second];
        return acc / static_cast<double>(k);
      }
      if (dist[0].first == 0.0) {
        double acc = 0.0;
        std::size_t exact = 0;
        for (; exact < k && dist[exact].first == 0.0; ++exact) {
          acc += s.targets[dist[exact].second];
        }
        return acc / static_cast<double>(exact);
      }
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double w = 1.0 / std::sqrt(dist[j].first);
        num += w * s.targets[dist[j].second];
        den += w;
      }
      return num / den;
    });
  }
};

}  // namespace

Vector FittedModel::predict(const Matrix& X) const {
  if (X.cols() != n_features_) {
    throw DataError("model '" + spec_.name + "' expects " + std::to_string(n_features_) +
                    " features, got " + std::to_string(X.cols()));
  }
  return std::visit(PredictVisitor{X, spec_}, state_);
}

Vector to_labels(const Vector& scores) {
  return (scores.array() >= 0.5).cast<double>();
}

}  // namespace plumestack
