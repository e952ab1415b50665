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

#include "tree_grower.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <map>
#include <queue>

namespace plumestack::detail {

namespace {

struct Stats {
  double w = 0.0;   // sum of weights
  double s1 = 0.0;  // sum of w * y
  double s2 = 0.0;  // sum of w * y^2
  Index count = 0;  // distinct rows

  void add(double weight, double y) {
    w += weight;
    s1 += weight * y;
    s2 += weight * y * y;
    ++count;
  }
};

double entropy_bits(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

// Weight-scaled impurity of a node.
double impurity_mass(double w, double s1, double s2, Criterion c) {
  if (w <= 0.0) return 0.0;
  switch (c) {
    case Criterion::gini: {
      const double p = s1 / w;
      return w * 2.0 * p * (1.0 - p);
    }
    case Criterion::entropy:
      return w * entropy_bits(s1 / w);
    case Criterion::squared_error:
      return s2 - s1 * s1 / w;
  }
  return 0.0;
}

// Impurity decrease of a split. For squared error the sums of squares cancel
// algebraically, which avoids subtracting two large numbers.
double split_gain(const Stats& parent, double lw, double ls1, Criterion c) {
  const double rw = parent.w - lw;
  const double rs1 = parent.s1 - ls1;
  if (c == Criterion::squared_error) {
    return ls1 * ls1 / lw + rs1 * rs1 / rw - parent.s1 * parent.s1 / parent.w;
  }
  return impurity_mass(parent.w, parent.s1, 0.0, c) -
         impurity_mass(lw, ls1, 0.0, c) - impurity_mass(rw, rs1, 0.0, c);
}

double min_gain(const Stats& parent, Criterion c) {
  return 1e-12 * (c == Criterion::squared_error ? parent.s2 : parent.w);
}

struct Candidate {
  bool valid = false;
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct Pending {
  int node = 0;
  int begin = 0;
  int end = 0;
  int depth = 0;
  Stats stats;
  Candidate best;
};

struct QueueOrder {
  bool operator()(const Pending& a, const Pending& b) const {
    if (a.best.gain != b.best.gain) return a.best.gain < b.best.gain;
    return a.node > b.node;
  }
};

class Grower {
 public:
  Grower(const Matrix& X, SortedColumns sorted, std::span<const double> targets,
         std::span<const double> weights, const GrowOptions& options, Rng& rng)
      : X_(X),
        order_(std::move(sorted.order)),
        y_(targets),
        w_(weights),
        opt_(options),
        rng_(rng) {
    if (opt_.allowed_features.empty()) {
      features_.resize(static_cast<std::size_t>(X.cols()));
      std::iota(features_.begin(), features_.end(), 0);
    } else {
      features_ = opt_.allowed_features;
      std::sort(features_.begin(), features_.end());
    }
    side_.assign(static_cast<std::size_t>(X.rows()), 0);
    buffer_.resize(static_cast<std::size_t>(X.rows()));
  }

  GrownTree run() {
    const auto& base = order_[static_cast<std::size_t>(features_.front())];
    Pending root;
    root.node = 0;
    root.begin = 0;
    root.end = static_cast<int>(base.size());
    root.depth = 0;
    root.stats = stats_of(root.begin, root.end);
    tree_.nodes.push_back(make_leaf(root.stats));

    std::priority_queue<Pending, std::vector<Pending>, QueueOrder> queue;
    evaluate(root);
    if (root.best.valid) queue.push(root);
    int leaves = 1;
    while (!queue.empty() && (!opt_.max_leaves || leaves < *opt_.max_leaves)) {
      Pending p = queue.top();
      queue.pop();
      const int mid = partition(p);
      const int left_id = static_cast<int>(tree_.nodes.size());
      Pending left{left_id, p.begin, mid, p.depth + 1, stats_of(p.begin, mid), {}};
      Pending right{left_id + 1, mid, p.end, p.depth + 1, stats_of(mid, p.end), {}};
      auto& parent = tree_.nodes[static_cast<std::size_t>(p.node)];
      parent.feature = p.best.feature;
      parent.threshold = p.best.threshold;
      parent.left = left_id;
      parent.right = left_id + 1;
      tree_.nodes.push_back(make_leaf(left.stats));
      tree_.nodes.push_back(make_leaf(right.stats));
      ++leaves;
      for (Pending* child : {&left, &right}) {
        evaluate(*child);
        if (child->best.valid) queue.push(*child);
      }
      leaf_ranges_.erase(p.node);
      leaf_ranges_[left.node] = {left.begin, left.end};
      leaf_ranges_[right.node] = {right.begin, right.end};
    }
    if (leaf_ranges_.empty()) leaf_ranges_[0] = {root.begin, root.end};

    GrownTree out;
    out.leaf_of_row.assign(static_cast<std::size_t>(X_.rows()), -1);
    for (const auto& [node, range] : leaf_ranges_) {
      for (int i = range.first; i < range.second; ++i) {
        out.leaf_of_row[static_cast<std::size_t>(base[static_cast<std::size_t>(i)])] = node;
      }
    }
    tree_.nodes.shrink_to_fit();
    out.tree = std::move(tree_);
    return out;
  }

 private:
  Stats stats_of(int begin, int end) const {
    Stats s;
    const auto& base = order_[static_cast<std::size_t>(features_.front())];
    for (int i = begin; i < end; ++i) {
      const auto r = static_cast<std::size_t>(base[static_cast<std::size_t>(i)]);
      s.add(w_[r], y_[r]);
    }
    return s;
  }

  TreeNode make_leaf(const Stats& s) const {
    TreeNode n;
    n.value = s.w > 0.0 ? s.s1 / s.w : 0.0;
    n.n_samples = static_cast<std::int32_t>(s.count);
    return n;
  }

  void evaluate(Pending& p) {
    const auto& s = p.stats;
    if (opt_.max_depth && p.depth >= *opt_.max_depth) return;
    if (s.count < opt_.min_samples_split) return;
    if (s.count < 2 * static_cast<Index>(opt_.min_samples_leaf)) return;
    if (impurity_mass(s.w, s.s1, s.s2, opt_.criterion) <= min_gain(s, opt_.criterion)) {
      return;
    }

    const auto n_candidates = static_cast<int>(features_.size());
    if (opt_.features_per_split <= 0 || opt_.features_per_split >= n_candidates) {
      for (const int f : features_) consider(p, f);
      return;
    }
    std::vector<int> drawn = features_;
    rng_.shuffle(drawn);
    const auto k = static_cast<std::size_t>(opt_.features_per_split);
    std::vector<int> first(drawn.begin(), drawn.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(first.begin(), first.end());
    for (const int f : first) consider(p, f);
    // Keep drawing when the subset holds no valid split.
    for (std::size_t i = k; i < drawn.size() && !p.best.valid; ++i) consider(p, drawn[i]);
  }

  void consider(Pending& p, int feature) {
    const auto& idx = order_[static_cast<std::size_t>(feature)];
    const auto col = X_.col(feature);
    const Stats& parent = p.stats;
    const double floor_gain = min_gain(parent, opt_.criterion);
    const Index msl = opt_.min_samples_leaf;
    const Index count = parent.count;
    auto row = [&](int i) { return static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]); };

    if (opt_.random_thresholds) {
      const double lo = col[static_cast<Index>(row(p.begin))];
      const double hi = col[static_cast<Index>(row(p.end - 1))];
      if (!(lo < hi)) return;
      double threshold = rng_.uniform(lo, hi);
      if (!(threshold < hi)) threshold = lo;
      double lw = 0.0, ls1 = 0.0;
      Index lc = 0;
      for (int i = p.begin; i < p.end; ++i) {
        const auto r = row(i);
        if (col[static_cast<Index>(r)] > threshold) break;
        lw += w_[r];
        ls1 += w_[r] * y_[r];
        ++lc;
      }
      if (lc < msl || count - lc < msl) return;
      const double gain = split_gain(parent, lw, ls1, opt_.criterion);
      if (gain > -floor_gain && (!p.best.valid || gain > p.best.gain)) {
        p.best = {true, gain, feature, threshold};
      }
      return;
    }

    double lw = 0.0, ls1 = 0.0;
    for (int i = p.begin; i < p.end - 1; ++i) {
      const auto r = row(i);
      lw += w_[r];
      ls1 += w_[r] * y_[r];
      const Index lc = i - p.begin + 1;
      if (lc < msl) continue;
      if (count - lc < msl) break;
      const double a = col[static_cast<Index>(r)];
      const double b = col[static_cast<Index>(row(i + 1))];
      if (a == b) continue;
      const double gain = split_gain(parent, lw, ls1, opt_.criterion);
      if (gain > -floor_gain && (!p.best.valid || gain > p.best.gain)) {
        double mid = a + (b - a) * 0.5;
        if (!(mid < b)) mid = a;
        p.best = {true, gain, feature, mid};
      }
    }
  }

  // Stable partition of every tracked column over [begin, end); returns the
  // first index of the right child.
  int partition(const Pending& p) {
    const auto col = X_.col(p.best.feature);
    const auto& split_order = order_[static_cast<std::size_t>(p.best.feature)];
    int n_left = 0;
    for (int i = p.begin; i < p.end; ++i) {
      const int r = split_order[static_cast<std::size_t>(i)];
      const bool left = col[r] <= p.best.threshold;
      side_[static_cast<std::size_t>(r)] = left ? 1 : 0;
      n_left += left ? 1 : 0;
    }
    for (const int f : features_) {
      auto& o = order_[static_cast<std::size_t>(f)];
      int li = p.begin, ri = 0;
      for (int i = p.begin; i < p.end; ++i) {
        const int r = o[static_cast<std::size_t>(i)];
        if (side_[static_cast<std::size_t>(r)]) {
          o[static_cast<std::size_t>(li++)] = r;
        } else {
          buffer_[static_cast<std::size_t>(ri++)] = r;
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + ri,
                o.begin() + p.begin + n_left);
    }
    return p.begin + n_left;
  }

  const Matrix& X_;
  std::vector<std::vector<int>> order_;
  std::span<const double> y_;
  std::span<const double> w_;
  const GrowOptions& opt_;
  Rng& rng_;
  std::vector<int> features_;
  std::vector<char> side_;
  std::vector<int> buffer_;
  Tree tree_;
  std::map<int, std::pair<int, int>> leaf_ranges_;
};

}  // namespace

SortedColumns presort(const Matrix& X) {
  SortedColumns s;
  s.order.resize(static_cast<std::size_t>(X.cols()));
  for (Index f = 0; f < X.cols(); ++f) {
    auto& o = s.order[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(X.rows()));
    std::iota(o.begin(), o.end(), 0);
    const auto col = X.col(f);
    std::sort(o.begin(), o.end(), [&col](int a, int b) {
      return col[a] < col[b] || (col[a] == col[b] && a < b);
    });
  }
  return s;
}

SortedColumns restrict_rows(const SortedColumns& all, std::span<const double> weights) {
  SortedColumns s;
  s.order.resize(all.order.size());
  for (std::size_t f = 0; f < all.order.size(); ++f) {
    auto& o = s.order[f];
    o.reserve(all.order[f].size());
    for (const int r : all.order[f]) {
      if (weights[static_cast<std::size_t>(r)] > 0.0) o.push_back(r);
    }
  }
  return s;
}

GrownTree grow_tree(const Matrix& X, SortedColumns sorted,
                    std::span<const double> targets,
                    std::span<const double> weights, const GrowOptions& options,
                    Rng& rng) {
  if (X.cols() == 0) throw DataError("cannot grow a tree with zero features");
  Grower grower(X, std::move(sorted), targets, weights, options, rng);
  return grower.run();
}

}  // namespace plumestack::detail
