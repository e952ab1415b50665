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

// Binary classification and regression metrics.

#ifndef PLUMESTACK_METRICS_HPP
#define PLUMESTACK_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "plumestack/core.hpp"

namespace plumestack {

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Metrics whose denominator vanished are reported as 0 and named here.
struct ClassificationReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  double auc_roc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::vector<std::string> degenerate;

  bool is_degenerate(const std::string& metric) const {
    return std::find(degenerate.begin(), degenerate.end(), metric) != degenerate.end();
  }
};

struct RegressionReport {
  double ssr = 0.0;
  double sst = 0.0;
  Index n = 0;
  double r2 = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
};

template <typename DerivedA, typename DerivedB>
ConfusionMatrix confusion(const Eigen::DenseBase<DerivedA>& y_true,
                          const Eigen::DenseBase<DerivedB>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DataError("confusion: " + std::to_string(y_true.size()) + " labels vs " +
                    std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.size() == 0) throw DataError("confusion: empty input");
  ConfusionMatrix cm;
  for (Index i = 0; i < y_true.size(); ++i) {
    const double t = static_cast<double>(y_true.derived().coeff(i));
    const double p = static_cast<double>(y_pred.derived().coeff(i));
    if ((t != 0.0 && t != 1.0) || (p != 0.0 && p != 1.0)) {
      throw DataError("confusion: labels must be 0 or 1 (index " + std::to_string(i) + ")");
    }
    if (t == 1.0) {
      (p == 1.0 ? cm.tp : cm.fn) += 1;
    } else {
      (p == 1.0 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

// Everything but AUC.
ClassificationReport classification_metrics(const ConfusionMatrix& cm);

// Mann-Whitney form with average ranks for ties; equals the trapezoidal ROC
// area. Throws DataError unless both classes are present.
template <typename DerivedA, typename DerivedB>
double auc_roc(const Eigen::DenseBase<DerivedA>& y_true,
               const Eigen::DenseBase<DerivedB>& scores) {
  const Index n = y_true.size();
  if (scores.size() != n) throw DataError("auc_roc: length mismatch");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& s = scores.derived();
  std::sort(order.begin(), order.end(),
            [&s](Index a, Index b) { return s.coeff(a) < s.coeff(b); });
  double positive_rank_sum = 0.0;
  double n_pos = 0.0;
  for (Index i = 0; i < n;) {
    Index j = i;
    while (j + 1 < n && s.coeff(order[static_cast<std::size_t>(j + 1)]) ==
                            s.coeff(order[static_cast<std::size_t>(i)])) {
      ++j;
    }
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Index k = i; k <= j; ++k) {
      const double t = static_cast<double>(y_true.derived().coeff(order[static_cast<std::size_t>(k)]));
      if (t == 1.0) {
        positive_rank_sum += avg_rank;
        n_pos += 1.0;
      } else if (t != 0.0) {
        throw DataError("auc_roc: labels must be 0 or 1");
      }
    }
    i = j + 1;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw DataError("auc_roc: both classes must be present");
  }
  return (positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

template <typename DerivedA, typename DerivedB>
RegressionReport regression_metrics(const Eigen::MatrixBase<DerivedA>& y_true,
                                    const Eigen::MatrixBase<DerivedB>& y_pred) {
  if (y_true.size() != y_pred.size()) throw DataError("regression_metrics: length mismatch");
  if (y_true.size() < 2) throw DataError("regression_metrics: need at least 2 rows");
  RegressionReport r;
  r.n = y_true.size();
  const double mean = y_true.mean();
  r.ssr = (y_true - y_pred).squaredNorm();
  r.sst = (y_true.array() - mean).square().sum();
  if (r.sst == 0.0) throw DataError("regression_metrics: constant truth (SST = 0)");
  r.r2 = 1.0 - r.ssr / r.sst;
  r.mse = r.ssr / static_cast<double>(r.n);
  r.rmse = std::sqrt(r.mse);
  return r;
}

// Full report from scores: labels at score >= 0.5, AUC from the raw scores.
// A single-class truth flags auc_roc instead of throwing.
ClassificationReport evaluate_scores(const Vector& y_true, const Vector& scores);

double accuracy_of_scores(const Vector& y_true, const Vector& scores);
double r2_score(const Vector& y_true, const Vector& y_pred);

}  // namespace plumestack

#endif  // PLUMESTACK_METRICS_HPP
