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

#include "plumestack/metrics.hpp"

#include "plumestack/learners.hpp"

namespace plumestack {

ClassificationReport classification_metrics(const ConfusionMatrix& cm) {
  if (cm.total() < 1) throw DataError("classification_metrics: empty confusion matrix");
  const auto tp = static_cast<double>(cm.tp);
  const auto tn = static_cast<double>(cm.tn);
  const auto fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn);
  ClassificationReport r;
  auto ratio = [&r](double num, double den, const char* name) {
    if (den == 0.0) {
      r.degenerate.emplace_back(name);
      return 0.0;
    }
    return num / den;
  };
  r.accuracy = (tp + tn) / (tp + tn + fp + fn);
  r.precision = ratio(tp, tp + fp, "precision");
  r.recall = ratio(tp, tp + fn, "recall");
  r.f1 = ratio(tp, tp + 0.5 * (fp + fn), "f1");
  r.mcc = ratio(tp * tn - fp * fn,
                std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)), "mcc");
  return r;
}

ClassificationReport evaluate_scores(const Vector& y_true, const Vector& scores) {
  auto report = classification_metrics(confusion(y_true, to_labels(scores)));
  const Index positives = (y_true.array() == 1.0).count();
  if (positives == 0 || positives == y_true.size()) {
    report.degenerate.emplace_back("auc_roc");
    report.auc_roc = 0.0;
  } else {
    report.auc_roc = auc_roc(y_true, scores);
  }
  return report;
}

double accuracy_of_scores(const Vector& y_true, const Vector& scores) {
  if (y_true.size() != scores.size() || y_true.size() == 0) {
    throw DataError("accuracy: length mismatch or empty input");
  }
  Index correct = 0;
  for (Index i = 0; i < y_true.size(); ++i) {
    correct += ((scores[i] >= 0.5 ? 1.0 : 0.0) == y_true[i]) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(y_true.size());
}

double r2_score(const Vector& y_true, const Vector& y_pred) {
  return regression_metrics(y_true, y_pred).r2;
}

}  // namespace plumestack
