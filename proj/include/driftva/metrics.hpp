// Copyright 2026 The driftva Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "driftva/common.hpp"

namespace driftva {

/// One-vs-rest tallies per class. For every class, TP+FP+TN+FN equals the
/// sample count, and the TPs across classes sum to the number of correct
/// predictions.
struct ConfusionCounts {
  size_t n_classes = 0;
  size_t total = 0;
  std::vector<size_t> tp, fp, tn, fn;

  explicit ConfusionCounts(size_t classes = 0)
      : n_classes(classes), tp(classes, 0), fp(classes, 0), tn(classes, 0), fn(classes, 0) {}

  size_t support(size_t cls) const { return tp[cls] + fn[cls]; }
};

/// Tally one-vs-rest confusion counts. Labels are class indices < n_classes.
inline ConfusionCounts confusion(const std::vector<uint8_t>& y_true,
                                 const std::vector<uint8_t>& y_pred, size_t n_classes) {
  if (y_true.size() != y_pred.size()) {
    throw DataError("confusion: label vectors differ in length (" +
                    std::to_string(y_true.size()) + " vs " + std::to_string(y_pred.size()) + ")");
  }
  ConfusionCounts c(n_classes);
  c.total = y_true.size();
  for (size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] >= n_classes || y_pred[i] >= n_classes) {
      throw DataError("confusion: label out of range at sample " + std::to_string(i));
    }
    for (size_t k = 0; k < n_classes; ++k) {
      const bool is_true = (y_true[i] == k);
      const bool is_pred = (y_pred[i] == k);
      if (is_true && is_pred) ++c.tp[k];
      else if (!is_true && is_pred) ++c.fp[k];
      else if (is_true && !is_pred) ++c.fn[k];
      else ++c.tn[k];
    }
  }
  return c;
}

/// Correct predictions over total; identical to micro-averaged F in the
/// multi-class setting.
inline double accuracy(const ConfusionCounts& c) {
  if (c.total == 0) throw DataError("accuracy: no samples");
  size_t correct = 0;
  for (size_t k = 0; k < c.n_classes; ++k) correct += c.tp[k];
  return static_cast<double>(correct) / static_cast<double>(c.total);
}

struct FScores {
  double macro_f = 0.0;
  double weighted_f = 0.0;
  std::vector<double> per_class_f;
  std::vector<double> per_class_precision;
  std::vector<double> per_class_recall;
  /// Set when any class had an undefined precision or recall (zero
  /// denominator), which this implementation scores as 0.
  bool zero_division_hit = false;
};

/// Per-class precision/recall/F plus the macro (unweighted) and weighted
/// (by true-class support) averages.
inline FScores f_scores(const ConfusionCounts& c) {
  if (c.total == 0) throw DataError("f_scores: no samples");
  FScores s;
  s.per_class_f.resize(c.n_classes, 0.0);
  s.per_class_precision.resize(c.n_classes, 0.0);
  s.per_class_recall.resize(c.n_classes, 0.0);
  double macro_sum = 0.0;
  double weighted_sum = 0.0;
  for (size_t k = 0; k < c.n_classes; ++k) {
    const double tp = static_cast<double>(c.tp[k]);
    const double fp = static_cast<double>(c.fp[k]);
    const double fn = static_cast<double>(c.fn[k]);
    double precision = 0.0, recall = 0.0, f = 0.0;
    if (tp + fp > 0.0) precision = tp / (tp + fp);
    else s.zero_division_hit = true;
    if (tp + fn > 0.0) recall = tp / (tp + fn);
    else s.zero_division_hit = true;
    if (precision + recall > 0.0) f = 2.0 * precision * recall / (precision + recall);
    s.per_class_precision[k] = precision;
    s.per_class_recall[k] = recall;
    s.per_class_f[k] = f;
    macro_sum += f;
    weighted_sum += f * static_cast<double>(c.support(k));
  }
  s.macro_f = macro_sum / static_cast<double>(c.n_classes);
  s.weighted_f = weighted_sum / static_cast<double>(c.total);
  return s;
}

/// The evaluation triple reported everywhere.
struct MetricTriple {
  double accuracy = 0.0;
  double macro_f = 0.0;
  double weighted_f = 0.0;
};

inline MetricTriple metric_triple(const std::vector<uint8_t>& y_true,
                                  const std::vector<uint8_t>& y_pred, size_t n_classes) {
  auto c = confusion(y_true, y_pred, n_classes);
  auto f = f_scores(c);
  return {accuracy(c), f.macro_f, f.weighted_f};
}

}  // namespace driftva
