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

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "driftva/common.hpp"
#include "driftva/util.hpp"

namespace driftva {

enum class ClassifierKind : uint8_t {
  nb = 0,            // multinomial Naive Bayes, add-one smoothing
  lr,                // one-vs-rest L2 logistic regression
  svm,               // one-vs-rest linear SVM (hinge + L2)
  rf,                // random forest, bagged gini trees
  gbt_depthwise,     // gradient-boosted trees, level-order growth
  gbt_leafwise,      // gradient-boosted trees, best-leaf-first growth
};

inline constexpr const char* kClassifierNames[] = {"nb", "lr", "svm", "rf",
                                                   "gbt_depthwise", "gbt_leafwise"};

inline std::string classifier_name(ClassifierKind k) {
  return kClassifierNames[static_cast<size_t>(k)];
}

inline ClassifierKind classifier_from_name(std::string_view name) {
  std::string n = to_lower(name);
  for (size_t i = 0; i < 6; ++i) {
    if (n == kClassifierNames[i]) return static_cast<ClassifierKind>(i);
  }
  // Friendly aliases for the two boosted-tree growth policies.
  if (n == "xgb") return ClassifierKind::gbt_depthwise;
  if (n == "lgbm") return ClassifierKind::gbt_leafwise;
  throw UsageError("unknown classifier: " + std::string(name));
}

inline bool is_tree_ensemble(ClassifierKind k) {
  return k == ClassifierKind::rf || k == ClassifierKind::gbt_depthwise ||
         k == ClassifierKind::gbt_leafwise;
}

inline bool is_gbt(ClassifierKind k) {
  return k == ClassifierKind::gbt_depthwise || k == ClassifierKind::gbt_leafwise;
}

/// Classifier identity plus its tuning hyperparameters. The value domains
/// mirror the study grid: regularization in {0.01, 0.1, 1, 10, 100}, trees in
/// {100, 300, 500}, max_leaves in {100, 200, 300, 0=unlimited} where
/// unlimited is rejected for the boosted kinds.
struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::nb;
  std::map<std::string, double> hyper;

  double get(const std::string& key, double fallback) const {
    auto it = hyper.find(key);
    return it == hyper.end() ? fallback : it->second;
  }

  double regularization() const { return get("regularization", 1.0); }
  size_t n_trees() const { return static_cast<size_t>(get("trees", 100)); }
  /// 0 means unlimited.
  size_t max_leaves() const { return static_cast<size_t>(get("max_leaves", 0)); }
  /// 0 means unlimited depth.
  size_t max_depth() const { return static_cast<size_t>(get("max_depth", 0)); }
  /// 0 means sqrt(n_features); otherwise an exact per-split feature count.
  size_t max_split_features() const { return static_cast<size_t>(get("split_features", 0)); }

  /// Tuning-hyperparameter count used by the model-selection tie-break.
  size_t hyper_count() const {
    switch (kind) {
      case ClassifierKind::nb: return 0;
      case ClassifierKind::lr: return 1;
      case ClassifierKind::svm: return 1;
      default: return 3;  // trees, max depth, max leaves
    }
  }

  void validate() const {
    auto in = [](double v, std::initializer_list<double> domain) {
      for (double d : domain) {
        if (v == d) return true;
      }
      return false;
    };
    switch (kind) {
      case ClassifierKind::nb:
        break;
      case ClassifierKind::lr:
      case ClassifierKind::svm:
        if (!in(regularization(), {0.01, 0.1, 1.0, 10.0, 100.0})) {
          throw UsageError("regularization value must be one of 0.01/0.1/1/10/100, got " +
                           fmt_double(regularization()));
        }
        break;
      case ClassifierKind::rf:
      case ClassifierKind::gbt_depthwise:
      case ClassifierKind::gbt_leafwise:
        if (!in(static_cast<double>(n_trees()), {100.0, 300.0, 500.0})) {
          throw UsageError("tree count must be one of 100/300/500, got " +
                           std::to_string(n_trees()));
        }
        if (!in(static_cast<double>(max_leaves()), {0.0, 100.0, 200.0, 300.0})) {
          throw UsageError("max_leaves must be one of 100/200/300/unlimited, got " +
                           std::to_string(max_leaves()));
        }
        if (is_gbt(kind) && max_leaves() == 0) {
          throw UsageError("unlimited max_leaves is not applicable to boosted trees");
        }
        break;
    }
  }

  /// The tuned operating point for each kind: LR picks its regularization by
  /// weighting scheme; tree ensembles use 100 trees, boosted kinds cap at
  /// 100 leaves, the forest stays unlimited.
  static ClassifierSpec tuned(ClassifierKind kind, bool use_tfidf) {
    ClassifierSpec s;
    s.kind = kind;
    switch (kind) {
      case ClassifierKind::nb:
        break;
      case ClassifierKind::lr:
        s.hyper["regularization"] = use_tfidf ? 10.0 : 0.1;
        break;
      case ClassifierKind::svm:
        s.hyper["regularization"] = 0.1;
        break;
      case ClassifierKind::rf:
        s.hyper["trees"] = 100;
        s.hyper["max_depth"] = 0;
        s.hyper["max_leaves"] = 0;
        break;
      case ClassifierKind::gbt_depthwise:
      case ClassifierKind::gbt_leafwise:
        s.hyper["trees"] = 100;
        s.hyper["max_depth"] = 0;
        s.hyper["max_leaves"] = 100;
        break;
    }
    return s;
  }

  std::string to_string() const {
    std::ostringstream out;
    out << classifier_name(kind);
    for (const auto& [k, v] : hyper) out << ' ' << k << '=' << fmt_double(v);
    return out.str();
  }

  static ClassifierSpec parse(std::string_view text) {
    auto fields = split_ws(text);
    if (fields.empty()) throw DataError("empty classifier spec");
    ClassifierSpec s;
    s.kind = classifier_from_name(fields[0]);
    for (size_t i = 1; i < fields.size(); ++i) {
      auto kv = split(fields[i], '=');
      if (kv.size() != 2) throw DataError("bad hyperparameter: " + fields[i]);
      s.hyper[kv[0]] = std::stod(kv[1]);
    }
    return s;
  }

  bool operator==(const ClassifierSpec&) const = default;
};

}  // namespace driftva
