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

#include <cmath>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

#include "driftva/classifiers/ensemble.hpp"
#include "driftva/classifiers/linear.hpp"
#include "driftva/classifiers/naive_bayes.hpp"
#include "driftva/classifiers/spec.hpp"
#include "driftva/common.hpp"
#include "driftva/sparse.hpp"

namespace driftva {

/// A fitted multi-class model. `classes` lists the label values seen during
/// training in ascending order; score columns and predictions refer to them.
/// The training cost is recorded as a deterministic work-unit counter rather
/// than wall time so artifacts and tie-breaks reproduce bit-for-bit.
class TrainedClassifier {
 public:
  ClassifierSpec spec;
  std::vector<uint8_t> classes;
  size_t n_features = 0;
  uint64_t seed = 0;
  uint64_t train_work_units = 0;

  std::variant<NaiveBayesModel, LinearModel, ForestModel, GbtModel> payload;

  size_t n_trained_classes() const { return classes.size(); }

  std::vector<uint8_t> predict(const SparseMatrix& x) const {
    check_width(x);
    std::vector<uint8_t> out(x.n_rows());
    std::vector<double> scores;
    for (size_t r = 0; r < x.n_rows(); ++r) {
      row_scores(x, r, scores);
      size_t arg = 0;
      for (size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[arg]) arg = c;  // ties keep the first class
      }
      out[r] = classes[arg];
    }
    return out;
  }

  /// Per-class scores, one row per sample, columns in `classes` order.
  /// Consistent with predict's argmax by construction.
  DenseMatrix predict_scores(const SparseMatrix& x) const {
    check_width(x);
    DenseMatrix out(x.n_rows(), classes.size());
    std::vector<double> scores;
    for (size_t r = 0; r < x.n_rows(); ++r) {
      row_scores(x, r, scores);
      for (size_t c = 0; c < scores.size(); ++c) out.at(r, c) = scores[c];
    }
    return out;
  }

  std::string to_string() const {
    std::ostringstream out;
    out << "# driftva classifier v1\n";
    out << "spec " << spec.to_string() << '\n';
    out << "classes";
    for (uint8_t c : classes) out << ' ' << static_cast<int>(c);
    out << '\n';
    out << "n_features " << n_features << '\n';
    out << "seed " << seed << '\n';
    out << "train_work_units " << train_work_units << '\n';
    std::visit([&](const auto& m) { m.serialize(out); }, payload);
    return out.str();
  }

  static TrainedClassifier parse(const std::vector<std::string>& lines, size_t& i) {
    if (i >= lines.size() || lines[i] != "# driftva classifier v1") {
      throw DataError("not a classifier block");
    }
    ++i;
    TrainedClassifier m;
    for (; i < lines.size(); ++i) {
      auto f = split_ws(lines[i]);
      if (f.empty()) continue;
      if (f[0] == "spec") {
        m.spec = ClassifierSpec::parse(lines[i].substr(5));
      } else if (f[0] == "classes") {
        for (size_t j = 1; j < f.size(); ++j) {
          m.classes.push_back(static_cast<uint8_t>(std::stoi(f[j])));
        }
      } else if (f[0] == "n_features") {
        m.n_features = std::stoull(f[1]);
      } else if (f[0] == "seed") {
        m.seed = std::stoull(f[1]);
      } else if (f[0] == "train_work_units") {
        m.train_work_units = std::stoull(f[1]);
        ++i;
        break;
      } else {
        break;
      }
    }
    auto head = split_ws(lines[i]);
    if (head.empty()) throw DataError("classifier payload missing");
    if (head[0] == "nb") m.payload = NaiveBayesModel::deserialize(lines, i);
    else if (head[0] == "linear") m.payload = LinearModel::deserialize(lines, i);
    else if (head[0] == "forest") m.payload = ForestModel::deserialize(lines, i);
    else if (head[0] == "gbt") m.payload = GbtModel::deserialize(lines, i);
    else throw DataError("unknown classifier payload: " + head[0]);
    return m;
  }

  static TrainedClassifier parse(std::string_view content) {
    auto lines = split(content, '\n');
    size_t i = 0;
    return parse(lines, i);
  }

 private:
  void check_width(const SparseMatrix& x) const {
    if (x.n_cols() != n_features) {
      throw DataError("feature width mismatch: model expects " + std::to_string(n_features) +
                      " columns, got " + std::to_string(x.n_cols()));
    }
  }

  void row_scores(const SparseMatrix& x, size_t r, std::vector<double>& scores) const {
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, NaiveBayesModel>) {
            m.row_log_scores(x, r, scores);
            // Normalize to posteriors via log-sum-exp.
            double mx = scores[0];
            for (double v : scores) mx = std::max(mx, v);
            double denom = 0.0;
            for (double& v : scores) {
              v = std::exp(v - mx);
              denom += v;
            }
            for (double& v : scores) v /= denom;
          } else {
            m.row_scores(x, r, scores);
          }
        },
        payload);
  }
};

/// Fit a classifier per its spec. Throws on a single-class label vector or
/// non-finite feature values. `split_features_override` serves the word-only
/// baseline that pins the forest's per-split feature count.
inline TrainedClassifier fit_classifier(const ClassifierSpec& spec, const SparseMatrix& x,
                                        const std::vector<uint8_t>& y, uint64_t seed,
                                        size_t split_features_override = 0) {
  spec.validate();
  if (x.n_rows() != y.size()) throw DataError("fit: X rows != labels");
  if (x.n_rows() == 0) throw DataError("fit: empty training set");
  for (const auto& t : x.triplets()) {
    if (!std::isfinite(t.value)) {
      throw DataError("fit: non-finite feature value at (" + std::to_string(t.row) + "," +
                      std::to_string(t.col) + ")");
    }
  }
  std::set<uint8_t> distinct(y.begin(), y.end());
  if (distinct.size() < 2) throw DataError("fit: training labels contain a single class");

  TrainedClassifier m;
  m.spec = spec;
  m.seed = seed;
  m.n_features = x.n_cols();
  m.classes.assign(distinct.begin(), distinct.end());

  // Map raw labels onto dense 0..K-1 indices.
  std::vector<uint8_t> dense(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    dense[i] = static_cast<uint8_t>(
        std::lower_bound(m.classes.begin(), m.classes.end(), y[i]) - m.classes.begin());
  }
  const size_t k = m.classes.size();
  uint64_t work = 0;

  switch (spec.kind) {
    case ClassifierKind::nb:
      m.payload = NaiveBayesModel::fit(x, dense, k, &work);
      break;
    case ClassifierKind::lr:
      m.payload = LinearModel::fit(x, dense, k, LinearLoss::logistic, spec.regularization(), &work);
      break;
    case ClassifierKind::svm:
      m.payload = LinearModel::fit(x, dense, k, LinearLoss::hinge, spec.regularization(), &work);
      break;
    case ClassifierKind::rf: {
      ForestModel::FitParams p;
      p.n_trees = spec.n_trees();
      p.max_leaves = spec.max_leaves();
      p.max_depth = spec.max_depth();
      p.split_features = split_features_override ? split_features_override
                                                 : spec.max_split_features();
      m.payload = ForestModel::fit(x, dense, k, p, seed, &work);
      break;
    }
    case ClassifierKind::gbt_depthwise:
    case ClassifierKind::gbt_leafwise: {
      GbtModel::FitParams p;
      p.n_rounds = spec.n_trees();
      p.max_leaves = spec.max_leaves();
      p.max_depth = spec.max_depth();
      p.leafwise = spec.kind == ClassifierKind::gbt_leafwise;
      m.payload = GbtModel::fit(x, dense, k, p, &work);
      break;
    }
  }
  m.train_work_units = work;
  return m;
}

}  // namespace driftva
