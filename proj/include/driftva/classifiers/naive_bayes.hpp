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
#include <sstream>
#include <vector>

#include "driftva/common.hpp"
#include "driftva/sparse.hpp"
#include "driftva/util.hpp"

namespace driftva {

/// Multinomial Naive Bayes with add-one smoothing. Works on fractional
/// feature values too (tf-idf rows), matching the usual multinomial
/// treatment of weighted counts.
struct NaiveBayesModel {
  size_t n_features = 0;
  std::vector<double> log_prior;              // per class
  std::vector<std::vector<double>> log_prob;  // [class][feature]

  static NaiveBayesModel fit(const SparseMatrix& x, const std::vector<uint8_t>& y,
                             size_t n_classes, uint64_t* work_units) {
    NaiveBayesModel m;
    m.n_features = x.n_cols();
    std::vector<double> class_count(n_classes, 0.0);
    std::vector<std::vector<double>> feat_sum(n_classes, std::vector<double>(x.n_cols(), 0.0));
    for (size_t r = 0; r < x.n_rows(); ++r) {
      const size_t c = y[r];
      class_count[c] += 1.0;
      for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
        if (x.value_at(k) < 0.0) {
          throw DataError("multinomial NB requires non-negative features (row " +
                          std::to_string(r) + "); pick a margin/tree classifier for "
                          "embedding inputs");
        }
        feat_sum[c][x.col_at(k)] += x.value_at(k);
      }
    }
    if (work_units) *work_units += x.nnz() + n_classes * x.n_cols();
    const double n = static_cast<double>(x.n_rows());
    m.log_prior.resize(n_classes);
    m.log_prob.assign(n_classes, std::vector<double>(x.n_cols(), 0.0));
    const double v = static_cast<double>(x.n_cols());
    for (size_t c = 0; c < n_classes; ++c) {
      m.log_prior[c] = std::log(class_count[c] / n);
      double total = 0.0;
      for (double s : feat_sum[c]) total += s;
      const double denom = std::log(total + v);  // add-one: +1 per feature
      for (size_t f = 0; f < x.n_cols(); ++f) {
        m.log_prob[c][f] = std::log(feat_sum[c][f] + 1.0) - denom;
      }
    }
    return m;
  }

  /// Joint log-likelihood per class for one row.
  void row_log_scores(const SparseMatrix& x, size_t r, std::vector<double>& out) const {
    const size_t n_classes = log_prior.size();
    out.assign(n_classes, 0.0);
    for (size_t c = 0; c < n_classes; ++c) {
      double s = log_prior[c];
      for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
        s += x.value_at(k) * log_prob[c][x.col_at(k)];
      }
      out[c] = s;
    }
  }

  void serialize(std::ostringstream& out) const {
    out << "nb " << log_prior.size() << ' ' << n_features << '\n';
    for (size_t c = 0; c < log_prior.size(); ++c) {
      out << fmt_double(log_prior[c]);
      for (double p : log_prob[c]) out << ' ' << fmt_double(p);
      out << '\n';
    }
  }

  static NaiveBayesModel deserialize(const std::vector<std::string>& lines, size_t& i) {
    auto head = split_ws(lines[i++]);
    if (head.size() != 3 || head[0] != "nb") throw DataError("bad nb model header");
    NaiveBayesModel m;
    const size_t n_classes = std::stoull(head[1]);
    m.n_features = std::stoull(head[2]);
    m.log_prior.resize(n_classes);
    m.log_prob.assign(n_classes, {});
    for (size_t c = 0; c < n_classes; ++c, ++i) {
      auto f = split_ws(lines[i]);
      if (f.size() != m.n_features + 1) throw DataError("bad nb model row");
      m.log_prior[c] = std::stod(f[0]);
      m.log_prob[c].resize(m.n_features);
      for (size_t j = 0; j < m.n_features; ++j) m.log_prob[c][j] = std::stod(f[j + 1]);
    }
    return m;
  }
};

}  // namespace driftva
