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

#include "driftva/classifiers/tree.hpp"
#include "driftva/common.hpp"
#include "driftva/sparse.hpp"
#include "driftva/util.hpp"

namespace driftva {

// ---------------------------------------------------------------------------
// random forest
// ---------------------------------------------------------------------------

/// Bagged gini trees with per-split feature subsets. Every tree draws its
/// bootstrap and feature subsets from a seed derived from (master seed, tree
/// index), so the forest is identical no matter how tree builds are ordered
/// or scheduled.
struct ForestModel {
  size_t n_features = 0;
  size_t n_classes = 0;
  uint64_t seed = 0;
  std::vector<ClassificationTree> trees;

  struct FitParams {
    size_t n_trees = 100;
    size_t max_leaves = 0;      // 0 = unlimited
    size_t max_depth = 0;       // 0 = unlimited
    size_t split_features = 0;  // 0 = round(sqrt(n_features))
  };

  static ForestModel fit(const SparseMatrix& x, const std::vector<uint8_t>& y, size_t n_classes,
                         const FitParams& params, uint64_t seed, uint64_t* work_units) {
    ForestModel m;
    m.n_features = x.n_cols();
    m.n_classes = n_classes;
    m.seed = seed;
    size_t mtry = params.split_features;
    if (mtry == 0) {
      mtry = static_cast<size_t>(std::lround(std::sqrt(static_cast<double>(x.n_cols()))));
      mtry = std::max<size_t>(1, std::min(mtry, x.n_cols()));
    }
    mtry = std::min(mtry, x.n_cols());

    m.trees.resize(params.n_trees);
    for (size_t t = 0; t < params.n_trees; ++t) {
      Rng rng(derive_seed(seed, t));
      // bootstrap: n draws with replacement -> per-row weights
      std::vector<double> weight(x.n_rows(), 0.0);
      for (size_t d = 0; d < x.n_rows(); ++d) {
        weight[rng.next_below(x.n_rows())] += 1.0;
      }
      ClassTreeParams tp;
      tp.n_classes = n_classes;
      tp.max_leaves = params.max_leaves;
      tp.max_depth = params.max_depth;
      tp.split_features = mtry;
      tp.grow_to_purity = true;
      m.trees[t] = ClassificationTree::fit(x, y, weight, tp, &rng, work_units);
    }
    return m;
  }

  /// Mean of per-tree leaf class distributions.
  void row_scores(const SparseMatrix& x, size_t r, std::vector<double>& out) const {
    out.assign(n_classes, 0.0);
    for (const auto& tree : trees) {
      const auto& dist = tree.predict_row(x, r);
      for (size_t c = 0; c < n_classes; ++c) out[c] += dist[c];
    }
    const double inv = 1.0 / static_cast<double>(trees.size());
    for (double& v : out) v *= inv;
  }

  void serialize(std::ostringstream& out) const {
    out << "forest " << trees.size() << ' ' << n_classes << ' ' << n_features << ' ' << seed
        << '\n';
    for (const auto& t : trees) t.serialize(out);
  }

  static ForestModel deserialize(const std::vector<std::string>& lines, size_t& i) {
    auto head = split_ws(lines[i++]);
    if (head.size() != 5 || head[0] != "forest") throw DataError("bad forest header");
    ForestModel m;
    const size_t n_trees = std::stoull(head[1]);
    m.n_classes = std::stoull(head[2]);
    m.n_features = std::stoull(head[3]);
    m.seed = std::stoull(head[4]);
    for (size_t t = 0; t < n_trees; ++t) {
      m.trees.push_back(ClassificationTree::deserialize(lines, i));
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// gradient-boosted trees (softmax objective)
// ---------------------------------------------------------------------------

/// Multi-class boosting: each round fits one second-order regression tree per
/// class on the softmax gradients. Depth-wise and leaf-wise variants differ
/// only in the order nodes are expanded under the leaf budget.
struct GbtModel {
  size_t n_features = 0;
  size_t n_classes = 0;
  bool leafwise = true;
  double learning_rate = 0.1;
  std::vector<double> base_score;                  // per class (log prior)
  std::vector<std::vector<RegressionTree>> rounds; // [round][class]

  struct FitParams {
    size_t n_rounds = 100;
    size_t max_leaves = 100;
    size_t max_depth = 0;
    bool leafwise = true;
    double learning_rate = 0.1;
    double lambda = 1.0;
  };

  static GbtModel fit(const SparseMatrix& x, const std::vector<uint8_t>& y, size_t n_classes,
                      const FitParams& params, uint64_t* work_units) {
    GbtModel m;
    m.n_features = x.n_cols();
    m.n_classes = n_classes;
    m.leafwise = params.leafwise;
    m.learning_rate = params.learning_rate;

    const size_t n = x.n_rows();
    // Smoothed log priors as the starting score.
    std::vector<double> counts(n_classes, 0.0);
    for (uint8_t label : y) counts[label] += 1.0;
    m.base_score.resize(n_classes);
    for (size_t c = 0; c < n_classes; ++c) {
      m.base_score[c] =
          std::log((counts[c] + 1.0) / (static_cast<double>(n) + static_cast<double>(n_classes)));
    }

    std::vector<std::vector<double>> score(n_classes, std::vector<double>(n, 0.0));
    for (size_t c = 0; c < n_classes; ++c) {
      std::fill(score[c].begin(), score[c].end(), m.base_score[c]);
    }

    std::vector<double> prob(n_classes);
    std::vector<std::vector<double>> grad(n_classes, std::vector<double>(n));
    std::vector<std::vector<double>> hess(n_classes, std::vector<double>(n));

    RegTreeParams tp;
    tp.max_leaves = params.max_leaves;
    tp.max_depth = params.max_depth;
    tp.lambda = params.lambda;
    tp.leafwise = params.leafwise;

    for (size_t round = 0; round < params.n_rounds; ++round) {
      for (size_t r = 0; r < n; ++r) {
        double mx = score[0][r];
        for (size_t c = 1; c < n_classes; ++c) mx = std::max(mx, score[c][r]);
        double denom = 0.0;
        for (size_t c = 0; c < n_classes; ++c) {
          prob[c] = std::exp(score[c][r] - mx);
          denom += prob[c];
        }
        for (size_t c = 0; c < n_classes; ++c) {
          const double p = prob[c] / denom;
          grad[c][r] = p - (y[r] == c ? 1.0 : 0.0);
          hess[c][r] = std::max(p * (1.0 - p), 1e-9);
        }
      }
      std::vector<RegressionTree> round_trees(n_classes);
      for (size_t c = 0; c < n_classes; ++c) {
        round_trees[c] = RegressionTree::fit(x, grad[c], hess[c], tp, work_units);
        for (size_t r = 0; r < n; ++r) {
          score[c][r] += params.learning_rate * round_trees[c].predict_row(x, r);
        }
      }
      m.rounds.push_back(std::move(round_trees));
    }
    return m;
  }

  /// Softmax over the summed tree scores.
  void row_scores(const SparseMatrix& x, size_t r, std::vector<double>& out) const {
    out = base_score;
    for (const auto& round : rounds) {
      for (size_t c = 0; c < n_classes; ++c) {
        out[c] += learning_rate * round[c].predict_row(x, r);
      }
    }
    double mx = out[0];
    for (double v : out) mx = std::max(mx, v);
    double denom = 0.0;
    for (double& v : out) {
      v = std::exp(v - mx);
      denom += v;
    }
    for (double& v : out) v /= denom;
  }

  void serialize(std::ostringstream& out) const {
    out << "gbt " << rounds.size() << ' ' << n_classes << ' ' << n_features << ' '
        << (leafwise ? 1 : 0) << ' ' << fmt_double(learning_rate) << '\n';
    for (size_t c = 0; c < n_classes; ++c) {
      out << (c ? " " : "") << fmt_double(base_score[c]);
    }
    out << '\n';
    for (const auto& round : rounds) {
      for (const auto& t : round) t.serialize(out);
    }
  }

  static GbtModel deserialize(const std::vector<std::string>& lines, size_t& i) {
    auto head = split_ws(lines[i++]);
    if (head.size() != 6 || head[0] != "gbt") throw DataError("bad gbt header");
    GbtModel m;
    const size_t n_rounds = std::stoull(head[1]);
    m.n_classes = std::stoull(head[2]);
    m.n_features = std::stoull(head[3]);
    m.leafwise = head[4] == "1";
    m.learning_rate = std::stod(head[5]);
    auto base = split_ws(lines[i++]);
    if (base.size() != m.n_classes) throw DataError("bad gbt base scores");
    for (const auto& v : base) m.base_score.push_back(std::stod(v));
    for (size_t round = 0; round < n_rounds; ++round) {
      std::vector<RegressionTree> trees;
      for (size_t c = 0; c < m.n_classes; ++c) {
        trees.push_back(RegressionTree::deserialize(lines, i));
      }
      m.rounds.push_back(std::move(trees));
    }
    return m;
  }
};

}  // namespace driftva
