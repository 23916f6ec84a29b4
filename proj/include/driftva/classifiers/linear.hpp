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

/// Objectives for the one-vs-rest binary subproblems. Both are the
/// sum-of-losses form with an L2 penalty of strength 1/(2C); C is the
/// grid's "regularization value".
enum class LinearLoss : uint8_t { logistic = 0, hinge = 1 };

namespace detail {

inline double dot_row(const SparseMatrix& x, size_t r, const std::vector<double>& w) {
  double z = 0.0;
  for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
    z += x.value_at(k) * w[x.col_at(k)];
  }
  return z;
}

/// log(1 + exp(-m)) without overflow.
inline double log1p_exp_neg(double m) {
  if (m > 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

struct BinaryLinearProblem {
  const SparseMatrix& x;
  const std::vector<double>& y;  // +1 / -1
  double inv_c;                  // 1 / C
  LinearLoss loss;

  double objective(const std::vector<double>& w, double b) const {
    double obj = 0.0;
    for (size_t r = 0; r < x.n_rows(); ++r) {
      const double m = y[r] * (dot_row(x, r, w) + b);
      if (loss == LinearLoss::logistic) {
        obj += log1p_exp_neg(m);
      } else {
        if (m < 1.0) obj += 1.0 - m;
      }
    }
    double wsq = 0.0;
    for (double wi : w) wsq += wi * wi;
    return obj + 0.5 * inv_c * wsq;
  }

  /// (Sub)gradient of the objective at (w, b). For hinge, margins exactly at
  /// 1 contribute zero, which keeps the subgradient choice deterministic.
  void gradient(const std::vector<double>& w, double b, std::vector<double>& gw,
                double& gb) const {
    gw.assign(w.size(), 0.0);
    gb = 0.0;
    for (size_t r = 0; r < x.n_rows(); ++r) {
      const double m = y[r] * (dot_row(x, r, w) + b);
      double coeff = 0.0;
      if (loss == LinearLoss::logistic) {
        // d/dm log(1+exp(-m)) = -sigmoid(-m)
        const double s = m > 0.0 ? std::exp(-m) / (1.0 + std::exp(-m))
                                 : 1.0 / (1.0 + std::exp(m));
        coeff = -y[r] * s;
      } else if (m < 1.0) {
        coeff = -y[r];
      }
      if (coeff != 0.0) {
        for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
          gw[x.col_at(k)] += coeff * x.value_at(k);
        }
        gb += coeff;
      }
    }
    for (size_t j = 0; j < w.size(); ++j) gw[j] += inv_c * w[j];
  }
};

struct LinearFitDiagnostics {
  std::vector<double> epoch_objectives;  // full-batch objective checkpoints
  size_t n_epochs = 0;
};

/// Full-batch descent with Armijo backtracking. Only steps that strictly
/// decrease the objective are accepted, so the checkpoint sequence is
/// non-increasing. Deterministic: no randomness anywhere in the loop.
inline void solve_binary_linear(const BinaryLinearProblem& prob, std::vector<double>& w,
                                double& b, uint64_t* work_units,
                                LinearFitDiagnostics* diag = nullptr, size_t max_epochs = 300,
                                double grad_tol = 1e-6) {
  w.assign(prob.x.n_cols(), 0.0);
  b = 0.0;
  std::vector<double> gw;
  double gb = 0.0;
  std::vector<double> w_try(w.size());
  double obj = prob.objective(w, b);
  if (diag) diag->epoch_objectives.push_back(obj);
  double step = 1.0;
  for (size_t epoch = 0; epoch < max_epochs; ++epoch) {
    prob.gradient(w, b, gw, gb);
    if (work_units) *work_units += prob.x.nnz() + w.size();
    double gnorm_sq = gb * gb;
    double gmax = std::fabs(gb);
    for (double g : gw) {
      gnorm_sq += g * g;
      gmax = std::max(gmax, std::fabs(g));
    }
    if (gmax < grad_tol) break;

    // Backtracking line search along -gradient.
    double t = std::min(step * 2.0, 1e6);
    bool accepted = false;
    while (t > 1e-14) {
      for (size_t j = 0; j < w.size(); ++j) w_try[j] = w[j] - t * gw[j];
      const double b_try = b - t * gb;
      const double obj_try = prob.objective(w_try, b_try);
      if (obj_try <= obj - 1e-4 * t * gnorm_sq) {
        w.swap(w_try);
        b = b_try;
        obj = obj_try;
        step = t;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (diag) {
      diag->epoch_objectives.push_back(obj);
      diag->n_epochs = epoch + 1;
    }
    if (!accepted) break;  // no descent step found (flat or kink); stop
  }
}

}  // namespace detail

/// One-vs-rest linear classifier: per-class weight vector + intercept.
/// Scores are sigmoid-normalized for the logistic loss and raw margins for
/// the hinge loss; argmax is consistent either way.
struct LinearModel {
  LinearLoss loss = LinearLoss::logistic;
  size_t n_features = 0;
  std::vector<std::vector<double>> weights;  // [class][feature]
  std::vector<double> bias;                  // [class]

  static LinearModel fit(const SparseMatrix& x, const std::vector<uint8_t>& y, size_t n_classes,
                         LinearLoss loss, double regularization_c, uint64_t* work_units) {
    LinearModel m;
    m.loss = loss;
    m.n_features = x.n_cols();
    m.weights.assign(n_classes, {});
    m.bias.assign(n_classes, 0.0);
    std::vector<double> signed_y(x.n_rows());
    for (size_t c = 0; c < n_classes; ++c) {
      for (size_t r = 0; r < x.n_rows(); ++r) signed_y[r] = (y[r] == c) ? 1.0 : -1.0;
      detail::BinaryLinearProblem prob{x, signed_y, 1.0 / regularization_c, loss};
      detail::solve_binary_linear(prob, m.weights[c], m.bias[c], work_units);
    }
    return m;
  }

  void row_margins(const SparseMatrix& x, size_t r, std::vector<double>& out) const {
    out.assign(weights.size(), 0.0);
    for (size_t c = 0; c < weights.size(); ++c) {
      out[c] = detail::dot_row(x, r, weights[c]) + bias[c];
    }
  }

  /// Per-class scores for one row. Logistic: sigmoids normalized to sum 1.
  void row_scores(const SparseMatrix& x, size_t r, std::vector<double>& out) const {
    row_margins(x, r, out);
    if (loss == LinearLoss::logistic) {
      double sum = 0.0;
      for (double& v : out) {
        v = 1.0 / (1.0 + std::exp(-v));
        sum += v;
      }
      if (sum > 0.0) {
        for (double& v : out) v /= sum;
      }
    }
  }

  void serialize(std::ostringstream& out) const {
    out << "linear " << (loss == LinearLoss::logistic ? "logistic" : "hinge") << ' '
        << weights.size() << ' ' << n_features << '\n';
    for (size_t c = 0; c < weights.size(); ++c) {
      out << fmt_double(bias[c]);
      for (double wv : weights[c]) out << ' ' << fmt_double(wv);
      out << '\n';
    }
  }

  static LinearModel deserialize(const std::vector<std::string>& lines, size_t& i) {
    auto head = split_ws(lines[i++]);
    if (head.size() != 4 || head[0] != "linear") throw DataError("bad linear model header");
    LinearModel m;
    m.loss = head[1] == "hinge" ? LinearLoss::hinge : LinearLoss::logistic;
    const size_t n_classes = std::stoull(head[2]);
    m.n_features = std::stoull(head[3]);
    m.weights.assign(n_classes, {});
    m.bias.assign(n_classes, 0.0);
    for (size_t c = 0; c < n_classes; ++c, ++i) {
      auto f = split_ws(lines[i]);
      if (f.size() != m.n_features + 1) throw DataError("bad linear model row");
      m.bias[c] = std::stod(f[0]);
      m.weights[c].resize(m.n_features);
      for (size_t j = 0; j < m.n_features; ++j) m.weights[c][j] = std::stod(f[j + 1]);
    }
    return m;
  }
};

}  // namespace driftva
