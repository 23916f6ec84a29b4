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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "driftva/common.hpp"
#include "driftva/sparse.hpp"
#include "driftva/util.hpp"

namespace driftva {

namespace detail {

/// Modified Gram-Schmidt on the columns of Y, run twice for stability.
/// Columns that collapse to zero norm are replaced with zeros (they carry no
/// range information and drop out of the projection).
inline void orthonormalize_columns(DenseMatrix& y) {
  const size_t n = y.n_rows(), l = y.n_cols();
  for (int pass = 0; pass < 2; ++pass) {
    for (size_t j = 0; j < l; ++j) {
      for (size_t p = 0; p < j; ++p) {
        double dot = 0.0;
        for (size_t r = 0; r < n; ++r) dot += y.at(r, p) * y.at(r, j);
        for (size_t r = 0; r < n; ++r) y.at(r, j) -= dot * y.at(r, p);
      }
      double norm = 0.0;
      for (size_t r = 0; r < n; ++r) norm += y.at(r, j) * y.at(r, j);
      norm = std::sqrt(norm);
      if (norm > 1e-12) {
        for (size_t r = 0; r < n; ++r) y.at(r, j) /= norm;
      } else {
        for (size_t r = 0; r < n; ++r) y.at(r, j) = 0.0;
      }
    }
  }
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix. Returns
/// eigenvalues (descending) and the matching eigenvectors as columns of v.
inline void jacobi_eigen_symmetric(DenseMatrix a, std::vector<double>& eigvals, DenseMatrix& v) {
  const size_t n = a.n_rows();
  v = DenseMatrix(n, n);
  for (size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    }
    if (off < 1e-24) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double app = a.at(p, p), aqq = a.at(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (size_t k = 0; k < n; ++k) {
          const double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  eigvals.resize(n);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) {
    eigvals[i] = a.at(i, i);
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t x, size_t y) { return eigvals[x] > eigvals[y]; });
  std::vector<double> sorted_vals(n);
  DenseMatrix sorted_v(n, n);
  for (size_t j = 0; j < n; ++j) {
    sorted_vals[j] = eigvals[order[j]];
    for (size_t i = 0; i < n; ++i) sorted_v.at(i, j) = v.at(i, order[j]);
  }
  eigvals = std::move(sorted_vals);
  v = std::move(sorted_v);
}

}  // namespace detail

/// Rank-r truncated SVD of the (uncentered) feature matrix: the LSA model.
/// components is r x n_cols with orthonormal rows (the right singular
/// vectors); singular_values are non-increasing.
struct LsaModel {
  size_t rank = 0;
  size_t n_cols = 0;
  DenseMatrix components;  // rank x n_cols
  std::vector<double> singular_values;
  std::vector<double> explained_variance_ratio;  // fraction of squared Frobenius mass

  std::string to_string() const {
    std::ostringstream out;
    out << "# driftva lsa v1\n";
    out << "rank " << rank << '\n';
    out << "n_cols " << n_cols << '\n';
    out << "singular_values";
    for (double s : singular_values) out << ' ' << fmt_double(s);
    out << '\n';
    out << "explained_variance_ratio";
    for (double s : explained_variance_ratio) out << ' ' << fmt_double(s);
    out << '\n';
    for (size_t i = 0; i < rank; ++i) {
      for (size_t j = 0; j < n_cols; ++j) out << (j ? " " : "") << fmt_double(components.at(i, j));
      out << '\n';
    }
    return out.str();
  }

  static LsaModel parse(const std::vector<std::string>& lines, size_t& i) {
    if (i >= lines.size() || lines[i] != "# driftva lsa v1") throw DataError("not an lsa block");
    ++i;
    LsaModel m;
    for (; i < lines.size(); ++i) {
      auto f = split_ws(lines[i]);
      if (f.empty()) continue;
      if (f[0] == "rank") m.rank = std::stoull(f[1]);
      else if (f[0] == "n_cols") m.n_cols = std::stoull(f[1]);
      else if (f[0] == "singular_values") {
        for (size_t j = 1; j < f.size(); ++j) m.singular_values.push_back(std::stod(f[j]));
      } else if (f[0] == "explained_variance_ratio") {
        for (size_t j = 1; j < f.size(); ++j) m.explained_variance_ratio.push_back(std::stod(f[j]));
        ++i;
        break;
      } else break;
    }
    m.components = DenseMatrix(m.rank, m.n_cols);
    for (size_t r = 0; r < m.rank; ++r, ++i) {
      auto f = split_ws(lines[i]);
      if (f.size() != m.n_cols) throw DataError("bad lsa component row");
      for (size_t j = 0; j < m.n_cols; ++j) m.components.at(r, j) = std::stod(f[j]);
    }
    return m;
  }

  static LsaModel parse(std::string_view content) {
    auto lines = split(content, '\n');
    size_t i = 0;
    return parse(lines, i);
  }
};

/// Randomized range-finder SVD: Gaussian test matrix, two power iterations
/// with re-orthonormalization, then an exact eigendecomposition of the small
/// projected Gram matrix. Deterministic for a fixed seed.
inline LsaModel fit_lsa(const SparseMatrix& x, size_t rank, uint64_t seed) {
  const size_t n = x.n_rows(), d = x.n_cols();
  if (rank == 0) throw UsageError("LSA rank must be positive");
  if (rank >= std::min(n, d)) {
    throw UsageError("LSA rank " + std::to_string(rank) + " must be below min(rows, cols) = " +
                     std::to_string(std::min(n, d)));
  }
  const size_t oversample = 10;
  const size_t l = std::min(rank + oversample, std::min(n, d));

  Rng rng(seed);
  DenseMatrix omega(d, l);
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j < l; ++j) omega.at(i, j) = rng.next_normal();
  }

  DenseMatrix y = sparse_times_dense(x, omega);  // n x l
  detail::orthonormalize_columns(y);
  for (int q = 0; q < 2; ++q) {
    DenseMatrix z = sparse_transpose_times_dense(x, y);  // d x l
    detail::orthonormalize_columns(z);
    y = sparse_times_dense(x, z);
    detail::orthonormalize_columns(y);
  }

  // Bt = X^T Y  (d x l); the small Gram matrix M = Bt^T Bt is l x l.
  DenseMatrix bt = sparse_transpose_times_dense(x, y);
  DenseMatrix m(l, l);
  for (size_t i = 0; i < l; ++i) {
    for (size_t j = i; j < l; ++j) {
      double s = 0.0;
      for (size_t f = 0; f < d; ++f) s += bt.at(f, i) * bt.at(f, j);
      m.at(i, j) = s;
      m.at(j, i) = s;
    }
  }

  std::vector<double> eigvals;
  DenseMatrix u;  // l x l, columns are eigenvectors
  detail::jacobi_eigen_symmetric(std::move(m), eigvals, u);

  LsaModel model;
  model.rank = rank;
  model.n_cols = d;
  model.components = DenseMatrix(rank, d);
  model.singular_values.resize(rank);

  double fro_sq = 0.0;
  for (const auto& t : x.triplets()) fro_sq += t.value * t.value;

  const double sigma_tol = 1e-10 * std::sqrt(std::max(eigvals.empty() ? 0.0 : eigvals[0], 0.0));
  size_t filled = 0;
  for (size_t j = 0; j < rank; ++j) {
    const double sigma = std::sqrt(std::max(eigvals[j], 0.0));
    model.singular_values[j] = sigma;
    if (sigma > sigma_tol && sigma > 0.0) {
      for (size_t f = 0; f < d; ++f) {
        double s = 0.0;
        for (size_t c = 0; c < l; ++c) s += bt.at(f, c) * u.at(c, j);
        model.components.at(j, f) = s / sigma;
      }
      ++filled;
    }
  }

  // Rank-deficient inputs: pad the trailing components with a deterministic
  // orthonormal complement so the row-orthonormality contract still holds.
  if (filled < rank) {
    for (size_t j = filled; j < rank; ++j) {
      model.singular_values[j] = 0.0;
      for (size_t basis = 0; basis < d; ++basis) {
        std::vector<double> cand(d, 0.0);
        cand[basis] = 1.0;
        for (size_t p = 0; p < j; ++p) {
          double dot = model.components.at(p, basis);
          for (size_t f = 0; f < d; ++f) cand[f] -= dot * model.components.at(p, f);
        }
        double norm = 0.0;
        for (double vv : cand) norm += vv * vv;
        norm = std::sqrt(norm);
        if (norm > 1e-6) {
          for (size_t f = 0; f < d; ++f) model.components.at(j, f) = cand[f] / norm;
          break;
        }
      }
    }
  }

  model.explained_variance_ratio.resize(rank);
  for (size_t j = 0; j < rank; ++j) {
    model.explained_variance_ratio[j] =
        fro_sq > 0.0 ? (model.singular_values[j] * model.singular_values[j]) / fro_sq : 0.0;
  }
  return model;
}

/// Document embeddings: X mapped onto the components (n_rows x rank).
inline DenseMatrix lsa_project(const LsaModel& model, const SparseMatrix& x) {
  if (x.n_cols() != model.n_cols) {
    throw DataError("lsa_project: width mismatch: model " + std::to_string(model.n_cols) +
                    ", matrix " + std::to_string(x.n_cols()));
  }
  DenseMatrix out(x.n_rows(), model.rank);
  for (size_t r = 0; r < x.n_rows(); ++r) {
    for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
      const double v = x.value_at(k);
      const size_t col = x.col_at(k);
      for (size_t j = 0; j < model.rank; ++j) {
        out.at(r, j) += v * model.components.at(j, col);
      }
    }
  }
  return out;
}

/// Dense reconstruction embeddings x components; test and diagnostics helper.
inline DenseMatrix lsa_reconstruct(const LsaModel& model, const SparseMatrix& x) {
  DenseMatrix emb = lsa_project(model, x);
  DenseMatrix out(x.n_rows(), model.n_cols);
  for (size_t r = 0; r < x.n_rows(); ++r) {
    for (size_t j = 0; j < model.rank; ++j) {
      const double e = emb.at(r, j);
      if (e == 0.0) continue;
      for (size_t f = 0; f < model.n_cols; ++f) {
        out.at(r, f) += e * model.components.at(j, f);
      }
    }
  }
  return out;
}

/// Embeddings as a (fully dense) SparseMatrix so classifiers can train on
/// projected features unchanged.
inline SparseMatrix dense_to_sparse(const DenseMatrix& m) {
  SparseBuilder b(m.n_rows(), m.n_cols());
  for (size_t r = 0; r < m.n_rows(); ++r) {
    for (size_t c = 0; c < m.n_cols(); ++c) {
      if (m.at(r, c) != 0.0) b.add(r, c, m.at(r, c));
    }
  }
  return std::move(b).build();
}

}  // namespace driftva
