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
#include <cstdint>
#include <vector>

#include "driftva/common.hpp"

namespace driftva {

struct Triplet {
  size_t row;
  size_t col;
  double value;
};

/// Row-compressed sparse matrix with sorted, duplicate-free columns per row.
/// Construction goes through SparseBuilder so the invariants hold once built.
class SparseMatrix {
 public:
  SparseMatrix() : n_rows_(0), n_cols_(0), row_ptr_{0} {}

  SparseMatrix(size_t n_rows, size_t n_cols, std::vector<size_t> row_ptr,
               std::vector<size_t> col_idx, std::vector<double> values)
      : n_rows_(n_rows),
        n_cols_(n_cols),
        row_ptr_(std::move(row_ptr)),
        col_idx_(std::move(col_idx)),
        values_(std::move(values)) {
    if (row_ptr_.size() != n_rows_ + 1) throw InternalError("sparse: bad row_ptr length");
    if (col_idx_.size() != values_.size() || row_ptr_.back() != values_.size()) {
      throw InternalError("sparse: inconsistent storage");
    }
  }

  size_t n_rows() const { return n_rows_; }
  size_t n_cols() const { return n_cols_; }
  size_t nnz() const { return values_.size(); }

  double density() const {
    size_t cells = n_rows_ * n_cols_;
    return cells == 0 ? 0.0 : static_cast<double>(nnz()) / static_cast<double>(cells);
  }

  size_t row_begin(size_t r) const { return row_ptr_[r]; }
  size_t row_end(size_t r) const { return row_ptr_[r + 1]; }
  size_t col_at(size_t k) const { return col_idx_[k]; }
  double value_at(size_t k) const { return values_[k]; }

  size_t row_nnz(size_t r) const { return row_end(r) - row_begin(r); }

  /// Value at (r, c); zero when absent. Binary search over the sorted row.
  double at(size_t r, size_t c) const {
    auto first = col_idx_.begin() + static_cast<ptrdiff_t>(row_begin(r));
    auto last = col_idx_.begin() + static_cast<ptrdiff_t>(row_end(r));
    auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return values_[static_cast<size_t>(it - col_idx_.begin())];
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (size_t r = 0; r < n_rows_; ++r) {
      for (size_t k = row_begin(r); k < row_end(r); ++k) {
        out.push_back({r, col_idx_[k], values_[k]});
      }
    }
    return out;
  }

  std::vector<std::vector<double>> to_dense() const {
    std::vector<std::vector<double>> d(n_rows_, std::vector<double>(n_cols_, 0.0));
    for (size_t r = 0; r < n_rows_; ++r) {
      for (size_t k = row_begin(r); k < row_end(r); ++k) d[r][col_idx_[k]] = values_[k];
    }
    return d;
  }

  SparseMatrix select_rows(const std::vector<size_t>& rows) const {
    std::vector<size_t> rp{0};
    std::vector<size_t> ci;
    std::vector<double> vals;
    rp.reserve(rows.size() + 1);
    for (size_t r : rows) {
      for (size_t k = row_begin(r); k < row_end(r); ++k) {
        ci.push_back(col_idx_[k]);
        vals.push_back(values_[k]);
      }
      rp.push_back(ci.size());
    }
    return SparseMatrix(rows.size(), n_cols_, std::move(rp), std::move(ci), std::move(vals));
  }

  /// [A | B]: same row count, B's columns shifted right of A's.
  static SparseMatrix horizontal_append(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.n_rows() != b.n_rows()) throw InternalError("horizontal_append: row mismatch");
    std::vector<size_t> rp{0};
    std::vector<size_t> ci;
    std::vector<double> vals;
    ci.reserve(a.nnz() + b.nnz());
    vals.reserve(a.nnz() + b.nnz());
    for (size_t r = 0; r < a.n_rows(); ++r) {
      for (size_t k = a.row_begin(r); k < a.row_end(r); ++k) {
        ci.push_back(a.col_at(k));
        vals.push_back(a.value_at(k));
      }
      for (size_t k = b.row_begin(r); k < b.row_end(r); ++k) {
        ci.push_back(a.n_cols() + b.col_at(k));
        vals.push_back(b.value_at(k));
      }
      rp.push_back(ci.size());
    }
    return SparseMatrix(a.n_rows(), a.n_cols() + b.n_cols(), std::move(rp),
                        std::move(ci), std::move(vals));
  }

 private:
  size_t n_rows_;
  size_t n_cols_;
  std::vector<size_t> row_ptr_;
  std::vector<size_t> col_idx_;
  std::vector<double> values_;
};

/// Accumulates (col -> value) per row, then freezes into CSR with columns
/// sorted ascending. add() on an existing cell sums into it.
class SparseBuilder {
 public:
  SparseBuilder(size_t n_rows, size_t n_cols)
      : n_cols_(n_cols), rows_(n_rows) {}

  void add(size_t row, size_t col, double value) {
    if (row >= rows_.size() || col >= n_cols_) throw InternalError("sparse add out of range");
    rows_[row].emplace_back(col, value);
  }

  SparseMatrix build() && {
    std::vector<size_t> rp{0};
    std::vector<size_t> ci;
    std::vector<double> vals;
    rp.reserve(rows_.size() + 1);
    for (auto& row : rows_) {
      std::sort(row.begin(), row.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      size_t i = 0;
      while (i < row.size()) {
        size_t col = row[i].first;
        double sum = 0.0;
        while (i < row.size() && row[i].first == col) {
          sum += row[i].second;
          ++i;
        }
        if (sum != 0.0) {
          ci.push_back(col);
          vals.push_back(sum);
        }
      }
      rp.push_back(ci.size());
    }
    return SparseMatrix(rows_.size(), n_cols_, std::move(rp), std::move(ci), std::move(vals));
  }

 private:
  size_t n_cols_;
  std::vector<std::vector<std::pair<size_t, double>>> rows_;
};

/// Column view (CSC) of a SparseMatrix; tree learners scan features with it.
struct CscView {
  size_t n_rows = 0;
  size_t n_cols = 0;
  std::vector<size_t> col_ptr;
  std::vector<size_t> row_idx;
  std::vector<double> values;

  explicit CscView(const SparseMatrix& m) : n_rows(m.n_rows()), n_cols(m.n_cols()) {
    std::vector<size_t> counts(n_cols, 0);
    for (size_t r = 0; r < n_rows; ++r) {
      for (size_t k = m.row_begin(r); k < m.row_end(r); ++k) ++counts[m.col_at(k)];
    }
    col_ptr.assign(n_cols + 1, 0);
    for (size_t c = 0; c < n_cols; ++c) col_ptr[c + 1] = col_ptr[c] + counts[c];
    row_idx.resize(m.nnz());
    values.resize(m.nnz());
    std::vector<size_t> cursor(col_ptr.begin(), col_ptr.end() - 1);
    for (size_t r = 0; r < n_rows; ++r) {
      for (size_t k = m.row_begin(r); k < m.row_end(r); ++k) {
        size_t c = m.col_at(k);
        row_idx[cursor[c]] = r;
        values[cursor[c]] = m.value_at(k);
        ++cursor[c];
      }
    }
  }
};

// ---------------------------------------------------------------------------
// small dense matrices (LSA, oracles)
// ---------------------------------------------------------------------------

class DenseMatrix {
 public:
  DenseMatrix() : n_rows_(0), n_cols_(0) {}
  DenseMatrix(size_t n_rows, size_t n_cols, double fill = 0.0)
      : n_rows_(n_rows), n_cols_(n_cols), data_(n_rows * n_cols, fill) {}

  size_t n_rows() const { return n_rows_; }
  size_t n_cols() const { return n_cols_; }

  double& at(size_t r, size_t c) { return data_[r * n_cols_ + c]; }
  double at(size_t r, size_t c) const { return data_[r * n_cols_ + c]; }

  const double* row(size_t r) const { return data_.data() + r * n_cols_; }
  double* row(size_t r) { return data_.data() + r * n_cols_; }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

 private:
  size_t n_rows_;
  size_t n_cols_;
  std::vector<double> data_;
};

/// X (sparse, n x d) times B (dense, d x k) -> dense n x k.
inline DenseMatrix sparse_times_dense(const SparseMatrix& x, const DenseMatrix& b) {
  if (x.n_cols() != b.n_rows()) throw InternalError("sparse_times_dense: shape mismatch");
  DenseMatrix out(x.n_rows(), b.n_cols());
  for (size_t r = 0; r < x.n_rows(); ++r) {
    double* orow = out.row(r);
    for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
      double v = x.value_at(k);
      const double* brow = b.row(x.col_at(k));
      for (size_t c = 0; c < b.n_cols(); ++c) orow[c] += v * brow[c];
    }
  }
  return out;
}

/// X^T (d x n) times Y (dense, n x k) -> dense d x k.
inline DenseMatrix sparse_transpose_times_dense(const SparseMatrix& x, const DenseMatrix& y) {
  if (x.n_rows() != y.n_rows()) throw InternalError("sparse_transpose_times_dense: shape mismatch");
  DenseMatrix out(x.n_cols(), y.n_cols());
  for (size_t r = 0; r < x.n_rows(); ++r) {
    const double* yrow = y.row(r);
    for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
      double v = x.value_at(k);
      double* orow = out.row(x.col_at(k));
      for (size_t c = 0; c < y.n_cols(); ++c) orow[c] += v * yrow[c];
    }
  }
  return out;
}

}  // namespace driftva
