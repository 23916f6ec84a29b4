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
#include <deque>
#include <limits>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "driftva/common.hpp"
#include "driftva/sparse.hpp"
#include "driftva/util.hpp"

namespace driftva {

// Decision rule at every split: x[feature] <= threshold goes left. Zeros are
// ordinary values, so sparse rows route through the same comparisons.
struct TreeNode {
  int32_t feature = -1;  // -1: leaf
  double threshold = 0.0;
  int32_t left = -1;
  int32_t right = -1;
  int32_t payload = -1;  // leaf payload index
};

namespace tree_detail {

/// One nonzero cell of the node's submatrix.
struct Cell {
  size_t col;
  double value;
  size_t local;  // index into the node's row list
};

/// Gather the nonzero cells of the given rows, sorted by (col, value, local).
/// The sort makes split scanning deterministic regardless of row order.
inline std::vector<Cell> gather_cells(const SparseMatrix& x, const std::vector<size_t>& rows) {
  std::vector<Cell> cells;
  for (size_t i = 0; i < rows.size(); ++i) {
    const size_t r = rows[i];
    for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
      cells.push_back({x.col_at(k), x.value_at(k), i});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.col != b.col) return a.col < b.col;
    if (a.value != b.value) return a.value < b.value;
    return a.local < b.local;
  });
  return cells;
}

struct SplitChoice {
  bool valid = false;
  size_t feature = 0;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
};

inline double midpoint(double lo, double hi) {
  double t = lo + 0.5 * (hi - lo);
  if (t <= lo) t = lo;  // adjacent doubles; lo itself still separates (<=)
  return t;
}

}  // namespace tree_detail

// ---------------------------------------------------------------------------
// classification trees (gini)
// ---------------------------------------------------------------------------

struct ClassTreeParams {
  size_t n_classes = 2;
  size_t max_leaves = 0;        // 0 = unlimited
  size_t max_depth = 0;         // 0 = unlimited
  size_t split_features = 0;    // 0 = consider every feature
  /// Grow to purity: when no positive-gini-gain split exists on an impure
  /// node, fall back to any separating split so consistent data ends pure.
  bool grow_to_purity = true;
};

class ClassificationTree {
 public:
  std::vector<TreeNode> nodes;
  std::vector<std::vector<double>> leaf_dist;  // normalized class distribution

  const std::vector<double>& predict_row(const SparseMatrix& x, size_t r) const {
    int32_t n = 0;
    while (nodes[static_cast<size_t>(n)].feature >= 0) {
      const TreeNode& node = nodes[static_cast<size_t>(n)];
      const double v = x.at(r, static_cast<size_t>(node.feature));
      n = v <= node.threshold ? node.left : node.right;
    }
    return leaf_dist[static_cast<size_t>(nodes[static_cast<size_t>(n)].payload)];
  }

  static ClassificationTree fit(const SparseMatrix& x, const std::vector<uint8_t>& y,
                                const std::vector<double>& sample_weight,
                                const ClassTreeParams& params, Rng* rng, uint64_t* work_units);

  void serialize(std::ostringstream& out) const {
    out << "ctree " << nodes.size() << ' ' << leaf_dist.size() << '\n';
    for (const auto& n : nodes) {
      out << n.feature << ' ' << fmt_double(n.threshold) << ' ' << n.left << ' ' << n.right
          << ' ' << n.payload << '\n';
    }
    for (const auto& d : leaf_dist) {
      for (size_t i = 0; i < d.size(); ++i) out << (i ? " " : "") << fmt_double(d[i]);
      out << '\n';
    }
  }

  static ClassificationTree deserialize(const std::vector<std::string>& lines, size_t& i) {
    auto head = split_ws(lines[i++]);
    if (head.size() != 3 || head[0] != "ctree") throw DataError("bad ctree header");
    ClassificationTree t;
    const size_t n_nodes = std::stoull(head[1]);
    const size_t n_leaves = std::stoull(head[2]);
    for (size_t n = 0; n < n_nodes; ++n, ++i) {
      auto f = split_ws(lines[i]);
      if (f.size() != 5) throw DataError("bad ctree node");
      TreeNode node;
      node.feature = std::stoi(f[0]);
      node.threshold = std::stod(f[1]);
      node.left = std::stoi(f[2]);
      node.right = std::stoi(f[3]);
      node.payload = std::stoi(f[4]);
      t.nodes.push_back(node);
    }
    for (size_t n = 0; n < n_leaves; ++n, ++i) {
      auto f = split_ws(lines[i]);
      std::vector<double> d(f.size());
      for (size_t j = 0; j < f.size(); ++j) d[j] = std::stod(f[j]);
      t.leaf_dist.push_back(std::move(d));
    }
    return t;
  }
};

namespace tree_detail {

struct ClassNodeState {
  std::vector<size_t> rows;     // indices into X
  std::vector<double> weights;  // aligned with rows
  std::vector<double> hist;     // class weight histogram
  double total_weight = 0.0;
  size_t depth = 0;

  double gini() const {
    if (total_weight <= 0.0) return 0.0;
    double s = 0.0;
    for (double h : hist) {
      const double p = h / total_weight;
      s += p * p;
    }
    return 1.0 - s;
  }

  bool pure() const {
    size_t nonzero = 0;
    for (double h : hist) {
      if (h > 0.0) ++nonzero;
    }
    return nonzero <= 1;
  }
};

/// Best gini split over the node. Scans each candidate feature's values in
/// ascending order with the implicit zero block merged in at value 0.
inline SplitChoice best_class_split(const SparseMatrix& x, const ClassNodeState& node,
                                    const std::vector<uint8_t>& y, size_t n_classes,
                                    size_t split_features, Rng* rng, bool allow_zero_gain,
                                    uint64_t* work_units) {
  SplitChoice best;
  SplitChoice fallback;  // first separating split, used only in purity mode
  const auto cells = gather_cells(x, node.rows);
  if (work_units) *work_units += cells.size();

  // Optional per-split feature subset (deterministic given the tree's rng).
  std::unordered_set<size_t> subset;
  const bool use_subset = split_features > 0 && split_features < x.n_cols();
  if (use_subset && rng) {
    while (subset.size() < split_features) subset.insert(rng->next_below(x.n_cols()));
  }

  const double parent_gini = node.gini();
  const double w_total = node.total_weight;

  std::vector<double> left_hist(n_classes);
  size_t i = 0;
  while (i < cells.size()) {
    const size_t col = cells[i].col;
    size_t seg_end = i;
    while (seg_end < cells.size() && cells[seg_end].col == col) ++seg_end;
    const bool considered = !use_subset || subset.count(col) > 0;
    if (!considered && (!allow_zero_gain || fallback.valid)) {
      i = seg_end;
      continue;
    }

    // Nonzero stats for this column.
    double w_nonzero = 0.0;
    std::vector<double> hist_nonzero(n_classes, 0.0);
    for (size_t k = i; k < seg_end; ++k) {
      const size_t local = cells[k].local;
      const double w = node.weights[local];
      w_nonzero += w;
      hist_nonzero[y[node.rows[local]]] += w;
    }
    const double w_zero = w_total - w_nonzero;

    // Walk distinct values in ascending order, zeros interleaved at 0.
    std::fill(left_hist.begin(), left_hist.end(), 0.0);
    double left_w = 0.0;
    bool zero_pending = w_zero > 0.0;
    double prev_value = 0.0;
    bool have_prev = false;

    auto try_boundary = [&](double next_value) {
      if (!have_prev || left_w <= 0.0 || left_w >= w_total) return;
      double left_g = 0.0, right_g = 0.0;
      double right_w = w_total - left_w;
      double sl = 0.0, sr = 0.0;
      for (size_t c = 0; c < n_classes; ++c) {
        const double pl = left_hist[c] / left_w;
        const double pr = (node.hist[c] - left_hist[c]) / right_w;
        sl += pl * pl;
        sr += pr * pr;
      }
      left_g = 1.0 - sl;
      right_g = 1.0 - sr;
      const double gain = parent_gini - (left_w * left_g + right_w * right_g) / w_total;
      const double thr = midpoint(prev_value, next_value);
      if (considered && gain > best.gain + 1e-15 && gain > 1e-12) {
        best = {true, col, thr, gain};
      }
      if (allow_zero_gain && !fallback.valid) fallback = {true, col, thr, 0.0};
    };

    size_t k = i;
    while (k < seg_end || zero_pending) {
      double v;
      bool is_zero_block = false;
      if (zero_pending && (k >= seg_end || cells[k].value > 0.0)) {
        v = 0.0;
        is_zero_block = true;
      } else {
        v = cells[k].value;
      }
      try_boundary(v);
      if (is_zero_block) {
        for (size_t c = 0; c < n_classes; ++c) {
          left_hist[c] += node.hist[c] - hist_nonzero[c];
        }
        left_w += w_zero;
        zero_pending = false;
      } else {
        // consume the run of equal values
        const double run_value = v;
        while (k < seg_end && cells[k].value == run_value) {
          const size_t local = cells[k].local;
          left_hist[y[node.rows[local]]] += node.weights[local];
          left_w += node.weights[local];
          ++k;
        }
      }
      prev_value = v;
      have_prev = true;
    }
    i = seg_end;
  }

  if (!best.valid && allow_zero_gain && fallback.valid) return fallback;
  return best;
}

inline void partition_class_node(const SparseMatrix& x, const ClassNodeState& node,
                                 const std::vector<uint8_t>& y, size_t feature, double threshold,
                                 size_t n_classes, ClassNodeState& left, ClassNodeState& right) {
  left = ClassNodeState{};
  right = ClassNodeState{};
  left.hist.assign(n_classes, 0.0);
  right.hist.assign(n_classes, 0.0);
  left.depth = right.depth = node.depth + 1;
  for (size_t i = 0; i < node.rows.size(); ++i) {
    const size_t r = node.rows[i];
    const double v = x.at(r, feature);
    ClassNodeState& side = v <= threshold ? left : right;
    side.rows.push_back(r);
    side.weights.push_back(node.weights[i]);
    side.hist[y[r]] += node.weights[i];
    side.total_weight += node.weights[i];
  }
}

}  // namespace tree_detail

inline ClassificationTree ClassificationTree::fit(const SparseMatrix& x,
                                                  const std::vector<uint8_t>& y,
                                                  const std::vector<double>& sample_weight,
                                                  const ClassTreeParams& params, Rng* rng,
                                                  uint64_t* work_units) {
  using tree_detail::ClassNodeState;
  ClassificationTree tree;

  ClassNodeState root;
  root.hist.assign(params.n_classes, 0.0);
  for (size_t r = 0; r < x.n_rows(); ++r) {
    const double w = sample_weight.empty() ? 1.0 : sample_weight[r];
    if (w <= 0.0) continue;
    root.rows.push_back(r);
    root.weights.push_back(w);
    root.hist[y[r]] += w;
    root.total_weight += w;
  }
  if (root.rows.empty()) throw DataError("tree fit: all sample weights are zero");

  auto make_leaf = [&](int32_t node_id, const ClassNodeState& st) {
    std::vector<double> dist(params.n_classes, 0.0);
    for (size_t c = 0; c < params.n_classes; ++c) dist[c] = st.hist[c] / st.total_weight;
    tree.nodes[static_cast<size_t>(node_id)].payload =
        static_cast<int32_t>(tree.leaf_dist.size());
    tree.leaf_dist.push_back(std::move(dist));
  };

  struct Open {
    int32_t node_id;
    ClassNodeState state;
    tree_detail::SplitChoice split;
  };

  auto find_split = [&](const ClassNodeState& st) {
    tree_detail::SplitChoice none;
    if (st.pure()) return none;
    if (params.max_depth > 0 && st.depth >= params.max_depth) return none;
    return tree_detail::best_class_split(x, st, y, params.n_classes, params.split_features, rng,
                                         params.grow_to_purity, work_units);
  };

  tree.nodes.push_back(TreeNode{});
  Open root_open{0, std::move(root), {}};
  root_open.split = find_split(root_open.state);

  if (params.max_leaves == 0) {
    // Depth-first to purity; explicit stack, fixed order.
    std::vector<Open> stack;
    stack.push_back(std::move(root_open));
    while (!stack.empty()) {
      Open cur = std::move(stack.back());
      stack.pop_back();
      if (!cur.split.valid) {
        make_leaf(cur.node_id, cur.state);
        continue;
      }
      ClassNodeState left, right;
      tree_detail::partition_class_node(x, cur.state, y, cur.split.feature, cur.split.threshold,
                                        params.n_classes, left, right);
      if (left.rows.empty() || right.rows.empty()) {  // degenerate; seal as leaf
        make_leaf(cur.node_id, cur.state);
        continue;
      }
      const int32_t left_id = static_cast<int32_t>(tree.nodes.size());
      const int32_t right_id = left_id + 1;
      tree.nodes.push_back(TreeNode{});
      tree.nodes.push_back(TreeNode{});
      TreeNode& node = tree.nodes[static_cast<size_t>(cur.node_id)];  // after growth
      node.feature = static_cast<int32_t>(cur.split.feature);
      node.threshold = cur.split.threshold;
      node.left = left_id;
      node.right = right_id;
      Open l{left_id, std::move(left), {}};
      Open r{right_id, std::move(right), {}};
      l.split = find_split(l.state);
      r.split = find_split(r.state);
      stack.push_back(std::move(r));
      stack.push_back(std::move(l));
    }
    return tree;
  }

  // Best-first growth under a leaf budget: always split the open node with
  // the largest gain (ties resolved by node id). Heap kept by hand so moved
  // payloads stay cheap.
  auto cmp = [](const Open& a, const Open& b) {
    if (a.split.gain != b.split.gain) return a.split.gain < b.split.gain;
    return a.node_id > b.node_id;
  };
  std::vector<Open> open;
  open.push_back(std::move(root_open));
  size_t n_leaves = 1;
  while (!open.empty()) {
    std::pop_heap(open.begin(), open.end(), cmp);
    Open cur = std::move(open.back());
    open.pop_back();
    if (!cur.split.valid || n_leaves >= params.max_leaves) {
      make_leaf(cur.node_id, cur.state);
      continue;
    }
    ClassNodeState left, right;
    tree_detail::partition_class_node(x, cur.state, y, cur.split.feature, cur.split.threshold,
                                      params.n_classes, left, right);
    if (left.rows.empty() || right.rows.empty()) {
      make_leaf(cur.node_id, cur.state);
      continue;
    }
    const int32_t left_id = static_cast<int32_t>(tree.nodes.size());
    const int32_t right_id = left_id + 1;
    tree.nodes.push_back(TreeNode{});
    tree.nodes.push_back(TreeNode{});
    TreeNode& node = tree.nodes[static_cast<size_t>(cur.node_id)];  // after growth
    node.feature = static_cast<int32_t>(cur.split.feature);
    node.threshold = cur.split.threshold;
    node.left = left_id;
    node.right = right_id;
    ++n_leaves;  // one node became two leaves
    Open l{left_id, std::move(left), {}};
    Open r{right_id, std::move(right), {}};
    l.split = find_split(l.state);
    r.split = find_split(r.state);
    open.push_back(std::move(l));
    std::push_heap(open.begin(), open.end(), cmp);
    open.push_back(std::move(r));
    std::push_heap(open.begin(), open.end(), cmp);
  }
  return tree;
}

// ---------------------------------------------------------------------------
// regression trees (second-order boosting objective)
// ---------------------------------------------------------------------------

struct RegTreeParams {
  size_t max_leaves = 100;
  size_t max_depth = 0;  // 0 = unlimited
  double lambda = 1.0;   // L2 on leaf weights
  double min_child_hessian = 1e-3;
  bool leafwise = true;   // false: level-order (FIFO) growth
  size_t max_bins = 32;   // histogram buckets per feature and sign
};

class RegressionTree {
 public:
  std::vector<TreeNode> nodes;
  std::vector<double> leaf_weight;

  double predict_row(const SparseMatrix& x, size_t r) const {
    int32_t n = 0;
    while (nodes[static_cast<size_t>(n)].feature >= 0) {
      const TreeNode& node = nodes[static_cast<size_t>(n)];
      const double v = x.at(r, static_cast<size_t>(node.feature));
      n = v <= node.threshold ? node.left : node.right;
    }
    return leaf_weight[static_cast<size_t>(nodes[static_cast<size_t>(n)].payload)];
  }

  static RegressionTree fit(const SparseMatrix& x, const std::vector<double>& grad,
                            const std::vector<double>& hess, const RegTreeParams& params,
                            uint64_t* work_units);

  void serialize(std::ostringstream& out) const {
    out << "rtree " << nodes.size() << ' ' << leaf_weight.size() << '\n';
    for (const auto& n : nodes) {
      out << n.feature << ' ' << fmt_double(n.threshold) << ' ' << n.left << ' ' << n.right
          << ' ' << n.payload << '\n';
    }
    for (size_t i = 0; i < leaf_weight.size(); ++i) {
      out << (i ? " " : "") << fmt_double(leaf_weight[i]);
    }
    out << '\n';
  }

  static RegressionTree deserialize(const std::vector<std::string>& lines, size_t& i) {
    auto head = split_ws(lines[i++]);
    if (head.size() != 3 || head[0] != "rtree") throw DataError("bad rtree header");
    RegressionTree t;
    const size_t n_nodes = std::stoull(head[1]);
    const size_t n_leaves = std::stoull(head[2]);
    for (size_t n = 0; n < n_nodes; ++n, ++i) {
      auto f = split_ws(lines[i]);
      if (f.size() != 5) throw DataError("bad rtree node");
      TreeNode node;
      node.feature = std::stoi(f[0]);
      node.threshold = std::stod(f[1]);
      node.left = std::stoi(f[2]);
      node.right = std::stoi(f[3]);
      node.payload = std::stoi(f[4]);
      t.nodes.push_back(node);
    }
    auto f = split_ws(lines[i++]);
    if (f.size() != n_leaves) throw DataError("bad rtree leaf table");
    for (const auto& v : f) t.leaf_weight.push_back(std::stod(v));
    return t;
  }
};

namespace tree_detail {

inline double leaf_objective(double g, double h, double lambda) {
  return g * g / (h + lambda);
}

// Histogram split finding: nonzero values of every feature are quantile-
// bucketed once per fit (negatives and positives bucketed separately so a
// virtual zero slot slides in at its ordered position), and every stored
// cell is annotated with its global slot id. Node statistics then accumulate
// in O(nnz of the node), and a child histogram can be derived from its
// parent by subtracting the sibling.

struct FeatureBins {
  size_t n_features = 0;
  size_t total_slots = 0;
  std::vector<uint32_t> offset;      // per feature: first global slot id
  std::vector<uint32_t> zero_slot;   // per feature: local index of the zero slot
  std::vector<double> slot_min;      // per global slot
  std::vector<double> slot_max;      // per global slot
  std::vector<uint32_t> cell_slot;   // per CSR cell: global slot id

  size_t slots_of(size_t f) const { return offset[f + 1] - offset[f]; }
};

inline FeatureBins build_feature_bins(const SparseMatrix& x, size_t max_bins) {
  FeatureBins bins;
  bins.n_features = x.n_cols();
  bins.offset.assign(x.n_cols() + 1, 0);
  bins.cell_slot.resize(x.nnz());

  // (col, value, cell index) over all stored cells, grouped by column.
  struct Entry {
    size_t col;
    double value;
    size_t cell;
  };
  std::vector<Entry> entries;
  entries.reserve(x.nnz());
  for (size_t r = 0; r < x.n_rows(); ++r) {
    for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
      entries.push_back({x.col_at(k), x.value_at(k), k});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.col != b.col) return a.col < b.col;
    return a.value < b.value;
  });

  // First pass: per-feature slot layout.
  std::vector<std::vector<double>> bucket_lo(x.n_cols()), bucket_hi(x.n_cols());
  bins.zero_slot.assign(x.n_cols(), 0);
  size_t i = 0;
  for (size_t f = 0; f < x.n_cols(); ++f) {
    size_t seg_end = i;
    while (seg_end < entries.size() && entries[seg_end].col == f) ++seg_end;

    // distinct values, split by sign
    std::vector<double> neg, pos;
    for (size_t k = i; k < seg_end; ++k) {
      const double v = entries[k].value;
      auto& side = v < 0.0 ? neg : pos;
      if (side.empty() || side.back() != v) side.push_back(v);
    }
    auto bucketize = [&](const std::vector<double>& vals) {
      std::vector<std::pair<double, double>> out;  // (lo, hi)
      if (vals.empty()) return out;
      const size_t n_buckets = std::min(max_bins, vals.size());
      size_t start = 0;
      for (size_t b = 0; b < n_buckets; ++b) {
        size_t end = (b + 1) * vals.size() / n_buckets;
        if (end <= start) continue;
        out.emplace_back(vals[start], vals[end - 1]);
        start = end;
      }
      return out;
    };
    auto neg_buckets = bucketize(neg);
    auto pos_buckets = bucketize(pos);

    auto& lo = bucket_lo[f];
    auto& hi = bucket_hi[f];
    for (const auto& [l, h] : neg_buckets) { lo.push_back(l); hi.push_back(h); }
    bins.zero_slot[f] = static_cast<uint32_t>(lo.size());
    lo.push_back(0.0);  // virtual zero slot (may hold no rows)
    hi.push_back(0.0);
    for (const auto& [l, h] : pos_buckets) { lo.push_back(l); hi.push_back(h); }
    i = seg_end;
  }
  for (size_t f = 0; f < x.n_cols(); ++f) {
    bins.offset[f + 1] = bins.offset[f] + static_cast<uint32_t>(bucket_lo[f].size());
  }
  bins.total_slots = bins.offset[x.n_cols()];
  bins.slot_min.resize(bins.total_slots);
  bins.slot_max.resize(bins.total_slots);
  for (size_t f = 0; f < x.n_cols(); ++f) {
    for (size_t s = 0; s < bucket_lo[f].size(); ++s) {
      bins.slot_min[bins.offset[f] + s] = bucket_lo[f][s];
      bins.slot_max[bins.offset[f] + s] = bucket_hi[f][s];
    }
  }

  // Second pass: annotate every cell with its global slot (upper_bound over
  // the feature's bucket highs; ordered, so the first hi >= value wins).
  i = 0;
  for (size_t f = 0; f < x.n_cols(); ++f) {
    size_t seg_end = i;
    while (seg_end < entries.size() && entries[seg_end].col == f) ++seg_end;
    const auto& hi = bucket_hi[f];
    for (size_t k = i; k < seg_end; ++k) {
      const double v = entries[k].value;
      size_t s = static_cast<size_t>(
          std::lower_bound(hi.begin(), hi.end(), v) - hi.begin());
      if (s == bins.zero_slot[f] && v != 0.0) ++s;  // zero slot never holds nonzeros
      bins.cell_slot[entries[k].cell] = bins.offset[f] + static_cast<uint32_t>(s);
    }
    i = seg_end;
  }
  return bins;
}

/// Per-node statistics: one (g, h, count) triple per global slot plus the
/// per-feature nonzero counts that drive the touched-feature shortlist.
struct RegNodeState {
  std::vector<size_t> rows;  // ascending
  double sum_g = 0.0;
  double sum_h = 0.0;
  size_t depth = 0;
  std::vector<double> slot_g, slot_h, slot_n;
  std::vector<uint32_t> feat_nnz;

  void build_histogram(const SparseMatrix& x, const FeatureBins& bins,
                       const std::vector<double>& grad, const std::vector<double>& hess,
                       uint64_t* work_units) {
    slot_g.assign(bins.total_slots, 0.0);
    slot_h.assign(bins.total_slots, 0.0);
    slot_n.assign(bins.total_slots, 0.0);
    feat_nnz.assign(bins.n_features, 0);
    for (size_t r : rows) {
      for (size_t k = x.row_begin(r); k < x.row_end(r); ++k) {
        const uint32_t slot = bins.cell_slot[k];
        slot_g[slot] += grad[r];
        slot_h[slot] += hess[r];
        slot_n[slot] += 1.0;
        ++feat_nnz[x.col_at(k)];
      }
      if (work_units) *work_units += x.row_nnz(r);
    }
  }

  /// this = parent - sibling, consuming the parent's arrays (the parent is
  /// done with them once both children exist). Only the parent's touched
  /// features carry any mass, so the subtraction walks just those.
  void subtract_histogram(RegNodeState& parent, const RegNodeState& sibling,
                          const FeatureBins& bins) {
    slot_g = std::move(parent.slot_g);
    slot_h = std::move(parent.slot_h);
    slot_n = std::move(parent.slot_n);
    feat_nnz = std::move(parent.feat_nnz);
    for (size_t f = 0; f < bins.n_features; ++f) {
      if (feat_nnz[f] == 0) continue;
      feat_nnz[f] -= sibling.feat_nnz[f];
      for (uint32_t s = bins.offset[f]; s < bins.offset[f + 1]; ++s) {
        slot_g[s] -= sibling.slot_g[s];
        slot_h[s] -= sibling.slot_h[s];
        slot_n[s] -= sibling.slot_n[s];
      }
    }
  }

  void release_histogram() {
    slot_g = {};
    slot_h = {};
    slot_n = {};
    feat_nnz = {};
  }
};

/// Scan a node's histogram for the best boundary. The zero slot's statistics
/// are implicit (node totals minus the feature's nonzero slots), patched in
/// during the ordered walk.
inline SplitChoice best_reg_split(const RegNodeState& node, const FeatureBins& bins,
                                  const RegTreeParams& params) {
  SplitChoice best;
  const double parent_obj = leaf_objective(node.sum_g, node.sum_h, params.lambda);
  const double n_total = static_cast<double>(node.rows.size());

  for (size_t f = 0; f < bins.n_features; ++f) {
    if (node.feat_nnz[f] == 0) continue;  // all rows in the zero slot: no boundary
    const uint32_t lo = bins.offset[f], hi = bins.offset[f + 1];
    const uint32_t zero = bins.offset[f] + bins.zero_slot[f];

    double g_nonzero = 0.0, h_nonzero = 0.0, n_nonzero = 0.0;
    for (uint32_t s = lo; s < hi; ++s) {
      g_nonzero += node.slot_g[s];
      h_nonzero += node.slot_h[s];
      n_nonzero += node.slot_n[s];
    }
    const double g_zero = node.sum_g - g_nonzero;
    const double h_zero = node.sum_h - h_nonzero;
    const double n_zero = n_total - n_nonzero;

    double left_g = 0.0, left_h = 0.0, left_n = 0.0;
    double prev_value = 0.0;
    bool have_prev = false;
    for (uint32_t s = lo; s < hi; ++s) {
      const bool is_zero = s == zero;
      const double slot_count = is_zero ? n_zero : node.slot_n[s];
      if (slot_count <= 0.0) continue;
      const double v_lo = bins.slot_min[s];
      if (have_prev && left_n > 0.0 && left_n < n_total) {
        const double right_g = node.sum_g - left_g;
        const double right_h = node.sum_h - left_h;
        if (left_h >= params.min_child_hessian && right_h >= params.min_child_hessian) {
          const double gain =
              0.5 * (leaf_objective(left_g, left_h, params.lambda) +
                     leaf_objective(right_g, right_h, params.lambda) - parent_obj);
          if (gain > best.gain + 1e-15 && gain > 1e-12) {
            best = {true, f, midpoint(prev_value, v_lo), gain};
          }
        }
      }
      left_g += is_zero ? g_zero : node.slot_g[s];
      left_h += is_zero ? h_zero : node.slot_h[s];
      left_n += slot_count;
      prev_value = bins.slot_max[s];
      have_prev = true;
    }
  }
  return best;
}

}  // namespace tree_detail

inline RegressionTree RegressionTree::fit(const SparseMatrix& x, const std::vector<double>& grad,
                                          const std::vector<double>& hess,
                                          const RegTreeParams& params, uint64_t* work_units) {
  using tree_detail::RegNodeState;
  RegressionTree tree;
  const auto bins = tree_detail::build_feature_bins(x, params.max_bins);

  RegNodeState root;
  root.rows.resize(x.n_rows());
  for (size_t r = 0; r < x.n_rows(); ++r) {
    root.rows[r] = r;
    root.sum_g += grad[r];
    root.sum_h += hess[r];
  }
  root.build_histogram(x, bins, grad, hess, work_units);
  tree.nodes.push_back(TreeNode{});

  auto make_leaf = [&](int32_t node_id, RegNodeState& st) {
    tree.nodes[static_cast<size_t>(node_id)].payload =
        static_cast<int32_t>(tree.leaf_weight.size());
    tree.leaf_weight.push_back(-st.sum_g / (st.sum_h + params.lambda));
    st.release_histogram();
  };

  struct Open {
    int32_t node_id;
    RegNodeState state;
    tree_detail::SplitChoice split;
  };

  auto find_split = [&](const RegNodeState& st) {
    tree_detail::SplitChoice none;
    if (params.max_depth > 0 && st.depth >= params.max_depth) return none;
    if (st.rows.size() < 2 || st.slot_g.empty()) return none;
    return tree_detail::best_reg_split(st, bins, params);
  };

  auto do_split = [&](Open& cur, Open& l, Open& r) {
    RegNodeState left, right;
    left.depth = right.depth = cur.state.depth + 1;
    for (size_t idx : cur.state.rows) {
      const double v = x.at(idx, cur.split.feature);
      RegNodeState& side = v <= cur.split.threshold ? left : right;
      side.rows.push_back(idx);
      side.sum_g += grad[idx];
      side.sum_h += hess[idx];
    }
    const int32_t left_id = static_cast<int32_t>(tree.nodes.size());
    const int32_t right_id = left_id + 1;
    tree.nodes.push_back(TreeNode{});
    tree.nodes.push_back(TreeNode{});
    TreeNode& node = tree.nodes[static_cast<size_t>(cur.node_id)];  // after growth
    node.feature = static_cast<int32_t>(cur.split.feature);
    node.threshold = cur.split.threshold;
    node.left = left_id;
    node.right = right_id;

    // Children at the depth cap never split, so skip their histograms
    // entirely; otherwise build the smaller side and derive the larger by
    // subtraction from the parent.
    const bool need_hists = !(params.max_depth > 0 && left.depth >= params.max_depth);
    if (need_hists) {
      RegNodeState& small = left.rows.size() <= right.rows.size() ? left : right;
      RegNodeState& large = left.rows.size() <= right.rows.size() ? right : left;
      small.build_histogram(x, bins, grad, hess, work_units);
      large.subtract_histogram(cur.state, small, bins);  // consumes the parent's arrays
    }
    cur.state.release_histogram();
    l = Open{left_id, std::move(left), {}};
    r = Open{right_id, std::move(right), {}};
    l.split = find_split(l.state);
    r.split = find_split(r.state);
  };

  Open root_open{0, std::move(root), {}};
  root_open.split = find_split(root_open.state);
  size_t n_leaves = 1;

  if (params.leafwise) {
    auto cmp = [](const Open& a, const Open& b) {
      if (a.split.gain != b.split.gain) return a.split.gain < b.split.gain;
      return a.node_id > b.node_id;
    };
    std::vector<Open> open;
    open.push_back(std::move(root_open));
    while (!open.empty()) {
      std::pop_heap(open.begin(), open.end(), cmp);
      Open cur = std::move(open.back());
      open.pop_back();
      if (!cur.split.valid || (params.max_leaves > 0 && n_leaves >= params.max_leaves)) {
        make_leaf(cur.node_id, cur.state);
        continue;
      }
      Open l, r;
      do_split(cur, l, r);
      ++n_leaves;
      open.push_back(std::move(l));
      std::push_heap(open.begin(), open.end(), cmp);
      open.push_back(std::move(r));
      std::push_heap(open.begin(), open.end(), cmp);
    }
  } else {
    // level-order expansion
    std::deque<Open> open;
    open.push_back(std::move(root_open));
    while (!open.empty()) {
      Open cur = std::move(open.front());
      open.pop_front();
      if (!cur.split.valid || (params.max_leaves > 0 && n_leaves >= params.max_leaves)) {
        make_leaf(cur.node_id, cur.state);
        continue;
      }
      Open l, r;
      do_split(cur, l, r);
      ++n_leaves;
      open.push_back(std::move(l));
      open.push_back(std::move(r));
    }
  }
  return tree;
}

}  // namespace driftva
