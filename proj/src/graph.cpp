// Copyright 2026 The parsepool Authors
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

#include "parsepool/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace parsepool {

SparseMatrix SparseMatrix::from_triplets(Index n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(n);
  m.cols_.reserve(triplets.size());
  m.vals_.reserve(triplets.size());
  std::vector<Index> counts(n, 0);
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (t.row >= n || t.col >= n) {
      throw GraphError("sparse entry (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                       ") out of range for size " + std::to_string(n));
    }
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      m.vals_.back() += t.value;
      continue;
    }
    m.cols_.push_back(t.col);
    m.vals_.push_back(t.value);
    ++counts[t.row];
  }
  for (Index i = 0; i < n; ++i) m.row_ptr_[i + 1] = m.row_ptr_[i] + counts[i];
  return m;
}

double SparseMatrix::at(Index i, Index j) const {
  auto nb = neighbors(i);
  auto it = std::lower_bound(nb.begin(), nb.end(), j);
  if (it == nb.end() || *it != j) return 0.0;
  return vals_[row_ptr_[i] + static_cast<Index>(it - nb.begin())];
}

bool SparseMatrix::contains(Index i, Index j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<UndirectedEdge> SparseMatrix::upper_edges() const {
  std::vector<UndirectedEdge> out;
  out.reserve(nnz() / 2);
  for (Index i = 0; i < n_; ++i) {
    for (Index j : neighbors(i)) {
      if (i < j) out.push_back({i, j});
    }
  }
  return out;
}

bool SparseMatrix::is_symmetric() const {
  for (Index i = 0; i < n_; ++i) {
    auto nb = neighbors(i);
    auto vals = row_values(i);
    for (Index k = 0; k < nb.size(); ++k) {
      if (!contains(nb[k], i) || at(nb[k], i) != vals[k]) return false;
    }
  }
  return true;
}

bool SparseMatrix::has_diagonal() const {
  for (Index i = 0; i < n_; ++i) {
    if (contains(i, i)) return true;
  }
  return false;
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
  return n_ == other.n_ && row_ptr_ == other.row_ptr_ && cols_ == other.cols_;
}

double SparseMatrix::total_weight() const {
  return std::accumulate(vals_.begin(), vals_.end(), 0.0);
}

bool operator==(const Graph& a, const Graph& b) {
  return a.n == b.n && a.adjacency == b.adjacency && a.features.rows() == b.features.rows() &&
         a.features.cols() == b.features.cols() && a.features == b.features && a.label == b.label &&
         a.node_labels == b.node_labels;
}

Assignment::Assignment(std::vector<Index> cluster_of, Index clusters)
    : cluster_of_(std::move(cluster_of)), clusters_(clusters) {
  std::vector<bool> used(clusters_, false);
  for (Index i = 0; i < cluster_of_.size(); ++i) {
    if (cluster_of_[i] >= clusters_) {
      throw GraphError("assignment: node " + std::to_string(i) + " mapped to cluster " +
                       std::to_string(cluster_of_[i]) + " >= " + std::to_string(clusters_));
    }
    used[cluster_of_[i]] = true;
  }
  for (Index c = 0; c < clusters_; ++c) {
    if (!used[c]) throw GraphError("assignment: cluster " + std::to_string(c) + " is empty");
  }
}

Assignment Assignment::identity(Index n) {
  std::vector<Index> ids(n);
  std::iota(ids.begin(), ids.end(), Index{0});
  return Assignment(std::move(ids), n);
}

std::vector<std::vector<Index>> Assignment::members() const {
  std::vector<std::vector<Index>> out(clusters_);
  for (Index i = 0; i < cluster_of_.size(); ++i) out[cluster_of_[i]].push_back(i);
  return out;
}

std::vector<Index> Assignment::cluster_sizes() const {
  std::vector<Index> out(clusters_, 0);
  for (Index c : cluster_of_) ++out[c];
  return out;
}

Graph build_graph(Index n, std::span<const std::pair<Index, Index>> edges,
                  std::span<const double> weights, Matrix features) {
  if (!weights.empty() && weights.size() != edges.size()) {
    throw GraphError("build_graph: " + std::to_string(weights.size()) + " weights for " +
                     std::to_string(edges.size()) + " edges");
  }
  if (static_cast<Index>(features.rows()) != n) {
    throw GraphError("build_graph: features have " + std::to_string(features.rows()) +
                     " rows, expected " + std::to_string(n));
  }
  std::vector<Triplet> triplets;
  triplets.reserve(2 * edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    auto [i, j] = edges[k];
    if (i >= n || j >= n) {
      throw GraphError("build_graph: edge " + std::to_string(k) + " (" + std::to_string(i) + "," +
                       std::to_string(j) + ") has an index >= n=" + std::to_string(n));
    }
    if (i == j) {
      throw GraphError("build_graph: edge " + std::to_string(k) + " is a self-loop on node " +
                       std::to_string(i));
    }
    double w = weights.empty() ? 1.0 : weights[k];
    if (!(w >= 0.0)) throw GraphError("build_graph: edge " + std::to_string(k) + " has negative weight");
    triplets.push_back({i, j, w});
    triplets.push_back({j, i, w});
  }
  Graph g;
  g.n = n;
  g.adjacency = SparseMatrix::from_triplets(n, std::move(triplets));
  if (g.adjacency.nnz() != 2 * edges.size()) {
    throw GraphError("build_graph: duplicate undirected edges in input");
  }
  g.features = std::move(features);
  return g;
}

Graph build_graph(Index n, std::span<const std::pair<Index, Index>> edges, Matrix features) {
  return build_graph(n, edges, {}, std::move(features));
}

SparseMatrix coarsen_adjacency(const SparseMatrix& adjacency, const Assignment& assignment) {
  if (assignment.rows() != adjacency.size()) {
    throw GraphError("coarsen_adjacency: assignment has " + std::to_string(assignment.rows()) +
                     " rows, adjacency has " + std::to_string(adjacency.size()) + " nodes");
  }
  std::vector<Triplet> triplets;
  triplets.reserve(adjacency.nnz());
  for (Index i = 0; i < adjacency.size(); ++i) {
    const Index ci = assignment.cluster_of(i);
    auto nb = adjacency.neighbors(i);
    auto vals = adjacency.row_values(i);
    for (Index k = 0; k < nb.size(); ++k) {
      const Index cj = assignment.cluster_of(nb[k]);
      if (ci != cj) triplets.push_back({ci, cj, vals[k]});
    }
  }
  return SparseMatrix::from_triplets(assignment.cols(), std::move(triplets));
}

std::vector<double> intra_cluster_weight(const SparseMatrix& adjacency,
                                         const Assignment& assignment) {
  if (assignment.rows() != adjacency.size()) {
    throw GraphError("intra_cluster_weight: dimension mismatch");
  }
  std::vector<double> out(assignment.cols(), 0.0);
  for (Index i = 0; i < adjacency.size(); ++i) {
    auto nb = adjacency.neighbors(i);
    auto vals = adjacency.row_values(i);
    for (Index k = 0; k < nb.size(); ++k) {
      if (assignment.cluster_of(i) == assignment.cluster_of(nb[k])) {
        out[assignment.cluster_of(i)] += vals[k];
      }
    }
  }
  return out;
}

std::vector<Index> connected_components(const SparseMatrix& adjacency) {
  constexpr Index kUnset = static_cast<Index>(-1);
  const Index n = adjacency.size();
  std::vector<Index> label(n, kUnset);
  std::vector<Index> stack;
  Index next = 0;
  for (Index s = 0; s < n; ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      Index u = stack.back();
      stack.pop_back();
      for (Index v : adjacency.neighbors(u)) {
        if (label[v] == kUnset) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

Index count_components(const SparseMatrix& adjacency) {
  auto labels = connected_components(adjacency);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

static void check_permutation(std::span<const Index> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (Index i = 0; i < perm.size(); ++i) {
    if (perm[i] >= perm.size() || seen[perm[i]]) {
      throw GraphError("permutation is not a bijection at position " + std::to_string(i));
    }
    seen[perm[i]] = true;
  }
}

std::vector<Index> invert_permutation(std::span<const Index> perm) {
  check_permutation(perm);
  std::vector<Index> inv(perm.size());
  for (Index i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

SparseMatrix permute_matrix(const SparseMatrix& m, std::span<const Index> perm) {
  if (perm.size() != m.size()) throw GraphError("permutation size does not match matrix size");
  check_permutation(perm);
  std::vector<Triplet> triplets;
  triplets.reserve(m.nnz());
  for (Index i = 0; i < m.size(); ++i) {
    auto nb = m.neighbors(i);
    auto vals = m.row_values(i);
    for (Index k = 0; k < nb.size(); ++k) triplets.push_back({perm[i], perm[nb[k]], vals[k]});
  }
  return SparseMatrix::from_triplets(m.size(), std::move(triplets));
}

Graph permute_graph(const Graph& g, std::span<const Index> perm) {
  if (perm.size() != g.n) throw GraphError("permute_graph: permutation size does not match n");
  Graph out;
  out.n = g.n;
  out.adjacency = permute_matrix(g.adjacency, perm);
  out.features = Matrix(g.features.rows(), g.features.cols());
  for (Index i = 0; i < g.n; ++i) out.features.row(perm[i]) = g.features.row(i);
  out.label = g.label;
  if (!g.node_labels.empty()) {
    out.node_labels.resize(g.n);
    for (Index i = 0; i < g.n; ++i) out.node_labels[perm[i]] = g.node_labels[i];
  }
  return out;
}

}  // namespace parsepool
