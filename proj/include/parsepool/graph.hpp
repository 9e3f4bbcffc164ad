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

#ifndef PARSEPOOL_GRAPH_HPP
#define PARSEPOOL_GRAPH_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace parsepool {

using Index = std::size_t;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Thrown when a graph, assignment or score matrix violates its contract.
class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Undirected edge with i < j.
struct UndirectedEdge {
  Index i;
  Index j;
  friend bool operator==(const UndirectedEdge&, const UndirectedEdge&) = default;
};

/// Square sparse matrix in compressed-row form with sorted column indices per
/// row. Used for adjacencies and edge scores; both orientations of an
/// undirected edge are stored.
class SparseMatrix {
 public:
  SparseMatrix() : row_ptr_(1, 0) {}
  explicit SparseMatrix(Index n) : n_(n), row_ptr_(n + 1, 0) {}

  /// Builds from unordered triplets; duplicate coordinates are summed.
  static SparseMatrix from_triplets(Index n, std::vector<Triplet> triplets);

  Index size() const { return n_; }
  Index nnz() const { return cols_.size(); }
  Index degree(Index i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

  std::span<const Index> neighbors(Index i) const {
    return {cols_.data() + row_ptr_[i], degree(i)};
  }
  std::span<const double> row_values(Index i) const {
    return {vals_.data() + row_ptr_[i], degree(i)};
  }

  /// Value at (i, j), zero when not stored. O(log deg).
  double at(Index i, Index j) const;
  bool contains(Index i, Index j) const;

  /// Entries (i, j) with i < j, in row-major order.
  std::vector<UndirectedEdge> upper_edges() const;
  bool is_symmetric() const;
  bool has_diagonal() const;
  bool same_pattern(const SparseMatrix& other) const;
  double total_weight() const;

  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_indices() const { return cols_; }
  std::span<const double> values() const { return vals_; }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  Index n_ = 0;
  std::vector<Index> row_ptr_;
  std::vector<Index> cols_;
  std::vector<double> vals_;
};

struct Graph {
  Index n = 0;
  SparseMatrix adjacency;
  Matrix features;
  std::optional<int> label;
  std::vector<int> node_labels;

  Index feature_dim() const { return static_cast<Index>(features.cols()); }
  Index num_edges() const { return adjacency.nnz() / 2; }
};

bool operator==(const Graph& a, const Graph& b);

/// Discrete node-to-cluster map: exactly one nonzero per row, columns
/// 0..clusters-1 each used at least once.
class Assignment {
 public:
  Assignment() = default;
  /// Validates the contiguity invariant; throws GraphError otherwise.
  Assignment(std::vector<Index> cluster_of, Index clusters);

  static Assignment identity(Index n);

  Index rows() const { return cluster_of_.size(); }
  Index cols() const { return clusters_; }
  Index nnz() const { return cluster_of_.size(); }
  Index cluster_of(Index node) const { return cluster_of_[node]; }
  std::span<const Index> clusters() const { return cluster_of_; }

  std::vector<std::vector<Index>> members() const;
  std::vector<Index> cluster_sizes() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::vector<Index> cluster_of_;
  Index clusters_ = 0;
};

Graph build_graph(Index n, std::span<const std::pair<Index, Index>> edges,
                  std::span<const double> weights, Matrix features);
Graph build_graph(Index n, std::span<const std::pair<Index, Index>> edges, Matrix features);

/// Returns S^T A S with the diagonal dropped. Off-diagonal entry (p, q) is the
/// total weight of edges between clusters p and q.
SparseMatrix coarsen_adjacency(const SparseMatrix& adjacency, const Assignment& assignment);

/// Diagonal of S^T A S: per-cluster sum of stored intra-cluster entries.
std::vector<double> intra_cluster_weight(const SparseMatrix& adjacency,
                                         const Assignment& assignment);

/// Component label per node; labels are contiguous and numbered in order of
/// the smallest node index of each component.
std::vector<Index> connected_components(const SparseMatrix& adjacency);
Index count_components(const SparseMatrix& adjacency);

/// Relabels node i as perm[i].
Graph permute_graph(const Graph& g, std::span<const Index> perm);
SparseMatrix permute_matrix(const SparseMatrix& m, std::span<const Index> perm);
std::vector<Index> invert_permutation(std::span<const Index> perm);

}  // namespace parsepool

#endif  // PARSEPOOL_GRAPH_HPP
