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

#ifndef PARSEPOOL_PARSER_HPP
#define PARSEPOOL_PARSER_HPP

#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "parsepool/graph.hpp"

namespace parsepool {

/// Edge score matrix. Shares the adjacency's sparsity pattern; symmetric with
/// entries in [0, 1] (sigmoid outputs, which may saturate at the ends).
class EdgeScores {
 public:
  EdgeScores() = default;
  explicit EdgeScores(SparseMatrix scores);

  /// Builds a symmetric score matrix from one value per undirected edge.
  static EdgeScores from_upper(Index n, std::span<const UndirectedEdge> edges,
                               std::span<const double> values);

  const SparseMatrix& matrix() const { return scores_; }
  Index size() const { return scores_.size(); }
  Index num_edges() const { return scores_.nnz() / 2; }

 private:
  SparseMatrix scores_;
};

/// Row-wise argmax of an EdgeScores matrix: at most one entry per row.
struct DominantEdges {
  static constexpr Index kNone = static_cast<Index>(-1);

  std::vector<Index> target;  // column kept in row i, or kNone for isolated rows
  std::vector<double> score;

  Index size() const { return target.size(); }
  bool contains(Index i, Index j) const { return target[i] != kNone && target[i] == j; }
  Index nnz() const;
};

using Entry = std::pair<Index, Index>;
using EntrySet = std::set<Entry>;
using NodeSet = std::set<Index>;

struct Expansion {
  NodeSet nodes;    // endpoints of the seed entries
  EntrySet entries; // dominant entries touching any of those nodes
};

/// Node-to-cluster pairs gathered while parsing, plus the next free cluster id.
struct ClusterMapping {
  std::vector<std::pair<Index, Index>> pairs;
  Index next_cluster = 0;
};

struct ClusterTrace {
  Entry seed;
  double seed_score = 0.0;
  Index size = 0;
  Index passes = 0;      // executions of the inner loop body
  Index expansions = 0;  // passes that grew the covered entry set
};

struct ParseStats {
  Index outer_iterations = 0;        // clusters grown from a seed entry
  Index total_inner_iterations = 0;  // sum of ClusterTrace::passes
  Index isolated_nodes = 0;
  std::vector<ClusterTrace> clusters;  // one per seeded cluster, in cluster order
};

struct ParseResult {
  Assignment assignment;
  ParseStats stats;
};

/// Keeps each row's highest-scoring entry. Ties go to the smallest column.
DominantEdges dom(const EdgeScores& scores);

/// One neighbourhood lookup on the dominant-edge graph.
Expansion expand(const EntrySet& seeds, const DominantEdges& dominant);

/// Fills the assignment matrix from node/cluster pairs. Every node in 0..n-1
/// must appear exactly once with a cluster below `clusters`.
Assignment gen(const ClusterMapping& mapping, Index n, Index clusters);

/// Infers a discrete assignment from edge scores.
///
/// Clusters are the connected components of the dominant-edge graph, emitted
/// in decreasing order of their seed (the largest remaining dominant score,
/// ties to the smallest row). Nodes without any incident entry follow as
/// singleton clusters in ascending node order. Runs in O(n log n + nnz).
ParseResult parse(const EdgeScores& scores);

/// Removes floor(ratio * #edges) undirected edges chosen uniformly at random.
EdgeScores drop_edges(const EdgeScores& scores, double ratio, std::mt19937_64& rng);

/// Removes the listed undirected edges (both orientations).
EdgeScores remove_edges(const EdgeScores& scores, std::span<const UndirectedEdge> edges);

ParseResult parse_with_dropedge(const EdgeScores& scores, double ratio, std::mt19937_64& rng);

}  // namespace parsepool

#endif  // PARSEPOOL_PARSER_HPP
