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

#include "parsepool/parser.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace parsepool {

EdgeScores::EdgeScores(SparseMatrix scores) : scores_(std::move(scores)) {
  if (scores_.has_diagonal()) throw GraphError("edge scores: diagonal entries are not allowed");
  for (double v : scores_.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw GraphError("edge scores: value " + std::to_string(v) + " outside [0, 1]");
    }
  }
  if (!scores_.is_symmetric()) throw GraphError("edge scores: matrix is not symmetric");
}

EdgeScores EdgeScores::from_upper(Index n, std::span<const UndirectedEdge> edges,
                                  std::span<const double> values) {
  if (edges.size() != values.size()) {
    throw GraphError("edge scores: " + std::to_string(values.size()) + " values for " +
                     std::to_string(edges.size()) + " edges");
  }
  std::vector<Triplet> triplets;
  triplets.reserve(2 * edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    triplets.push_back({edges[k].i, edges[k].j, values[k]});
    triplets.push_back({edges[k].j, edges[k].i, values[k]});
  }
  return EdgeScores(SparseMatrix::from_triplets(n, std::move(triplets)));
}

Index DominantEdges::nnz() const {
  return static_cast<Index>(std::count_if(target.begin(), target.end(),
                                          [](Index t) { return t != kNone; }));
}

DominantEdges dom(const EdgeScores& scores) {
  const SparseMatrix& c = scores.matrix();
  DominantEdges out;
  out.target.assign(c.size(), DominantEdges::kNone);
  out.score.assign(c.size(), 0.0);
  for (Index i = 0; i < c.size(); ++i) {
    auto nb = c.neighbors(i);
    auto vals = c.row_values(i);
    if (nb.empty()) continue;
    Index best = 0;
    for (Index k = 1; k < nb.size(); ++k) {
      if (vals[k] > vals[best]) best = k;
    }
    out.target[i] = nb[best];
    out.score[i] = vals[best];
  }
  return out;
}

Expansion expand(const EntrySet& seeds, const DominantEdges& dominant) {
  Expansion out;
  for (const auto& [i, j] : seeds) {
    out.nodes.insert(i);
    out.nodes.insert(j);
  }
  for (Index i = 0; i < dominant.size(); ++i) {
    const Index j = dominant.target[i];
    if (j == DominantEdges::kNone) continue;
    if (out.nodes.contains(i) || out.nodes.contains(j)) out.entries.insert({i, j});
  }
  return out;
}

Assignment gen(const ClusterMapping& mapping, Index n, Index clusters) {
  constexpr Index kUnset = static_cast<Index>(-1);
  std::vector<Index> cluster_of(n, kUnset);
  for (const auto& [node, cluster] : mapping.pairs) {
    if (node >= n) throw GraphError("gen: node " + std::to_string(node) + " out of range");
    if (cluster >= clusters) {
      throw GraphError("gen: cluster " + std::to_string(cluster) + " out of range for " +
                       std::to_string(clusters) + " clusters");
    }
    if (cluster_of[node] != kUnset) {
      throw GraphError("gen: node " + std::to_string(node) + " assigned twice");
    }
    cluster_of[node] = cluster;
  }
  for (Index i = 0; i < n; ++i) {
    if (cluster_of[i] == kUnset) throw GraphError("gen: node " + std::to_string(i) + " is not covered");
  }
  return Assignment(std::move(cluster_of), clusters);
}

ParseResult parse(const EdgeScores& scores) {
  const Index n = scores.size();
  const DominantEdges dominant = dom(scores);

  // Incoming dominant entries per column, CSR layout.
  std::vector<Index> in_ptr(n + 1, 0);
  for (Index i = 0; i < n; ++i) {
    if (dominant.target[i] != DominantEdges::kNone) ++in_ptr[dominant.target[i] + 1];
  }
  for (Index i = 0; i < n; ++i) in_ptr[i + 1] += in_ptr[i];
  std::vector<Index> in_rows(in_ptr[n]);
  {
    std::vector<Index> fill(in_ptr.begin(), in_ptr.end() - 1);
    for (Index i = 0; i < n; ++i) {
      if (dominant.target[i] != DominantEdges::kNone) in_rows[fill[dominant.target[i]]++] = i;
    }
  }

  // Seed order: score descending, then row (each row holds at most one entry).
  std::vector<Index> order;
  order.reserve(n);
  for (Index i = 0; i < n; ++i) {
    if (dominant.target[i] != DominantEdges::kNone) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (dominant.score[a] != dominant.score[b]) return dominant.score[a] > dominant.score[b];
    return a < b;
  });

  constexpr Index kUnset = static_cast<Index>(-1);
  std::vector<Index> cluster_of(n, kUnset);
  std::vector<char> covered(n, 0);  // entry (i, target[i]) is in the current or a past idx
  std::vector<Index> frontier;
  std::vector<Index> next_frontier;
  std::vector<Index> members;
  ParseResult result;
  Index p = 0;

  auto cover = [&](Index row, Index& idx_size, std::vector<Index>& out) {
    if (covered[row]) return;
    covered[row] = 1;
    ++idx_size;
    out.push_back(row);
    out.push_back(dominant.target[row]);
  };

  for (Index seed : order) {
    if (covered[seed]) continue;
    ClusterTrace trace;
    trace.seed = {seed, dominant.target[seed]};
    trace.seed_score = dominant.score[seed];

    Index idx_size = 0;
    members.clear();
    frontier.clear();
    cover(seed, idx_size, frontier);
    for (;;) {
      const Index q = idx_size;
      ++trace.passes;
      next_frontier.clear();
      for (Index u : frontier) {
        if (cluster_of[u] != kUnset) continue;
        cluster_of[u] = p;
        members.push_back(u);
        if (dominant.target[u] != DominantEdges::kNone) cover(u, idx_size, next_frontier);
        for (Index k = in_ptr[u]; k < in_ptr[u + 1]; ++k) cover(in_rows[k], idx_size, next_frontier);
      }
      if (idx_size == q) break;
      ++trace.expansions;
      frontier.swap(next_frontier);
    }
    trace.size = members.size();
    result.stats.total_inner_iterations += trace.passes;
    result.stats.clusters.push_back(trace);
    ++p;
  }
  result.stats.outer_iterations = p;

  for (Index i = 0; i < n; ++i) {
    if (cluster_of[i] == kUnset) {
      cluster_of[i] = p++;
      ++result.stats.isolated_nodes;
    }
  }
  result.assignment = Assignment(std::move(cluster_of), p);
  return result;
}

EdgeScores remove_edges(const EdgeScores& scores, std::span<const UndirectedEdge> edges) {
  std::set<Entry> drop;
  for (const auto& e : edges) {
    drop.insert({e.i, e.j});
    drop.insert({e.j, e.i});
  }
  const SparseMatrix& c = scores.matrix();
  std::vector<Triplet> kept;
  kept.reserve(c.nnz());
  for (Index i = 0; i < c.size(); ++i) {
    auto nb = c.neighbors(i);
    auto vals = c.row_values(i);
    for (Index k = 0; k < nb.size(); ++k) {
      if (!drop.contains({i, nb[k]})) kept.push_back({i, nb[k], vals[k]});
    }
  }
  return EdgeScores(SparseMatrix::from_triplets(c.size(), std::move(kept)));
}

EdgeScores drop_edges(const EdgeScores& scores, double ratio, std::mt19937_64& rng) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw GraphError("dropedge ratio must lie in [0, 1), got " + std::to_string(ratio));
  }
  std::vector<UndirectedEdge> edges = scores.matrix().upper_edges();
  const auto count = static_cast<Index>(std::floor(ratio * static_cast<double>(edges.size())));
  if (count == 0) return scores;
  for (Index k = 0; k < count; ++k) {
    std::uniform_int_distribution<Index> pick(k, edges.size() - 1);
    std::swap(edges[k], edges[pick(rng)]);
  }
  edges.resize(count);

  const SparseMatrix& c = scores.matrix();
  std::vector<char> dropped(c.nnz(), 0);
  auto offset = [&](Index i, Index j) {
    auto nb = c.neighbors(i);
    return c.row_ptr()[i] + static_cast<Index>(std::lower_bound(nb.begin(), nb.end(), j) - nb.begin());
  };
  for (const auto& e : edges) {
    dropped[offset(e.i, e.j)] = 1;
    dropped[offset(e.j, e.i)] = 1;
  }
  std::vector<Triplet> kept;
  kept.reserve(c.nnz() - 2 * count);
  for (Index i = 0; i < c.size(); ++i) {
    auto nb = c.neighbors(i);
    auto vals = c.row_values(i);
    for (Index k = 0; k < nb.size(); ++k) {
      if (!dropped[c.row_ptr()[i] + k]) kept.push_back({i, nb[k], vals[k]});
    }
  }
  return EdgeScores(SparseMatrix::from_triplets(c.size(), std::move(kept)));
}

ParseResult parse_with_dropedge(const EdgeScores& scores, double ratio, std::mt19937_64& rng) {
  return parse(drop_edges(scores, ratio, rng));
}

}  // namespace parsepool
