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

#ifndef PARSEPOOL_TESTS_TEST_UTIL_HPP
#define PARSEPOOL_TESTS_TEST_UTIL_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "parsepool/graph.hpp"
#include "parsepool/parser.hpp"

namespace parsepool::testing {

using Partition = std::set<std::set<Index>>;

inline Graph make_graph(Index n, std::vector<std::pair<Index, Index>> edges, Index feature_dim = 1) {
  return build_graph(n, edges, Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_dim)));
}

inline Graph path4() { return make_graph(4, {{0, 1}, {1, 2}, {2, 3}}); }

/// P4 scores 0.9 / 0.5 / 0.8 on (0,1), (1,2), (2,3).
inline EdgeScores path4_scores() {
  const std::vector<UndirectedEdge> edges = {{0, 1}, {1, 2}, {2, 3}};
  const std::vector<double> values = {0.9, 0.5, 0.8};
  return EdgeScores::from_upper(4, edges, values);
}

inline Partition partition_of(const Assignment& s) {
  Partition out;
  for (const auto& members : s.members()) out.insert(std::set<Index>(members.begin(), members.end()));
  return out;
}

inline Partition permute_partition(const Partition& p, const std::vector<Index>& perm) {
  Partition out;
  for (const auto& block : p) {
    std::set<Index> moved;
    for (Index v : block) moved.insert(perm[v]);
    out.insert(moved);
  }
  return out;
}

struct ScoredGraph {
  Graph graph;
  EdgeScores scores;
};

/// Simple random graph with distinct scores in (0, 1).
inline ScoredGraph random_scored_graph(std::mt19937_64& rng, Index max_n, double density) {
  std::uniform_int_distribution<Index> size(1, max_n);
  const Index n = size(rng);
  std::bernoulli_distribution keep(density);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (keep(rng)) edges.emplace_back(i, j);
    }
  }
  std::vector<double> values(edges.size());
  for (Index k = 0; k < values.size(); ++k) values[k] = static_cast<double>(k + 1) / static_cast<double>(values.size() + 1);
  std::shuffle(values.begin(), values.end(), rng);
  std::vector<UndirectedEdge> upper;
  for (const auto& [i, j] : edges) upper.push_back({i, j});
  ScoredGraph out{make_graph(n, edges), EdgeScores::from_upper(n, upper, values)};
  return out;
}

/// Random connected graph: a random spanning tree plus extra edges.
inline Graph random_connected_graph(std::mt19937_64& rng, Index min_n, Index max_n, double extra_density,
                                    Index feature_dim = 1) {
  std::uniform_int_distribution<Index> size(min_n, max_n);
  const Index n = size(rng);
  std::set<std::pair<Index, Index>> edges;
  for (Index v = 1; v < n; ++v) {
    std::uniform_int_distribution<Index> parent(0, v - 1);
    edges.insert({parent(rng), v});
  }
  std::bernoulli_distribution keep(extra_density);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (keep(rng)) edges.insert({i, j});
    }
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_dim));
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = normal(rng);
  std::vector<std::pair<Index, Index>> list(edges.begin(), edges.end());
  return build_graph(n, list, std::move(x));
}

inline std::vector<Index> random_permutation(std::mt19937_64& rng, Index n) {
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace parsepool::testing

#endif  // PARSEPOOL_TESTS_TEST_UTIL_HPP
