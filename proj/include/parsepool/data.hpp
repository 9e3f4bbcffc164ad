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

#ifndef PARSEPOOL_DATA_HPP
#define PARSEPOOL_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "parsepool/graph.hpp"

namespace parsepool {

enum class Task { kGraphClassification, kNodeClassification, kReconstruction };

struct Dataset {
  std::vector<Graph> graphs;
  Task task = Task::kGraphClassification;
  Index num_classes = 0;

  Index feature_dim() const { return graphs.empty() ? 0 : graphs.front().feature_dim(); }
  /// Checks feature widths and label ranges; throws GraphError.
  void validate() const;
  std::vector<int> graph_labels() const;
};

/// Degrees at or above this value share the last one-hot slot.
inline constexpr Index kMaxDegreeFeature = 16;

/// One-hot degree features with kMaxDegreeFeature + 1 columns.
Matrix degree_one_hot(const SparseMatrix& adjacency);

/// Cycle on n >= 3 nodes with unit-circle coordinates as features.
Graph gen_ring(Index n);
/// rows x cols 4-neighbourhood lattice with (x, y) coordinates in [-1, 1]^2.
Graph gen_grid(Index rows, Index cols);
/// Uniform simple graph with exactly m edges; all-ones 1-d features.
Graph gen_erdos_renyi(Index n, Index m, std::uint64_t seed);
/// Uniform random recursive tree: node i attaches to a uniform node below i.
Graph gen_random_tree(Index n, std::uint64_t seed);

/// Three balanced classes: rings (0), grids (1), random trees (2), with
/// degree one-hot features.
Dataset gen_classification_corpus(Index per_class, std::uint64_t seed);

/// Reads TU-style text files: edge list (1-based "i, j" per line), graph
/// indicator (graph id per node), graph labels, optional node labels.
Dataset load_tu_format(const std::filesystem::path& edge_file,
                       const std::filesystem::path& indicator_file,
                       const std::filesystem::path& label_file,
                       const std::optional<std::filesystem::path>& node_label_file = std::nullopt);

struct Split {
  std::vector<Index> train;
  std::vector<Index> valid;
  std::vector<Index> test;
};

/// Stratified k-fold: fold f is the test set, fold (f+1) mod k the
/// validation set, the remaining folds train. With k = 2 the non-test fold
/// is split between train and validation.
std::vector<Split> kfold_splits(std::span<const int> labels, Index k, std::uint64_t seed);

/// Random node split for single-graph node classification.
Split node_split(Index n, double train_fraction, double valid_fraction, std::uint64_t seed);

struct Batch {
  Graph graph;                    // block-diagonal union
  std::vector<Index> membership;  // graph id per node
  std::vector<Index> offsets;     // first node of each graph, plus total
};

Batch batch_graphs(std::span<const Graph> graphs);

}  // namespace parsepool

#endif  // PARSEPOOL_DATA_HPP
