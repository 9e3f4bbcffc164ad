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

#ifndef PARSEPOOL_TOOLS_COMMANDS_HPP
#define PARSEPOOL_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parsepool/data.hpp"
#include "parsepool/models.hpp"
#include "parsepool/parser.hpp"
#include "parsepool/train.hpp"

namespace parsepool::cli {

// ---- parse -----------------------------------------------------------------

struct TreeLevel {
  Graph graph;
  Assignment assignment;
  ParseStats stats;
};

/// Pooling tree obtained from static scores.
struct ParseTree {
  std::vector<TreeLevel> levels;
  Index top_size = 0;

  std::vector<Index> sizes() const;
};

enum class ScoreMode { kRandom, kUniform, kFile };

/// Pools to a fixed point with static scores. Random scores are redrawn per
/// level; uniform scores are 0.5; file scores apply to the input edges and
/// each coarse edge inherits the largest score among the edges it merges.
ParseTree build_parse_tree(const Graph& graph, ScoreMode mode, std::uint64_t seed,
                           const std::optional<EdgeScores>& file_scores = std::nullopt);

/// Scores file: {"scores": [...]} parallel to the graph file's "edges" array.
EdgeScores read_scores_file(const std::filesystem::path& scores_path,
                            const std::filesystem::path& graph_path);

nlohmann::json tree_to_json(const ParseTree& tree);
/// Leaves are input nodes, internal vertices clusters, one rank per level.
std::string tree_to_dot(const ParseTree& tree);

// ---- training --------------------------------------------------------------

struct GraphTrainResult {
  std::vector<double> fold_test_accuracy;
  std::vector<Index> fold_best_epoch;
  double mean_test_accuracy = 0.0;
  std::vector<Index> heights;  // per graph of the last fold's model, dataset order
};

/// Cross-validated graph classification; writes per-fold history CSVs and
/// checkpoints, fold results and per-graph heights.
GraphTrainResult run_train_graph(const nlohmann::json& config, const std::filesystem::path& out_dir);

struct NodeTrainResult {
  double test_accuracy = 0.0;
  double valid_accuracy = 0.0;
  Index best_epoch = 0;
};

NodeTrainResult run_train_node(const nlohmann::json& config, const std::filesystem::path& out_dir);

struct ReconstructResult {
  double mse = 0.0;
  double variance = 0.0;  // MSE of predicting the column means
  Index epochs = 0;
  Index height = 0;
  Index pooled_size = 0;
};

ReconstructResult run_reconstruct(const nlohmann::json& config, const std::filesystem::path& out_dir);

// ---- benchmarks ------------------------------------------------------------

struct TimeRow {
  Index n = 0;
  Index m = 0;
  Index repeats = 0;
  double median_forward_ms = 0.0;
  double median_parse_ms = 0.0;
  Index clusters = 0;
  Index outer_iterations = 0;
  Index total_inner_iterations = 0;
};

/// Erdos-Renyi graphs with m = n^2/10; one untrained pooling forward each.
std::vector<TimeRow> run_bench_time(const std::vector<Index>& sizes, Index repeats, std::uint64_t seed,
                                    Index hidden = 32);

struct MemRow {
  Index n = 0;
  Index m = 0;
  Index nnz_adjacency = 0;
  Index nnz_assignment = 0;
  Index nnz_pooled = 0;
  Index clusters = 0;
  long peak_rss_kb = 0;
};

/// Erdos-Renyi graphs with m = 2n; one untrained pooling forward each.
std::vector<MemRow> run_bench_mem(const std::vector<Index>& sizes, std::uint64_t seed, Index hidden = 16);

void write_time_csv(const std::vector<TimeRow>& rows, const std::filesystem::path& path);
void write_mem_csv(const std::vector<MemRow>& rows, const std::filesystem::path& path);

/// Peak resident set size of this process in KiB.
long peak_rss_kb();

// ---- gradient check --------------------------------------------------------

struct GradCheckConfig {
  Index nodes = 12;
  Index hidden = 8;
  Index classes = 3;
  std::uint64_t seed = 0;
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  bool corrupt = false;  // negative control: perturbs one analytic gradient

  static GradCheckConfig from_json(const nlohmann::json& j);
};

struct GradCheckResult {
  GradCheckReport report;
  Index height = 0;
  bool passed = false;
};

/// Full graph-level model on a connected random graph, pooling structure
/// frozen after the first forward pass.
GradCheckResult run_gradcheck(const GradCheckConfig& config);

// ---- manifests -------------------------------------------------------------

std::string git_describe();
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const nlohmann::json& config, std::uint64_t seed,
                    const std::vector<std::string>& outputs);

}  // namespace parsepool::cli

#endif  // PARSEPOOL_TOOLS_COMMANDS_HPP
