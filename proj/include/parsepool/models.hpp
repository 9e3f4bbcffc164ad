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

#ifndef PARSEPOOL_MODELS_HPP
#define PARSEPOOL_MODELS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "parsepool/nn.hpp"

namespace parsepool {

/// One pooling step: the graph entering it, and what the layer derived.
struct PoolLevel {
  Graph graph;
  Assignment assignment;
  EdgeScores scores;
  std::vector<double> mask;
  ParseStats stats;
};

/// The inferred pooling tree of one forward pass.
struct PoolingTrace {
  std::vector<PoolLevel> levels;
  Graph top;  // graph left after the last pooling step

  Index height() const { return levels.size(); }
  /// Node counts from the input up to the top graph.
  std::vector<Index> sizes() const;
  std::vector<Assignment> assignments() const;
};

/// Supplies static per-level scores (one per upper edge) in place of the
/// learned scorer. Returning nullopt keeps the learned scores for that level.
using ScoreOverride =
    std::function<std::optional<std::vector<double>>(Index level, const SparseMatrix& adjacency)>;

struct ForwardOptions {
  ForwardContext ctx;
  double dropedge = 0.0;
  /// Replays a recorded pooling structure instead of parsing; exactly
  /// frozen->size() levels are run.
  const std::vector<Assignment>* frozen = nullptr;
  ScoreOverride score_override;
  std::optional<Index> max_height;
};

struct GraphModelConfig {
  Index input_dim = 1;
  Index classes = 2;
  PoolLayerShape pool;
  Index readout_layers = 1;
  Index classifier_layers = 2;
  Index max_height = 32;
  std::uint64_t seed = 0;
};

struct GraphForward {
  Var logits;  // 1 x classes
  PoolingTrace trace;
};

/// Graph classifier: one shared pooling layer applied until the graph stops
/// shrinking, then a DeepSets readout and an MLP head.
class GraphModel {
 public:
  explicit GraphModel(GraphModelConfig config);
  GraphModel(const GraphModel&) = delete;
  GraphModel& operator=(const GraphModel&) = delete;

  GraphForward forward(Tape& tape, const Graph& graph, const ForwardOptions& options = {}) const;

  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const GraphModelConfig& config() const { return config_; }

 private:
  GraphModelConfig config_;
  ParameterSet params_;
  Mlp input_;
  PoolLayerParams pool_;
  Mlp readout1_;
  Mlp readout2_;
  Mlp classifier_;
};

struct NodeModelConfig {
  Index input_dim = 1;
  Index classes = 2;
  PoolLayerShape pool;  // separate_gnn is forced on
  Index classifier_layers = 1;
  Index max_height = 32;
  SkipMode skip = SkipMode::kAdd;
  std::uint64_t seed = 0;
};

struct NodeForward {
  Var logits;  // n x classes
  PoolingTrace trace;
};

/// Encoder/decoder node classifier. The encoder pools with the shared layer
/// and stores each level's assignment and GNN' features; the decoder
/// un-pools in reverse order with skip connections.
class NodeModel {
 public:
  explicit NodeModel(NodeModelConfig config);
  NodeModel(const NodeModel&) = delete;
  NodeModel& operator=(const NodeModel&) = delete;

  NodeForward forward(Tape& tape, const Graph& graph, const ForwardOptions& options = {}) const;

  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const NodeModelConfig& config() const { return config_; }

 private:
  NodeModelConfig config_;
  ParameterSet params_;
  Mlp input_;
  PoolLayerParams pool_;
  std::optional<Mlp> skip_projection_;
  Mlp classifier_;
};

struct ReconstructionConfig {
  Index input_dim = 2;
  PoolLayerShape pool;
  Index message_passing_layers = 2;  // before pooling and after un-pooling
  Index max_height = 32;
  SkipMode skip = SkipMode::kAdd;
  std::uint64_t seed = 0;
};

struct ReconstructionForward {
  Var coordinates;  // n x input_dim
  PoolingTrace trace;
};

/// Graph autoencoder: message passing, pooling, un-pooling through the stored
/// assignments, message passing on the input adjacency, linear output.
class ReconstructionModel {
 public:
  explicit ReconstructionModel(ReconstructionConfig config);
  ReconstructionModel(const ReconstructionModel&) = delete;
  ReconstructionModel& operator=(const ReconstructionModel&) = delete;

  ReconstructionForward forward(Tape& tape, const Graph& graph, const ForwardOptions& options = {}) const;

  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const ReconstructionConfig& config() const { return config_; }

 private:
  ReconstructionConfig config_;
  ParameterSet params_;
  GcnBlock pre_;
  PoolLayerParams pool_;
  std::optional<Mlp> skip_projection_;
  GcnBlock post_;
  Mlp output_;
};

/// Runs the shared pooling layer from (adjacency, x) until the graph is
/// edgeless, `cap` levels have run, or the frozen structure is exhausted.
struct EncoderState {
  std::vector<SparseMatrix> adjacencies;  // adjacency entering each level
  std::vector<Var> features;              // features entering each level
  std::vector<Var> multiset_inputs;       // H or GNN'(X, A) per level
  SparseMatrix top_adjacency;
  Var top_features;
  PoolingTrace trace;
};

EncoderState encode(Tape& tape, const SparseMatrix& adjacency, Var x, const PoolLayerParams& pool,
                    Index cap, const ForwardOptions& options);

}  // namespace parsepool

#endif  // PARSEPOOL_MODELS_HPP
