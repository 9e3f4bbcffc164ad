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

#include "parsepool/models.hpp"

namespace parsepool {

namespace {

Graph snapshot(const SparseMatrix& adjacency, const Var& features) {
  Graph g;
  g.n = adjacency.size();
  g.adjacency = adjacency;
  g.features = features.value();
  return g;
}

std::vector<Index> repeat(Index count, Index value) { return std::vector<Index>(count, value); }

}  // namespace

std::vector<Index> PoolingTrace::sizes() const {
  std::vector<Index> out;
  for (const auto& level : levels) out.push_back(level.graph.n);
  out.push_back(top.n);
  return out;
}

std::vector<Assignment> PoolingTrace::assignments() const {
  std::vector<Assignment> out;
  for (const auto& level : levels) out.push_back(level.assignment);
  return out;
}

EncoderState encode(Tape& tape, const SparseMatrix& adjacency, Var x, const PoolLayerParams& pool,
                    Index cap, const ForwardOptions& options) {
  EncoderState state;
  SparseMatrix a = adjacency;
  Index level = 0;
  auto more = [&]() {
    if (options.frozen != nullptr) return level < options.frozen->size();
    return level < cap && a.nnz() > 0;
  };
  while (more()) {
    PoolOptions po;
    po.ctx = options.ctx;
    po.dropedge = options.dropedge;
    if (options.frozen != nullptr) po.frozen = &(*options.frozen)[level];
    std::optional<std::vector<double>> fixed;
    if (options.score_override) fixed = options.score_override(level, a);
    if (fixed) po.fixed_scores = &*fixed;

    PoolOutput out = pool_layer(tape, a, x, pool, po);
    state.adjacencies.push_back(a);
    state.features.push_back(x);
    state.multiset_inputs.push_back(out.multiset_input);
    const Matrix& mask = out.mask.value();
    state.trace.levels.push_back(PoolLevel{snapshot(a, x), out.assignment, out.scores,
                                           std::vector<double>(mask.data(), mask.data() + mask.size()),
                                           out.stats});
    a = std::move(out.adjacency);
    x = out.features;
    ++level;
  }
  state.trace.top = snapshot(a, x);
  state.top_adjacency = std::move(a);
  state.top_features = x;
  return state;
}

GraphModel::GraphModel(GraphModelConfig config) : config_(std::move(config)) {
  std::mt19937_64 rng(config_.seed);
  const Index h = config_.pool.hidden;
  input_ = Mlp(params_, "input", {config_.input_dim, h}, rng);
  pool_ = make_pool_layer(params_, "pool", config_.pool, rng);
  readout1_ = Mlp(params_, "readout1", repeat(config_.readout_layers + 1, h), rng);
  readout2_ = Mlp(params_, "readout2", repeat(config_.readout_layers + 1, h), rng);
  std::vector<Index> head = repeat(config_.classifier_layers, h);
  head.push_back(config_.classes);
  classifier_ = Mlp(params_, "classifier", head, rng);
}

GraphForward GraphModel::forward(Tape& tape, const Graph& graph, const ForwardOptions& options) const {
  if (graph.feature_dim() != config_.input_dim) {
    throw GraphError("graph model: feature width " + std::to_string(graph.feature_dim()) +
                     " != configured " + std::to_string(config_.input_dim));
  }
  Var x = relu(input_.forward(tape, tape.constant(graph.features), options.ctx));
  EncoderState enc = encode(tape, graph.adjacency, x, pool_,
                            options.max_height.value_or(config_.max_height), options);
  const std::vector<Index> all_zero(enc.top_adjacency.size(), 0);
  Var inner = readout1_.forward(tape, enc.top_features, options.ctx);
  Var pooled = readout2_.forward(tape, scatter_add_rows(inner, all_zero, 1), options.ctx);
  GraphForward out;
  out.logits = classifier_.forward(tape, dropout(tape, pooled, options.ctx), options.ctx);
  out.trace = std::move(enc.trace);
  return out;
}

NodeModel::NodeModel(NodeModelConfig config) : config_(std::move(config)) {
  config_.pool.separate_gnn = true;
  std::mt19937_64 rng(config_.seed);
  const Index h = config_.pool.hidden;
  input_ = Mlp(params_, "input", {config_.input_dim, h}, rng);
  pool_ = make_pool_layer(params_, "pool", config_.pool, rng);
  if (config_.skip == SkipMode::kConcat) skip_projection_ = Mlp(params_, "skip_projection", {2 * h, h}, rng);
  std::vector<Index> head = repeat(config_.classifier_layers, h);
  head.push_back(config_.classes);
  classifier_ = Mlp(params_, "classifier", head, rng);
}

NodeForward NodeModel::forward(Tape& tape, const Graph& graph, const ForwardOptions& options) const {
  if (graph.feature_dim() != config_.input_dim) {
    throw GraphError("node model: feature width " + std::to_string(graph.feature_dim()) +
                     " != configured " + std::to_string(config_.input_dim));
  }
  Var x = relu(input_.forward(tape, tape.constant(graph.features), options.ctx));
  EncoderState enc = encode(tape, graph.adjacency, x, pool_,
                            options.max_height.value_or(config_.max_height), options);
  Var z = pool_.separate_gnn->forward(tape, enc.top_features, normalized_propagation(enc.top_adjacency));
  for (Index k = enc.trace.levels.size(); k-- > 0;) {
    UnpoolOutput up = unpool_layer(tape, z, enc.trace.levels[k].assignment, enc.adjacencies[k],
                                   enc.multiset_inputs[k], config_.skip);
    z = up.features;
    if (skip_projection_) z = relu(skip_projection_->forward(tape, z, options.ctx));
  }
  NodeForward out;
  out.logits = classifier_.forward(tape, dropout(tape, z, options.ctx), options.ctx);
  out.trace = std::move(enc.trace);
  return out;
}

ReconstructionModel::ReconstructionModel(ReconstructionConfig config) : config_(std::move(config)) {
  std::mt19937_64 rng(config_.seed);
  const Index h = config_.pool.hidden;
  std::vector<Index> pre_dims = repeat(config_.message_passing_layers + 1, h);
  pre_dims.front() = config_.input_dim;
  pre_ = GcnBlock(params_, "pre", pre_dims, rng);
  pool_ = make_pool_layer(params_, "pool", config_.pool, rng);
  if (config_.skip == SkipMode::kConcat) skip_projection_ = Mlp(params_, "skip_projection", {2 * h, h}, rng);
  post_ = GcnBlock(params_, "post", repeat(config_.message_passing_layers + 1, h), rng);
  output_ = Mlp(params_, "output", {h, config_.input_dim}, rng);
}

ReconstructionForward ReconstructionModel::forward(Tape& tape, const Graph& graph,
                                                   const ForwardOptions& options) const {
  if (graph.feature_dim() != config_.input_dim) {
    throw GraphError("reconstruction model: feature width " + std::to_string(graph.feature_dim()) +
                     " != configured " + std::to_string(config_.input_dim));
  }
  const SparseOperator propagation = normalized_propagation(graph.adjacency);
  Var x = pre_.forward(tape, tape.constant(graph.features), propagation);
  EncoderState enc = encode(tape, graph.adjacency, x, pool_,
                            options.max_height.value_or(config_.max_height), options);
  Var z = enc.top_features;
  for (Index k = enc.trace.levels.size(); k-- > 0;) {
    UnpoolOutput up = unpool_layer(tape, z, enc.trace.levels[k].assignment, enc.adjacencies[k],
                                   enc.features[k], config_.skip);
    z = up.features;
    if (skip_projection_) z = relu(skip_projection_->forward(tape, z, options.ctx));
  }
  ReconstructionForward out;
  out.coordinates = output_.forward(tape, post_.forward(tape, z, propagation), options.ctx);
  out.trace = std::move(enc.trace);
  return out;
}

}  // namespace parsepool
