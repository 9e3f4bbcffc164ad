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

#ifndef PARSEPOOL_NN_HPP
#define PARSEPOOL_NN_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "parsepool/autodiff.hpp"
#include "parsepool/graph.hpp"
#include "parsepool/parser.hpp"

namespace parsepool {

/// Per-pass switches shared by every layer.
struct ForwardContext {
  bool training = false;
  double dropout = 0.0;
  std::mt19937_64* rng = nullptr;  // required when training with dropout
};

/// Feature dropout on a training pass; identity otherwise.
Var dropout(Tape& tape, Var x, const ForwardContext& ctx);

/// Fully connected stack; ReLU between layers, none after the last. Dropout
/// is applied to hidden activations.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterSet& params, const std::string& prefix, std::vector<Index> dims,
      std::mt19937_64& init_rng);

  Var forward(Tape& tape, Var x, const ForwardContext& ctx) const;
  Index in_dim() const { return dims_.front(); }
  Index out_dim() const { return dims_.back(); }
  Index depth() const { return weights_.size(); }

  Parameter& weight(Index layer) const { return *weights_[layer]; }
  Parameter& bias(Index layer) const { return *biases_[layer]; }

 private:
  std::vector<Index> dims_;
  std::vector<Parameter*> weights_;
  std::vector<Parameter*> biases_;
};

/// Stack of GCN layers, each relu(P X W + b) with P the symmetric
/// normalisation of A + I.
class GcnBlock {
 public:
  GcnBlock() = default;
  GcnBlock(ParameterSet& params, const std::string& prefix, std::vector<Index> dims,
           std::mt19937_64& init_rng);

  Var forward(Tape& tape, Var x, const SparseOperator& propagation) const;
  Index depth() const { return weights_.size(); }
  Parameter& weight(Index layer) const { return *weights_[layer]; }
  Parameter& bias(Index layer) const { return *biases_[layer]; }

 private:
  std::vector<Parameter*> weights_;
  std::vector<Parameter*> biases_;
};

/// D^{-1/2} (A + I) D^{-1/2} with D the weighted degree of A + I.
SparseOperator normalized_propagation(const SparseMatrix& adjacency);

Var gcn_forward(Tape& tape, Var x, const SparseMatrix& adjacency, const GcnBlock& block);

struct EdgeScoreOutput {
  std::vector<UndirectedEdge> edges;  // upper-triangle edges of the adjacency
  Var values;                          // one sigmoid score per edge, |edges| x 1
  EdgeScores scores;                   // numeric symmetric matrix for the parser
};

/// sigmoid(MLP(H_i * H_j)) for every stored edge; symmetric by construction
/// because each undirected edge is scored once.
EdgeScoreOutput edge_scores(Tape& tape, Var h, const SparseMatrix& adjacency, const Mlp& score_mlp,
                            const ForwardContext& ctx);

/// Row p of the result is mlp2(sum of mlp1(h_i) over nodes i in cluster p).
Var deepsets(Tape& tape, Var h, const Assignment& assignment, const Mlp& mlp1, const Mlp& mlp2,
             const ForwardContext& ctx);

/// Per-cluster sum of internal edge scores, each undirected edge counted
/// once. Clusters without an internal edge get 1.
std::vector<double> cluster_mask(const EdgeScores& scores, const Assignment& assignment);
Var cluster_mask(Tape& tape, Var edge_values, std::span<const UndirectedEdge> edges,
                 const Assignment& assignment);

/// Parameters of the shared pooling layer.
struct PoolLayerParams {
  GcnBlock gnn;
  Mlp score_mlp;
  Mlp deepsets_mlp1;
  Mlp deepsets_mlp2;
  std::optional<GcnBlock> separate_gnn;  // feeds the multiset step when present
};

struct PoolLayerShape {
  Index hidden = 64;
  Index gcn_layers = 2;
  Index score_mlp_layers = 1;
  Index deepsets_layers = 1;
  bool separate_gnn = false;
  Index separate_gnn_layers = 2;
};

PoolLayerParams make_pool_layer(ParameterSet& params, const std::string& prefix,
                                const PoolLayerShape& shape, std::mt19937_64& init_rng);

struct PoolOptions {
  ForwardContext ctx;
  double dropedge = 0.0;  // only used when ctx.training
  const Assignment* frozen = nullptr;                   // replaces the parser output
  const std::vector<double>* fixed_scores = nullptr;   // replaces learned scores per upper edge
};

struct PoolOutput {
  SparseMatrix adjacency;  // coarsened, zero diagonal
  Var features;            // X' = X_hat * (y 1^T)
  Var embeddings;          // H fed to scoring
  Var multiset_input;      // H or GNN'(X, A)
  Assignment assignment;
  EdgeScores scores;
  Var mask;
  ParseStats stats;
};

PoolOutput pool_layer(Tape& tape, const SparseMatrix& adjacency, Var features,
                      const PoolLayerParams& params, const PoolOptions& options);

struct UnpoolOutput {
  Var features;
  SparseMatrix adjacency;
};

enum class SkipMode { kAdd, kConcat, kNone };

/// X_fine = S X_coarse (+ skip). The fine adjacency is the stored encoder
/// adjacency. With kConcat the caller projects the doubled width.
UnpoolOutput unpool_layer(Tape& tape, Var coarse, const Assignment& assignment,
                          const SparseMatrix& stored_adjacency, std::optional<Var> skip,
                          SkipMode mode = SkipMode::kAdd);

Var concat_cols(Var a, Var b);

/// Glorot-uniform matrix.
Matrix glorot(Index rows, Index cols, std::mt19937_64& rng);

}  // namespace parsepool

#endif  // PARSEPOOL_NN_HPP
