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

#include "parsepool/nn.hpp"

#include <cmath>

namespace parsepool {

Matrix glorot(Index rows, Index cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Var dropout(Tape& tape, Var x, const ForwardContext& ctx) {
  if (!ctx.training || ctx.dropout <= 0.0) return x;
  if (ctx.rng == nullptr) throw GraphError("dropout: training pass without a random source");
  std::bernoulli_distribution keep(1.0 - ctx.dropout);
  Matrix mask(x.value().rows(), x.value().cols());
  const double inv = 1.0 / (1.0 - ctx.dropout);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*ctx.rng) ? inv : 0.0;
  return mul(x, tape.constant(std::move(mask)));
}

Mlp::Mlp(ParameterSet& params, const std::string& prefix, std::vector<Index> dims,
         std::mt19937_64& init_rng)
    : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw GraphError("mlp: needs at least input and output dims");
  for (Index l = 0; l + 1 < dims_.size(); ++l) {
    const std::string tag = prefix + "." + std::to_string(l);
    weights_.push_back(&params.add(tag + ".weight", glorot(dims_[l], dims_[l + 1], init_rng)));
    biases_.push_back(&params.add(tag + ".bias", Matrix::Zero(1, static_cast<Eigen::Index>(dims_[l + 1]))));
  }
}

Var Mlp::forward(Tape& tape, Var x, const ForwardContext& ctx) const {
  if (x.cols() != in_dim()) {
    throw GraphError("mlp: input width " + std::to_string(x.cols()) + " != " + std::to_string(in_dim()));
  }
  for (Index l = 0; l < weights_.size(); ++l) {
    x = add_row(matmul(x, tape.parameter(*weights_[l])), tape.parameter(*biases_[l]));
    if (l + 1 < weights_.size()) x = dropout(tape, relu(x), ctx);
  }
  return x;
}

GcnBlock::GcnBlock(ParameterSet& params, const std::string& prefix, std::vector<Index> dims,
                   std::mt19937_64& init_rng) {
  if (dims.size() < 2) throw GraphError("gcn block: needs at least one layer");
  for (Index l = 0; l + 1 < dims.size(); ++l) {
    const std::string tag = prefix + "." + std::to_string(l);
    weights_.push_back(&params.add(tag + ".weight", glorot(dims[l], dims[l + 1], init_rng)));
    biases_.push_back(&params.add(tag + ".bias", Matrix::Zero(1, static_cast<Eigen::Index>(dims[l + 1]))));
  }
}

Var GcnBlock::forward(Tape& tape, Var x, const SparseOperator& propagation) const {
  for (Index l = 0; l < weights_.size(); ++l) {
    if (x.cols() != static_cast<Index>(weights_[l]->value.rows())) {
      throw GraphError("gcn: input width " + std::to_string(x.cols()) + " != " +
                       std::to_string(weights_[l]->value.rows()));
    }
    Var xw = matmul(x, tape.parameter(*weights_[l]));
    x = relu(add_row(spmm(propagation, xw), tape.parameter(*biases_[l])));
  }
  return x;
}

SparseOperator normalized_propagation(const SparseMatrix& adjacency) {
  const Index n = adjacency.size();
  std::vector<double> inv_sqrt(n);
  for (Index i = 0; i < n; ++i) {
    double d = 1.0;
    for (double w : adjacency.row_values(i)) d += w;
    inv_sqrt[i] = 1.0 / std::sqrt(d);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(adjacency.nnz() + n);
  for (Index i = 0; i < n; ++i) {
    auto nb = adjacency.neighbors(i);
    auto vals = adjacency.row_values(i);
    triplets.emplace_back(i, i, inv_sqrt[i] * inv_sqrt[i]);
    for (Index k = 0; k < nb.size(); ++k) {
      triplets.emplace_back(i, nb[k], inv_sqrt[i] * vals[k] * inv_sqrt[nb[k]]);
    }
  }
  SparseOperator op(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

Var gcn_forward(Tape& tape, Var x, const SparseMatrix& adjacency, const GcnBlock& block) {
  if (x.rows() != adjacency.size()) throw GraphError("gcn: feature rows != node count");
  return block.forward(tape, x, normalized_propagation(adjacency));
}

EdgeScoreOutput edge_scores(Tape& tape, Var h, const SparseMatrix& adjacency, const Mlp& score_mlp,
                            const ForwardContext& ctx) {
  if (h.rows() != adjacency.size()) throw GraphError("edge_scores: embedding rows != node count");
  EdgeScoreOutput out;
  out.edges = adjacency.upper_edges();
  std::vector<Index> left(out.edges.size());
  std::vector<Index> right(out.edges.size());
  for (std::size_t k = 0; k < out.edges.size(); ++k) {
    left[k] = out.edges[k].i;
    right[k] = out.edges[k].j;
  }
  Var prod = mul(gather_rows(h, left), gather_rows(h, right));
  out.values = sigmoid(score_mlp.forward(tape, prod, ctx));
  const Matrix& v = out.values.value();
  out.scores = EdgeScores::from_upper(adjacency.size(), out.edges,
                                      std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
  return out;
}

Var deepsets(Tape& tape, Var h, const Assignment& assignment, const Mlp& mlp1, const Mlp& mlp2,
             const ForwardContext& ctx) {
  if (assignment.rows() != h.rows()) throw GraphError("deepsets: assignment rows != feature rows");
  Var inner = mlp1.forward(tape, h, ctx);
  return mlp2.forward(tape, pool_by_assignment(inner, assignment), ctx);
}

std::vector<double> cluster_mask(const EdgeScores& scores, const Assignment& assignment) {
  if (scores.size() != assignment.rows()) throw GraphError("cluster_mask: dimension mismatch");
  std::vector<double> y(assignment.cols(), 0.0);
  std::vector<char> has_edge(assignment.cols(), 0);
  const SparseMatrix& c = scores.matrix();
  for (Index i = 0; i < c.size(); ++i) {
    auto nb = c.neighbors(i);
    auto vals = c.row_values(i);
    for (Index k = 0; k < nb.size(); ++k) {
      const Index ci = assignment.cluster_of(i);
      if (i < nb[k] && ci == assignment.cluster_of(nb[k])) {
        y[ci] += vals[k];
        has_edge[ci] = 1;
      }
    }
  }
  for (Index p = 0; p < y.size(); ++p) {
    if (!has_edge[p]) y[p] = 1.0;
  }
  return y;
}

Var cluster_mask(Tape& tape, Var edge_values, std::span<const UndirectedEdge> edges,
                 const Assignment& assignment) {
  if (edge_values.rows() != edges.size()) throw GraphError("cluster_mask: one value per edge required");
  std::vector<Index> internal;
  std::vector<Index> target;
  Matrix offset = Matrix::Ones(static_cast<Eigen::Index>(assignment.cols()), 1);
  for (Index k = 0; k < edges.size(); ++k) {
    const Index ci = assignment.cluster_of(edges[k].i);
    if (ci == assignment.cluster_of(edges[k].j)) {
      internal.push_back(k);
      target.push_back(ci);
      offset(static_cast<Eigen::Index>(ci), 0) = 0.0;
    }
  }
  Var sums = scatter_add_rows(gather_rows(edge_values, internal), target, assignment.cols());
  return add(sums, tape.constant(std::move(offset)));
}

PoolLayerParams make_pool_layer(ParameterSet& params, const std::string& prefix,
                                const PoolLayerShape& shape, std::mt19937_64& init_rng) {
  const Index h = shape.hidden;
  PoolLayerParams p;
  p.gnn = GcnBlock(params, prefix + ".gnn", std::vector<Index>(shape.gcn_layers + 1, h), init_rng);
  std::vector<Index> score_dims(shape.score_mlp_layers, h);
  score_dims.push_back(1);
  p.score_mlp = Mlp(params, prefix + ".score", score_dims, init_rng);
  p.deepsets_mlp1 = Mlp(params, prefix + ".deepsets1", std::vector<Index>(shape.deepsets_layers + 1, h), init_rng);
  p.deepsets_mlp2 = Mlp(params, prefix + ".deepsets2", std::vector<Index>(shape.deepsets_layers + 1, h), init_rng);
  if (shape.separate_gnn) {
    p.separate_gnn = GcnBlock(params, prefix + ".gnn_prime",
                              std::vector<Index>(shape.separate_gnn_layers + 1, h), init_rng);
  }
  return p;
}

PoolOutput pool_layer(Tape& tape, const SparseMatrix& adjacency, Var features,
                      const PoolLayerParams& params, const PoolOptions& options) {
  if (features.rows() != adjacency.size()) throw GraphError("pool_layer: feature rows != node count");
  const SparseOperator propagation = normalized_propagation(adjacency);
  PoolOutput out;
  out.embeddings = params.gnn.forward(tape, features, propagation);

  EdgeScoreOutput scored;
  if (options.fixed_scores != nullptr) {
    scored.edges = adjacency.upper_edges();
    const auto& fixed = *options.fixed_scores;
    if (fixed.size() != scored.edges.size()) throw GraphError("pool_layer: fixed score count != edge count");
    Matrix v(static_cast<Eigen::Index>(fixed.size()), 1);
    for (std::size_t k = 0; k < fixed.size(); ++k) v(static_cast<Eigen::Index>(k), 0) = fixed[k];
    scored.values = tape.constant(std::move(v));
    scored.scores = EdgeScores::from_upper(adjacency.size(), scored.edges, fixed);
  } else {
    scored = edge_scores(tape, out.embeddings, adjacency, params.score_mlp, options.ctx);
  }
  out.scores = scored.scores;

  if (options.frozen != nullptr) {
    if (options.frozen->rows() != adjacency.size()) throw GraphError("pool_layer: frozen assignment size mismatch");
    out.assignment = *options.frozen;
  } else if (options.ctx.training && options.dropedge > 0.0) {
    if (options.ctx.rng == nullptr) throw GraphError("pool_layer: dropedge without a random source");
    ParseResult parsed = parse_with_dropedge(scored.scores, options.dropedge, *options.ctx.rng);
    out.assignment = std::move(parsed.assignment);
    out.stats = std::move(parsed.stats);
  } else {
    ParseResult parsed = parse(scored.scores);
    out.assignment = std::move(parsed.assignment);
    out.stats = std::move(parsed.stats);
  }

  out.adjacency = coarsen_adjacency(adjacency, out.assignment);
  out.multiset_input = params.separate_gnn ? params.separate_gnn->forward(tape, features, propagation)
                                           : out.embeddings;
  Var pooled = deepsets(tape, out.multiset_input, out.assignment, params.deepsets_mlp1,
                        params.deepsets_mlp2, options.ctx);
  out.mask = cluster_mask(tape, scored.values, scored.edges, out.assignment);
  out.features = mul(pooled, broadcast_col(out.mask, pooled.cols()));
  return out;
}

Var concat_cols(Var a, Var b) {
  if (a.rows() != b.rows()) throw GraphError("concat_cols: row count mismatch");
  Matrix out(a.value().rows(), a.value().cols() + b.value().cols());
  out << a.value(), b.value();
  const Eigen::Index left = a.value().cols();
  return a.tape()->record(std::move(out), {a, b}, [a, b, left](Tape& t, std::size_t self) {
    const Matrix& g = t.grad_slot(self);
    if (t.requires_grad(a.id())) t.grad_slot(a.id()) += g.leftCols(left);
    if (t.requires_grad(b.id())) t.grad_slot(b.id()) += g.rightCols(g.cols() - left);
  });
}

UnpoolOutput unpool_layer(Tape&, Var coarse, const Assignment& assignment,
                          const SparseMatrix& stored_adjacency, std::optional<Var> skip, SkipMode mode) {
  if (assignment.cols() != coarse.rows()) {
    throw GraphError("unpool_layer: assignment has " + std::to_string(assignment.cols()) +
                     " clusters, coarse features have " + std::to_string(coarse.rows()) + " rows");
  }
  if (stored_adjacency.size() != assignment.rows()) throw GraphError("unpool_layer: stored adjacency size mismatch");
  UnpoolOutput out;
  out.features = unpool_by_assignment(coarse, assignment);
  out.adjacency = stored_adjacency;
  if (skip && mode != SkipMode::kNone) {
    out.features = mode == SkipMode::kAdd ? add(out.features, *skip) : concat_cols(out.features, *skip);
  }
  return out;
}

}  // namespace parsepool
