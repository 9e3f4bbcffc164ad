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

#include <random>

#include <gtest/gtest.h>

#include "parsepool/data.hpp"
#include "test_util.hpp"

namespace parsepool {
namespace {

using testing::make_graph;
using testing::path4;

GraphModelConfig small_graph_config(Index input_dim) {
  GraphModelConfig c;
  c.input_dim = input_dim;
  c.classes = 3;
  c.pool.hidden = 8;
  c.seed = 17;
  return c;
}

TEST(GraphModelTest, PathWithFixedScorer) {
  GraphModel model(small_graph_config(1));
  ForwardOptions options;
  options.score_override = [](Index level, const SparseMatrix&) -> std::optional<std::vector<double>> {
    if (level == 0) return std::vector<double>{0.9, 0.5, 0.8};
    return std::nullopt;
  };
  Tape tape;
  GraphForward out = model.forward(tape, path4(), options);
  EXPECT_EQ(out.trace.sizes(), (std::vector<Index>{4, 2, 1}));
  EXPECT_EQ(out.trace.height(), 2u);
  EXPECT_EQ(out.logits.rows(), 1u);
  EXPECT_EQ(out.logits.cols(), 3u);
}

TEST(GraphModelTest, EdgelessGraphHasHeightZero) {
  GraphModel model(small_graph_config(1));
  Tape tape;
  GraphForward out = model.forward(tape, make_graph(5, {}));
  EXPECT_EQ(out.trace.height(), 0u);
  EXPECT_EQ(out.trace.top.n, 5u);
  EXPECT_TRUE(out.logits.value().allFinite());
}

TEST(GraphModelTest, TwoTrianglesStopAtTwoNodes) {
  GraphModel model(small_graph_config(1));
  Tape tape;
  GraphForward out = model.forward(tape, make_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}));
  EXPECT_EQ(out.trace.top.n, 2u);
  EXPECT_EQ(out.trace.top.num_edges(), 0u);
}

TEST(GraphModelTest, MaxHeightCap) {
  GraphModelConfig c = small_graph_config(2);
  c.max_height = 1;
  GraphModel model(c);
  Tape tape;
  GraphForward out = model.forward(tape, gen_ring(40));
  EXPECT_EQ(out.trace.height(), 1u);
}

TEST(GraphModelTest, ConnectedGraphsReachOneNode) {
  GraphModel model(small_graph_config(2));
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    Graph g = testing::random_connected_graph(rng, 2, 40, 0.05, 2);
    Tape tape;
    GraphForward out = model.forward(tape, g);
    const auto sizes = out.trace.sizes();
    EXPECT_EQ(sizes.back(), 1u);
    EXPECT_LE(out.trace.height(), g.n - 1);
    for (Index k = 0; k + 1 < sizes.size(); ++k) EXPECT_LT(sizes[k + 1], sizes[k]);
  }
}

TEST(GraphModelTest, ComponentCountConstantAcrossLevels) {
  GraphModel model(small_graph_config(1));
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    auto sg = testing::random_scored_graph(rng, 40, 0.05);
    Tape tape;
    GraphForward out = model.forward(tape, sg.graph);
    const Index c = count_components(sg.graph.adjacency);
    for (const auto& level : out.trace.levels) EXPECT_EQ(count_components(level.graph.adjacency), c);
    EXPECT_EQ(out.trace.top.n, c);
  }
}

TEST(GraphModelTest, LogitsInvariantUnderPermutation) {
  GraphModel model(small_graph_config(3));
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = testing::random_connected_graph(rng, 6, 25, 0.1, 3);
    const auto perm = testing::random_permutation(rng, g.n);
    Tape tape;
    const Matrix a = model.forward(tape, g).logits.value();
    const Matrix b = model.forward(tape, permute_graph(g, perm)).logits.value();
    EXPECT_TRUE(a.isApprox(b, 1e-9)) << a << "\n" << b;
  }
}

TEST(GraphModelTest, FrozenReplayReproducesForward) {
  GraphModel model(small_graph_config(2));
  std::mt19937_64 rng(37);
  Graph g = testing::random_connected_graph(rng, 20, 20, 0.1, 2);
  Tape tape;
  GraphForward first = model.forward(tape, g);
  const auto frozen = first.trace.assignments();
  ForwardOptions options;
  options.frozen = &frozen;
  GraphForward replay = model.forward(tape, g, options);
  EXPECT_EQ(replay.logits.value(), first.logits.value());
  EXPECT_EQ(replay.trace.height(), first.trace.height());
}

NodeModelConfig small_node_config(Index input_dim, SkipMode skip = SkipMode::kAdd) {
  NodeModelConfig c;
  c.input_dim = input_dim;
  c.classes = 4;
  c.pool.hidden = 8;
  c.skip = skip;
  c.seed = 3;
  return c;
}

TEST(NodeModelTest, OutputHasOneRowPerNode) {
  for (SkipMode mode : {SkipMode::kAdd, SkipMode::kConcat, SkipMode::kNone}) {
    NodeModel model(small_node_config(1, mode));
    Tape tape;
    NodeForward out = model.forward(tape, path4());
    EXPECT_EQ(out.logits.rows(), 4u);
    EXPECT_EQ(out.logits.cols(), 4u);
    EXPECT_GE(out.trace.height(), 1u);
  }
}

TEST(NodeModelTest, HeightCapZeroIsGnnPlusClassifier) {
  NodeModel model(small_node_config(2));
  std::mt19937_64 rng(41);
  Graph g = testing::random_connected_graph(rng, 10, 10, 0.2, 2);
  ForwardOptions options;
  options.max_height = 0;
  Tape tape;
  NodeForward out = model.forward(tape, g, options);
  EXPECT_EQ(out.trace.height(), 0u);
  EXPECT_EQ(out.logits.rows(), g.n);

  // Rebuild GNN' + classifier by hand from the named parameters.
  ParameterSet& p = model.parameters();
  Tape ref;
  Var x = relu(add_row(matmul(ref.constant(g.features), ref.parameter(p.get("input.0.weight"))),
                       ref.parameter(p.get("input.0.bias"))));
  const SparseOperator prop = normalized_propagation(g.adjacency);
  for (Index l = 0; p.contains("pool.gnn_prime." + std::to_string(l) + ".weight"); ++l) {
    const std::string tag = "pool.gnn_prime." + std::to_string(l);
    x = relu(add_row(spmm(prop, matmul(x, ref.parameter(p.get(tag + ".weight")))), ref.parameter(p.get(tag + ".bias"))));
  }
  Var logits = add_row(matmul(x, ref.parameter(p.get("classifier.0.weight"))), ref.parameter(p.get("classifier.0.bias")));
  EXPECT_TRUE(out.logits.value().isApprox(logits.value(), 1e-12));
}

TEST(NodeModelTest, PermutationEquivariant) {
  NodeModel model(small_node_config(3));
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = testing::random_connected_graph(rng, 6, 25, 0.1, 3);
    const auto perm = testing::random_permutation(rng, g.n);
    Tape tape;
    const Matrix a = model.forward(tape, g).logits.value();
    const Matrix b = model.forward(tape, permute_graph(g, perm)).logits.value();
    for (Index i = 0; i < g.n; ++i) {
      EXPECT_TRUE(b.row(static_cast<Eigen::Index>(perm[i])).isApprox(a.row(static_cast<Eigen::Index>(i)), 1e-9));
    }
  }
}

TEST(ReconstructionModelTest, UntrainedOutputIsFinite) {
  ReconstructionConfig c;
  c.pool.hidden = 8;
  c.max_height = 1;
  ReconstructionModel model(c);
  Tape tape;
  ReconstructionForward out = model.forward(tape, gen_grid(4, 5));
  EXPECT_EQ(out.coordinates.rows(), 20u);
  EXPECT_EQ(out.coordinates.cols(), 2u);
  EXPECT_TRUE(out.coordinates.value().allFinite());
  EXPECT_EQ(out.trace.height(), 1u);
}

TEST(ReconstructionModelTest, DefaultPoolsToFixedPoint) {
  ReconstructionConfig c;
  c.pool.hidden = 8;
  ReconstructionModel model(c);
  Tape tape;
  ReconstructionForward out = model.forward(tape, gen_ring(16));
  EXPECT_EQ(out.trace.top.n, 1u);
  EXPECT_EQ(out.coordinates.rows(), 16u);
}

TEST(SharedParameters, CountIndependentOfHeight) {
  GraphModel model(small_graph_config(2));
  const std::size_t before = model.parameters().scalar_count();
  Tape tape;
  GraphForward out = model.forward(tape, gen_ring(30));
  EXPECT_GE(out.trace.height(), 2u);
  EXPECT_EQ(model.parameters().scalar_count(), before);
}

}  // namespace
}  // namespace parsepool
