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

#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "parsepool/checkpoint.hpp"
#include "parsepool/data.hpp"
#include "parsepool/graph_io.hpp"
#include "parsepool/models.hpp"
#include "test_util.hpp"

namespace parsepool {
namespace {

using nlohmann::json;

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("parsepool_io_test_" + name);
}

TEST(GraphJson, ParsesAllFields) {
  const json j = {{"n", 3},
                  {"edges", {{0, 1}, {1, 2}}},
                  {"weights", {2.0, 0.5}},
                  {"features", {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}},
                  {"label", 2}};
  Graph g = graph_from_json(j);
  EXPECT_EQ(g.n, 3u);
  EXPECT_DOUBLE_EQ(g.adjacency.at(1, 0), 2.0);
  EXPECT_EQ(g.feature_dim(), 2u);
  EXPECT_EQ(*g.label, 2);
}

TEST(GraphJson, DefaultsAndNodeLabels) {
  Graph g = graph_from_json({{"n", 2}, {"edges", {{0, 1}}}, {"label", {0, 1}}});
  EXPECT_EQ(g.features, Matrix::Ones(2, 1));
  EXPECT_EQ(g.node_labels, (std::vector<int>{0, 1}));
  EXPECT_FALSE(g.label.has_value());
}

TEST(GraphJson, RejectsMalformed) {
  EXPECT_THROW(graph_from_json({{"n", 2}, {"edges", {{0, 2}}}}), GraphError);
  EXPECT_THROW(graph_from_json({{"n", 2}, {"edges", {{0, 1}}}, {"weights", {1.0, 2.0}}}), GraphError);
  EXPECT_THROW(graph_from_json({{"n", 2}, {"edges", {{0, 1}}}, {"features", {{1.0}}}}), GraphError);
}

TEST(GraphJson, FileRoundTrip) {
  Graph g = gen_grid(3, 3);
  g.label = 1;
  const auto path = temp_path("grid.json");
  write_graph_json(g, path);
  EXPECT_EQ(read_graph_json(path), g);
  std::filesystem::remove(path);
}

TEST(CheckpointTest, RoundTripGivesBitIdenticalForward) {
  GraphModelConfig c;
  c.input_dim = 2;
  c.classes = 3;
  c.pool.hidden = 8;
  c.seed = 1;
  GraphModel a(c);
  c.seed = 2;
  GraphModel b(c);
  std::mt19937_64 rng(3);
  Graph g = testing::random_connected_graph(rng, 15, 15, 0.1, 2);

  const auto path = temp_path("ckpt.json");
  Checkpoint::capture(a.parameters()).save(path);
  Checkpoint::load(path).restore(b.parameters());
  std::filesystem::remove(path);

  Tape tape;
  EXPECT_EQ(a.forward(tape, g).logits.value(), b.forward(tape, g).logits.value());
}

TEST(CheckpointTest, RestoreChecksNamesAndShapes) {
  ParameterSet p;
  p.add("w", Matrix::Zero(2, 2));
  Checkpoint wrong_shape{{{"w", Matrix::Zero(2, 3)}}};
  EXPECT_THROW(wrong_shape.restore(p), GraphError);
  Checkpoint wrong_name{{{"v", Matrix::Zero(2, 2)}}};
  EXPECT_THROW(wrong_name.restore(p), GraphError);
}

TEST(CheckpointTest, JsonPreservesExactDoubles) {
  Checkpoint c{{{"w", Matrix{{0.1, 1.0 / 3.0, -2.5e-300}}}}};
  Checkpoint back = Checkpoint::from_json(json::parse(c.to_json().dump()));
  EXPECT_EQ(back.entries[0].second, c.entries[0].second);
}

}  // namespace
}  // namespace parsepool
