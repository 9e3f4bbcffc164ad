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

#include "parsepool/graph_io.hpp"

#include <fstream>

namespace parsepool {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw GraphError("matrix: expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw GraphError("matrix: row " + std::to_string(r) + " is ragged");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Graph graph_from_json(const json& j) {
  try {
    const auto n = j.at("n").get<Index>();
    std::vector<std::pair<Index, Index>> edges;
    for (const auto& e : j.value("edges", json::array())) {
      if (!e.is_array() || e.size() != 2) throw GraphError("graph json: each edge must be [i, j]");
      edges.emplace_back(e[0].get<Index>(), e[1].get<Index>());
    }
    std::vector<double> weights;
    if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
    Matrix features = j.contains("features") ? matrix_from_json(j.at("features"))
                                             : Matrix::Ones(static_cast<Eigen::Index>(n), 1);
    Graph g = build_graph(n, edges, weights, std::move(features));
    if (j.contains("label")) {
      const json& label = j.at("label");
      if (label.is_array()) {
        g.node_labels = label.get<std::vector<int>>();
        if (g.node_labels.size() != n) throw GraphError("graph json: per-node label count != n");
      } else {
        g.label = label.get<int>();
      }
    }
    return g;
  } catch (const json::exception& e) {
    throw GraphError(std::string("graph json: ") + e.what());
  }
}

json graph_to_json(const Graph& g) {
  json j;
  j["n"] = g.n;
  json edges = json::array();
  json weights = json::array();
  bool unit = true;
  for (const auto& e : g.adjacency.upper_edges()) {
    edges.push_back({e.i, e.j});
    const double w = g.adjacency.at(e.i, e.j);
    weights.push_back(w);
    unit = unit && w == 1.0;
  }
  j["edges"] = std::move(edges);
  if (!unit) j["weights"] = std::move(weights);
  j["features"] = matrix_to_json(g.features);
  if (g.label) j["label"] = *g.label;
  if (!g.node_labels.empty()) j["label"] = g.node_labels;
  return j;
}

Graph read_graph_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path.string());
  try {
    return graph_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw GraphError(path.string() + ": " + e.what());
  }
}

void write_graph_json(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write " + path.string());
  out << graph_to_json(g).dump(2) << "\n";
}

}  // namespace parsepool
