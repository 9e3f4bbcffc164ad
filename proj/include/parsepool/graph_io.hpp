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

#ifndef PARSEPOOL_GRAPH_IO_HPP
#define PARSEPOOL_GRAPH_IO_HPP

#include <filesystem>

#include <nlohmann/json.hpp>

#include "parsepool/graph.hpp"

namespace parsepool {

/// JSON graph: {"n", "edges": [[i, j], ...], "weights"?, "features": [[...]], "label"?}.
/// "label" is an integer (graph label) or an array (per-node labels).
Graph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const Graph& g);

Graph read_graph_json(const std::filesystem::path& path);
void write_graph_json(const Graph& g, const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace parsepool

#endif  // PARSEPOOL_GRAPH_IO_HPP
