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

#include "parsepool/checkpoint.hpp"

#include <fstream>

namespace parsepool {

using nlohmann::json;

Checkpoint Checkpoint::capture(const ParameterSet& params) {
  Checkpoint c;
  for (std::size_t i = 0; i < params.size(); ++i) c.entries.emplace_back(params[i].name, params[i].value);
  return c;
}

void Checkpoint::restore(ParameterSet& params) const {
  if (entries.size() != params.size()) {
    throw GraphError("checkpoint: " + std::to_string(entries.size()) + " entries for " +
                     std::to_string(params.size()) + " parameters");
  }
  for (const auto& [name, value] : entries) {
    Parameter& p = params.get(name);
    if (p.value.rows() != value.rows() || p.value.cols() != value.cols()) {
      throw GraphError("checkpoint: shape mismatch for " + name);
    }
    p.value = value;
  }
}

json Checkpoint::to_json() const {
  json j = json::object();
  json order = json::array();
  for (const auto& [name, value] : entries) {
    j[name] = {{"rows", value.rows()},
               {"cols", value.cols()},
               {"data", std::vector<double>(value.data(), value.data() + value.size())}};
    order.push_back(name);
  }
  return json{{"parameters", std::move(j)}, {"order", std::move(order)}};
}

Checkpoint Checkpoint::from_json(const json& j) {
  Checkpoint c;
  try {
    const json& params = j.at("parameters");
    for (const auto& name_json : j.at("order")) {
      const auto name = name_json.get<std::string>();
      const json& entry = params.at(name);
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      const auto data = entry.at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw GraphError("checkpoint: data length mismatch for " + name);
      }
      Matrix m(rows, cols);
      std::copy(data.begin(), data.end(), m.data());
      c.entries.emplace_back(name, std::move(m));
    }
  } catch (const json::exception& e) {
    throw GraphError(std::string("checkpoint: ") + e.what());
  }
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write " + path.string());
  out << to_json().dump() << "\n";
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path.string());
  return from_json(json::parse(in));
}

}  // namespace parsepool
