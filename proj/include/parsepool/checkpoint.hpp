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

#ifndef PARSEPOOL_CHECKPOINT_HPP
#define PARSEPOOL_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "parsepool/autodiff.hpp"

namespace parsepool {

/// Name -> value snapshot of a ParameterSet, in parameter order.
struct Checkpoint {
  std::vector<std::pair<std::string, Matrix>> entries;

  static Checkpoint capture(const ParameterSet& params);
  /// Copies values into `params`; names and shapes must match exactly.
  void restore(ParameterSet& params) const;

  /// {"name": {"rows": r, "cols": c, "data": [row-major values]}, ...}
  nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace parsepool

#endif  // PARSEPOOL_CHECKPOINT_HPP
