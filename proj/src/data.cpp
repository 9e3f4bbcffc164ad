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

#include "parsepool/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_set>

namespace parsepool {

void Dataset::validate() const {
  const Index d = feature_dim();
  for (Index g = 0; g < graphs.size(); ++g) {
    const Graph& graph = graphs[g];
    if (graph.feature_dim() != d) {
      throw GraphError("dataset: graph " + std::to_string(g) + " has feature width " +
                       std::to_string(graph.feature_dim()) + ", expected " + std::to_string(d));
    }
    if (task == Task::kGraphClassification) {
      if (!graph.label || *graph.label < 0 || static_cast<Index>(*graph.label) >= num_classes) {
        throw GraphError("dataset: graph " + std::to_string(g) + " has a missing or out-of-range label");
      }
    }
    if (task == Task::kNodeClassification) {
      if (graph.node_labels.size() != graph.n) {
        throw GraphError("dataset: graph " + std::to_string(g) + " lacks per-node labels");
      }
      for (int l : graph.node_labels) {
        if (l < 0 || static_cast<Index>(l) >= num_classes) {
          throw GraphError("dataset: node label out of range in graph " + std::to_string(g));
        }
      }
    }
  }
}

std::vector<int> Dataset::graph_labels() const {
  std::vector<int> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.label.value_or(-1));
  return out;
}

Matrix degree_one_hot(const SparseMatrix& adjacency) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(adjacency.size()),
                            static_cast<Eigen::Index>(kMaxDegreeFeature + 1));
  for (Index i = 0; i < adjacency.size(); ++i) {
    out(static_cast<Eigen::Index>(i),
        static_cast<Eigen::Index>(std::min(adjacency.degree(i), kMaxDegreeFeature))) = 1.0;
  }
  return out;
}

Graph gen_ring(Index n) {
  if (n < 3) throw GraphError("gen_ring: need n >= 3, got " + std::to_string(n));
  std::vector<std::pair<Index, Index>> edges;
  Matrix coords(static_cast<Eigen::Index>(n), 2);
  for (Index i = 0; i < n; ++i) {
    edges.emplace_back(i, (i + 1) % n);
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    coords(static_cast<Eigen::Index>(i), 0) = std::cos(angle);
    coords(static_cast<Eigen::Index>(i), 1) = std::sin(angle);
  }
  return build_graph(n, edges, std::move(coords));
}

Graph gen_grid(Index rows, Index cols) {
  if (rows < 2 || cols < 2) throw GraphError("gen_grid: need rows, cols >= 2");
  const Index n = rows * cols;
  std::vector<std::pair<Index, Index>> edges;
  Matrix coords(static_cast<Eigen::Index>(n), 2);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index v = r * cols + c;
      coords(static_cast<Eigen::Index>(v), 0) = -1.0 + 2.0 * static_cast<double>(c) / static_cast<double>(cols - 1);
      coords(static_cast<Eigen::Index>(v), 1) = -1.0 + 2.0 * static_cast<double>(r) / static_cast<double>(rows - 1);
      if (c + 1 < cols) edges.emplace_back(v, v + 1);
      if (r + 1 < rows) edges.emplace_back(v, v + cols);
    }
  }
  return build_graph(n, edges, std::move(coords));
}

Graph gen_erdos_renyi(Index n, Index m, std::uint64_t seed) {
  const Index pairs = n < 2 ? 0 : n * (n - 1) / 2;
  if (m > pairs) {
    throw GraphError("gen_erdos_renyi: m=" + std::to_string(m) + " exceeds n(n-1)/2=" + std::to_string(pairs));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> node(0, n == 0 ? 0 : n - 1);
  const bool complement = m > pairs / 2;
  const Index draws = complement ? pairs - m : m;
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(2 * draws);
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(m);
  auto key = [n](Index i, Index j) { return static_cast<std::uint64_t>(i) * n + j; };
  std::vector<std::pair<Index, Index>> picked;
  while (picked.size() < draws) {
    Index i = node(rng);
    Index j = node(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (chosen.insert(key(i, j)).second) picked.emplace_back(i, j);
  }
  if (complement) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        if (!chosen.contains(key(i, j))) edges.emplace_back(i, j);
      }
    }
  } else {
    edges = std::move(picked);
  }
  return build_graph(n, edges, Matrix::Ones(static_cast<Eigen::Index>(n), 1));
}

Graph gen_random_tree(Index n, std::uint64_t seed) {
  if (n < 2) throw GraphError("gen_random_tree: need n >= 2");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 1; i < n; ++i) {
    std::uniform_int_distribution<Index> parent(0, i - 1);
    edges.emplace_back(parent(rng), i);
  }
  return build_graph(n, edges, Matrix::Ones(static_cast<Eigen::Index>(n), 1));
}

Dataset gen_classification_corpus(Index per_class, std::uint64_t seed) {
  if (per_class < 1) throw GraphError("gen_classification_corpus: per_class must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> ring_size(12, 32);
  std::uniform_int_distribution<Index> grid_side(3, 6);
  std::uniform_int_distribution<Index> tree_size(12, 32);
  Dataset ds;
  ds.task = Task::kGraphClassification;
  ds.num_classes = 3;
  auto finish = [&](Graph g, int label) {
    g.features = degree_one_hot(g.adjacency);
    g.label = label;
    ds.graphs.push_back(std::move(g));
  };
  for (Index k = 0; k < per_class; ++k) {
    finish(gen_ring(ring_size(rng)), 0);
    const Index rows = grid_side(rng);
    const Index cols = grid_side(rng);
    finish(gen_grid(rows, cols), 1);
    const Index tn = tree_size(rng);
    finish(gen_random_tree(tn, rng()), 2);
  }
  return ds;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) lines.pop_back();
  return lines;
}

std::vector<long long> parse_ints(const std::string& line, const std::filesystem::path& path, Index lineno) {
  std::string cleaned = line;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream ss(cleaned);
  std::vector<long long> out;
  std::string token;
  while (ss >> token) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw GraphError(path.string() + ":" + std::to_string(lineno) + ": not an integer: '" + token + "'");
    }
  }
  return out;
}

long long single_int(const std::string& line, const std::filesystem::path& path, Index lineno) {
  auto v = parse_ints(line, path, lineno);
  if (v.size() != 1) {
    throw GraphError(path.string() + ":" + std::to_string(lineno) + ": expected one integer, found " +
                     std::to_string(v.size()));
  }
  return v[0];
}

std::map<long long, int> contiguous_codes(const std::vector<long long>& values) {
  std::map<long long, int> codes;
  for (long long v : values) codes.emplace(v, 0);
  int next = 0;
  for (auto& [value, code] : codes) code = next++;
  return codes;
}

}  // namespace

Dataset load_tu_format(const std::filesystem::path& edge_file, const std::filesystem::path& indicator_file,
                       const std::filesystem::path& label_file,
                       const std::optional<std::filesystem::path>& node_label_file) {
  const auto indicator_lines = read_lines(indicator_file);
  if (indicator_lines.empty()) throw GraphError(indicator_file.string() + ": graph indicator is empty");
  const Index total_nodes = indicator_lines.size();

  std::vector<long long> graph_of(total_nodes);
  long long max_graph = 0;
  for (Index i = 0; i < total_nodes; ++i) {
    graph_of[i] = single_int(indicator_lines[i], indicator_file, i + 1);
    if (graph_of[i] < 1) {
      throw GraphError(indicator_file.string() + ":" + std::to_string(i + 1) + ": graph ids are 1-based");
    }
    if (i > 0 && graph_of[i] < graph_of[i - 1]) {
      throw GraphError(indicator_file.string() + ":" + std::to_string(i + 1) + ": graph ids must be non-decreasing");
    }
    max_graph = std::max(max_graph, graph_of[i]);
  }
  const auto num_graphs = static_cast<Index>(max_graph);

  const auto label_lines = read_lines(label_file);
  if (label_lines.size() != num_graphs) {
    throw GraphError(label_file.string() + ": " + std::to_string(label_lines.size()) +
                     " labels for " + std::to_string(num_graphs) + " graphs");
  }
  std::vector<long long> raw_labels;
  for (Index g = 0; g < num_graphs; ++g) raw_labels.push_back(single_int(label_lines[g], label_file, g + 1));
  const auto label_codes = contiguous_codes(raw_labels);

  std::vector<Index> first(num_graphs + 1, total_nodes);
  std::vector<Index> count(num_graphs, 0);
  for (Index i = 0; i < total_nodes; ++i) {
    const auto g = static_cast<Index>(graph_of[i] - 1);
    first[g] = std::min(first[g], i);
    ++count[g];
  }
  for (Index g = 0; g < num_graphs; ++g) {
    if (count[g] == 0) throw GraphError(indicator_file.string() + ": graph " + std::to_string(g + 1) + " has no nodes");
  }

  std::vector<std::vector<std::pair<Index, Index>>> edges(num_graphs);
  std::vector<std::unordered_set<std::uint64_t>> seen(num_graphs);
  const auto edge_lines = read_lines(edge_file);
  for (Index l = 0; l < edge_lines.size(); ++l) {
    auto v = parse_ints(edge_lines[l], edge_file, l + 1);
    if (v.size() != 2) {
      throw GraphError(edge_file.string() + ":" + std::to_string(l + 1) + ": expected 'i, j'");
    }
    for (long long x : v) {
      if (x < 1 || x > static_cast<long long>(total_nodes)) {
        throw GraphError(edge_file.string() + ":" + std::to_string(l + 1) + ": node " + std::to_string(x) +
                         " out of range 1.." + std::to_string(total_nodes));
      }
    }
    const auto a = static_cast<Index>(v[0] - 1);
    const auto b = static_cast<Index>(v[1] - 1);
    if (graph_of[a] != graph_of[b]) {
      throw GraphError(edge_file.string() + ":" + std::to_string(l + 1) + ": edge joins graphs " +
                       std::to_string(graph_of[a]) + " and " + std::to_string(graph_of[b]));
    }
    if (a == b) continue;  // self-loops carry no structure for pooling
    const auto g = static_cast<Index>(graph_of[a] - 1);
    const Index i = std::min(a, b) - first[g];
    const Index j = std::max(a, b) - first[g];
    if (seen[g].insert(static_cast<std::uint64_t>(i) * count[g] + j).second) edges[g].emplace_back(i, j);
  }

  std::vector<long long> node_labels;
  std::map<long long, int> node_codes;
  if (node_label_file) {
    const auto lines = read_lines(*node_label_file);
    if (lines.size() != total_nodes) {
      throw GraphError(node_label_file->string() + ": " + std::to_string(lines.size()) + " node labels for " +
                       std::to_string(total_nodes) + " nodes");
    }
    for (Index i = 0; i < total_nodes; ++i) node_labels.push_back(single_int(lines[i], *node_label_file, i + 1));
    node_codes = contiguous_codes(node_labels);
  }

  Dataset ds;
  ds.task = Task::kGraphClassification;
  ds.num_classes = label_codes.size();
  for (Index g = 0; g < num_graphs; ++g) {
    Graph graph = build_graph(count[g], edges[g], Matrix::Zero(static_cast<Eigen::Index>(count[g]), 1));
    if (node_label_file) {
      graph.features = Matrix::Zero(static_cast<Eigen::Index>(count[g]), static_cast<Eigen::Index>(node_codes.size()));
      for (Index i = 0; i < count[g]; ++i) {
        graph.features(static_cast<Eigen::Index>(i), node_codes.at(node_labels[first[g] + i])) = 1.0;
      }
    } else {
      graph.features = degree_one_hot(graph.adjacency);
    }
    graph.label = label_codes.at(raw_labels[g]);
    ds.graphs.push_back(std::move(graph));
  }
  return ds;
}

std::vector<Split> kfold_splits(std::span<const int> labels, Index k, std::uint64_t seed) {
  if (k < 2) throw GraphError("kfold_splits: k must be >= 2");
  std::map<int, std::vector<Index>> by_class;
  for (Index i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Index>> folds(k);
  Index dealt = 0;
  for (auto& [label, members] : by_class) {
    if (members.size() < k) {
      throw GraphError("kfold_splits: class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                       " members, fewer than k=" + std::to_string(k));
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (Index idx : members) folds[dealt++ % k].push_back(idx);
  }
  std::vector<Split> splits(k);
  for (Index f = 0; f < k; ++f) {
    const Index v = (f + 1) % k;
    for (Index g = 0; g < k; ++g) {
      if (k == 2 && g == v) {
        // Only one fold left: alternate its members between valid and train.
        for (Index t = 0; t < folds[g].size(); ++t) {
          (t % 2 == 1 ? splits[f].valid : splits[f].train).push_back(folds[g][t]);
        }
        continue;
      }
      auto& dst = g == f ? splits[f].test : g == v ? splits[f].valid : splits[f].train;
      dst.insert(dst.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(splits[f].train.begin(), splits[f].train.end());
    std::sort(splits[f].valid.begin(), splits[f].valid.end());
    std::sort(splits[f].test.begin(), splits[f].test.end());
  }
  return splits;
}

Split node_split(Index n, double train_fraction, double valid_fraction, std::uint64_t seed) {
  if (train_fraction <= 0.0 || valid_fraction < 0.0 || train_fraction + valid_fraction > 1.0) {
    throw GraphError("node_split: fractions must be positive and sum to at most 1");
  }
  std::vector<Index> perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<Index>(std::round(train_fraction * static_cast<double>(n)));
  const auto n_valid = static_cast<Index>(std::round(valid_fraction * static_cast<double>(n)));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.valid.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                 perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, n_train + n_valid)));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, n_train + n_valid)), perm.end());
  return s;
}

Batch batch_graphs(std::span<const Graph> graphs) {
  if (graphs.empty()) throw GraphError("batch_graphs: empty batch");
  const Index d = graphs.front().feature_dim();
  Batch b;
  Index total = 0;
  for (const Graph& g : graphs) {
    if (g.feature_dim() != d) throw GraphError("batch_graphs: feature width mismatch");
    b.offsets.push_back(total);
    total += g.n;
  }
  b.offsets.push_back(total);
  std::vector<Triplet> triplets;
  b.graph.features = Matrix(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(d));
  for (Index gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = graphs[gi];
    const Index off = b.offsets[gi];
    for (Index i = 0; i < g.n; ++i) {
      b.membership.push_back(gi);
      auto nb = g.adjacency.neighbors(i);
      auto vals = g.adjacency.row_values(i);
      for (Index k = 0; k < nb.size(); ++k) triplets.push_back({off + i, off + nb[k], vals[k]});
    }
    if (g.n > 0) {
      b.graph.features.middleRows(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(g.n)) = g.features;
    }
    b.graph.node_labels.insert(b.graph.node_labels.end(), g.node_labels.begin(), g.node_labels.end());
  }
  b.graph.n = total;
  b.graph.adjacency = SparseMatrix::from_triplets(total, std::move(triplets));
  return b;
}

}  // namespace parsepool
