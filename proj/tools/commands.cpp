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

#include "commands.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "parsepool/graph_io.hpp"

namespace parsepool::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& context) {
  if (!j.is_object()) throw GraphError(context + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) throw GraphError(context + ": unknown config key '" + key + "'");
  }
}

SkipMode parse_skip(const std::string& s) {
  if (s == "add") return SkipMode::kAdd;
  if (s == "concat") return SkipMode::kConcat;
  if (s == "none") return SkipMode::kNone;
  throw GraphError("unknown skip mode '" + s + "' (expected add, concat or none)");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

EdgeScores coarsen_scores_max(const EdgeScores& scores, const Assignment& s) {
  std::map<std::pair<Index, Index>, double> best;
  const SparseMatrix& c = scores.matrix();
  for (Index i = 0; i < c.size(); ++i) {
    auto nb = c.neighbors(i);
    auto vals = c.row_values(i);
    for (Index k = 0; k < nb.size(); ++k) {
      const Index ci = s.cluster_of(i);
      const Index cj = s.cluster_of(nb[k]);
      if (ci == cj) continue;
      auto [it, inserted] = best.emplace(std::make_pair(ci, cj), vals[k]);
      if (!inserted) it->second = std::max(it->second, vals[k]);
    }
  }
  std::vector<Triplet> triplets;
  for (const auto& [key, v] : best) triplets.push_back({key.first, key.second, v});
  return EdgeScores(SparseMatrix::from_triplets(s.cols(), std::move(triplets)));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw GraphError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write " + path.string());
  out << text;
}

TrainConfig train_config_from(const json& config) {
  return config.contains("train") ? TrainConfig::from_json(config.at("train")) : TrainConfig{};
}

}  // namespace

std::vector<Index> ParseTree::sizes() const {
  std::vector<Index> out;
  for (const auto& l : levels) out.push_back(l.graph.n);
  out.push_back(top_size);
  return out;
}

ParseTree build_parse_tree(const Graph& graph, ScoreMode mode, std::uint64_t seed,
                           const std::optional<EdgeScores>& file_scores) {
  if (mode == ScoreMode::kFile && !file_scores) throw GraphError("parse: file mode needs scores");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  ParseTree tree;
  SparseMatrix a = graph.adjacency;
  std::optional<EdgeScores> carried = file_scores;
  while (a.nnz() > 0) {
    EdgeScores scores;
    const auto edges = a.upper_edges();
    if (mode == ScoreMode::kFile) {
      scores = *carried;
    } else {
      std::vector<double> values(edges.size(), 0.5);
      if (mode == ScoreMode::kRandom) {
        for (double& v : values) v = uniform(rng);
      }
      scores = EdgeScores::from_upper(a.size(), edges, values);
    }
    ParseResult parsed = parse(scores);
    Graph level;
    level.n = a.size();
    level.adjacency = a;
    level.features = Matrix(static_cast<Eigen::Index>(a.size()), 0);
    if (mode == ScoreMode::kFile) carried = coarsen_scores_max(scores, parsed.assignment);
    a = coarsen_adjacency(a, parsed.assignment);
    tree.levels.push_back(TreeLevel{std::move(level), std::move(parsed.assignment), std::move(parsed.stats)});
  }
  tree.top_size = a.size();
  return tree;
}

EdgeScores read_scores_file(const fs::path& scores_path, const fs::path& graph_path) {
  std::ifstream gin(graph_path);
  std::ifstream sin(scores_path);
  if (!gin) throw GraphError("cannot open " + graph_path.string());
  if (!sin) throw GraphError("cannot open " + scores_path.string());
  const json gj = json::parse(gin);
  const json sj = json::parse(sin);
  const auto n = gj.at("n").get<Index>();
  const auto values = sj.at("scores").get<std::vector<double>>();
  const auto& edges = gj.at("edges");
  if (values.size() != edges.size()) {
    throw GraphError("scores file: " + std::to_string(values.size()) + " scores for " +
                     std::to_string(edges.size()) + " edges");
  }
  std::vector<UndirectedEdge> upper;
  for (const auto& e : edges) {
    const auto i = e[0].get<Index>();
    const auto j = e[1].get<Index>();
    upper.push_back({std::min(i, j), std::max(i, j)});
  }
  return EdgeScores::from_upper(n, upper, values);
}

json tree_to_json(const ParseTree& tree) {
  json levels = json::array();
  for (Index k = 0; k < tree.levels.size(); ++k) {
    const TreeLevel& l = tree.levels[k];
    json clusters = json::array();
    for (const auto& c : l.stats.clusters) {
      clusters.push_back({{"seed", {c.seed.first, c.seed.second}},
                          {"seed_score", c.seed_score},
                          {"size", c.size},
                          {"passes", c.passes},
                          {"expansions", c.expansions}});
    }
    levels.push_back({{"level", k},
                      {"n", l.graph.n},
                      {"num_edges", l.graph.num_edges()},
                      {"assignment", std::vector<Index>(l.assignment.clusters().begin(), l.assignment.clusters().end())},
                      {"cluster_sizes", l.assignment.cluster_sizes()},
                      {"stats",
                       {{"outer_iterations", l.stats.outer_iterations},
                        {"total_inner_iterations", l.stats.total_inner_iterations},
                        {"isolated_nodes", l.stats.isolated_nodes},
                        {"clusters", clusters}}}});
  }
  return json{{"sizes", tree.sizes()}, {"height", tree.levels.size()}, {"levels", levels}};
}

std::string tree_to_dot(const ParseTree& tree) {
  std::ostringstream out;
  out << "digraph pooling_tree {\n  rankdir=BT;\n  node [shape=circle, fontsize=10];\n";
  const std::vector<Index> sizes = tree.sizes();
  for (Index k = 0; k < sizes.size(); ++k) {
    out << "  { rank=same;";
    for (Index v = 0; v < sizes[k]; ++v) out << " l" << k << "_" << v << ";";
    out << " }\n";
  }
  for (Index k = 0; k < tree.levels.size(); ++k) {
    const Assignment& s = tree.levels[k].assignment;
    for (Index v = 0; v < s.rows(); ++v) {
      out << "  l" << k << "_" << v << " -> l" << (k + 1) << "_" << s.cluster_of(v) << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

GraphTrainResult run_train_graph(const json& config, const fs::path& out_dir) {
  check_keys(config, {"dataset", "folds", "max_height", "classifier_layers", "train"}, "train-graph");
  const TrainConfig tc = train_config_from(config);
  const json ds_cfg = config.value("dataset", json{{"kind", "synthetic"}});
  Dataset data;
  const std::string kind = ds_cfg.value("kind", "synthetic");
  if (kind == "synthetic") {
    check_keys(ds_cfg, {"kind", "per_class", "seed"}, "train-graph.dataset");
    data = gen_classification_corpus(ds_cfg.value("per_class", Index{100}), ds_cfg.value("seed", std::uint64_t{0}));
  } else if (kind == "tu") {
    check_keys(ds_cfg, {"kind", "edges", "indicator", "labels", "node_labels"}, "train-graph.dataset");
    std::optional<fs::path> node_labels;
    if (ds_cfg.contains("node_labels")) node_labels = ds_cfg.at("node_labels").get<std::string>();
    data = load_tu_format(ds_cfg.at("edges").get<std::string>(), ds_cfg.at("indicator").get<std::string>(),
                          ds_cfg.at("labels").get<std::string>(), node_labels);
  } else {
    throw GraphError("train-graph.dataset: unknown kind '" + kind + "'");
  }
  data.validate();
  const Index folds = config.value("folds", Index{5});
  const std::vector<int> labels = data.graph_labels();
  const auto splits = kfold_splits(labels, folds, tc.seed);

  ensure_dir(out_dir);
  GraphTrainResult result;
  std::ofstream fold_csv(out_dir / "folds.csv");
  fold_csv << "fold,test_accuracy,best_epoch,best_valid_loss,epochs_run,test_mean_height\n";
  std::vector<Index> last_heights;
  for (Index f = 0; f < splits.size(); ++f) {
    GraphModelConfig mc;
    mc.input_dim = data.feature_dim();
    mc.classes = data.num_classes;
    mc.pool = tc.pool_shape();
    mc.classifier_layers = config.value("classifier_layers", Index{2});
    mc.max_height = config.value("max_height", Index{32});
    mc.seed = tc.seed + f;
    GraphModel model(mc);
    GraphClassificationTask task(model);
    const auto train = graph_samples(splits[f].train);
    const auto valid = graph_samples(splits[f].valid);
    const auto test = graph_samples(splits[f].test);
    FitResult fr = fit(task, data, train, valid, tc);
    Metrics tm = evaluate(task, data, test);
    result.fold_test_accuracy.push_back(tm.accuracy);
    result.fold_best_epoch.push_back(fr.best_epoch);
    fold_csv << f << ',' << tm.accuracy << ',' << fr.best_epoch << ',' << fr.best_valid_loss << ','
             << fr.history.size() << ',' << tm.mean_height << '\n';
    std::ofstream hist(out_dir / ("history_fold" + std::to_string(f) + ".csv"));
    write_history_csv(fr.history, hist);
    fr.best.save(out_dir / ("checkpoint_fold" + std::to_string(f) + ".json"));
    if (f + 1 == splits.size()) {
      std::vector<Index> all(data.graphs.size());
      std::iota(all.begin(), all.end(), Index{0});
      const auto samples = graph_samples(all);
      result.heights = evaluate(task, data, samples).heights;
    }
  }
  result.mean_test_accuracy =
      std::accumulate(result.fold_test_accuracy.begin(), result.fold_test_accuracy.end(), 0.0) /
      static_cast<double>(result.fold_test_accuracy.size());
  std::ofstream heights(out_dir / "heights.csv");
  heights << "graph,label,nodes,height\n";
  for (Index g = 0; g < result.heights.size(); ++g) {
    heights << g << ',' << labels[g] << ',' << data.graphs[g].n << ',' << result.heights[g] << '\n';
  }
  std::vector<std::string> outputs = {"folds.csv", "heights.csv"};
  for (Index f = 0; f < splits.size(); ++f) {
    outputs.push_back("history_fold" + std::to_string(f) + ".csv");
    outputs.push_back("checkpoint_fold" + std::to_string(f) + ".json");
  }
  write_manifest(out_dir, "train-graph", config, tc.seed, outputs);
  return result;
}

NodeTrainResult run_train_node(const json& config, const fs::path& out_dir) {
  check_keys(config, {"graph", "train_fraction", "valid_fraction", "split_seed", "max_height", "classifier_layers",
                      "skip", "train"},
             "train-node");
  const TrainConfig tc = train_config_from(config);
  if (!config.contains("graph")) throw GraphError("train-node: missing config key 'graph'");
  Dataset data;
  data.task = Task::kNodeClassification;
  data.graphs.push_back(read_graph_json(config.at("graph").get<std::string>()));
  const Graph& g = data.graphs.front();
  if (g.node_labels.size() != g.n) throw GraphError("train-node: graph needs a per-node 'label' array");
  data.num_classes = static_cast<Index>(*std::max_element(g.node_labels.begin(), g.node_labels.end()) + 1);
  data.validate();
  const Split split = node_split(g.n, config.value("train_fraction", 0.6), config.value("valid_fraction", 0.2),
                                 config.value("split_seed", tc.seed));

  NodeModelConfig mc;
  mc.input_dim = g.feature_dim();
  mc.classes = data.num_classes;
  mc.pool = tc.pool_shape();
  mc.classifier_layers = config.value("classifier_layers", Index{1});
  mc.max_height = config.value("max_height", Index{32});
  mc.skip = parse_skip(config.value("skip", std::string("add")));
  mc.seed = tc.seed;
  NodeModel model(mc);
  NodeClassificationTask task(model);
  const std::vector<Sample> train = {Sample{0, split.train}};
  const std::vector<Sample> valid = {Sample{0, split.valid}};
  const std::vector<Sample> test = {Sample{0, split.test.empty() ? split.valid : split.test}};
  FitResult fr = fit(task, data, train, valid, tc);

  ensure_dir(out_dir);
  NodeTrainResult result;
  result.best_epoch = fr.best_epoch;
  result.valid_accuracy = evaluate(task, data, valid).accuracy;
  result.test_accuracy = evaluate(task, data, test).accuracy;
  std::ofstream hist(out_dir / "history.csv");
  write_history_csv(fr.history, hist);
  fr.best.save(out_dir / "checkpoint.json");
  write_text(out_dir / "metrics.json", json{{"test_accuracy", result.test_accuracy},
                                            {"valid_accuracy", result.valid_accuracy},
                                            {"best_epoch", result.best_epoch}}.dump(2) + "\n");
  write_manifest(out_dir, "train-node", config, tc.seed, {"history.csv", "checkpoint.json", "metrics.json"});
  return result;
}

ReconstructResult run_reconstruct(const json& config, const fs::path& out_dir) {
  check_keys(config, {"shape", "n", "rows", "cols", "max_height", "skip", "train"}, "reconstruct");
  TrainConfig tc = train_config_from(config);
  const std::string shape = config.value("shape", std::string("ring"));
  Dataset data;
  data.task = Task::kReconstruction;
  if (shape == "ring") {
    data.graphs.push_back(gen_ring(config.value("n", Index{64})));
  } else if (shape == "grid") {
    data.graphs.push_back(gen_grid(config.value("rows", Index{8}), config.value("cols", Index{8})));
  } else {
    throw GraphError("reconstruct: unknown shape '" + shape + "'");
  }
  const Graph& g = data.graphs.front();

  ReconstructionConfig rc;
  rc.input_dim = g.feature_dim();
  rc.pool = tc.pool_shape();
  rc.message_passing_layers = tc.gcn_layers;
  rc.max_height = config.value("max_height", Index{32});
  rc.skip = parse_skip(config.value("skip", std::string("add")));
  rc.seed = tc.seed;
  ReconstructionModel model(rc);
  ReconstructionTask task(model);
  const std::vector<Sample> samples = {Sample{0, {}}};
  FitResult fr = fit(task, data, samples, samples, tc);

  Tape tape;
  ReconstructionForward fwd = model.forward(tape, g);
  const Matrix& rec = fwd.coordinates.value();
  ReconstructResult result;
  result.mse = (rec - g.features).squaredNorm() / static_cast<double>(g.features.size());
  const Matrix centered = g.features.rowwise() - g.features.colwise().mean();
  result.variance = centered.squaredNorm() / static_cast<double>(g.features.size());
  result.epochs = fr.history.size();
  result.height = fwd.trace.height();
  result.pooled_size = fwd.trace.top.n;

  ensure_dir(out_dir);
  std::ofstream coords(out_dir / "coordinates.csv");
  coords.precision(10);
  coords << "node,x,y,x_rec,y_rec\n";
  for (Index i = 0; i < g.n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    coords << i << ',' << g.features(r, 0) << ',' << g.features(r, 1) << ',' << rec(r, 0) << ',' << rec(r, 1)
           << '\n';
  }
  std::ofstream hist(out_dir / "history.csv");
  write_history_csv(fr.history, hist);
  fr.best.save(out_dir / "checkpoint.json");
  write_text(out_dir / "metrics.json", json{{"mse", result.mse},
                                            {"variance", result.variance},
                                            {"ratio", result.mse / result.variance},
                                            {"epochs", result.epochs},
                                            {"height", result.height},
                                            {"pooled_size", result.pooled_size}}.dump(2) + "\n");
  write_manifest(out_dir, "reconstruct", config, tc.seed,
                 {"coordinates.csv", "history.csv", "checkpoint.json", "metrics.json"});
  return result;
}

std::vector<TimeRow> run_bench_time(const std::vector<Index>& sizes, Index repeats, std::uint64_t seed,
                                    Index hidden) {
  if (repeats == 0) throw GraphError("bench-time: repeats must be positive");
  std::vector<TimeRow> rows;
  for (Index n : sizes) {
    const Index m = n * n / 10;
    const Graph g = gen_erdos_renyi(n, m, seed + n);
    PoolLayerShape shape;
    shape.hidden = hidden;
    ParameterSet pool_params;
    std::mt19937_64 init(seed);
    const PoolLayerParams pool = make_pool_layer(pool_params, "pool", shape, init);
    Matrix x = Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(hidden));

    TimeRow row;
    row.n = n;
    row.m = m;
    row.repeats = repeats;
    std::vector<double> forward_ms;
    std::vector<double> parse_ms;
    for (Index r = 0; r < repeats; ++r) {
      Tape tape;
      const auto t0 = std::chrono::steady_clock::now();
      PoolOutput out = pool_layer(tape, g.adjacency, tape.constant(x), pool, PoolOptions{});
      const auto t1 = std::chrono::steady_clock::now();
      ParseResult parsed = parse(out.scores);
      const auto t2 = std::chrono::steady_clock::now();
      forward_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      parse_ms.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
      row.clusters = parsed.assignment.cols();
      row.outer_iterations = parsed.stats.outer_iterations;
      row.total_inner_iterations = parsed.stats.total_inner_iterations;
    }
    row.median_forward_ms = median(forward_ms);
    row.median_parse_ms = median(parse_ms);
    rows.push_back(row);
  }
  return rows;
}

long peak_rss_kb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

std::vector<MemRow> run_bench_mem(const std::vector<Index>& sizes, std::uint64_t seed, Index hidden) {
  std::vector<MemRow> rows;
  for (Index n : sizes) {
    const Graph g = gen_erdos_renyi(n, 2 * n, seed + n);
    ParameterSet params;
    std::mt19937_64 init(seed);
    PoolLayerShape shape;
    shape.hidden = hidden;
    const PoolLayerParams pool = make_pool_layer(params, "pool", shape, init);
    Tape tape;
    PoolOutput out = pool_layer(tape, g.adjacency,
                                tape.constant(Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(hidden))),
                                pool, PoolOptions{});
    MemRow row;
    row.n = n;
    row.m = g.num_edges();
    row.nnz_adjacency = g.adjacency.nnz();
    row.nnz_assignment = out.assignment.nnz();
    row.nnz_pooled = out.adjacency.nnz();
    row.clusters = out.assignment.cols();
    row.peak_rss_kb = peak_rss_kb();
    rows.push_back(row);
  }
  return rows;
}

void write_time_csv(const std::vector<TimeRow>& rows, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write " + path.string());
  out << "n,m,repeats,median_forward_ms,median_parse_ms,clusters,outer_iterations,total_inner_iterations\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.m << ',' << r.repeats << ',' << r.median_forward_ms << ',' << r.median_parse_ms << ','
        << r.clusters << ',' << r.outer_iterations << ',' << r.total_inner_iterations << '\n';
  }
}

void write_mem_csv(const std::vector<MemRow>& rows, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write " + path.string());
  out << "n,m,nnz_adjacency,nnz_assignment,nnz_pooled,clusters,peak_rss_kb\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.m << ',' << r.nnz_adjacency << ',' << r.nnz_assignment << ',' << r.nnz_pooled << ','
        << r.clusters << ',' << r.peak_rss_kb << '\n';
  }
}

GradCheckConfig GradCheckConfig::from_json(const json& j) {
  check_keys(j, {"nodes", "hidden", "classes", "seed", "epsilon", "tolerance", "corrupt"}, "gradcheck");
  GradCheckConfig c;
  c.nodes = j.value("nodes", c.nodes);
  c.hidden = j.value("hidden", c.hidden);
  c.classes = j.value("classes", c.classes);
  c.seed = j.value("seed", c.seed);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.corrupt = j.value("corrupt", c.corrupt);
  if (c.nodes < 3) throw GraphError("gradcheck: nodes must be >= 3");
  return c;
}

GradCheckResult run_gradcheck(const GradCheckConfig& config) {
  std::mt19937_64 rng(config.seed);
  // Ring plus a few chords keeps the graph connected with mixed degrees.
  std::set<std::pair<Index, Index>> edge_set;
  for (Index i = 0; i < config.nodes; ++i) {
    const Index j = (i + 1) % config.nodes;
    edge_set.insert({std::min(i, j), std::max(i, j)});
  }
  std::uniform_int_distribution<Index> node(0, config.nodes - 1);
  for (Index k = 0; k < config.nodes / 3; ++k) {
    const Index a = node(rng);
    const Index b = node(rng);
    if (a != b) edge_set.insert({std::min(a, b), std::max(a, b)});
  }
  std::vector<std::pair<Index, Index>> edges(edge_set.begin(), edge_set.end());
  constexpr Index kFeatures = 4;
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix features(static_cast<Eigen::Index>(config.nodes), static_cast<Eigen::Index>(kFeatures));
  for (Eigen::Index i = 0; i < features.size(); ++i) features.data()[i] = normal(rng);
  Graph g = build_graph(config.nodes, edges, std::move(features));
  g.label = 1 % static_cast<int>(config.classes);

  GraphModelConfig mc;
  mc.input_dim = kFeatures;
  mc.classes = config.classes;
  mc.pool.hidden = config.hidden;
  mc.seed = config.seed;
  GraphModel model(mc);

  std::vector<Assignment> frozen;
  GradCheckResult result;
  {
    Tape tape;
    GraphForward fwd = model.forward(tape, g);
    frozen = fwd.trace.assignments();
    result.height = fwd.trace.height();
  }
  const int target = *g.label;
  auto loss_fn = [&](Tape& tape) {
    ForwardOptions options;
    options.frozen = &frozen;
    GraphForward fwd = model.forward(tape, g, options);
    return softmax_cross_entropy(fwd.logits, std::span<const int>(&target, 1));
  };
  std::function<void(ParameterSet&)> tamper;
  if (config.corrupt) {
    tamper = [](ParameterSet& params) {
      Parameter& p = params.get("pool.score.0.weight");
      p.grad(0, 0) += 0.05 * (1.0 + std::abs(p.grad(0, 0)));
    };
  }
  result.report = finite_difference_check(loss_fn, model.parameters(), config.epsilon, 1e-4, tamper);
  result.passed = result.report.finite && result.report.max_relative_error < config.tolerance;
  return result;
}

std::string git_describe() {
  std::array<char, 256> buffer{};
  std::string out;
  FILE* pipe = popen("git describe --always --dirty 2>/dev/null", "r");
  if (pipe == nullptr) return "unknown";
  while (fgets(buffer.data(), static_cast<int>(buffer.size()), pipe) != nullptr) out += buffer.data();
  pclose(pipe);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out.empty() ? "unknown" : out;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& config, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
  ensure_dir(out_dir);
  json j{{"command", command}, {"config", config},          {"seed", seed},
         {"git_describe", git_describe()}, {"outputs", outputs}};
  write_text(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace parsepool::cli
