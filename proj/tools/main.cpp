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

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "parsepool/graph_io.hpp"

namespace {

using nlohmann::json;
using parsepool::Index;
namespace cli = parsepool::cli;

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw parsepool::GraphError("cannot open config " + path);
  return json::parse(in);
}

void apply_seed(json& config, const std::optional<std::uint64_t>& seed) {
  if (seed) config["train"]["seed"] = *seed;
}

std::vector<Index> default_sizes() {
  std::vector<Index> sizes;
  for (Index e = 10; e <= 16; ++e) sizes.push_back(Index{1} << e);
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical graph pooling by dominant-edge parsing"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;

  auto* parse = app.add_subcommand("parse", "Build a pooling tree from static edge scores");
  std::string graph_path;
  std::string scores_path;
  bool uniform = false;
  parse->add_option("--graph", graph_path, "Graph JSON file")->required();
  parse->add_option("--scores", scores_path, "Scores JSON file parallel to the graph's edges");
  parse->add_flag("--uniform", uniform, "Use score 0.5 on every edge");
  parse->add_option("--seed", seed, "Seed for random scores");
  parse->add_option("--out", out_dir, "Output directory");

  auto* train_graph = app.add_subcommand("train-graph", "Cross-validated graph classification");
  auto* train_node = app.add_subcommand("train-node", "Node classification on one graph");
  auto* reconstruct = app.add_subcommand("reconstruct", "Coordinate reconstruction on a ring or grid");
  for (auto* sub : {train_graph, train_node, reconstruct}) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "Overrides train.seed");
    sub->add_option("--out", out_dir, "Output directory");
  }
  train_node->get_option("--config")->required();

  std::vector<Index> sizes;
  Index repeats = 5;
  auto* bench_time = app.add_subcommand("bench-time", "Forward and parse time on dense random graphs");
  auto* bench_mem = app.add_subcommand("bench-mem", "Sparsity and peak memory on sparse random graphs");
  for (auto* sub : {bench_time, bench_mem}) {
    sub->add_option("--n", sizes, "Node counts (default 2^10 .. 2^16)");
    sub->add_option("--seed", seed, "Graph seed");
    sub->add_option("--out", out_dir, "Output directory");
  }
  bench_time->add_option("--repeats", repeats, "Timed repetitions per size")->check(CLI::PositiveNumber);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the full graph model");
  bool corrupt = false;
  gradcheck->add_option("--config", config_path, "JSON config file");
  gradcheck->add_option("--seed", seed, "Model and graph seed");
  gradcheck->add_flag("--corrupt", corrupt, "Perturb one analytic gradient (negative control)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) {
      if (uniform && !scores_path.empty()) throw parsepool::GraphError("parse: --uniform and --scores conflict");
      const parsepool::Graph graph = parsepool::read_graph_json(graph_path);
      cli::ScoreMode mode = uniform ? cli::ScoreMode::kUniform : cli::ScoreMode::kRandom;
      std::optional<parsepool::EdgeScores> scores;
      if (!scores_path.empty()) {
        mode = cli::ScoreMode::kFile;
        scores = cli::read_scores_file(scores_path, graph_path);
      }
      const cli::ParseTree tree = cli::build_parse_tree(graph, mode, seed.value_or(0), scores);
      std::filesystem::create_directories(out_dir);
      std::ofstream(std::filesystem::path(out_dir) / "tree.json") << cli::tree_to_json(tree).dump(2) << '\n';
      std::ofstream(std::filesystem::path(out_dir) / "tree.dot") << cli::tree_to_dot(tree);
      const json config{{"graph", graph_path},
                        {"scores", scores_path},
                        {"mode", uniform ? "uniform" : (scores ? "file" : "random")}};
      cli::write_manifest(out_dir, "parse", config, seed.value_or(0), {"tree.json", "tree.dot"});
      std::cout << "sizes:";
      for (Index s : tree.sizes()) std::cout << ' ' << s;
      std::cout << "\nheight: " << tree.levels.size() << '\n';
    } else if (train_graph->parsed()) {
      json config = read_config(config_path);
      apply_seed(config, seed);
      const auto r = cli::run_train_graph(config, out_dir);
      for (Index f = 0; f < r.fold_test_accuracy.size(); ++f) {
        std::cout << "fold " << f << ": test accuracy " << r.fold_test_accuracy[f] << " (best epoch "
                  << r.fold_best_epoch[f] << ")\n";
      }
      std::cout << "mean test accuracy: " << r.mean_test_accuracy << '\n';
    } else if (train_node->parsed()) {
      json config = read_config(config_path);
      apply_seed(config, seed);
      const auto r = cli::run_train_node(config, out_dir);
      std::cout << "valid accuracy: " << r.valid_accuracy << "\ntest accuracy: " << r.test_accuracy << '\n';
    } else if (reconstruct->parsed()) {
      json config = read_config(config_path);
      apply_seed(config, seed);
      const auto r = cli::run_reconstruct(config, out_dir);
      std::cout << "mse: " << r.mse << "\nvariance: " << r.variance << "\nratio: " << r.mse / r.variance
                << "\nepochs: " << r.epochs << "\npooled size: " << r.pooled_size << '\n';
    } else if (bench_time->parsed()) {
      if (sizes.empty()) sizes = default_sizes();
      const auto rows = cli::run_bench_time(sizes, repeats, seed.value_or(0));
      std::filesystem::create_directories(out_dir);
      cli::write_time_csv(rows, std::filesystem::path(out_dir) / "time.csv");
      cli::write_manifest(out_dir, "bench-time", json{{"n", sizes}, {"repeats", repeats}}, seed.value_or(0),
                          {"time.csv"});
      for (const auto& r : rows) {
        std::cout << "n=" << r.n << " m=" << r.m << " forward " << r.median_forward_ms << " ms, parse "
                  << r.median_parse_ms << " ms\n";
      }
    } else if (bench_mem->parsed()) {
      if (sizes.empty()) sizes = default_sizes();
      const auto rows = cli::run_bench_mem(sizes, seed.value_or(0));
      std::filesystem::create_directories(out_dir);
      cli::write_mem_csv(rows, std::filesystem::path(out_dir) / "mem.csv");
      cli::write_manifest(out_dir, "bench-mem", json{{"n", sizes}}, seed.value_or(0), {"mem.csv"});
      for (const auto& r : rows) {
        std::cout << "n=" << r.n << " nnz(S)=" << r.nnz_assignment << " clusters=" << r.clusters
                  << " peak_rss_kb=" << r.peak_rss_kb << '\n';
      }
    } else if (gradcheck->parsed()) {
      json config = read_config(config_path);
      if (seed) config["seed"] = *seed;
      if (corrupt) config["corrupt"] = true;
      const auto r = cli::run_gradcheck(cli::GradCheckConfig::from_json(config));
      std::cout << "scalars checked: " << r.report.checked << "\nmax relative error: "
                << r.report.max_relative_error << " (" << r.report.worst_parameter << '[' << r.report.worst_row
                << ',' << r.report.worst_col << "])\npooling height: " << r.height << '\n'
                << (r.passed ? "PASS" : "FAIL") << '\n';
      return r.passed ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
