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

#include "parsepool/train.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

namespace parsepool {

using nlohmann::json;

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw GraphError(std::string("train config: invalid value for '") + field + "'");
  };
  require(learning_rate > 0.0, "learning_rate");
  require(batch_size > 0, "batch_size");
  require(max_epochs > 0, "max_epochs");
  require(dropedge >= 0.0 && dropedge < 1.0, "dropedge");
  require(dropout >= 0.0 && dropout < 1.0, "dropout");
  require(hidden > 0, "hidden");
  require(gcn_layers > 0, "gcn_layers");
  require(score_mlp_layers > 0, "score_mlp_layers");
  require(deepsets_layers > 0, "deepsets_layers");
}

PoolLayerShape TrainConfig::pool_shape() const {
  PoolLayerShape s;
  s.hidden = hidden;
  s.gcn_layers = gcn_layers;
  s.score_mlp_layers = score_mlp_layers;
  s.deepsets_layers = deepsets_layers;
  s.separate_gnn_layers = gcn_layers;
  return s;
}

json TrainConfig::to_json() const {
  return json{{"learning_rate", learning_rate}, {"batch_size", batch_size},
              {"max_epochs", max_epochs},       {"patience", patience},
              {"dropedge", dropedge},           {"dropout", dropout},
              {"seed", seed},                   {"hidden", hidden},
              {"gcn_layers", gcn_layers},       {"score_mlp_layers", score_mlp_layers},
              {"deepsets_layers", deepsets_layers}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  if (!j.is_object()) throw GraphError("train config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<Index>();
      else if (key == "max_epochs") c.max_epochs = value.get<Index>();
      else if (key == "patience") c.patience = value.get<Index>();
      else if (key == "dropedge") c.dropedge = value.get<double>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "hidden") c.hidden = value.get<Index>();
      else if (key == "gcn_layers") c.gcn_layers = value.get<Index>();
      else if (key == "score_mlp_layers") c.score_mlp_layers = value.get<Index>();
      else if (key == "deepsets_layers") c.deepsets_layers = value.get<Index>();
      else throw GraphError("train config: unknown key '" + key + "'");
    } catch (const json::exception&) {
      throw GraphError("train config: wrong type for key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

json AdamState::to_json() const {
  json m = json::array();
  json v = json::array();
  for (const auto& x : first_moment) m.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  for (const auto& x : second_moment) v.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  json shapes = json::array();
  for (const auto& x : first_moment) shapes.push_back({x.rows(), x.cols()});
  return json{{"steps", steps}, {"shapes", shapes}, {"m", m}, {"v", v}};
}

AdamState AdamState::from_json(const json& j) {
  AdamState s;
  s.steps = j.at("steps").get<std::uint64_t>();
  const auto& shapes = j.at("shapes");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto rows = shapes[i][0].get<Eigen::Index>();
    const auto cols = shapes[i][1].get<Eigen::Index>();
    auto m = j.at("m")[i].get<std::vector<double>>();
    auto v = j.at("v")[i].get<std::vector<double>>();
    s.first_moment.emplace_back(Eigen::Map<Matrix>(m.data(), rows, cols));
    s.second_moment.emplace_back(Eigen::Map<Matrix>(v.data(), rows, cols));
  }
  return s;
}

bool operator==(const AdamState& a, const AdamState& b) {
  if (a.steps != b.steps || a.first_moment.size() != b.first_moment.size()) return false;
  for (std::size_t i = 0; i < a.first_moment.size(); ++i) {
    if (a.first_moment[i] != b.first_moment[i] || a.second_moment[i] != b.second_moment[i]) return false;
  }
  return true;
}

AdamStepResult adam_step(ParameterSet& params, AdamState& state, double learning_rate) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  AdamStepResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].grad.allFinite()) {
      result.applied = false;
      result.non_finite_parameter = params[i].name;
      return result;
    }
  }
  if (state.first_moment.size() != params.size()) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.first_moment.push_back(Matrix::Zero(params[i].value.rows(), params[i].value.cols()));
      state.second_moment.push_back(Matrix::Zero(params[i].value.rows(), params[i].value.cols()));
    }
  }
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(kBeta1, t);
  const double c2 = 1.0 - std::pow(kBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = kBeta1 * m + (1.0 - kBeta1) * p.grad;
    v = kBeta2 * v + (1.0 - kBeta2) * p.grad.cwiseAbs2();
    p.value.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }
  return result;
}

namespace {

int argmax_row(const Matrix& m, Eigen::Index r) {
  Eigen::Index best = 0;
  m.row(r).maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

SampleResult GraphClassificationTask::run(Tape& tape, const Graph& graph, std::span<const Index>,
                                          const ForwardOptions& options) {
  if (!graph.label) throw GraphError("graph classification: graph has no label");
  GraphForward fwd = model_.forward(tape, graph, options);
  const int target = *graph.label;
  SampleResult r;
  r.loss = softmax_cross_entropy(fwd.logits, std::span<const int>(&target, 1));
  r.predicted.push_back(argmax_row(fwd.logits.value(), 0));
  r.truth.push_back(target);
  r.height = fwd.trace.height();
  return r;
}

SampleResult NodeClassificationTask::run(Tape& tape, const Graph& graph, std::span<const Index> nodes,
                                         const ForwardOptions& options) {
  if (graph.node_labels.size() != graph.n) throw GraphError("node classification: graph lacks node labels");
  NodeForward fwd = model_.forward(tape, graph, options);
  std::vector<Index> selected(nodes.begin(), nodes.end());
  if (selected.empty()) {
    selected.resize(graph.n);
    std::iota(selected.begin(), selected.end(), Index{0});
  }
  SampleResult r;
  for (Index i : selected) r.truth.push_back(graph.node_labels[i]);
  Var picked = gather_rows(fwd.logits, selected);
  r.loss = softmax_cross_entropy(picked, r.truth);
  for (Eigen::Index k = 0; k < picked.value().rows(); ++k) r.predicted.push_back(argmax_row(picked.value(), k));
  r.height = fwd.trace.height();
  return r;
}

SampleResult ReconstructionTask::run(Tape& tape, const Graph& graph, std::span<const Index>,
                                     const ForwardOptions& options) {
  ReconstructionForward fwd = model_.forward(tape, graph, options);
  SampleResult r;
  r.loss = mse(fwd.coordinates, graph.features);
  r.squared_error = (fwd.coordinates.value() - graph.features).squaredNorm();
  r.entries = static_cast<double>(graph.features.size());
  r.height = fwd.trace.height();
  return r;
}

std::vector<double> Metrics::per_class_accuracy() const {
  std::vector<double> out;
  for (const auto& row : confusion) {
    const double total = static_cast<double>(std::accumulate(row.begin(), row.end(), Index{0}));
    const Index correct = out.size() < row.size() ? row[out.size()] : 0;
    out.push_back(total > 0 ? static_cast<double>(correct) / total : 0.0);
  }
  return out;
}

Metrics evaluate(TaskModel& model, const Dataset& data, std::span<const Sample> split) {
  if (split.empty()) throw GraphError("evaluate: empty split");
  Metrics m;
  const Index k = std::max<Index>(data.num_classes, 1);
  m.confusion.assign(k, std::vector<Index>(k, 0));
  double loss = 0.0;
  double squared = 0.0;
  double entries = 0.0;
  Index correct = 0;
  Index labelled = 0;
  ForwardOptions options;
  for (const Sample& s : split) {
    Tape tape;
    SampleResult r = model.run(tape, data.graphs.at(s.graph), s.nodes, options);
    loss += r.loss.value()(0, 0);
    squared += r.squared_error;
    entries += r.entries;
    m.heights.push_back(r.height);
    for (std::size_t i = 0; i < r.truth.size(); ++i) {
      ++labelled;
      if (r.truth[i] == r.predicted[i]) ++correct;
      if (static_cast<Index>(r.truth[i]) < k && static_cast<Index>(r.predicted[i]) < k) {
        ++m.confusion[static_cast<Index>(r.truth[i])][static_cast<Index>(r.predicted[i])];
      }
    }
  }
  m.count = split.size();
  m.loss = loss / static_cast<double>(split.size());
  m.accuracy = labelled > 0 ? static_cast<double>(correct) / static_cast<double>(labelled) : 0.0;
  m.mse = entries > 0 ? squared / entries : 0.0;
  m.mean_height = static_cast<double>(std::accumulate(m.heights.begin(), m.heights.end(), Index{0})) /
                  static_cast<double>(m.heights.size());
  return m;
}

FitResult fit(TaskModel& model, const Dataset& data, std::span<const Sample> train,
              std::span<const Sample> valid, const TrainConfig& config) {
  config.validate();
  if (train.empty() || valid.empty()) throw GraphError("fit: train and validation splits must be non-empty");
  ParameterSet& params = model.parameters();
  std::mt19937_64 order_rng(config.seed);
  std::mt19937_64 forward_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamState adam;
  FitResult result;
  result.best = Checkpoint::capture(params);
  result.best_valid_loss = std::numeric_limits<double>::infinity();
  Index stale = 0;
  std::vector<Index> order(train.size());
  std::iota(order.begin(), order.end(), Index{0});

  ForwardOptions options;
  options.ctx.training = true;
  options.ctx.dropout = config.dropout;
  options.ctx.rng = &forward_rng;
  options.dropedge = config.dropedge;

  for (Index epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), order_rng);
    double train_loss = 0.0;
    Index height_sum = 0;
    for (Index begin = 0; begin < order.size(); begin += config.batch_size) {
      const Index end = std::min<Index>(order.size(), begin + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - begin);
      params.zero_grad();
      for (Index b = begin; b < end; ++b) {
        const Sample& s = train[order[b]];
        Tape tape;
        SampleResult r = model.run(tape, data.graphs.at(s.graph), s.nodes, options);
        train_loss += r.loss.value()(0, 0);
        height_sum += r.height;
        tape.backward(scale(r.loss, weight));
      }
      if (!adam_step(params, adam, config.learning_rate).applied) ++result.skipped_steps;
    }
    Metrics vm = evaluate(model, data, valid);
    const auto stop = std::chrono::steady_clock::now();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss / static_cast<double>(train.size());
    rec.valid_loss = vm.loss;
    rec.metric = vm.primary(model.task());
    rec.mean_height = static_cast<double>(height_sum) / static_cast<double>(train.size());
    rec.wallclock_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    result.history.push_back(rec);

    if (vm.loss < result.best_valid_loss) {
      result.best_valid_loss = vm.loss;
      result.best_epoch = epoch;
      result.best = Checkpoint::capture(params);
      stale = 0;
    } else if (++stale > config.patience) {
      break;
    }
  }
  result.best.restore(params);
  return result;
}

void write_history_csv(std::span<const EpochRecord> history, std::ostream& out) {
  out << "epoch,train_loss,valid_loss,metric,mean_height,wallclock_ms\n";
  out.precision(10);
  for (const auto& r : history) {
    out << r.epoch << ',' << r.train_loss << ',' << r.valid_loss << ',' << r.metric << ',' << r.mean_height
        << ',' << r.wallclock_ms << '\n';
  }
}

std::vector<Sample> graph_samples(std::span<const Index> graphs) {
  std::vector<Sample> out;
  out.reserve(graphs.size());
  for (Index g : graphs) out.push_back(Sample{g, {}});
  return out;
}

}  // namespace parsepool
