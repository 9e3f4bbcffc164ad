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

#ifndef PARSEPOOL_TRAIN_HPP
#define PARSEPOOL_TRAIN_HPP

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parsepool/checkpoint.hpp"
#include "parsepool/data.hpp"
#include "parsepool/models.hpp"

namespace parsepool {

struct TrainConfig {
  double learning_rate = 1e-3;
  Index batch_size = 32;
  Index max_epochs = 200;
  Index patience = 20;
  double dropedge = 0.0;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  Index hidden = 64;
  Index gcn_layers = 2;
  Index score_mlp_layers = 1;
  Index deepsets_layers = 1;

  /// Throws GraphError naming the offending field.
  void validate() const;
  PoolLayerShape pool_shape() const;

  nlohmann::json to_json() const;
  /// Unknown keys are rejected with their name.
  static TrainConfig from_json(const nlohmann::json& j);
};

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t steps = 0;

  nlohmann::json to_json() const;
  static AdamState from_json(const nlohmann::json& j);
  friend bool operator==(const AdamState& a, const AdamState& b);
};

struct AdamStepResult {
  bool applied = true;
  std::string non_finite_parameter;  // set when the step was skipped
};

/// One Adam update with beta = (0.9, 0.999), eps = 1e-8. A step whose
/// gradients contain a non-finite value is skipped and reported.
AdamStepResult adam_step(ParameterSet& params, AdamState& state, double learning_rate);

/// What a task reports for one forward pass.
struct SampleResult {
  Var loss;
  std::vector<int> predicted;
  std::vector<int> truth;
  double squared_error = 0.0;
  double entries = 0.0;
  Index height = 0;
};

/// One training example: a graph, and for node tasks the nodes that count.
struct Sample {
  Index graph = 0;
  std::vector<Index> nodes;
};

class TaskModel {
 public:
  virtual ~TaskModel() = default;
  virtual ParameterSet& parameters() = 0;
  virtual Task task() const = 0;
  virtual SampleResult run(Tape& tape, const Graph& graph, std::span<const Index> nodes,
                           const ForwardOptions& options) = 0;
};

class GraphClassificationTask : public TaskModel {
 public:
  explicit GraphClassificationTask(GraphModel& model) : model_(model) {}
  ParameterSet& parameters() override { return model_.parameters(); }
  Task task() const override { return Task::kGraphClassification; }
  SampleResult run(Tape& tape, const Graph& graph, std::span<const Index> nodes,
                   const ForwardOptions& options) override;

 private:
  GraphModel& model_;
};

class NodeClassificationTask : public TaskModel {
 public:
  explicit NodeClassificationTask(NodeModel& model) : model_(model) {}
  ParameterSet& parameters() override { return model_.parameters(); }
  Task task() const override { return Task::kNodeClassification; }
  SampleResult run(Tape& tape, const Graph& graph, std::span<const Index> nodes,
                   const ForwardOptions& options) override;

 private:
  NodeModel& model_;
};

class ReconstructionTask : public TaskModel {
 public:
  explicit ReconstructionTask(ReconstructionModel& model) : model_(model) {}
  ParameterSet& parameters() override { return model_.parameters(); }
  Task task() const override { return Task::kReconstruction; }
  SampleResult run(Tape& tape, const Graph& graph, std::span<const Index> nodes,
                   const ForwardOptions& options) override;

 private:
  ReconstructionModel& model_;
};

struct Metrics {
  double loss = 0.0;
  double accuracy = 0.0;  // classification tasks
  double mse = 0.0;       // reconstruction
  double mean_height = 0.0;
  std::vector<Index> heights;                 // per sample
  std::vector<std::vector<Index>> confusion;  // [truth][predicted]
  Index count = 0;

  std::vector<double> per_class_accuracy() const;
  /// Accuracy for classification, MSE for reconstruction.
  double primary(Task task) const { return task == Task::kReconstruction ? mse : accuracy; }
};

/// Deterministic evaluation pass; no dropout, no DropEdge.
Metrics evaluate(TaskModel& model, const Dataset& data, std::span<const Sample> split);

struct EpochRecord {
  Index epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double metric = 0.0;
  double mean_height = 0.0;
  double wallclock_ms = 0.0;
};

struct FitResult {
  Checkpoint best;
  Index best_epoch = 0;
  double best_valid_loss = 0.0;
  std::vector<EpochRecord> history;
  Index skipped_steps = 0;
};

/// Minibatch Adam with early stopping on validation loss. The model is left
/// holding the best checkpoint.
FitResult fit(TaskModel& model, const Dataset& data, std::span<const Sample> train,
              std::span<const Sample> valid, const TrainConfig& config);

/// epoch,train_loss,valid_loss,metric,mean_height,wallclock_ms
void write_history_csv(std::span<const EpochRecord> history, std::ostream& out);

std::vector<Sample> graph_samples(std::span<const Index> graphs);

}  // namespace parsepool

#endif  // PARSEPOOL_TRAIN_HPP
