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

#ifndef PARSEPOOL_AUTODIFF_HPP
#define PARSEPOOL_AUTODIFF_HPP

#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "parsepool/graph.hpp"

namespace parsepool {

using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Trainable matrix with an accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Named parameters in insertion order. Addresses stay stable.
class ParameterSet {
 public:
  Parameter& add(std::string name, Matrix value);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();
  std::size_t scalar_count() const;

  /// Copies values from another set with the same names and shapes.
  void assign_values(const ParameterSet& other);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

class Tape;

/// Handle to a node on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  const Matrix& grad() const;
  Index rows() const { return static_cast<Index>(value().rows()); }
  Index cols() const { return static_cast<Index>(value().cols()); }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records a forward computation and replays it in reverse. Nodes are
/// appended in evaluation order, so reverse insertion order is a topological
/// order and backward visits each node once.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Var constant(Matrix value);
  Var parameter(Parameter& param);

  /// Appends a derived node. `backward` reads grad(self) and accumulates into
  /// its parents; it is skipped when no parent requires a gradient.
  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const;
  /// Mutable gradient slot, zero-initialised on first access.
  Matrix& grad_slot(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 loss and accumulates into parameters.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::deque<Node> nodes_;  // stable references across appends
};

// Dense algebra.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double factor);
Var add_row(Var a, Var row);  // broadcast a 1 x d row over every row of a
Var sigmoid(Var a);
Var relu(Var a);

/// n x 1 column repeated into n x cols.
Var broadcast_col(Var column, Index cols);

/// Constant sparse operator applied on the left: op * a.
Var spmm(const SparseOperator& op, Var a);

/// out[k] = a[index[k]].
Var gather_rows(Var a, std::span<const Index> index);
/// out[index[k]] += a[k]; out has `rows` rows.
Var scatter_add_rows(Var a, std::span<const Index> index, Index rows);

/// S^T a: sums rows into their clusters. S is a constant index structure.
Var pool_by_assignment(Var a, const Assignment& s);
/// S a: copies each cluster row back to its members.
Var unpool_by_assignment(Var a, const Assignment& s);

/// Mean over rows of -log softmax(logits)[target].
Var softmax_cross_entropy(Var logits, std::span<const int> targets);
/// Mean over all entries of (pred - target)^2.
Var mse(Var pred, const Matrix& target);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Index worst_row = 0;
  Index worst_col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
  bool finite = true;
};

/// Compares tape gradients against central differences for every scalar in
/// `params`. `loss_fn` must be deterministic; it builds the loss on a fresh
/// tape. Relative error is |analytic - numeric| / max(|numeric|, floor).
/// `tamper`, when set, edits the analytic gradients before comparison.
GradCheckReport finite_difference_check(const std::function<Var(Tape&)>& loss_fn,
                                        ParameterSet& params, double epsilon = 1e-5,
                                        double floor = 1e-4,
                                        const std::function<void(ParameterSet&)>& tamper = {});

}  // namespace parsepool

#endif  // PARSEPOOL_AUTODIFF_HPP
