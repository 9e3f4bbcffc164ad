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

#include "parsepool/autodiff.hpp"

#include <cmath>
#include <limits>

namespace parsepool {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw GraphError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

}  // namespace

Parameter& ParameterSet::add(std::string name, Matrix value) {
  if (contains(name)) throw GraphError("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->value = std::move(value);
  p->zero_grad();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterSet::get(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return *p;
  }
  throw GraphError("unknown parameter: " + name);
}

const Parameter& ParameterSet::get(const std::string& name) const {
  return const_cast<ParameterSet*>(this)->get(name);
}

bool ParameterSet::contains(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return true;
  }
  return false;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += static_cast<std::size_t>(p->value.size());
  return total;
}

void ParameterSet::assign_values(const ParameterSet& other) {
  if (other.size() != size()) throw GraphError("parameter sets differ in size");
  for (std::size_t i = 0; i < size(); ++i) {
    const Parameter& src = other.get(params_[i]->name);
    check_same_shape(params_[i]->value, src.value, "assign_values");
    params_[i]->value = src.value;
  }
}

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  Parameter* target = &param;
  nodes_.push_back(Node{param.value, Matrix(), true, [target](Tape& t, std::size_t self) {
                          if (target->grad.size() == 0) target->zero_grad();
                          target->grad += t.grad_slot(self);
                        }});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw GraphError("tape: operand recorded on a different tape");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs, needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

const Matrix& Tape::grad(std::size_t id) const {
  return const_cast<Tape*>(this)->grad_slot(id);
}

Matrix& Tape::grad_slot(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.size() == 0 && node.value.size() != 0) {
    node.grad.setZero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw GraphError("backward: loss belongs to another tape");
  if (loss.value().size() != 1) throw GraphError("backward: loss must be 1x1");
  grad_slot(loss.id()).setOnes();
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || !node.backward || node.grad.size() == 0) continue;
    node.backward(*this, id);
  }
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw GraphError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                     std::to_string(b.rows()) + " differ");
  }
  Matrix out = a.value() * b.value();
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.grad_slot(self);
    if (t.requires_grad(a.id())) t.grad_slot(a.id()).noalias() += g * t.value(b.id()).transpose();
    if (t.requires_grad(b.id())) t.grad_slot(b.id()).noalias() += t.value(a.id()).transpose() * g;
  });
}

Var add(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "add");
  return a.tape()->record(a.value() + b.value(), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.grad_slot(self);
    if (t.requires_grad(a.id())) t.grad_slot(a.id()) += g;
    if (t.requires_grad(b.id())) t.grad_slot(b.id()) += g;
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "sub");
  return a.tape()->record(a.value() - b.value(), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.grad_slot(self);
    if (t.requires_grad(a.id())) t.grad_slot(a.id()) += g;
    if (t.requires_grad(b.id())) t.grad_slot(b.id()) -= g;
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "mul");
  Matrix out = a.value().cwiseProduct(b.value());
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.grad_slot(self);
    if (t.requires_grad(a.id())) t.grad_slot(a.id()) += g.cwiseProduct(t.value(b.id()));
    if (t.requires_grad(b.id())) t.grad_slot(b.id()) += g.cwiseProduct(t.value(a.id()));
  });
}

Var scale(Var a, double factor) {
  return a.tape()->record(a.value() * factor, {a}, [a, factor](Tape& t, std::size_t self) {
    t.grad_slot(a.id()) += factor * t.grad_slot(self);
  });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw GraphError("add_row: row must be 1 x cols");
  Matrix out = a.value().rowwise() + row.value().row(0);
  return a.tape()->record(std::move(out), {a, row}, [a, row](Tape& t, std::size_t self) {
    const Matrix& g = t.grad_slot(self);
    if (t.requires_grad(a.id())) t.grad_slot(a.id()) += g;
    if (t.requires_grad(row.id())) t.grad_slot(row.id()) += g.colwise().sum();
  });
}

Var sigmoid(Var a) {
  Matrix out = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
    const Matrix& y = t.value(self);
    t.grad_slot(a.id()) += t.grad_slot(self).cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
  });
}

Var relu(Var a) {
  Matrix out = a.value().cwiseMax(0.0);
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
    const Matrix& x = t.value(a.id());
    t.grad_slot(a.id()) += t.grad_slot(self).cwiseProduct(
        x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
  });
}

Var broadcast_col(Var column, Index cols) {
  if (column.cols() != 1) throw GraphError("broadcast_col: input must be a column");
  Matrix out = column.value().replicate(1, static_cast<Eigen::Index>(cols));
  return column.tape()->record(std::move(out), {column}, [column](Tape& t, std::size_t self) {
    t.grad_slot(column.id()) += t.grad_slot(self).rowwise().sum();
  });
}

Var spmm(const SparseOperator& op, Var a) {
  if (op.cols() != static_cast<Eigen::Index>(a.rows())) throw GraphError("spmm: shape mismatch");
  Matrix out = op * a.value();
  SparseOperator op_t = op.transpose();
  return a.tape()->record(std::move(out), {a}, [a, op_t = std::move(op_t)](Tape& t, std::size_t self) {
    t.grad_slot(a.id()).noalias() += op_t * t.grad_slot(self);
  });
}

Var gather_rows(Var a, std::span<const Index> index) {
  Matrix out(static_cast<Eigen::Index>(index.size()), a.value().cols());
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= a.rows()) throw GraphError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(k)) = a.value().row(static_cast<Eigen::Index>(index[k]));
  }
  std::vector<Index> idx(index.begin(), index.end());
  return a.tape()->record(std::move(out), {a}, [a, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Matrix& g = t.grad_slot(self);
    Matrix& ga = t.grad_slot(a.id());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      ga.row(static_cast<Eigen::Index>(idx[k])) += g.row(static_cast<Eigen::Index>(k));
    }
  });
}

Var scatter_add_rows(Var a, std::span<const Index> index, Index rows) {
  if (index.size() != a.rows()) throw GraphError("scatter_add_rows: index length != rows");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows), a.value().cols());
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= rows) throw GraphError("scatter_add_rows: index out of range");
    out.row(static_cast<Eigen::Index>(index[k])) += a.value().row(static_cast<Eigen::Index>(k));
  }
  std::vector<Index> idx(index.begin(), index.end());
  return a.tape()->record(std::move(out), {a}, [a, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Matrix& g = t.grad_slot(self);
    Matrix& ga = t.grad_slot(a.id());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      ga.row(static_cast<Eigen::Index>(k)) += g.row(static_cast<Eigen::Index>(idx[k]));
    }
  });
}

Var pool_by_assignment(Var a, const Assignment& s) {
  if (s.rows() != a.rows()) throw GraphError("pool_by_assignment: assignment rows != input rows");
  return scatter_add_rows(a, s.clusters(), s.cols());
}

Var unpool_by_assignment(Var a, const Assignment& s) {
  if (s.cols() != a.rows()) throw GraphError("unpool_by_assignment: assignment cols != input rows");
  return gather_rows(a, s.clusters());
}

Var softmax_cross_entropy(Var logits, std::span<const int> targets) {
  const Matrix& z = logits.value();
  if (targets.size() != static_cast<std::size_t>(z.rows()) || z.rows() == 0) {
    throw GraphError("softmax_cross_entropy: one target per logits row required");
  }
  Matrix probs(z.rows(), z.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    if (targets[r] < 0 || targets[r] >= z.cols()) throw GraphError("softmax_cross_entropy: target out of range");
    const double m = z.row(r).maxCoeff();
    auto shifted = (z.row(r).array() - m).exp();
    const double norm = shifted.sum();
    probs.row(r) = shifted / norm;
    loss += -(z(r, targets[r]) - m - std::log(norm));
  }
  const double rows = static_cast<double>(z.rows());
  Matrix value(1, 1);
  value(0, 0) = loss / rows;
  std::vector<int> tgt(targets.begin(), targets.end());
  return logits.tape()->record(
      std::move(value), {logits},
      [logits, probs = std::move(probs), tgt = std::move(tgt), rows](Tape& t, std::size_t self) {
        const double g = t.grad_slot(self)(0, 0);
        Matrix d = probs;
        for (std::size_t r = 0; r < tgt.size(); ++r) d(static_cast<Eigen::Index>(r), tgt[r]) -= 1.0;
        t.grad_slot(logits.id()) += (g / rows) * d;
      });
}

Var mse(Var pred, const Matrix& target) {
  check_same_shape(pred.value(), target, "mse");
  Matrix diff = pred.value() - target;
  const double count = static_cast<double>(diff.size());
  Matrix value(1, 1);
  value(0, 0) = diff.squaredNorm() / count;
  return pred.tape()->record(std::move(value), {pred},
                             [pred, diff = std::move(diff), count](Tape& t, std::size_t self) {
                               t.grad_slot(pred.id()) += (2.0 * t.grad_slot(self)(0, 0) / count) * diff;
                             });
}

GradCheckReport finite_difference_check(const std::function<Var(Tape&)>& loss_fn,
                                        ParameterSet& params, double epsilon, double floor,
                                        const std::function<void(ParameterSet&)>& tamper) {
  GradCheckReport report;
  params.zero_grad();
  {
    Tape tape;
    Var loss = loss_fn(tape);
    if (!std::isfinite(loss.value()(0, 0))) {
      report.finite = false;
      report.max_relative_error = std::numeric_limits<double>::infinity();
      return report;
    }
    tape.backward(loss);
  }
  if (tamper) tamper(params);
  auto eval = [&]() {
    Tape tape;
    return loss_fn(tape).value()(0, 0);
  };
  for (std::size_t p = 0; p < params.size(); ++p) {
    Parameter& param = params[p];
    for (Eigen::Index r = 0; r < param.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < param.value.cols(); ++c) {
        const double saved = param.value(r, c);
        param.value(r, c) = saved + epsilon;
        const double plus = eval();
        param.value(r, c) = saved - epsilon;
        const double minus = eval();
        param.value(r, c) = saved;
        const double numeric = (plus - minus) / (2.0 * epsilon);
        const double analytic = param.grad(r, c);
        ++report.checked;
        if (!std::isfinite(numeric) || !std::isfinite(analytic)) {
          report.finite = false;
          report.max_relative_error = std::numeric_limits<double>::infinity();
          report.worst_parameter = param.name;
          report.worst_row = static_cast<Index>(r);
          report.worst_col = static_cast<Index>(c);
          return report;
        }
        const double err = std::abs(analytic - numeric) / std::max(std::abs(numeric), floor);
        if (err > report.max_relative_error || report.worst_parameter.empty()) {
          report.max_relative_error = std::max(err, report.max_relative_error);
          report.worst_parameter = param.name;
          report.worst_row = static_cast<Index>(r);
          report.worst_col = static_cast<Index>(c);
          report.analytic = analytic;
          report.numeric = numeric;
        }
      }
    }
  }
  return report;
}

}  // namespace parsepool
