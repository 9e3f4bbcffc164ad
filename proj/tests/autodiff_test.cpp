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
#include <random>

#include <gtest/gtest.h>

namespace parsepool {
namespace {

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
  return m;
}

Var sum_all(Tape& tape, Var a) {
  Var ones_right = tape.constant(Matrix::Ones(static_cast<Eigen::Index>(a.cols()), 1));
  Var ones_left = tape.constant(Matrix::Ones(1, static_cast<Eigen::Index>(a.rows())));
  return matmul(ones_left, matmul(a, ones_right));
}

TEST(Ops, SigmoidAtZero) {
  ParameterSet params;
  Parameter& x = params.add("x", Matrix::Zero(1, 1));
  Tape tape;
  Var y = sigmoid(tape.parameter(x));
  EXPECT_DOUBLE_EQ(y.value()(0, 0), 0.5);
  params.zero_grad();
  tape.backward(y);
  EXPECT_DOUBLE_EQ(x.grad(0, 0), 0.25);
}

TEST(Ops, MseOfIdenticalInputs) {
  ParameterSet params;
  Parameter& x = params.add("x", Matrix{{1.0, -2.0}, {3.0, 0.5}});
  Tape tape;
  Var loss = mse(tape.parameter(x), x.value);
  EXPECT_DOUBLE_EQ(loss.value()(0, 0), 0.0);
  params.zero_grad();
  tape.backward(loss);
  EXPECT_TRUE(x.grad.isZero());
}

TEST(Ops, CrossEntropyOfUniformLogits) {
  for (int k : {2, 3, 7}) {
    Tape tape;
    const std::vector<int> targets = {0, k - 1};
    Var loss = softmax_cross_entropy(tape.constant(Matrix::Constant(2, k, 0.3)), targets);
    EXPECT_NEAR(loss.value()(0, 0), std::log(static_cast<double>(k)), 1e-12);
  }
}

TEST(Ops, CrossEntropyRejectsBadTarget) {
  Tape tape;
  const std::vector<int> targets = {3};
  EXPECT_THROW(softmax_cross_entropy(tape.constant(Matrix::Zero(1, 3)), targets), GraphError);
}

TEST(Ops, IdentityAssignmentLeavesInputUnchanged) {
  std::mt19937_64 rng(2);
  Tape tape;
  Matrix m = random_matrix(5, 3, rng);
  Var x = tape.constant(m);
  EXPECT_EQ(pool_by_assignment(x, Assignment::identity(5)).value(), m);
  EXPECT_EQ(unpool_by_assignment(x, Assignment::identity(5)).value(), m);
}

TEST(Ops, ShapeMismatchRejected) {
  Tape tape;
  Var a = tape.constant(Matrix::Zero(2, 3));
  Var b = tape.constant(Matrix::Zero(2, 3));
  EXPECT_THROW(matmul(a, b), GraphError);
  EXPECT_THROW(add(a, tape.constant(Matrix::Zero(3, 2))), GraphError);
  EXPECT_THROW(pool_by_assignment(a, Assignment::identity(3)), GraphError);
}

TEST(Ops, PoolUnpoolAdjointness) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 10;
    std::uniform_int_distribution<Index> pick(0, 3);
    std::vector<Index> map = {0, 1, 2, 3};
    for (Index i = 4; i < n; ++i) map.push_back(pick(rng));
    Assignment s(map, 4);
    Tape tape;
    Matrix x = random_matrix(n, 3, rng);
    Matrix y = random_matrix(4, 3, rng);
    const double lhs = pool_by_assignment(tape.constant(x), s).value().cwiseProduct(y).sum();
    const double rhs = x.cwiseProduct(unpool_by_assignment(tape.constant(y), s).value()).sum();
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(Backward, AccumulatesAcrossReuse) {
  ParameterSet params;
  Parameter& x = params.add("x", Matrix{{3.0}});
  Tape tape;
  Var v = tape.parameter(x);
  Var loss = add(mul(v, v), v);  // x^2 + x
  params.zero_grad();
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(x.grad(0, 0), 7.0);
}

TEST(Backward, RequiresScalarLoss) {
  Tape tape;
  Var v = tape.constant(Matrix::Zero(2, 1));
  EXPECT_THROW(tape.backward(v), GraphError);
}

TEST(GradCheck, Square) {
  ParameterSet params;
  Parameter& x = params.add("x", Matrix{{3.0}});
  GradCheckReport r = finite_difference_check([&](Tape& t) {
    Var v = t.parameter(x);
    return mul(v, v);
  }, params);
  EXPECT_NEAR(r.analytic, 6.0, 1e-12);
  EXPECT_LT(r.max_relative_error, 1e-8);
}

TEST(GradCheck, LinearMapMse) {
  std::mt19937_64 rng(9);
  ParameterSet params;
  Parameter& w = params.add("w", random_matrix(4, 2, rng));
  Parameter& b = params.add("b", random_matrix(1, 2, rng));
  const Matrix data = random_matrix(6, 4, rng);
  const Matrix target = random_matrix(6, 2, rng);
  GradCheckReport r = finite_difference_check([&](Tape& t) {
    return mse(add_row(matmul(t.constant(data), t.parameter(w)), t.parameter(b)), target);
  }, params);
  EXPECT_TRUE(r.finite);
  EXPECT_EQ(r.checked, 10u);
  EXPECT_LT(r.max_relative_error, 1e-6);
}

TEST(GradCheck, DeadReluIsFlat) {
  ParameterSet params;
  Parameter& x = params.add("x", Matrix{{-2.0, -0.5}});
  GradCheckReport r = finite_difference_check([&](Tape& t) {
    return sum_all(t, relu(t.parameter(x)));
  }, params);
  EXPECT_DOUBLE_EQ(r.analytic, 0.0);
  EXPECT_DOUBLE_EQ(r.numeric, 0.0);
  EXPECT_DOUBLE_EQ(r.max_relative_error, 0.0);
}

TEST(GradCheck, EveryOpAgainstDifferences) {
  std::mt19937_64 rng(13);
  ParameterSet params;
  Parameter& a = params.add("a", random_matrix(5, 3, rng));
  Parameter& c = params.add("c", random_matrix(5, 1, rng));
  Parameter& w = params.add("w", random_matrix(3, 3, rng));
  Assignment s({0, 1, 0, 2, 1}, 3);
  std::vector<Eigen::Triplet<double>> entries = {{0, 1, 0.5}, {1, 0, 0.5}, {2, 3, 1.5}, {3, 2, 1.5}, {4, 4, 1.0}};
  SparseOperator op(5, 5);
  op.setFromTriplets(entries.begin(), entries.end());
  const std::vector<Index> gather_index = {4, 0, 0, 2};
  const std::vector<int> targets = {0, 2, 1};
  GradCheckReport r = finite_difference_check([&](Tape& t) {
    Var x = t.parameter(a);
    Var h = sigmoid(matmul(spmm(op, x), t.parameter(w)));
    Var masked = mul(h, broadcast_col(t.parameter(c), 3));
    Var pooled = pool_by_assignment(sub(masked, scale(x, 0.3)), s);
    Var back = unpool_by_assignment(pooled, s);
    Var g = gather_rows(back, gather_index);
    Var scattered = scatter_add_rows(g, gather_index, 5);
    Var logits = pool_by_assignment(add(scattered, relu(x)), s);
    return add(softmax_cross_entropy(logits, targets), mse(relu(back), Matrix::Constant(5, 3, 0.1)));
  }, params);
  EXPECT_TRUE(r.finite);
  EXPECT_LT(r.max_relative_error, 1e-6) << r.worst_parameter;
}

TEST(GradCheck, DetectsTamperedGradient) {
  ParameterSet params;
  Parameter& x = params.add("x", Matrix{{1.0, 2.0}});
  GradCheckReport r = finite_difference_check(
      [&](Tape& t) {
        Var v = t.parameter(x);
        return sum_all(t, mul(v, v));
      },
      params, 1e-5, 1e-4, [](ParameterSet& p) { p.get("x").grad(0, 1) += 0.1; });
  EXPECT_GT(r.max_relative_error, 1e-3);
  EXPECT_EQ(r.worst_parameter, "x");
  EXPECT_EQ(r.worst_col, 1u);
}

TEST(GradCheck, ReportsNonFiniteLoss) {
  ParameterSet params;
  Parameter& x = params.add("x", Matrix{{0.0}});
  GradCheckReport r = finite_difference_check([&](Tape& t) {
    Var v = t.parameter(x);
    return scale(v, std::numeric_limits<double>::infinity());
  }, params);
  EXPECT_FALSE(r.finite);
}

}  // namespace
}  // namespace parsepool
