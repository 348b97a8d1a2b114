// Copyright 2026 The GRAIL Authors.
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

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "grail/graph.hpp"

namespace grail {

// Trainable array living outside any tape. Backward passes accumulate into
// grad; callers zero it between optimizer steps.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;
  double scalar() const { return value()(0, 0); }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Records one forward pass. Nodes are appended in construction order, which
// is a valid topological order, so backward is a single reverse sweep.
class Tape {
 public:
  using BackwardFn = std::function<void(const Matrix& grad_out, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Leaf whose gradient is read back through grad(). Rejects NaN/Inf.
  Var leaf(Matrix value, bool requires_grad = true);
  // Leaf bound to a parameter; backward adds into param.grad.
  Var param(Parameter& p);

  Var record(Matrix value, std::vector<int> parents, BackwardFn backward);

  const Matrix& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }

  // Gradient of the last backward() loss w.r.t. the node; zeros if the node
  // was unreachable.
  Matrix grad(Var v) const;

  void backward(Var loss);

  // Used by backward closures.
  void accumulate(int id, const Matrix& g);
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    bool requires_grad = false;
    std::vector<int> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
};

// (g + g^T) / 2: gradient of a loss w.r.t. a symmetric matrix argument
// restricted to symmetric directions.
Matrix symmetrized(const Matrix& g);

namespace ad {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// a (r x c) + row (1 x c) broadcast over rows.
Var add_row(Var a, Var row);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
Var relu(Var a);
// Single learnable negative slope (1 x 1).
Var prelu(Var a, Var slope);
Var sigmoid(Var a);
Var softplus(Var a);
Var tanh(Var a);
Var log(Var a);
Var exp(Var a);
Var pow(Var a, double exponent);
Var sum(Var a);
Var mean(Var a);
// Column-wise reductions over rows -> 1 x c.
Var sum_rows(Var a);
Var mean_rows(Var a);
// Row-wise reduction over columns -> r x 1.
Var sum_cols(Var a);
Var transpose(Var a);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var row_index(Var a, std::span<const int> rows);
// out(i, j) = a(i, j) * v(i); v is r x 1.
Var scale_rows(Var a, Var v);
// out(i, j) = a(i, j) * v(j); v is 1 x c.
Var scale_cols(Var a, Var v);
Var add_identity(Var a);
// Diagonal of a square matrix -> r x 1.
Var diag(Var a);
// Per-row element a(i, idx[i]) -> r x 1.
Var pick(Var a, std::span<const int> idx);
Var log_softmax_rows(Var a);
// Row-wise log(sum_j exp(a(i, j))) -> r x 1, max-stabilized. When
// exclude_diagonal is set, column i is omitted from row i.
Var logsumexp_rows(Var a, bool exclude_diagonal = false);
// n x n symmetric matrix with out(i, j) = out(j, i) = values(k) for
// pairs[k] = (i, j); all other entries zero.
Var scatter_symmetric(Var values, int n, std::span<const NodePair> pairs);
// W . H for a symmetric weighted adjacency W with entries in [0, 1].
Var weighted_message_pass(Var w, Var h);

}  // namespace ad
}  // namespace grail
