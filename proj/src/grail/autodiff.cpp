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

#include "grail/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "grail/error.hpp"

namespace grail {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::kShapeMismatch,
         std::string(op) + ": " + shape_str(a) + " vs " + shape_str(b));
  }
}

Tape& tape_of(Var a) { return *a.tape(); }

double softplus_scalar(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Matrix symmetrized(const Matrix& g) { return 0.5 * (g + g.transpose()); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), false, {}, nullptr, nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  if (!value.allFinite()) fail(ErrorCode::kNonFinite, "leaf tensor contains NaN or Inf");
  nodes_.push_back(Node{std::move(value), requires_grad, {}, nullptr, nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::param(Parameter& p) {
  if (!p.value.allFinite()) fail(ErrorCode::kNonFinite, "parameter " + p.name + " is not finite");
  nodes_.push_back(Node{p.value, true, {}, nullptr, &p});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, std::vector<int> parents, BackwardFn backward) {
  bool needs = false;
  for (int p : parents) needs = needs || nodes_[static_cast<size_t>(p)].requires_grad;
  Node node{std::move(value), needs, {}, nullptr, nullptr};
  if (needs) {
    node.parents = std::move(parents);
    node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::accumulate(int id, const Matrix& g) {
  auto& node = nodes_[static_cast<size_t>(id)];
  if (!node.requires_grad) return;
  auto& slot = grads_[static_cast<size_t>(id)];
  if (slot.size() == 0) {
    slot = g;
  } else {
    slot += g;
  }
}

Matrix Tape::grad(Var v) const {
  const auto id = static_cast<size_t>(v.id());
  if (id < grads_.size() && grads_[id].size() != 0) return grads_[id];
  const auto& val = nodes_[id].value;
  return Matrix::Zero(val.rows(), val.cols());
}

void Tape::backward(Var loss) {
  const auto& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    fail(ErrorCode::kNonScalarLoss, "loss has shape " + shape_str(lv));
  }
  grads_.assign(nodes_.size(), Matrix());
  if (!nodes_[static_cast<size_t>(loss.id())].requires_grad) return;
  grads_[static_cast<size_t>(loss.id())] = Matrix::Ones(1, 1);
  for (int id = loss.id(); id >= 0; --id) {
    auto& node = nodes_[static_cast<size_t>(id)];
    const Matrix& g = grads_[static_cast<size_t>(id)];
    if (g.size() == 0) continue;
    if (node.backward) node.backward(g, *this);
    if (node.param) node.param->grad += g;
  }
}

namespace ad {

Var matmul(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    fail(ErrorCode::kShapeMismatch, "matmul: " + shape_str(av) + " * " + shape_str(bv));
  }
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(av * bv, {ia, ib}, [ia, ib](const Matrix& g, Tape& t) {
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  require_same_shape("add", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value() + b.value(), {ia, ib}, [ia, ib](const Matrix& g, Tape& t) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value() - b.value(), {ia, ib}, [ia, ib](const Matrix& g, Tape& t) {
    t.accumulate(ia, g);
    t.accumulate(ib, -g);
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value().cwiseProduct(b.value()), {ia, ib},
                           [ia, ib](const Matrix& g, Tape& t) {
                             if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                             if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                           });
}

Var add_row(Var a, Var row) {
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    fail(ErrorCode::kShapeMismatch, "add_row: " + shape_str(av) + " + " + shape_str(rv));
  }
  Matrix out = av.rowwise() + rv.row(0);
  const int ia = a.id(), ir = row.id();
  return tape_of(a).record(std::move(out), {ia, ir}, [ia, ir](const Matrix& g, Tape& t) {
    t.accumulate(ia, g);
    if (t.requires_grad(ir)) t.accumulate(ir, g.colwise().sum());
  });
}

Var scale(Var a, double s) {
  const int ia = a.id();
  return tape_of(a).record(a.value() * s, {ia},
                           [ia, s](const Matrix& g, Tape& t) { t.accumulate(ia, g * s); });
}

Var add_scalar(Var a, double s) {
  const int ia = a.id();
  return tape_of(a).record(a.value().array() + s, {ia},
                           [ia](const Matrix& g, Tape& t) { t.accumulate(ia, g); });
}

Var neg(Var a) { return scale(a, -1.0); }

Var relu(Var a) {
  const int ia = a.id();
  return tape_of(a).record(a.value().cwiseMax(0.0), {ia}, [ia](const Matrix& g, Tape& t) {
    const Matrix& x = t.value(ia);
    t.accumulate(ia, (x.array() > 0.0).select(g, 0.0));
  });
}

Var prelu(Var a, Var slope) {
  if (slope.rows() != 1 || slope.cols() != 1) {
    fail(ErrorCode::kShapeMismatch, "prelu: slope must be 1x1");
  }
  const double s = slope.scalar();
  const Matrix& x = a.value();
  Matrix out = (x.array() > 0.0).select(x, s * x);
  const int ia = a.id(), is = slope.id();
  return tape_of(a).record(std::move(out), {ia, is}, [ia, is](const Matrix& g, Tape& t) {
    const Matrix& xv = t.value(ia);
    const double sv = t.value(is)(0, 0);
    if (t.requires_grad(ia)) t.accumulate(ia, (xv.array() > 0.0).select(g, sv * g));
    if (t.requires_grad(is)) {
      const double ds = (xv.array() > 0.0).select(Matrix::Zero(xv.rows(), xv.cols()), xv)
                            .cwiseProduct(g)
                            .sum();
      t.accumulate(is, Matrix::Constant(1, 1, ds));
    }
  });
}

Var sigmoid(Var a) {
  Matrix out = a.value().unaryExpr([](double x) { return sigmoid_scalar(x); });
  const int ia = a.id();
  const int self = static_cast<int>(tape_of(a).size());
  return tape_of(a).record(std::move(out), {ia}, [ia, self](const Matrix& g, Tape& t) {
    const Matrix& y = t.value(self);
    t.accumulate(ia, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var softplus(Var a) {
  Matrix out = a.value().unaryExpr([](double x) { return softplus_scalar(x); });
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {ia}, [ia](const Matrix& g, Tape& t) {
    const Matrix s = t.value(ia).unaryExpr([](double x) { return sigmoid_scalar(x); });
    t.accumulate(ia, g.cwiseProduct(s));
  });
}

Var tanh(Var a) {
  Matrix out = a.value().array().tanh().matrix();
  const int ia = a.id();
  const int self = static_cast<int>(tape_of(a).size());
  return tape_of(a).record(std::move(out), {ia}, [ia, self](const Matrix& g, Tape& t) {
    const Matrix& y = t.value(self);
    t.accumulate(ia, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var log(Var a) {
  const int ia = a.id();
  return tape_of(a).record(a.value().array().log().matrix(), {ia},
                           [ia](const Matrix& g, Tape& t) {
                             t.accumulate(ia, g.cwiseQuotient(t.value(ia)));
                           });
}

Var exp(Var a) {
  const int ia = a.id();
  const int self = static_cast<int>(tape_of(a).size());
  return tape_of(a).record(a.value().array().exp().matrix(), {ia},
                           [ia, self](const Matrix& g, Tape& t) {
                             t.accumulate(ia, g.cwiseProduct(t.value(self)));
                           });
}

Var pow(Var a, double exponent) {
  const int ia = a.id();
  return tape_of(a).record(a.value().array().pow(exponent).matrix(), {ia},
                           [ia, exponent](const Matrix& g, Tape& t) {
                             const Matrix& x = t.value(ia);
                             t.accumulate(ia, g.cwiseProduct(
                                                  (exponent * x.array().pow(exponent - 1.0))
                                                      .matrix()));
                           });
}

Var sum(Var a) {
  const int ia = a.id();
  const auto r = a.rows(), c = a.cols();
  return tape_of(a).record(Matrix::Constant(1, 1, a.value().sum()), {ia},
                           [ia, r, c](const Matrix& g, Tape& t) {
                             t.accumulate(ia, Matrix::Constant(r, c, g(0, 0)));
                           });
}

Var mean(Var a) {
  const auto n = static_cast<double>(a.value().size());
  if (n == 0) fail(ErrorCode::kShapeMismatch, "mean of empty tensor");
  return scale(sum(a), 1.0 / n);
}

Var sum_rows(Var a) {
  const int ia = a.id();
  const auto r = a.rows();
  return tape_of(a).record(a.value().colwise().sum(), {ia}, [ia, r](const Matrix& g, Tape& t) {
    t.accumulate(ia, g.replicate(r, 1));
  });
}

Var mean_rows(Var a) {
  if (a.rows() == 0) fail(ErrorCode::kShapeMismatch, "mean_rows of empty tensor");
  return scale(sum_rows(a), 1.0 / static_cast<double>(a.rows()));
}

Var sum_cols(Var a) {
  const int ia = a.id();
  const auto c = a.cols();
  return tape_of(a).record(a.value().rowwise().sum(), {ia}, [ia, c](const Matrix& g, Tape& t) {
    t.accumulate(ia, g.replicate(1, c));
  });
}

Var transpose(Var a) {
  const int ia = a.id();
  return tape_of(a).record(a.value().transpose(), {ia}, [ia](const Matrix& g, Tape& t) {
    t.accumulate(ia, g.transpose());
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorCode::kShapeMismatch, "concat_cols: no inputs");
  const auto r = parts[0].rows();
  Eigen::Index total = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  for (const auto& p : parts) {
    if (p.rows() != r) fail(ErrorCode::kShapeMismatch, "concat_cols: row count differs");
    total += p.cols();
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  Matrix out(r, total);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    off += p.cols();
  }
  auto parents = ids;
  return tape_of(parts[0]).record(std::move(out), std::move(parents),
                                  [ids, widths](const Matrix& g, Tape& t) {
                                    Eigen::Index o = 0;
                                    for (size_t k = 0; k < ids.size(); ++k) {
                                      if (t.requires_grad(ids[k])) {
                                        t.accumulate(ids[k], g.middleCols(o, widths[k]));
                                      }
                                      o += widths[k];
                                    }
                                  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorCode::kShapeMismatch, "concat_rows: no inputs");
  const auto c = parts[0].cols();
  Eigen::Index total = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> heights;
  for (const auto& p : parts) {
    if (p.cols() != c) fail(ErrorCode::kShapeMismatch, "concat_rows: column count differs");
    total += p.rows();
    ids.push_back(p.id());
    heights.push_back(p.rows());
  }
  Matrix out(total, c);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    off += p.rows();
  }
  auto parents = ids;
  return tape_of(parts[0]).record(std::move(out), std::move(parents),
                                  [ids, heights](const Matrix& g, Tape& t) {
                                    Eigen::Index o = 0;
                                    for (size_t k = 0; k < ids.size(); ++k) {
                                      if (t.requires_grad(ids[k])) {
                                        t.accumulate(ids[k], g.middleRows(o, heights[k]));
                                      }
                                      o += heights[k];
                                    }
                                  });
}

Var row_index(Var a, std::span<const int> rows) {
  const Matrix& av = a.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), av.cols());
  for (size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= av.rows()) {
      fail(ErrorCode::kShapeMismatch, "row_index: index " + std::to_string(rows[k]) +
                                          " out of range for " + shape_str(av));
    }
    out.row(static_cast<Eigen::Index>(k)) = av.row(rows[k]);
  }
  std::vector<int> idx(rows.begin(), rows.end());
  const int ia = a.id();
  const auto r = av.rows(), c = av.cols();
  return tape_of(a).record(std::move(out), {ia}, [ia, idx, r, c](const Matrix& g, Tape& t) {
    Matrix ga = Matrix::Zero(r, c);
    for (size_t k = 0; k < idx.size(); ++k) ga.row(idx[k]) += g.row(static_cast<Eigen::Index>(k));
    t.accumulate(ia, ga);
  });
}

Var scale_rows(Var a, Var v) {
  const Matrix& av = a.value();
  const Matrix& vv = v.value();
  if (vv.cols() != 1 || vv.rows() != av.rows()) {
    fail(ErrorCode::kShapeMismatch, "scale_rows: " + shape_str(av) + " by " + shape_str(vv));
  }
  Matrix out = av.array().colwise() * vv.col(0).array();
  const int ia = a.id(), iv = v.id();
  return tape_of(a).record(std::move(out), {ia, iv}, [ia, iv](const Matrix& g, Tape& t) {
    const Matrix& x = t.value(ia);
    const Matrix& s = t.value(iv);
    if (t.requires_grad(ia)) t.accumulate(ia, (g.array().colwise() * s.col(0).array()).matrix());
    if (t.requires_grad(iv)) t.accumulate(iv, g.cwiseProduct(x).rowwise().sum());
  });
}

Var scale_cols(Var a, Var v) {
  const Matrix& av = a.value();
  const Matrix& vv = v.value();
  if (vv.rows() != 1 || vv.cols() != av.cols()) {
    fail(ErrorCode::kShapeMismatch, "scale_cols: " + shape_str(av) + " by " + shape_str(vv));
  }
  Matrix out = av.array().rowwise() * vv.row(0).array();
  const int ia = a.id(), iv = v.id();
  return tape_of(a).record(std::move(out), {ia, iv}, [ia, iv](const Matrix& g, Tape& t) {
    const Matrix& x = t.value(ia);
    const Matrix& s = t.value(iv);
    if (t.requires_grad(ia)) t.accumulate(ia, (g.array().rowwise() * s.row(0).array()).matrix());
    if (t.requires_grad(iv)) t.accumulate(iv, g.cwiseProduct(x).colwise().sum());
  });
}

Var add_identity(Var a) {
  if (a.rows() != a.cols()) fail(ErrorCode::kShapeMismatch, "add_identity: not square");
  Matrix out = a.value();
  out.diagonal().array() += 1.0;
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {ia},
                           [ia](const Matrix& g, Tape& t) { t.accumulate(ia, g); });
}

Var diag(Var a) {
  if (a.rows() != a.cols()) fail(ErrorCode::kShapeMismatch, "diag: not square");
  const int ia = a.id();
  const auto n = a.rows();
  return tape_of(a).record(a.value().diagonal(), {ia}, [ia, n](const Matrix& g, Tape& t) {
    Matrix ga = Matrix::Zero(n, n);
    ga.diagonal() = g.col(0);
    t.accumulate(ia, ga);
  });
}

Var pick(Var a, std::span<const int> idx) {
  const Matrix& av = a.value();
  if (static_cast<Eigen::Index>(idx.size()) != av.rows()) {
    fail(ErrorCode::kShapeMismatch, "pick: index count != rows");
  }
  Matrix out(av.rows(), 1);
  for (Eigen::Index i = 0; i < av.rows(); ++i) {
    const int j = idx[static_cast<size_t>(i)];
    if (j < 0 || j >= av.cols()) fail(ErrorCode::kShapeMismatch, "pick: column out of range");
    out(i, 0) = av(i, j);
  }
  std::vector<int> cols(idx.begin(), idx.end());
  const int ia = a.id();
  const auto r = av.rows(), c = av.cols();
  return tape_of(a).record(std::move(out), {ia}, [ia, cols, r, c](const Matrix& g, Tape& t) {
    Matrix ga = Matrix::Zero(r, c);
    for (Eigen::Index i = 0; i < r; ++i) ga(i, cols[static_cast<size_t>(i)]) = g(i, 0);
    t.accumulate(ia, ga);
  });
}

Var log_softmax_rows(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    const double lse = m + std::log((x.row(i).array() - m).exp().sum());
    out.row(i) = x.row(i).array() - lse;
  }
  const int ia = a.id();
  const int self = static_cast<int>(tape_of(a).size());
  return tape_of(a).record(std::move(out), {ia}, [ia, self](const Matrix& g, Tape& t) {
    const Matrix p = t.value(self).array().exp().matrix();
    const Matrix gs = g.rowwise().sum();
    t.accumulate(ia, g - (p.array().colwise() * gs.col(0).array()).matrix());
  });
}

Var logsumexp_rows(Var a, bool exclude_diagonal) {
  const Matrix& x = a.value();
  if (exclude_diagonal && x.rows() != x.cols()) {
    fail(ErrorCode::kShapeMismatch, "logsumexp_rows: diagonal exclusion needs a square input");
  }
  if (exclude_diagonal && x.cols() < 2) {
    fail(ErrorCode::kShapeMismatch, "logsumexp_rows: nothing left after excluding diagonal");
  }
  Matrix out(x.rows(), 1);
  Matrix weights(x.rows(), x.cols());  // softmax over the included entries
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (exclude_diagonal && i == j) continue;
      m = std::max(m, x(i, j));
    }
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (exclude_diagonal && i == j) {
        weights(i, j) = 0.0;
        continue;
      }
      weights(i, j) = std::exp(x(i, j) - m);
      s += weights(i, j);
    }
    weights.row(i) /= s;
    out(i, 0) = m + std::log(s);
  }
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {ia},
                           [ia, weights = std::move(weights)](const Matrix& g, Tape& t) {
                             t.accumulate(ia, (weights.array().colwise() * g.col(0).array()).matrix());
                           });
}

Var scatter_symmetric(Var values, int n, std::span<const NodePair> pairs) {
  const Matrix& v = values.value();
  if (v.cols() != 1 || v.rows() != static_cast<Eigen::Index>(pairs.size())) {
    fail(ErrorCode::kShapeMismatch, "scatter_symmetric: values must be m x 1");
  }
  Matrix out = Matrix::Zero(n, n);
  for (size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    out(p.i, p.j) = v(static_cast<Eigen::Index>(k), 0);
    out(p.j, p.i) = v(static_cast<Eigen::Index>(k), 0);
  }
  std::vector<NodePair> ps(pairs.begin(), pairs.end());
  const int iv = values.id();
  return tape_of(values).record(std::move(out), {iv}, [iv, ps](const Matrix& g, Tape& t) {
    Matrix gv(static_cast<Eigen::Index>(ps.size()), 1);
    for (size_t k = 0; k < ps.size(); ++k) {
      gv(static_cast<Eigen::Index>(k), 0) = g(ps[k].i, ps[k].j) + g(ps[k].j, ps[k].i);
    }
    t.accumulate(iv, gv);
  });
}

Var weighted_message_pass(Var w, Var h) {
  const Matrix& wv = w.value();
  if (wv.rows() != wv.cols()) fail(ErrorCode::kShapeMismatch, "weighted adjacency not square");
  if (wv.cols() != h.rows()) {
    fail(ErrorCode::kShapeMismatch,
         "message pass: " + shape_str(wv) + " * " + shape_str(h.value()));
  }
  if (wv.size() > 0 && (wv - wv.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    fail(ErrorCode::kAsymmetricAdjacency, "weighted adjacency is not symmetric");
  }
  return matmul(w, h);
}

}  // namespace ad
}  // namespace grail
