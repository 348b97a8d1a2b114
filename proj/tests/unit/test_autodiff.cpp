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

#include <doctest.h>

#include <cmath>

#include "grail/autodiff.hpp"
#include "grail/error.hpp"
#include "support.hpp"

using namespace grail;
using namespace grail::testing;

namespace {

constexpr double kTol = 1e-4;

}  // namespace

TEST_CASE("basic forward values") {
  Tape t;
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  CHECK(ad::matmul(t.constant(a), t.constant(Matrix::Identity(2, 2))).value() == a);
  CHECK(ad::sigmoid(t.constant(Matrix::Zero(1, 1))).scalar() == doctest::Approx(0.5));
  CHECK(ad::softplus(t.constant(Matrix::Zero(1, 1))).scalar() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("shape mismatch is reported") {
  Tape t;
  try {
    ad::matmul(t.constant(Matrix::Zero(2, 3)), t.constant(Matrix::Zero(2, 3)));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("leaf rejects non-finite values") {
  Tape t;
  Matrix x = Matrix::Zero(1, 2);
  x(0, 1) = INFINITY;
  CHECK_THROWS_AS(t.leaf(x), Error);
}

TEST_CASE("sum of squares gradient") {
  Tape t;
  Matrix x(1, 3);
  x << 1, 2, 3;
  Var v = t.leaf(x);
  t.backward(ad::sum(ad::mul(v, v)));
  Matrix expect(1, 3);
  expect << 2, 4, 6;
  CHECK(t.grad(v) == expect);
}

TEST_CASE("gradient of sum(A x) w.r.t. A broadcasts x per row") {
  Tape t;
  Var a = t.leaf(random_matrix(3, 2, 1));
  Matrix x(2, 1);
  x << 0.5, -2.0;
  t.backward(ad::sum(ad::matmul(a, t.constant(x))));
  for (int r = 0; r < 3; ++r) CHECK(t.grad(a).row(r) == x.transpose());
}

TEST_CASE("non-scalar loss and unreachable leaves") {
  Tape t;
  Var a = t.leaf(Matrix::Ones(2, 2));
  Var b = t.leaf(Matrix::Ones(2, 2));
  try {
    t.backward(a);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonScalarLoss);
  }
  t.backward(ad::sum(a));
  CHECK(t.grad(b).isZero());
}

TEST_CASE("elementwise ops pass finite differences") {
  const Matrix x = random_matrix(3, 4, 11);
  const Matrix pos = (random_matrix(3, 4, 12).array().abs() + 0.5).matrix();
  const Matrix c = random_matrix(3, 4, 13);
  auto with_c = [&](Tape& t, Var v, Var (*op)(Var)) { return ad::sum(ad::mul(op(v), t.constant(c))); };
  CHECK(gradient_check([&](Tape& t, Var v) { return with_c(t, v, ad::sigmoid); }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) { return with_c(t, v, ad::softplus); }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) { return with_c(t, v, ad::tanh); }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) { return with_c(t, v, ad::exp); }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) { return with_c(t, v, ad::relu); }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) { return with_c(t, v, ad::log); }, pos) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) { return ad::sum(ad::mul(ad::pow(v, -0.5), t.constant(c))); },
                       pos) < kTol);
}

TEST_CASE("structural ops pass finite differences") {
  const Matrix x = random_matrix(4, 3, 21);
  const Matrix c4 = random_matrix(4, 4, 22);
  const Matrix row = random_matrix(1, 3, 23);
  CHECK(gradient_check([&](Tape& t, Var v) {
          return ad::sum(ad::mul(ad::matmul(v, ad::transpose(v)), t.constant(c4)));
        }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          return ad::sum(ad::mul(ad::add_row(v, t.constant(row)), v));
        }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          return ad::sum(ad::mul(ad::add_row(t.constant(x), v), t.constant(x)));
        }, row) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          Var r = ad::sum_rows(v);
          Var m = ad::mean_rows(v);
          return ad::sum(ad::mul(r, ad::add(m, t.constant(row))));
        }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          const Var parts[] = {v, ad::scale(v, 2.0)};
          Var cat = ad::concat_cols(parts);
          Var cat2 = ad::concat_rows(parts);
          return ad::add(ad::sum(ad::mul(cat, cat)), ad::mean(ad::exp(cat2)));
        }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          const int rows[] = {3, 0, 3, 1};
          return ad::sum(ad::mul(ad::row_index(v, rows), t.constant(x)));
        }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          Var s = ad::sum_cols(v);  // 4 x 1
          Var sq = ad::matmul(v, ad::transpose(v));
          Var scaled = ad::scale_cols(ad::scale_rows(sq, s), ad::transpose(s));
          return ad::sum(ad::mul(ad::add_identity(scaled), t.constant(c4)));
        }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          const int idx[] = {0, 2, 1, 2};
          return ad::add(ad::sum(ad::pick(ad::log_softmax_rows(v), idx)),
                         ad::sum(ad::diag(ad::matmul(v, ad::transpose(v)))));
        }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          return ad::sum(ad::mul(ad::logsumexp_rows(ad::matmul(v, ad::transpose(v)), true),
                                 t.constant(c4.col(0))));
        }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          Var slope = t.constant(Matrix::Constant(1, 1, 0.25));
          return ad::sum(ad::mul(ad::prelu(v, slope), t.constant(x)));
        }, x) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          return ad::sum(ad::mul(ad::prelu(t.constant(x), v), t.constant(x)));
        }, Matrix::Constant(1, 1, 0.3)) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          return ad::sum(ad::add_scalar(ad::mul(ad::sub(v, t.constant(x)), v), 3.0));
        }, x) < kTol);
}

TEST_CASE("random three-layer composition passes finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix w1 = random_matrix(3, 5, seed * 10 + 1);
    const Matrix w2 = random_matrix(5, 4, seed * 10 + 2);
    const Matrix w3 = random_matrix(4, 1, seed * 10 + 3);
    const Matrix x = random_matrix(6, 3, seed * 10 + 4);
    auto net = [&](Tape& t, Var a, Var b, Var c, Var in) {
      Var h = ad::tanh(ad::matmul(in, a));
      h = ad::softplus(ad::matmul(h, b));
      return ad::mean(ad::sigmoid(ad::matmul(h, c)));
    };
    CHECK(gradient_check([&](Tape& t, Var v) {
            return net(t, v, t.constant(w2), t.constant(w3), t.constant(x));
          }, w1) < kTol);
    CHECK(gradient_check([&](Tape& t, Var v) {
            return net(t, t.constant(w1), t.constant(w2), v, t.constant(x));
          }, w3) < kTol);
    CHECK(gradient_check([&](Tape& t, Var v) {
            return net(t, t.constant(w1), t.constant(w2), t.constant(w3), v);
          }, x) < kTol);
  }
}

TEST_CASE("weighted message pass") {
  Tape t;
  Graph g = random_graph(6, 0.5, 3, 4);
  const Matrix a = dense_adjacency(g);
  Var out = ad::weighted_message_pass(t.constant(a), t.constant(g.features()));
  const auto adj = g.adjacency_lists();
  for (int i = 0; i < 6; ++i) {
    Eigen::RowVectorXd expect = Eigen::RowVectorXd::Zero(3);
    for (int j : adj[static_cast<size_t>(i)]) expect += g.features().row(j);
    CHECK((out.value().row(i) - expect).norm() < 1e-12);
  }
  CHECK(ad::weighted_message_pass(t.constant(Matrix::Zero(6, 6)), t.constant(g.features()))
            .value()
            .isZero());
  Matrix asym = a;
  asym(0, 1) = 0.3;
  asym(1, 0) = 0.6;
  try {
    ad::weighted_message_pass(t.constant(asym), t.constant(g.features()));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAsymmetricAdjacency);
  }
}

TEST_CASE("weighted message pass gradient w.r.t. W") {
  const Matrix h = random_matrix(6, 3, 5);
  const Matrix c = random_matrix(6, 3, 6);
  const Matrix w = random_symmetric_weights(6, 7);
  auto build = [&](Tape& t, Var v) {
    return ad::sum(ad::mul(ad::tanh(ad::weighted_message_pass(v, t.constant(h))), t.constant(c)));
  };
  CHECK(symmetric_gradient_check(build, w) < kTol);
  CHECK(gradient_check([&](Tape& t, Var v) {
          return ad::sum(ad::mul(ad::weighted_message_pass(t.constant(w), v), t.constant(c)));
        }, h) < kTol);
}

TEST_CASE("scatter_symmetric places values symmetrically") {
  Graph g = random_graph(5, 0.6, 1, 3);
  const int m = g.num_edges();
  REQUIRE(m > 0);
  const Matrix vals = random_matrix(m, 1, 9);
  const Matrix c = random_matrix(5, 5, 10);
  Tape t;
  Var s = ad::scatter_symmetric(t.constant(vals), 5, g.edges());
  CHECK(s.value() == s.value().transpose());
  CHECK(gradient_check([&](Tape& tp, Var v) {
          return ad::sum(ad::mul(ad::scatter_symmetric(v, 5, g.edges()), tp.constant(c)));
        }, vals) < kTol);
}

TEST_CASE("backward is deterministic") {
  const Matrix x = random_matrix(5, 4, 31);
  auto run = [&] {
    Tape t;
    Var v = t.leaf(x);
    t.backward(ad::mean(ad::softplus(ad::matmul(v, ad::transpose(v)))));
    return t.grad(v);
  };
  CHECK(run() == run());
}

TEST_CASE("parameters accumulate gradients") {
  Parameter p("w", random_matrix(2, 2, 1));
  for (int rep = 0; rep < 2; ++rep) {
    Tape t;
    t.backward(ad::sum(t.param(p)));
  }
  CHECK(p.grad == Matrix::Constant(2, 2, 2.0));
  p.zero_grad();
  CHECK(p.grad.isZero());
}

TEST_CASE("symmetrized averages with the transpose") {
  Matrix g(2, 2);
  g << 1, 2, 4, 3;
  Matrix s = symmetrized(g);
  CHECK(s(0, 1) == 3.0);
  CHECK(s(1, 0) == 3.0);
}
