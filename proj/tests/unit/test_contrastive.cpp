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

#include "grail/contrastive.hpp"
#include "grail/data_io.hpp"
#include "grail/error.hpp"
#include "support.hpp"

using namespace grail;
using namespace grail::testing;

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Direct summation without max-subtraction.
double naive_info_nce(const Matrix& z1, const Matrix& z2, double tau) {
  const int b = static_cast<int>(z1.rows());
  double total = 0.0;
  for (int k = 0; k < b; ++k) {
    double denom = 0.0;
    for (int l = 0; l < b; ++l) {
      if (l != k) denom += std::exp(z1.row(k).dot(z2.row(l)) / tau);
    }
    total += -std::log(std::exp(z1.row(k).dot(z2.row(k)) / tau) / denom);
  }
  return total / b;
}

Matrix random_rotation(int q, std::uint64_t seed) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(q, q, seed));
  return qr.householderQ();
}

GraphDataset small_sbm(std::uint64_t seed, int per_block = 30) {
  SbmSpec s;
  s.nodes_per_block = per_block;
  s.p_in = 0.2;
  s.p_out = 0.02;
  s.feature_dim = 6;
  s.seed = seed;
  return generate_sbm_node_dataset(s);
}

GraphDataset small_graph_set(std::uint64_t seed, int count = 12) {
  SbmSpec a;
  a.nodes_per_block = 4;
  a.p_in = 0.8;
  a.p_out = 0.1;
  a.feature_dim = 5;
  SbmSpec b = a;
  b.p_in = 0.3;
  return generate_graph_classification_dataset(count, a, b, seed);
}

EncoderConfig small_encoder(EncoderKind kind) {
  EncoderConfig c;
  c.kind = kind;
  c.num_layers = 2;
  c.hidden_dim = 8;
  return c;
}

}  // namespace

TEST_CASE("InfoNCE with uniform scores is log 2 for a batch of 3") {
  // Equal rows give equal pairwise scores.
  Matrix z = Matrix::Constant(3, 4, 0.3);
  CHECK(info_nce_loss(z, z, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("InfoNCE with one negative reduces to -(a - b)") {
  Matrix z1(2, 2), z2(2, 2);
  z1 << 1, 0, 0, 1;
  z2 << 2, 0.5, -1, 3;
  const double tau = 0.7;
  const double a1 = z1.row(0).dot(z2.row(0)) / tau, b1 = z1.row(0).dot(z2.row(1)) / tau;
  const double a2 = z1.row(1).dot(z2.row(1)) / tau, b2 = z1.row(1).dot(z2.row(0)) / tau;
  CHECK(info_nce_loss(z1, z2, tau) == doctest::Approx((-(a1 - b1) - (a2 - b2)) / 2).epsilon(1e-14));
}

TEST_CASE("InfoNCE matches naive summation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix z1 = random_matrix(4, 5, seed), z2 = random_matrix(4, 5, seed + 100);
    CHECK(std::abs(info_nce_loss(z1, z2, 0.5) - naive_info_nce(z1, z2, 0.5)) <= 1e-10);
  }
}

TEST_CASE("InfoNCE is invariant to a common rotation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix z1 = random_matrix(6, 4, seed), z2 = random_matrix(6, 4, seed + 7);
    const Matrix r = random_rotation(4, seed + 99);
    CHECK(std::abs(info_nce_loss(z1 * r, z2 * r, 0.5) - info_nce_loss(z1, z2, 0.5)) <= 1e-8);
  }
}

TEST_CASE("InfoNCE is invariant to batch order") {
  const Matrix z1 = random_matrix(5, 3, 1), z2 = random_matrix(5, 3, 2);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(5);
  p.indices() << 3, 0, 4, 1, 2;
  CHECK(info_nce_loss(p * z1, p * z2, 0.5) == doctest::Approx(info_nce_loss(z1, z2, 0.5)).epsilon(1e-12));
}

TEST_CASE("InfoNCE needs negatives") {
  try {
    info_nce_loss(Matrix::Ones(1, 3), Matrix::Ones(1, 3), 0.5);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNeedNegatives);
  }
}

TEST_CASE("InfoNCE gradient matches finite differences") {
  const Matrix z2 = random_matrix(4, 3, 5);
  auto build = [&](Tape& t, Var z1) { return info_nce_loss(z1, t.constant(z2), 0.5); };
  CHECK(gradient_check(build, random_matrix(4, 3, 6)) <= 1e-4);
}

TEST_CASE("JS estimate at zero scores is -2 ln 2") {
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(js_mi_estimate(zero, zero) == doctest::Approx(-2 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("JS estimate saturates towards 0 from below") {
  const std::vector<double> pos{40.0, 50.0}, neg{-40.0, -60.0};
  const double v = js_mi_estimate(pos, neg);
  CHECK(v < 0.0);
  CHECK(v > -1e-15);
}

TEST_CASE("JS estimate matches elementwise softplus") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> pos(7), neg(11);
    for (auto& v : pos) v = 4 * standard_normal(rng);
    for (auto& v : neg) v = 4 * standard_normal(rng);
    double a = 0.0, b = 0.0;
    for (double v : pos) a += -softplus(-v);
    for (double v : neg) b += softplus(v);
    const double expect = a / pos.size() - b / neg.size();
    CHECK(std::abs(js_mi_estimate(pos, neg) - expect) <= 1e-12);
  }
}

TEST_CASE("DGI loss with zero scores is ln 2") {
  Tape t;
  Var h = t.constant(random_matrix(5, 3, 1));
  Var s = t.constant(random_matrix(1, 3, 2));
  Var b = t.constant(Matrix::Zero(3, 3));
  CHECK(dgi_loss(h, h, s, b).scalar() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("DGI loss vanishes under perfect separation") {
  Tape t;
  Var h = t.constant(Matrix::Constant(4, 2, 1.0));
  Var hn = t.constant(Matrix::Constant(4, 2, -1.0));
  Var s = t.constant(Matrix::Constant(1, 2, 1.0));
  Var b = t.constant(Matrix::Identity(2, 2) * 50.0);
  CHECK(dgi_loss(h, hn, s, b).scalar() < 1e-40);
}

TEST_CASE("DGI loss matches hand-rolled BCE") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix h = random_matrix(6, 4, seed), hn = random_matrix(6, 4, seed + 1);
    const Matrix s = random_matrix(1, 4, seed + 2), b = random_matrix(4, 4, seed + 3);
    Tape t;
    const double got =
        dgi_loss(t.constant(h), t.constant(hn), t.constant(s), t.constant(b)).scalar();
    double total = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double p = 1 / (1 + std::exp(-(h.row(i) * b * s.transpose())(0, 0)));
      const double q = 1 / (1 + std::exp(-(hn.row(i) * b * s.transpose())(0, 0)));
      total += -std::log(p) - std::log(1 - q);
    }
    CHECK(std::abs(got - total / 12) <= 1e-10);
  }
}

TEST_CASE("DGI loss gradients w.r.t. embeddings and bilinear") {
  const Matrix hn = random_matrix(5, 3, 1), s = random_matrix(1, 3, 2), b = random_matrix(3, 3, 3);
  CHECK(gradient_check(
            [&](Tape& t, Var h) { return dgi_loss(h, t.constant(hn), t.constant(s), t.constant(b)); },
            random_matrix(5, 3, 4)) <= 1e-4);
  const Matrix h = random_matrix(5, 3, 5);
  CHECK(gradient_check(
            [&](Tape& t, Var bv) { return dgi_loss(t.constant(h), t.constant(hn), t.constant(s), bv); },
            b) <= 1e-4);
}

namespace {

// Explicit double loop over (node, graph) pairs.
double infograph_oracle(const Matrix& patches, const std::vector<int>& node_graph,
                        const Matrix& summaries, const std::vector<Matrix>& d) {
  auto score = [&](int i, int j) {
    Matrix in(1, patches.cols() * 2);
    in << patches.row(i), summaries.row(j);
    Matrix hidden = (in * d[0] + d[1]).cwiseMax(0.0);
    return (hidden * d[2] + d[3])(0, 0);
  };
  double pos = 0.0, neg = 0.0;
  int np = 0, nn = 0;
  for (int i = 0; i < patches.rows(); ++i) {
    for (int j = 0; j < summaries.rows(); ++j) {
      if (node_graph[static_cast<size_t>(i)] == j) {
        pos += -softplus(-score(i, j));
        ++np;
      } else {
        neg += softplus(score(i, j));
        ++nn;
      }
    }
  }
  return -(pos / np - neg / nn);
}

}  // namespace

TEST_CASE("InfoGraph loss matches a double-loop oracle") {
  const int q = 3;
  const std::vector<int> node_graph{0, 0, 1, 1, 1, 2};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix patches = random_matrix(6, q, seed), summaries = random_matrix(3, q, seed + 1);
    std::vector<Matrix> d{random_matrix(2 * q, q, seed + 2), random_matrix(1, q, seed + 3),
                          random_matrix(q, 1, seed + 4), random_matrix(1, 1, seed + 5)};
    Tape t;
    std::vector<Var> dv;
    for (const auto& m : d) dv.push_back(t.constant(m));
    const double got =
        infograph_loss(t.constant(patches), node_graph, t.constant(summaries), dv).scalar();
    CHECK(std::abs(got - infograph_oracle(patches, node_graph, summaries, d)) <= 1e-10);
  }
}

TEST_CASE("InfoGraph loss at a zero discriminator is 2 ln 2") {
  const int q = 2;
  Tape t;
  std::vector<Var> d{t.constant(Matrix::Zero(2 * q, q)), t.constant(Matrix::Zero(1, q)),
                     t.constant(Matrix::Zero(q, 1)), t.constant(Matrix::Zero(1, 1))};
  const Matrix h = random_matrix(1, q, 1);
  Matrix patches(2, q);
  patches << h, h;
  const std::vector<int> node_graph{0, 1};
  Var loss = infograph_loss(t.constant(patches), node_graph, t.constant(patches), d);
  CHECK(loss.scalar() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("InfoGraph handles single-node graphs and needs two graphs") {
  const int q = 2;
  Tape t;
  std::vector<Var> d{t.constant(random_matrix(2 * q, q, 1)), t.constant(random_matrix(1, q, 2)),
                     t.constant(random_matrix(q, 1, 3)), t.constant(random_matrix(1, 1, 4))};
  const Matrix p = random_matrix(2, q, 5);
  const std::vector<int> node_graph{0, 1};
  CHECK(std::isfinite(infograph_loss(t.constant(p), node_graph, t.constant(p), d).scalar()));
  const std::vector<int> one{0, 0};
  CHECK_THROWS_AS(infograph_loss(t.constant(p), one, t.constant(p.topRows(1)), d), Error);
}

TEST_CASE("InfoGraph gradient w.r.t. patches and discriminator") {
  const int q = 3;
  const std::vector<int> node_graph{0, 1, 1, 2};
  const Matrix summaries = random_matrix(3, q, 1);
  std::vector<Matrix> d{random_matrix(2 * q, q, 2), random_matrix(1, q, 3),
                        random_matrix(q, 1, 4), random_matrix(1, 1, 5)};
  auto consts = [&](Tape& t) {
    std::vector<Var> v;
    for (const auto& m : d) v.push_back(t.constant(m));
    return v;
  };
  CHECK(gradient_check(
            [&](Tape& t, Var p) {
              return infograph_loss(p, node_graph, t.constant(summaries), consts(t));
            },
            random_matrix(4, q, 6)) <= 1e-4);
  const Matrix patches = random_matrix(4, q, 7);
  CHECK(gradient_check(
            [&](Tape& t, Var w0) {
              auto v = consts(t);
              v[0] = w0;
              return infograph_loss(t.constant(patches), node_graph, t.constant(summaries), v);
            },
            d[0]) <= 1e-4);
}

TEST_CASE("AD-GCL with saturated keep logits equals InfoNCE of duplicated embeddings") {
  const GraphDataset ds = small_graph_set(3, 4);
  EncoderModel enc(small_encoder(EncoderKind::kGin), ds.feature_dim(), 1);
  ObjectiveConfig obj = ObjectiveConfig::defaults(ObjectiveKind::kAdGcl);
  obj.adgcl_lambda = 0.0;
  ContrastiveHeads heads(obj, ds.feature_dim(), 8, 2);
  Tape t;
  auto ep = bind_frozen(t, enc.parameters());
  auto pp = bind_frozen(t, heads.projector);
  std::vector<const Graph*> batch;
  std::vector<Var> logits;
  std::vector<Matrix> noise;
  for (const auto& g : ds.graphs()) {
    batch.push_back(&g);
    logits.push_back(t.constant(Matrix::Constant(g.num_edges(), 1, 1e3)));
    noise.push_back(edge_noise(g.num_edges(), 5));
  }
  AdgclTerms terms = adgcl_terms(enc, ep, pp, batch, logits, noise, obj.temperature, 1.0);
  std::vector<Graph> graphs(ds.graphs().begin(), ds.graphs().end());
  Tape t2;
  auto pp2 = bind_frozen(t2, heads.projector);
  Var z = project(pp2, t2.constant(encode_graph_level(enc, graphs)));
  CHECK(terms.nce.scalar() == doctest::Approx(info_nce_loss(z, z, obj.temperature).scalar()).epsilon(1e-12));
  CHECK(adgcl_augmenter_loss(terms, 0.0).scalar() == doctest::Approx(-terms.nce.scalar()));
}

TEST_CASE("AD-GCL augmenter loss gradient w.r.t. one logit") {
  const GraphDataset ds = small_graph_set(4, 3);
  EncoderModel enc(small_encoder(EncoderKind::kGin), ds.feature_dim(), 1);
  ObjectiveConfig obj = ObjectiveConfig::defaults(ObjectiveKind::kAdGcl);
  ContrastiveHeads heads(obj, ds.feature_dim(), 8, 2);
  std::vector<const Graph*> batch;
  std::vector<Matrix> noise, base;
  for (const auto& g : ds.graphs()) {
    batch.push_back(&g);
    noise.push_back(edge_noise(g.num_edges(), 9));
    base.push_back(random_matrix(g.num_edges(), 1, 11));
  }
  REQUIRE(batch[0]->num_edges() > 0);
  auto build = [&](Tape& t, Var first) {
    auto ep = bind_frozen(t, enc.parameters());
    auto pp = bind_frozen(t, heads.projector);
    std::vector<Var> logits{first};
    for (size_t k = 1; k < batch.size(); ++k) logits.push_back(t.constant(base[k]));
    return adgcl_augmenter_loss(adgcl_terms(enc, ep, pp, batch, logits, noise, 0.5, 1.0), 5.0);
  };
  CHECK(gradient_check(build, base[0]) <= 1e-4);
}

TEST_CASE("AD-GCL step with zero learning rates leaves parameters unchanged") {
  const GraphDataset ds = small_graph_set(5, 4);
  EncoderModel enc(small_encoder(EncoderKind::kGin), ds.feature_dim(), 1);
  ObjectiveConfig obj = ObjectiveConfig::defaults(ObjectiveKind::kAdGcl);
  ContrastiveHeads heads(obj, ds.feature_dim(), 8, 2);
  const auto before_enc = parameter_checksum(enc.parameters());
  const auto before_aug = parameter_checksum(heads.augmenter->parameters());
  Adam eo(collect_parameters(enc.parameters(), heads.projector), 0.0);
  Adam ao(collect_parameters(heads.augmenter->parameters()), 0.0);
  std::vector<const Graph*> batch;
  for (const auto& g : ds.graphs()) batch.push_back(&g);
  const AdgclStepLosses l = adgcl_step(batch, enc, heads, obj, eo, ao, 3);
  CHECK(std::isfinite(l.encoder_loss));
  CHECK(std::isfinite(l.augmenter_loss));
  CHECK(parameter_checksum(enc.parameters()) == before_enc);
  CHECK(parameter_checksum(heads.augmenter->parameters()) == before_aug);
}

TEST_CASE("zero epochs returns the initialized encoder") {
  const GraphDataset ds = small_sbm(1);
  TrainConfig tc;
  tc.epochs = 0;
  tc.seed = 4;
  const TrainedEncoder a = train_encoder(ds, small_encoder(EncoderKind::kGcn),
                                         ObjectiveConfig::defaults(ObjectiveKind::kDgi), tc);
  const EncoderModel fresh(small_encoder(EncoderKind::kGcn), ds.feature_dim(),
                           derive_seed(4, "encoder"));
  CHECK(parameter_checksum(a.encoder.parameters()) == parameter_checksum(fresh.parameters()));
  CHECK(a.history.empty());
}

TEST_CASE("training is deterministic per seed") {
  const GraphDataset ds = small_sbm(2);
  TrainConfig tc;
  tc.epochs = 5;
  tc.seed = 8;
  tc.batch_size = 16;
  for (auto kind : {ObjectiveKind::kDgi, ObjectiveKind::kGraphCl, ObjectiveKind::kGca}) {
    const auto obj = ObjectiveConfig::defaults(kind);
    const TrainedEncoder a = train_encoder(ds, small_encoder(EncoderKind::kGcn), obj, tc);
    const TrainedEncoder b = train_encoder(ds, small_encoder(EncoderKind::kGcn), obj, tc);
    CHECK(parameter_checksum(a.encoder.parameters()) == parameter_checksum(b.encoder.parameters()));
    REQUIRE(a.history.size() == b.history.size());
    for (size_t k = 0; k < a.history.size(); ++k) CHECK(a.history[k].loss == b.history[k].loss);
  }
}

TEST_CASE("DGI loss decreases on a two-block SBM") {
  SbmSpec s;
  s.seed = 11;
  const GraphDataset ds = generate_sbm_node_dataset(s);
  EncoderConfig ec = small_encoder(EncoderKind::kGcn);
  ec.num_layers = 1;
  ec.hidden_dim = 32;
  TrainConfig tc;
  tc.epochs = 200;
  tc.seed = 1;
  const TrainedEncoder r = train_encoder(ds, ec, ObjectiveConfig::defaults(ObjectiveKind::kDgi), tc);
  REQUIRE(r.history.size() == 200);
  CHECK(r.history.back().loss < r.history.front().loss);
}

TEST_CASE("graph objectives train on graph datasets") {
  const GraphDataset ds = small_graph_set(6, 16);
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 8;
  for (auto kind : {ObjectiveKind::kInfoGraph, ObjectiveKind::kGraphCl, ObjectiveKind::kAdGcl}) {
    const TrainedEncoder r =
        train_encoder(ds, small_encoder(EncoderKind::kGin), ObjectiveConfig::defaults(kind), tc);
    CHECK(r.history.size() == 3);
    for (const auto& h : r.history) CHECK(std::isfinite(h.loss));
  }
}

TEST_CASE("objectives reject the wrong task") {
  const GraphDataset nodes = small_sbm(3);
  const GraphDataset graphs = small_graph_set(3);
  TrainConfig tc;
  tc.epochs = 1;
  auto code = [&](const GraphDataset& ds, ObjectiveKind kind) {
    try {
      train_encoder(ds, small_encoder(EncoderKind::kGin), ObjectiveConfig::defaults(kind), tc);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIoError;
  };
  CHECK(code(nodes, ObjectiveKind::kInfoGraph) == ErrorCode::kConfigError);
  CHECK(code(nodes, ObjectiveKind::kAdGcl) == ErrorCode::kConfigError);
  CHECK(code(graphs, ObjectiveKind::kDgi) == ErrorCode::kConfigError);
  CHECK(code(graphs, ObjectiveKind::kGca) == ErrorCode::kConfigError);
}

TEST_CASE("early stopping honours patience") {
  const GraphDataset ds = small_sbm(4);
  TrainConfig tc;
  tc.epochs = 500;
  tc.lr = 0.0;  // constant loss never improves after the first epoch
  tc.patience = 3;
  const TrainedEncoder r = train_encoder(ds, small_encoder(EncoderKind::kGcn),
                                         ObjectiveConfig::defaults(ObjectiveKind::kGca), tc);
  CHECK(r.early_stopped);
  CHECK(r.history.size() < 500);
}

TEST_CASE("objective config validation") {
  ObjectiveConfig c = ObjectiveConfig::defaults(ObjectiveKind::kGraphCl);
  c.temperature = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ObjectiveConfig::defaults(ObjectiveKind::kAdGcl);
  c.adgcl_lambda = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(parse_objective("graphcl") == ObjectiveKind::kGraphCl);
  CHECK_THROWS_AS(parse_objective("simclr"), Error);
}
