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
#include <set>

#include "grail/augment.hpp"
#include "grail/error.hpp"
#include "support.hpp"

using namespace grail;
using namespace grail::testing;

namespace {

Graph star(int leaves) {
  std::vector<NodePair> edges;
  for (int v = 1; v <= leaves; ++v) edges.push_back({0, v});
  return Graph(leaves + 1, edges, Matrix::Ones(leaves + 1, 2));
}

Graph cycle(int n) {
  std::vector<NodePair> edges;
  for (int v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1});
  edges.push_back({0, n - 1});
  return Graph(n, edges, Matrix::Ones(n, 2));
}

// Graph with exactly m edges drawn uniformly from all pairs.
Graph graph_with_edges(int n, int m, std::uint64_t seed) {
  std::vector<std::int64_t> idx(static_cast<size_t>(num_candidate_pairs(n)));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  shuffle(idx.begin(), idx.end(), rng);
  std::vector<NodePair> edges;
  for (int k = 0; k < m; ++k) edges.push_back(pair_from_index(n, idx[static_cast<size_t>(k)]));
  std::sort(edges.begin(), edges.end());
  return Graph(n, edges, random_matrix(n, 3, seed + 1));
}

const AugmentKind kPlainKinds[] = {AugmentKind::kNodeDrop, AugmentKind::kEdgePerturb,
                                   AugmentKind::kAttrMask, AugmentKind::kSubgraph,
                                   AugmentKind::kAdaptiveEdgeDrop, AugmentKind::kAdaptiveAttrMask};

}  // namespace

TEST_CASE("zero strength leaves the graph unchanged") {
  Graph g = random_graph(12, 0.3, 4, 1);
  for (auto kind : kPlainKinds) {
    AugmentSpec spec{kind, 0.0};
    spec.seed = 5;
    AugmentedGraph out = augment_with_map(g, spec);
    CHECK(out.graph.num_nodes() == g.num_nodes());
    CHECK(out.graph.edges() == g.edges());
    CHECK(out.graph.features() == g.features());
    for (int v = 0; v < g.num_nodes(); ++v) CHECK(out.kept[static_cast<size_t>(v)] == v);
  }
}

TEST_CASE("feature shuffle permutes rows and keeps edges") {
  Graph g = random_graph(10, 0.3, 3, 2);
  AugmentSpec spec{AugmentKind::kFeatureShuffle, 1.0};
  spec.seed = 4;
  Graph s = augment(g, spec);
  CHECK(s.edges() == g.edges());
  std::multiset<double> before, after;
  for (int v = 0; v < 10; ++v) {
    before.insert(g.features()(v, 0));
    after.insert(s.features()(v, 0));
  }
  CHECK(before == after);
  Graph single(1, {}, Matrix::Constant(1, 2, 3.0));
  CHECK(augment(single, spec).features() == single.features());
}

TEST_CASE("augmentations are deterministic and valid") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = random_graph(15, 0.3, 4, seed);
    for (auto kind : kPlainKinds) {
      AugmentSpec spec{kind, 0.3};
      spec.seed = seed * 7 + 1;
      spec.centrality = static_cast<Centrality>(seed % 3);
      AugmentedGraph a = augment_with_map(g, spec);
      AugmentedGraph b = augment_with_map(g, spec);
      CHECK(a.graph.edges() == b.graph.edges());
      CHECK(a.graph.features() == b.graph.features());
      CHECK(a.kept == b.kept);
      // Re-running the validating constructor must succeed.
      CHECK_NOTHROW(Graph(a.graph.num_nodes(), a.graph.edges(), a.graph.features()));
      CHECK(static_cast<int>(a.kept.size()) == a.graph.num_nodes());
      for (size_t k = 0; k < a.kept.size(); ++k) {
        CHECK(a.graph.features().row(static_cast<Eigen::Index>(k)) ==
              (kind == AugmentKind::kAttrMask || kind == AugmentKind::kAdaptiveAttrMask
                   ? a.graph.features().row(static_cast<Eigen::Index>(k))
                   : g.features().row(a.kept[k])));
      }
    }
  }
}

TEST_CASE("node drop and subgraph sizes") {
  Graph g = random_graph(20, 0.2, 2, 3);
  AugmentSpec drop{AugmentKind::kNodeDrop, 0.25};
  CHECK(augment(g, drop).num_nodes() == 15);
  AugmentSpec sub{AugmentKind::kSubgraph, 0.25};
  CHECK(augment(g, sub).num_nodes() == 15);
  AugmentSpec all{AugmentKind::kNodeDrop, 1.0};
  try {
    augment(g, all);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateAugmentation);
  }
  AugmentSpec all_sub{AugmentKind::kSubgraph, 1.0};
  CHECK_THROWS_AS(augment(g, all_sub), Error);
}

TEST_CASE("edge perturbation removal count follows the binomial") {
  Graph g = graph_with_edges(60, 1000, 9);
  double total = 0.0;
  double total_added = 0.0;
  const int runs = 200;
  for (int s = 0; s < runs; ++s) {
    AugmentSpec spec{AugmentKind::kEdgePerturb, 0.2};
    spec.seed = static_cast<std::uint64_t>(s);
    Graph p = augment(g, spec);
    int removed = 0;
    for (const auto& e : g.edges()) removed += p.has_edge(e.i, e.j) ? 0 : 1;
    total += removed;
    total_added += p.num_edges() - (g.num_edges() - removed);
  }
  const double sigma = std::sqrt(1000 * 0.2 * 0.8);
  CHECK(std::abs(total / runs - 200.0) <= 3.0 * sigma / std::sqrt(runs));
  CHECK(std::abs(total_added / runs - 200.0) <= 3.0 * sigma / std::sqrt(runs));
}

TEST_CASE("attribute masking zeroes whole columns") {
  Graph g = random_graph(10, 0.3, 40, 4);
  AugmentSpec spec{AugmentKind::kAttrMask, 0.5};
  spec.seed = 3;
  Graph m = augment(g, spec);
  int zeroed = 0;
  for (int c = 0; c < 40; ++c) {
    const bool z = m.features().col(c).isZero();
    zeroed += z ? 1 : 0;
    if (!z) CHECK(m.features().col(c) == g.features().col(c));
  }
  CHECK(zeroed > 0);
  CHECK(zeroed < 40);
}

TEST_CASE("centrality closed forms") {
  auto deg = centrality_scores(star(4), Centrality::kDegree);
  CHECK(deg[0] == 4.0);
  for (int v = 1; v <= 4; ++v) CHECK(deg[static_cast<size_t>(v)] == 1.0);
  auto pr = centrality_scores(cycle(7), Centrality::kPagerank);
  for (double p : pr) CHECK(p == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
}

TEST_CASE("eigenvector centrality satisfies the eigen equation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Connected graph: a random graph plus a spanning path.
    Graph base = random_graph(12, 0.3, 1, seed);
    std::set<NodePair> edges(base.edges().begin(), base.edges().end());
    for (int v = 0; v + 1 < 12; ++v) edges.insert({v, v + 1});
    Graph g(12, std::vector<NodePair>(edges.begin(), edges.end()), base.features());
    auto c = centrality_scores(g, Centrality::kEigenvector);
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(c.data(), 12);
    const Matrix a = dense_adjacency(g);
    const Eigen::VectorXd av = a * v;
    const double lambda = v.dot(av);
    CHECK((av - lambda * v).norm() <= 1e-6);
    CHECK(v.norm() == doctest::Approx(1.0));
    CHECK((v.array() >= 0.0).all());
  }
}

TEST_CASE("adaptive edge drop probabilities") {
  auto uniform = adaptive_edge_drop_probs(cycle(8), Centrality::kDegree, 0.3, 0.7);
  for (double p : uniform) CHECK(p == doctest::Approx(0.3));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = random_graph(15, 0.3, 2, seed);
    for (auto kind : {Centrality::kDegree, Centrality::kPagerank}) {
      auto probs = adaptive_edge_drop_probs(g, kind, 0.3, 0.7);
      auto cent = centrality_scores(g, kind);
      std::vector<double> s;
      for (const auto& e : g.edges()) {
        s.push_back((std::log(std::max(cent[static_cast<size_t>(e.i)], 1e-12)) +
                     std::log(std::max(cent[static_cast<size_t>(e.j)], 1e-12))) /
                    2.0);
      }
      const double smax = *std::max_element(s.begin(), s.end());
      for (size_t a = 0; a < s.size(); ++a) {
        CHECK(probs[a] >= 0.0);
        CHECK(probs[a] <= 0.7);
        if (s[a] == smax) CHECK(probs[a] == 0.0);
        for (size_t b = 0; b < s.size(); ++b) {
          if (s[a] <= s[b]) CHECK(probs[a] >= probs[b] - 1e-15);
        }
      }
    }
  }
}

TEST_CASE("adaptive feature masking probabilities stay in range") {
  Graph g = random_graph(15, 0.3, 6, 1);
  auto probs = adaptive_feature_mask_probs(g, Centrality::kDegree, 0.3, 0.7);
  CHECK(probs.size() == 6);
  for (double p : probs) {
    CHECK(p >= 0.0);
    CHECK(p <= 0.7);
  }
}

TEST_CASE("relaxed edge weights limits and Monte-Carlo mean") {
  Tape t;
  const Matrix noise = edge_noise(5, 1);
  Var hi = relaxed_edge_weights(t.constant(Matrix::Constant(5, 1, 200.0)), noise, 1.0);
  CHECK((hi.value().array() > 1.0 - 1e-12).all());
  Var flat = relaxed_edge_weights(t.constant(random_matrix(5, 1, 2)), noise, 1e6);
  CHECK((flat.value().array() - 0.5).abs().maxCoeff() < 1e-3);
  const Matrix many = edge_noise(10000, 3);
  Var p = relaxed_edge_weights(t.constant(Matrix::Zero(10000, 1)), many, 1.0);
  CHECK(std::abs(p.value().mean() - 0.5) <= 0.02);
}

TEST_CASE("learned augmenter samples") {
  Graph g = random_graph(8, 0.4, 3, 6);
  LearnedAugmenter aug(3, 4, 1.0, 2);
  auto a = learned_edge_drop_sample(g, aug, 5);
  auto b = learned_edge_drop_sample(g, aug, 5);
  CHECK(a == b);
  CHECK(static_cast<int>(a.size()) == g.num_edges());
  for (double v : a) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  AugmentSpec spec{AugmentKind::kLearnedEdgeDrop, 0.2};
  CHECK_THROWS_AS(augment(g, spec), Error);
  CHECK_THROWS_AS(LearnedAugmenter(3, 4, 0.0, 1), Error);
}

TEST_CASE("learned augmenter logits are differentiable") {
  Graph g = random_graph(6, 0.5, 3, 7);
  LearnedAugmenter aug(3, 4, 0.7, 3);
  const Matrix noise = edge_noise(g.num_edges(), 4);
  const Matrix c = random_matrix(g.num_edges(), 1, 5);
  for (size_t k = 0; k < aug.parameters().size(); ++k) {
    auto build = [&](Tape& t, Var v) {
      auto params = bind_frozen(t, aug.parameters());
      params[k] = v;
      Var p = relaxed_edge_weights(aug.edge_logits(params, g, t), noise, aug.temperature());
      return ad::sum(ad::mul(p, t.constant(c)));
    };
    CHECK(gradient_check(build, aug.parameters()[k].value) < 1e-4);
  }
}
