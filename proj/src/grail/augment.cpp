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

#include "grail/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "grail/error.hpp"
#include "grail/seeds.hpp"

namespace grail {

namespace {

constexpr double kCentralityFloor = 1e-12;

struct NamedKind {
  AugmentKind kind;
  std::string_view name;
};

constexpr NamedKind kKindNames[] = {
    {AugmentKind::kNodeDrop, "node_drop"},
    {AugmentKind::kEdgePerturb, "edge_perturb"},
    {AugmentKind::kAttrMask, "attr_mask"},
    {AugmentKind::kSubgraph, "subgraph"},
    {AugmentKind::kFeatureShuffle, "feature_shuffle"},
    {AugmentKind::kAdaptiveEdgeDrop, "adaptive_edge_drop"},
    {AugmentKind::kAdaptiveAttrMask, "adaptive_attr_mask"},
    {AugmentKind::kLearnedEdgeDrop, "learned_edge_drop"},
};

// Induced subgraph on `keep` (sorted), carrying labels and masks along.
AugmentedGraph induced_subgraph(const Graph& g, std::vector<int> keep) {
  std::sort(keep.begin(), keep.end());
  std::vector<int> remap(static_cast<size_t>(g.num_nodes()), -1);
  for (size_t k = 0; k < keep.size(); ++k) remap[static_cast<size_t>(keep[k])] = static_cast<int>(k);
  std::vector<NodePair> edges;
  for (const auto& e : g.edges()) {
    const int a = remap[static_cast<size_t>(e.i)], b = remap[static_cast<size_t>(e.j)];
    if (a >= 0 && b >= 0) edges.push_back(NodePair::ordered(a, b));
  }
  Matrix x(static_cast<Eigen::Index>(keep.size()), g.feature_dim());
  for (size_t k = 0; k < keep.size(); ++k) x.row(static_cast<Eigen::Index>(k)) = g.features().row(keep[k]);
  std::optional<std::vector<int>> labels;
  if (g.node_labels()) {
    labels.emplace();
    for (int v : keep) labels->push_back((*g.node_labels())[static_cast<size_t>(v)]);
  }
  std::optional<NodeMasks> masks;
  if (g.masks()) {
    masks.emplace();
    for (int v : keep) {
      masks->train.push_back(g.masks()->train[static_cast<size_t>(v)]);
      masks->test.push_back(g.masks()->test[static_cast<size_t>(v)]);
    }
  }
  Graph out(static_cast<int>(keep.size()), std::move(edges), std::move(x), std::move(labels),
            g.graph_label(), std::move(masks));
  return {std::move(out), std::move(keep)};
}

std::vector<int> identity_map(int n) {
  std::vector<int> v(static_cast<size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

AugmentedGraph node_drop(const Graph& g, double rho, Rng& rng) {
  const int n = g.num_nodes();
  const int drop = static_cast<int>(std::floor(rho * n));
  if (n - drop <= 0) fail(ErrorCode::kDegenerateAugmentation, "node_drop removes every node");
  std::vector<int> perm = identity_map(n);
  shuffle(perm.begin(), perm.end(), rng);
  return induced_subgraph(g, std::vector<int>(perm.begin() + drop, perm.end()));
}

Graph edge_perturb(const Graph& g, double rho, Rng& rng) {
  const int n = g.num_nodes();
  std::vector<NodePair> kept;
  for (const auto& e : g.edges()) {
    if (uniform01(rng) >= rho) kept.push_back(e);
  }
  // Independent Binomial(m, rho) count of additions keeps E[|E|] constant.
  int to_add = 0;
  for (int k = 0; k < g.num_edges(); ++k) to_add += uniform01(rng) < rho ? 1 : 0;
  const std::int64_t non_edges = num_candidate_pairs(n) - g.num_edges();
  to_add = static_cast<int>(std::min<std::int64_t>(to_add, non_edges));
  std::set<NodePair> added;
  while (static_cast<int>(added.size()) < to_add) {
    const int a = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    const int b = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    if (a == b) continue;
    const auto p = NodePair::ordered(a, b);
    if (g.has_edge(p.i, p.j)) continue;
    added.insert(p);
  }
  kept.insert(kept.end(), added.begin(), added.end());
  return g.with_edges(std::move(kept));
}

Graph mask_columns(const Graph& g, const std::vector<double>& probs, Rng& rng) {
  Matrix x = g.features();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (uniform01(rng) < probs[static_cast<size_t>(c)]) x.col(c).setZero();
  }
  return g.with_features(std::move(x));
}

AugmentedGraph subgraph(const Graph& g, double rho, Rng& rng) {
  const int n = g.num_nodes();
  const int target = static_cast<int>(std::ceil((1.0 - rho) * n - 1e-12));
  if (target <= 0) fail(ErrorCode::kDegenerateAugmentation, "subgraph keeps no nodes");
  const auto adj = g.adjacency_lists();
  std::vector<char> visited(static_cast<size_t>(n), 0);
  std::vector<int> keep;
  int current = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
  visited[static_cast<size_t>(current)] = 1;
  keep.push_back(current);
  int stale = 0;
  const int stale_limit = 10 * std::max(n, 1);
  while (static_cast<int>(keep.size()) < target) {
    const auto& nb = adj[static_cast<size_t>(current)];
    if (nb.empty() || stale > stale_limit) {
      // Restart: jump to an unvisited node when the walk is stuck.
      std::vector<int> rest;
      for (int v = 0; v < n; ++v) {
        if (!visited[static_cast<size_t>(v)]) rest.push_back(v);
      }
      current = rest[uniform_index(rng, rest.size())];
      visited[static_cast<size_t>(current)] = 1;
      keep.push_back(current);
      stale = 0;
      continue;
    }
    current = nb[uniform_index(rng, nb.size())];
    if (!visited[static_cast<size_t>(current)]) {
      visited[static_cast<size_t>(current)] = 1;
      keep.push_back(current);
      stale = 0;
    } else {
      ++stale;
    }
  }
  return induced_subgraph(g, std::move(keep));
}

Graph feature_shuffle(const Graph& g, Rng& rng) {
  std::vector<int> perm = identity_map(g.num_nodes());
  shuffle(perm.begin(), perm.end(), rng);
  Matrix x(g.num_nodes(), g.feature_dim());
  for (int v = 0; v < g.num_nodes(); ++v) x.row(v) = g.features().row(perm[static_cast<size_t>(v)]);
  return g.with_features(std::move(x));
}

// Maps importance scores to removal probabilities: low importance -> high
// probability, capped at rho_cut.
std::vector<double> gap_normalized_probs(const std::vector<double>& s, double rho_base,
                                         double rho_cut) {
  std::vector<double> out(s.size(), rho_base);
  if (s.empty()) return out;
  const double s_max = *std::max_element(s.begin(), s.end());
  const double s_mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  if (!(s_max - s_mean > 1e-12 * std::max(1.0, std::abs(s_max)))) return out;
  for (size_t k = 0; k < s.size(); ++k) {
    out[k] = std::min((s_max - s[k]) / (s_max - s_mean) * rho_base, rho_cut);
  }
  return out;
}

std::vector<std::vector<int>> components(const Graph& g) {
  const auto adj = g.adjacency_lists();
  std::vector<int> comp(static_cast<size_t>(g.num_nodes()), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < g.num_nodes(); ++s) {
    if (comp[static_cast<size_t>(s)] >= 0) continue;
    out.emplace_back();
    std::vector<int> stack{s};
    comp[static_cast<size_t>(s)] = static_cast<int>(out.size() - 1);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      out.back().push_back(v);
      for (int u : adj[static_cast<size_t>(v)]) {
        if (comp[static_cast<size_t>(u)] < 0) {
          comp[static_cast<size_t>(u)] = comp[static_cast<size_t>(s)];
          stack.push_back(u);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

std::vector<double> eigenvector_centrality(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<double> out(static_cast<size_t>(n), 0.0);
  const auto adj = g.adjacency_lists();
  std::vector<double> v(static_cast<size_t>(n)), next(static_cast<size_t>(n));
  for (const auto& comp : components(g)) {
    if (comp.size() < 2) continue;
    // Power iteration on A + I: same eigenvectors as A, but the shift removes
    // the +/- lambda oscillation on bipartite components.
    const double init = 1.0 / std::sqrt(static_cast<double>(comp.size()));
    for (int u : comp) v[static_cast<size_t>(u)] = init;
    bool converged = false;
    for (int it = 0; it < 1000 && !converged; ++it) {
      double norm = 0.0;
      for (int u : comp) {
        double s = v[static_cast<size_t>(u)];
        for (int w : adj[static_cast<size_t>(u)]) s += v[static_cast<size_t>(w)];
        next[static_cast<size_t>(u)] = s;
        norm += s * s;
      }
      norm = std::sqrt(norm);
      double delta = 0.0;
      for (int u : comp) {
        next[static_cast<size_t>(u)] /= norm;
        delta = std::max(delta, std::abs(next[static_cast<size_t>(u)] - v[static_cast<size_t>(u)]));
        v[static_cast<size_t>(u)] = next[static_cast<size_t>(u)];
      }
      converged = delta < 1e-8;
    }
    if (!converged) {
      fail(ErrorCode::kCentralityDiverged, "eigenvector power iteration did not converge");
    }
    for (int u : comp) out[static_cast<size_t>(u)] = std::abs(v[static_cast<size_t>(u)]);
  }
  double norm = 0.0;
  for (double x : out) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : out) x /= norm;
  }
  return out;
}

std::vector<double> pagerank(const Graph& g) {
  const int n = g.num_nodes();
  if (n == 0) return {};
  constexpr double kDamping = 0.85;
  const auto adj = g.adjacency_lists();
  std::vector<double> r(static_cast<size_t>(n), 1.0 / n), next(static_cast<size_t>(n));
  for (int it = 0; it < 1000; ++it) {
    double dangling = 0.0;
    for (int u = 0; u < n; ++u) {
      if (adj[static_cast<size_t>(u)].empty()) dangling += r[static_cast<size_t>(u)];
    }
    const double base = (1.0 - kDamping) / n + kDamping * dangling / n;
    std::fill(next.begin(), next.end(), base);
    for (int u = 0; u < n; ++u) {
      const auto& nb = adj[static_cast<size_t>(u)];
      if (nb.empty()) continue;
      const double share = kDamping * r[static_cast<size_t>(u)] / static_cast<double>(nb.size());
      for (int w : nb) next[static_cast<size_t>(w)] += share;
    }
    double delta = 0.0;
    for (int u = 0; u < n; ++u) delta += std::abs(next[static_cast<size_t>(u)] - r[static_cast<size_t>(u)]);
    r.swap(next);
    if (delta < 1e-10) return r;
  }
  fail(ErrorCode::kCentralityDiverged, "pagerank did not converge in 1000 iterations");
}

}  // namespace

std::string_view augment_kind_name(AugmentKind k) {
  for (const auto& e : kKindNames) {
    if (e.kind == k) return e.name;
  }
  return "unknown";
}

AugmentKind parse_augment_kind(std::string_view s) {
  for (const auto& e : kKindNames) {
    if (e.name == s) return e.kind;
  }
  fail(ErrorCode::kConfigError, "unknown augmentation \"" + std::string(s) + "\"");
}

std::string_view centrality_name(Centrality c) {
  switch (c) {
    case Centrality::kDegree: return "degree";
    case Centrality::kEigenvector: return "eigenvector";
    case Centrality::kPagerank: return "pagerank";
  }
  return "unknown";
}

Centrality parse_centrality(std::string_view s) {
  if (s == "degree") return Centrality::kDegree;
  if (s == "eigenvector") return Centrality::kEigenvector;
  if (s == "pagerank") return Centrality::kPagerank;
  fail(ErrorCode::kConfigError, "unknown centrality \"" + std::string(s) + "\"");
}

void AugmentSpec::validate() const {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    fail(ErrorCode::kConfigError, "augmentation strength must lie in [0, 1]");
  }
  if (!(cutoff >= strength && cutoff <= 1.0) &&
      (kind == AugmentKind::kAdaptiveEdgeDrop || kind == AugmentKind::kAdaptiveAttrMask)) {
    fail(ErrorCode::kConfigError, "adaptive cutoff must satisfy strength <= cutoff <= 1");
  }
}

AugmentedGraph augment_with_map(const Graph& g, const AugmentSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  switch (spec.kind) {
    case AugmentKind::kNodeDrop:
      return node_drop(g, spec.strength, rng);
    case AugmentKind::kSubgraph:
      return subgraph(g, spec.strength, rng);
    case AugmentKind::kEdgePerturb:
      return {edge_perturb(g, spec.strength, rng), identity_map(g.num_nodes())};
    case AugmentKind::kAttrMask:
      return {mask_columns(g, std::vector<double>(static_cast<size_t>(g.feature_dim()), spec.strength), rng),
              identity_map(g.num_nodes())};
    case AugmentKind::kFeatureShuffle:
      return {feature_shuffle(g, rng), identity_map(g.num_nodes())};
    case AugmentKind::kAdaptiveEdgeDrop: {
      const auto probs = adaptive_edge_drop_probs(g, spec.centrality, spec.strength, spec.cutoff);
      std::vector<NodePair> kept;
      for (size_t k = 0; k < probs.size(); ++k) {
        if (uniform01(rng) >= probs[k]) kept.push_back(g.edges()[k]);
      }
      return {g.with_edges(std::move(kept)), identity_map(g.num_nodes())};
    }
    case AugmentKind::kAdaptiveAttrMask:
      return {mask_columns(g, adaptive_feature_mask_probs(g, spec.centrality, spec.strength, spec.cutoff), rng),
              identity_map(g.num_nodes())};
    case AugmentKind::kLearnedEdgeDrop:
      fail(ErrorCode::kConfigError, "learned_edge_drop needs a LearnedAugmenter");
  }
  fail(ErrorCode::kConfigError, "unhandled augmentation kind");
}

Graph augment(const Graph& g, const AugmentSpec& spec) { return augment_with_map(g, spec).graph; }

std::vector<double> centrality_scores(const Graph& g, Centrality kind) {
  switch (kind) {
    case Centrality::kDegree: {
      const auto deg = g.degrees();
      return std::vector<double>(deg.begin(), deg.end());
    }
    case Centrality::kEigenvector:
      return eigenvector_centrality(g);
    case Centrality::kPagerank:
      return pagerank(g);
  }
  return {};
}

std::vector<double> adaptive_edge_drop_probs(const Graph& g, Centrality kind, double rho_base,
                                             double rho_cut) {
  if (!(0.0 <= rho_base && rho_base <= rho_cut && rho_cut <= 1.0)) {
    fail(ErrorCode::kConfigError, "need 0 <= rho_base <= rho_cut <= 1");
  }
  const auto c = centrality_scores(g, kind);
  std::vector<double> s;
  s.reserve(g.edges().size());
  for (const auto& e : g.edges()) {
    const double cu = std::max(c[static_cast<size_t>(e.i)], kCentralityFloor);
    const double cv = std::max(c[static_cast<size_t>(e.j)], kCentralityFloor);
    s.push_back(0.5 * (std::log(cu) + std::log(cv)));
  }
  return gap_normalized_probs(s, rho_base, rho_cut);
}

std::vector<double> adaptive_feature_mask_probs(const Graph& g, Centrality kind, double rho_base,
                                                double rho_cut) {
  if (!(0.0 <= rho_base && rho_base <= rho_cut && rho_cut <= 1.0)) {
    fail(ErrorCode::kConfigError, "need 0 <= rho_base <= rho_cut <= 1");
  }
  const auto c = centrality_scores(g, kind);
  std::vector<double> s(static_cast<size_t>(g.feature_dim()), 0.0);
  for (int d = 0; d < g.feature_dim(); ++d) {
    double w = 0.0;
    for (int v = 0; v < g.num_nodes(); ++v) w += std::abs(g.features()(v, d)) * c[static_cast<size_t>(v)];
    s[static_cast<size_t>(d)] = std::log(std::max(w, kCentralityFloor));
  }
  return gap_normalized_probs(s, rho_base, rho_cut);
}

LearnedAugmenter::LearnedAugmenter(int input_dim, int hidden_dim, double temperature,
                                   std::uint64_t seed)
    : gnn_(EncoderConfig{EncoderKind::kGin, 1, hidden_dim, 0.0, Activation::kRelu,
                         ReadoutKind::kSum},
           input_dim, derive_seed(seed, "augmenter.gnn")),
      temperature_(temperature) {
  if (!(temperature > 0.0)) fail(ErrorCode::kConfigError, "augmenter temperature must be > 0");
  for (const auto& p : gnn_.parameters()) params_.emplace_back("gnn." + p.name, p.value);
  Rng rng(derive_seed(seed, "augmenter.head"));
  auto glorot = [&rng](int in, int out) {
    const double bound = std::sqrt(6.0 / (in + out));
    Matrix m(in, out);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform01(rng) - 1.0) * bound;
    return m;
  };
  params_.emplace_back("head.0.weight", glorot(2 * hidden_dim, hidden_dim));
  params_.emplace_back("head.0.bias", Matrix::Zero(1, hidden_dim));
  params_.emplace_back("head.1.weight", glorot(hidden_dim, 1));
  params_.emplace_back("head.1.bias", Matrix::Zero(1, 1));
}

Var LearnedAugmenter::edge_logits(std::span<const Var> params, const Graph& g, Tape& tape) const {
  const size_t ng = gnn_.parameters().size();
  if (params.size() != ng + 4) fail(ErrorCode::kShapeMismatch, "augmenter parameter count");
  Var h = gnn_.forward(params.subspan(0, ng), tape.constant(dense_adjacency(g)),
                       tape.constant(g.features()));
  if (g.num_edges() == 0) return tape.constant(Matrix::Zero(0, 1));
  std::vector<int> src, dst;
  for (const auto& e : g.edges()) {
    src.push_back(e.i);
    dst.push_back(e.j);
  }
  const Var ends[] = {ad::row_index(h, src), ad::row_index(h, dst)};
  Var z = ad::relu(ad::add_row(ad::matmul(ad::concat_cols(ends), params[ng]), params[ng + 1]));
  return ad::add_row(ad::matmul(z, params[ng + 2]), params[ng + 3]);
}

Matrix edge_noise(int num_edges, std::uint64_t seed) {
  Rng rng(seed);
  Matrix u(num_edges, 1);
  for (int k = 0; k < num_edges; ++k) u(k, 0) = std::clamp(uniform01(rng), 1e-10, 1.0 - 1e-10);
  return u;
}

Var relaxed_edge_weights(Var logits, const Matrix& noise, double temperature) {
  Tape& tape = *logits.tape();
  if (noise.rows() != logits.rows() || noise.cols() != 1) {
    fail(ErrorCode::kShapeMismatch, "edge noise does not match logits");
  }
  const Matrix gumbel_diff = noise.array().log() - (1.0 - noise.array()).log();
  return ad::sigmoid(ad::scale(ad::add(logits, tape.constant(gumbel_diff)), 1.0 / temperature));
}

std::vector<double> learned_edge_drop_sample(const Graph& g, const LearnedAugmenter& aug,
                                             std::uint64_t seed) {
  Tape tape;
  auto params = bind_frozen(tape, aug.parameters());
  Var logits = aug.edge_logits(params, g, tape);
  if (g.num_edges() == 0) return {};
  Var w = relaxed_edge_weights(logits, edge_noise(g.num_edges(), seed), aug.temperature());
  const Matrix& v = w.value();
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace grail
