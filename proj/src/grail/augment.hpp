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

#include <cstdint>
#include <string_view>
#include <vector>

#include "grail/encoders.hpp"
#include "grail/graph.hpp"

namespace grail {

enum class AugmentKind {
  kNodeDrop,
  kEdgePerturb,
  kAttrMask,
  kSubgraph,
  kFeatureShuffle,
  kAdaptiveEdgeDrop,
  kAdaptiveAttrMask,
  kLearnedEdgeDrop,
};

enum class Centrality { kDegree, kEigenvector, kPagerank };

std::string_view augment_kind_name(AugmentKind k);
AugmentKind parse_augment_kind(std::string_view s);
std::string_view centrality_name(Centrality c);
Centrality parse_centrality(std::string_view s);

struct AugmentSpec {
  AugmentKind kind = AugmentKind::kNodeDrop;
  double strength = 0.2;  // rho
  Centrality centrality = Centrality::kDegree;
  double cutoff = 0.7;  // upper clamp for adaptive kinds
  std::uint64_t seed = 0;

  void validate() const;
};

// Augmented view plus, for every node of the view, its index in the source
// graph (identity unless nodes were removed).
struct AugmentedGraph {
  Graph graph;
  std::vector<int> kept;
};

AugmentedGraph augment_with_map(const Graph& g, const AugmentSpec& spec);
Graph augment(const Graph& g, const AugmentSpec& spec);

std::vector<double> centrality_scores(const Graph& g, Centrality kind);

// Per-edge removal probabilities aligned with g.edges().
std::vector<double> adaptive_edge_drop_probs(const Graph& g, Centrality kind, double rho_base,
                                             double rho_cut);

// Per-feature-dimension masking probabilities.
std::vector<double> adaptive_feature_mask_probs(const Graph& g, Centrality kind, double rho_base,
                                                double rho_cut);

// Edge-dropping augmenter: a GIN over the graph followed by an MLP on the
// concatenated endpoint embeddings producing one logit per edge.
class LearnedAugmenter {
 public:
  LearnedAugmenter(int input_dim, int hidden_dim, double temperature, std::uint64_t seed);

  double temperature() const { return temperature_; }
  // gnn parameters followed by head.{0,1}.{weight,bias}.
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  const EncoderModel& gnn() const { return gnn_; }

  // Per-edge logits (m x 1) aligned with g.edges().
  Var edge_logits(std::span<const Var> params, const Graph& g, Tape& tape) const;

 private:
  EncoderModel gnn_;
  double temperature_;
  std::vector<Parameter> params_;
};

// Logistic noise u ~ U(0,1) per edge, clamped away from {0, 1}.
Matrix edge_noise(int num_edges, std::uint64_t seed);

// sigmoid((logits + log u - log(1 - u)) / temperature).
Var relaxed_edge_weights(Var logits, const Matrix& noise, double temperature);

// Concrete relaxation of Bernoulli edge keeping, evaluated in eval mode.
std::vector<double> learned_edge_drop_sample(const Graph& g, const LearnedAugmenter& aug,
                                             std::uint64_t seed);

}  // namespace grail
