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
#include <optional>
#include <string_view>
#include <vector>

#include "grail/augment.hpp"
#include "grail/encoders.hpp"
#include "grail/graph.hpp"
#include "grail/optim.hpp"

namespace grail {

enum class ObjectiveKind { kDgi, kInfoGraph, kGraphCl, kGca, kAdGcl };

std::string_view objective_name(ObjectiveKind k);
ObjectiveKind parse_objective(std::string_view s);

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::kDgi;
  double temperature = 0.5;  // NT-Xent tau
  // Each view applies its augmentations in order (GraphCL / GCA).
  std::vector<AugmentSpec> view1;
  std::vector<AugmentSpec> view2;
  double adgcl_lambda = 5.0;
  double augmenter_temperature = 1.0;
  double augmenter_lr = 1e-3;

  void validate() const;
  static ObjectiveConfig defaults(ObjectiveKind kind);
};

// Objective-specific trainable heads.
struct ContrastiveHeads {
  std::vector<Parameter> projector;      // proj.{0,1}.{weight,bias}
  std::vector<Parameter> bilinear;       // dgi.bilinear (q x q)
  std::vector<Parameter> discriminator;  // disc.{0,1}.{weight,bias}
  std::optional<LearnedAugmenter> augmenter;

  ContrastiveHeads(const ObjectiveConfig& config, int input_dim, int hidden_dim,
                   std::uint64_t seed);
};

struct TrainConfig {
  int epochs = 100;
  double lr = 1e-3;
  std::optional<int> patience;
  int batch_size = 64;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double wall_ms = 0.0;
};

struct TrainedEncoder {
  EncoderModel encoder;
  std::vector<EpochRecord> history;
  bool early_stopped = false;
};

// ---- loss terms (tape level) ----

// Two-layer projector z = relu(h W0 + b0) W1 + b1.
Var project(std::span<const Var> projector, Var h);

// Mini-batch InfoNCE with D = <z1_k, z2_l> / tau. Row k of z1 and z2 are the
// positive pair; the denominator runs over the other rows of z2 only.
Var info_nce_loss(Var z1, Var z2, double temperature);
double info_nce_loss(const Matrix& z1, const Matrix& z2, double temperature);

// mean(-softplus(-pos)) - mean(softplus(neg)).
Var js_mi_estimate(Var pos, Var neg);
double js_mi_estimate(std::span<const double> pos, std::span<const double> neg);

// Binary cross-entropy of sigmoid(h^T B s) with clean rows positive and
// corrupted rows negative, averaged over the 2n terms.
Var dgi_loss(Var h_clean, Var h_corrupt, Var summary, Var bilinear);

// Negative JS mutual information between node patches and graph summaries.
// patches: all nodes of the batch stacked (N x q); node_graph[i] is the batch
// position of node i's graph; summaries: B x q.
Var infograph_loss(Var patches, std::span<const int> node_graph, Var summaries,
                   std::span<const Var> discriminator);

// ---- AD-GCL ----

struct AdgclTerms {
  Var nce;        // InfoNCE between anchor and augmented views
  Var keep_mean;  // mean relaxed keep weight over all batch edges
};

// Builds both views for a batch given per-graph edge logits (m_g x 1) and
// uniform noise; gradients flow to whatever the inputs are bound to.
AdgclTerms adgcl_terms(const EncoderModel& encoder, std::span<const Var> encoder_params,
                       std::span<const Var> projector, std::span<const Graph* const> batch,
                       std::span<const Var> logits, std::span<const Matrix> noise,
                       double temperature, double augmenter_temperature);

// Augmenter objective: -nce + lambda * mean(1 - p_e).
Var adgcl_augmenter_loss(const AdgclTerms& terms, double lambda);

struct AdgclStepLosses {
  double encoder_loss = 0.0;
  double augmenter_loss = 0.0;
};

// One alternating update: encoder+projector descend the InfoNCE, then the
// augmenter descends its own objective with fresh noise.
AdgclStepLosses adgcl_step(std::span<const Graph* const> batch, EncoderModel& encoder,
                           ContrastiveHeads& heads, const ObjectiveConfig& objective,
                           Adam& encoder_opt, Adam& augmenter_opt, std::uint64_t seed);

// ---- objective losses on a batch (used by the training loop and tests) ----

// DGI on a single graph. Dropout uses rng when non-null.
Var dgi_objective(const EncoderModel& encoder, std::span<const Var> params, Var bilinear,
                  const Graph& g, std::uint64_t corruption_seed, Rng* dropout_rng);

Var infograph_objective(const EncoderModel& encoder, std::span<const Var> params,
                        std::span<const Var> discriminator, std::span<const Graph* const> batch,
                        Rng* dropout_rng);

Var graphcl_graph_objective(const EncoderModel& encoder, std::span<const Var> params,
                            std::span<const Var> projector, const ObjectiveConfig& objective,
                            std::span<const Graph* const> batch, std::uint64_t seed,
                            Rng* dropout_rng);

// Node-level two-view contrast on one graph (GraphCL node mode and GCA).
// Positives are nodes surviving in both views; up to batch_size are sampled.
Var node_contrast_objective(const EncoderModel& encoder, std::span<const Var> params,
                            std::span<const Var> projector, const ObjectiveConfig& objective,
                            const Graph& g, int batch_size, std::uint64_t seed,
                            Rng* dropout_rng);

TrainedEncoder train_encoder(const GraphDataset& dataset, const EncoderConfig& encoder_config,
                             const ObjectiveConfig& objective, const TrainConfig& config);

}  // namespace grail
