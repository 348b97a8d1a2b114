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

#include "grail/contrastive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "grail/error.hpp"
#include "grail/seeds.hpp"

namespace grail {

namespace {

Matrix glorot(int in, int out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (in + out));
  Matrix m(in, out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform01(rng) - 1.0) * bound;
  return m;
}

// Applies a list of augmentations in order, composing the kept-node maps.
AugmentedGraph apply_view(const Graph& g, const std::vector<AugmentSpec>& view,
                          std::uint64_t seed) {
  AugmentedGraph out{g, {}};
  out.kept.resize(static_cast<size_t>(g.num_nodes()));
  std::iota(out.kept.begin(), out.kept.end(), 0);
  for (size_t k = 0; k < view.size(); ++k) {
    AugmentSpec spec = view[k];
    spec.seed = derive_seed(seed, "view.step", k);
    AugmentedGraph next = augment_with_map(out.graph, spec);
    std::vector<int> kept;
    kept.reserve(next.kept.size());
    for (int v : next.kept) kept.push_back(out.kept[static_cast<size_t>(v)]);
    out = AugmentedGraph{std::move(next.graph), std::move(kept)};
  }
  return out;
}

Var encode(const EncoderModel& encoder, std::span<const Var> params, const Graph& g, Tape& tape,
           Rng* dropout_rng) {
  return encoder.forward(params, tape.constant(dense_adjacency(g)), tape.constant(g.features()),
                         dropout_rng);
}

Var encode_readout(const EncoderModel& encoder, std::span<const Var> params, const Graph& g,
                   Tape& tape, Rng* dropout_rng) {
  return readout(encode(encoder, params, g, tape, dropout_rng), encoder.config().readout);
}

Tape& tape_of(std::span<const Var> vars) {
  if (vars.empty()) fail(ErrorCode::kShapeMismatch, "no parameters bound");
  return *vars.front().tape();
}

}  // namespace

std::string_view objective_name(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::kDgi: return "dgi";
    case ObjectiveKind::kInfoGraph: return "infograph";
    case ObjectiveKind::kGraphCl: return "graphcl";
    case ObjectiveKind::kGca: return "gca";
    case ObjectiveKind::kAdGcl: return "adgcl";
  }
  return "?";
}

ObjectiveKind parse_objective(std::string_view s) {
  for (auto k : {ObjectiveKind::kDgi, ObjectiveKind::kInfoGraph, ObjectiveKind::kGraphCl,
                 ObjectiveKind::kGca, ObjectiveKind::kAdGcl}) {
    if (objective_name(k) == s) return k;
  }
  fail(ErrorCode::kConfigError, "unknown objective '" + std::string(s) + "'");
}

void ObjectiveConfig::validate() const {
  if (!(temperature > 0.0)) fail(ErrorCode::kConfigError, "temperature must be > 0");
  if (!(adgcl_lambda >= 0.0)) fail(ErrorCode::kConfigError, "adgcl lambda must be >= 0");
  if (!(augmenter_temperature > 0.0)) {
    fail(ErrorCode::kConfigError, "augmenter temperature must be > 0");
  }
  if (!(augmenter_lr >= 0.0)) fail(ErrorCode::kConfigError, "augmenter lr must be >= 0");
  if (kind == ObjectiveKind::kGraphCl || kind == ObjectiveKind::kGca) {
    if (view1.empty() || view2.empty()) {
      fail(ErrorCode::kConfigError, "two-view objectives need non-empty views");
    }
    for (const auto* view : {&view1, &view2}) {
      for (const auto& spec : *view) {
        spec.validate();
        if (spec.kind == AugmentKind::kLearnedEdgeDrop) {
          fail(ErrorCode::kConfigError, "learned_edge_drop is only available to adgcl");
        }
      }
    }
  }
}

ObjectiveConfig ObjectiveConfig::defaults(ObjectiveKind kind) {
  ObjectiveConfig c;
  c.kind = kind;
  if (kind == ObjectiveKind::kGraphCl) {
    c.view1 = {AugmentSpec{AugmentKind::kNodeDrop, 0.2}};
    c.view2 = {AugmentSpec{AugmentKind::kAttrMask, 0.2}};
  } else if (kind == ObjectiveKind::kGca) {
    c.view1 = {AugmentSpec{AugmentKind::kAdaptiveEdgeDrop, 0.2},
               AugmentSpec{AugmentKind::kAdaptiveAttrMask, 0.3}};
    c.view2 = {AugmentSpec{AugmentKind::kAdaptiveEdgeDrop, 0.4},
               AugmentSpec{AugmentKind::kAdaptiveAttrMask, 0.4}};
  }
  return c;
}

ContrastiveHeads::ContrastiveHeads(const ObjectiveConfig& config, int input_dim, int hidden_dim,
                                   std::uint64_t seed) {
  Rng rng(derive_seed(seed, "heads"));
  const int q = hidden_dim;
  switch (config.kind) {
    case ObjectiveKind::kDgi:
      bilinear.emplace_back("dgi.bilinear", glorot(q, q, rng));
      break;
    case ObjectiveKind::kInfoGraph:
      discriminator.emplace_back("disc.0.weight", glorot(2 * q, q, rng));
      discriminator.emplace_back("disc.0.bias", Matrix::Zero(1, q));
      discriminator.emplace_back("disc.1.weight", glorot(q, 1, rng));
      discriminator.emplace_back("disc.1.bias", Matrix::Zero(1, 1));
      break;
    case ObjectiveKind::kAdGcl:
      augmenter.emplace(input_dim, hidden_dim, config.augmenter_temperature,
                        derive_seed(seed, "augmenter"));
      [[fallthrough]];
    case ObjectiveKind::kGraphCl:
    case ObjectiveKind::kGca:
      projector.emplace_back("proj.0.weight", glorot(q, q, rng));
      projector.emplace_back("proj.0.bias", Matrix::Zero(1, q));
      projector.emplace_back("proj.1.weight", glorot(q, q, rng));
      projector.emplace_back("proj.1.bias", Matrix::Zero(1, q));
      break;
  }
}

Var project(std::span<const Var> projector, Var h) {
  if (projector.size() != 4) fail(ErrorCode::kShapeMismatch, "projector expects 4 parameters");
  Var z = ad::relu(ad::add_row(ad::matmul(h, projector[0]), projector[1]));
  return ad::add_row(ad::matmul(z, projector[2]), projector[3]);
}

Var info_nce_loss(Var z1, Var z2, double temperature) {
  if (z1.rows() != z2.rows() || z1.cols() != z2.cols()) {
    fail(ErrorCode::kShapeMismatch, "InfoNCE views must have equal shapes");
  }
  if (z1.rows() < 2) fail(ErrorCode::kNeedNegatives, "InfoNCE needs a batch of at least 2");
  Var scores = ad::scale(ad::matmul(z1, ad::transpose(z2)), 1.0 / temperature);
  Var per_row = ad::sub(ad::logsumexp_rows(scores, true), ad::diag(scores));
  return ad::mean(per_row);
}

double info_nce_loss(const Matrix& z1, const Matrix& z2, double temperature) {
  Tape tape;
  return info_nce_loss(tape.constant(z1), tape.constant(z2), temperature).scalar();
}

Var js_mi_estimate(Var pos, Var neg) {
  if (pos.value().size() == 0 || neg.value().size() == 0) {
    fail(ErrorCode::kShapeMismatch, "JS estimate needs non-empty score sets");
  }
  return ad::sub(ad::neg(ad::mean(ad::softplus(ad::neg(pos)))), ad::mean(ad::softplus(neg)));
}

double js_mi_estimate(std::span<const double> pos, std::span<const double> neg) {
  Tape tape;
  Matrix p = Eigen::Map<const Matrix>(pos.data(), static_cast<Eigen::Index>(pos.size()), 1);
  Matrix n = Eigen::Map<const Matrix>(neg.data(), static_cast<Eigen::Index>(neg.size()), 1);
  return js_mi_estimate(tape.constant(p), tape.constant(n)).scalar();
}

Var dgi_loss(Var h_clean, Var h_corrupt, Var summary, Var bilinear) {
  if (h_clean.rows() != h_corrupt.rows() || h_clean.cols() != h_corrupt.cols()) {
    fail(ErrorCode::kShapeMismatch, "clean and corrupted embeddings differ in shape");
  }
  Var bs = ad::matmul(bilinear, ad::transpose(summary));  // q x 1
  Var pos = ad::matmul(h_clean, bs);
  Var neg = ad::matmul(h_corrupt, bs);
  Var total = ad::add(ad::sum(ad::softplus(ad::neg(pos))), ad::sum(ad::softplus(neg)));
  return ad::scale(total, 1.0 / (2.0 * static_cast<double>(h_clean.rows())));
}

Var infograph_loss(Var patches, std::span<const int> node_graph, Var summaries,
                   std::span<const Var> discriminator) {
  if (discriminator.size() != 4) {
    fail(ErrorCode::kShapeMismatch, "discriminator expects 4 parameters");
  }
  const int nb = static_cast<int>(summaries.rows());
  if (nb < 2) fail(ErrorCode::kNeedNegatives, "InfoGraph needs a batch of at least 2 graphs");
  const int n = static_cast<int>(patches.rows());
  if (static_cast<int>(node_graph.size()) != n) {
    fail(ErrorCode::kShapeMismatch, "node_graph length does not match patches");
  }
  const int q = static_cast<int>(patches.cols());
  if (discriminator[0].rows() != 2 * q) {
    fail(ErrorCode::kShapeMismatch, "discriminator input does not match [patch; summary]");
  }
  // [h; s] W0 = h W0_top + s W0_bottom, so each half is projected once.
  std::vector<int> top(static_cast<size_t>(q)), bottom(static_cast<size_t>(q));
  std::iota(top.begin(), top.end(), 0);
  std::iota(bottom.begin(), bottom.end(), q);
  Var hp = ad::matmul(patches, ad::row_index(discriminator[0], top));
  Var sp = ad::matmul(summaries, ad::row_index(discriminator[0], bottom));

  std::vector<int> pos_nodes, pos_graphs, neg_nodes, neg_graphs;
  for (int i = 0; i < n; ++i) {
    const int own = node_graph[static_cast<size_t>(i)];
    if (own < 0 || own >= nb) fail(ErrorCode::kShapeMismatch, "node_graph entry out of range");
    for (int j = 0; j < nb; ++j) {
      auto& nodes = j == own ? pos_nodes : neg_nodes;
      auto& graphs = j == own ? pos_graphs : neg_graphs;
      nodes.push_back(i);
      graphs.push_back(j);
    }
  }
  auto score = [&](const std::vector<int>& nodes, const std::vector<int>& graphs) {
    Var pre = ad::add(ad::row_index(hp, nodes), ad::row_index(sp, graphs));
    Var hidden = ad::relu(ad::add_row(pre, discriminator[1]));
    return ad::add_row(ad::matmul(hidden, discriminator[2]), discriminator[3]);
  };
  if (neg_nodes.empty()) fail(ErrorCode::kNeedNegatives, "InfoGraph batch has no negatives");
  return ad::neg(js_mi_estimate(score(pos_nodes, pos_graphs), score(neg_nodes, neg_graphs)));
}

AdgclTerms adgcl_terms(const EncoderModel& encoder, std::span<const Var> encoder_params,
                       std::span<const Var> projector, std::span<const Graph* const> batch,
                       std::span<const Var> logits, std::span<const Matrix> noise,
                       double temperature, double augmenter_temperature) {
  if (logits.size() != batch.size() || noise.size() != batch.size()) {
    fail(ErrorCode::kShapeMismatch, "one logit vector and noise vector per graph expected");
  }
  Tape& tape = tape_of(encoder_params);
  std::vector<Var> anchors, views, keeps;
  for (size_t k = 0; k < batch.size(); ++k) {
    const Graph& g = *batch[k];
    Var x = tape.constant(g.features());
    anchors.push_back(readout(
        encoder.forward(encoder_params, tape.constant(dense_adjacency(g)), x),
        encoder.config().readout));
    Var w;
    if (g.num_edges() == 0) {
      w = tape.constant(Matrix::Zero(g.num_nodes(), g.num_nodes()));
    } else {
      Var p = relaxed_edge_weights(logits[k], noise[k], augmenter_temperature);
      keeps.push_back(p);
      w = ad::scatter_symmetric(p, g.num_nodes(), g.edges());
    }
    views.push_back(readout(encoder.forward(encoder_params, w, x), encoder.config().readout));
  }
  Var z1 = project(projector, ad::concat_rows(anchors));
  Var z2 = project(projector, ad::concat_rows(views));
  AdgclTerms terms;
  terms.nce = info_nce_loss(z1, z2, temperature);
  terms.keep_mean = keeps.empty() ? tape.constant(Matrix::Ones(1, 1))
                                  : ad::mean(ad::concat_rows(keeps));
  return terms;
}

Var adgcl_augmenter_loss(const AdgclTerms& terms, double lambda) {
  // Drop-ratio penalty lambda * mean(1 - p_e) keeps the augmenter from
  // deleting every edge while it maximizes the contrastive loss.
  Var drop_ratio = ad::add_scalar(ad::neg(terms.keep_mean), 1.0);
  return ad::add(ad::neg(terms.nce), ad::scale(drop_ratio, lambda));
}

AdgclStepLosses adgcl_step(std::span<const Graph* const> batch, EncoderModel& encoder,
                           ContrastiveHeads& heads, const ObjectiveConfig& objective,
                           Adam& encoder_opt, Adam& augmenter_opt, std::uint64_t seed) {
  if (objective.kind != ObjectiveKind::kAdGcl || !heads.augmenter) {
    fail(ErrorCode::kConfigError, "adgcl_step requires an adgcl objective");
  }
  LearnedAugmenter& aug = *heads.augmenter;
  auto noise_for = [&](std::string_view phase) {
    std::vector<Matrix> noise;
    for (size_t k = 0; k < batch.size(); ++k) {
      noise.push_back(edge_noise(batch[k]->num_edges(), derive_seed(seed, phase, k)));
    }
    return noise;
  };
  AdgclStepLosses out;
  {
    Tape tape;
    auto enc = bind_trainable(tape, encoder.parameters());
    auto proj = bind_trainable(tape, heads.projector);
    auto aug_params = bind_frozen(tape, aug.parameters());
    std::vector<Var> logits;
    for (const Graph* g : batch) logits.push_back(aug.edge_logits(aug_params, *g, tape));
    auto noise = noise_for("adgcl.encoder");
    AdgclTerms terms = adgcl_terms(encoder, enc, proj, batch, logits, noise,
                                   objective.temperature, aug.temperature());
    out.encoder_loss = terms.nce.scalar();
    if (!std::isfinite(out.encoder_loss)) {
      fail(ErrorCode::kTrainingDiverged, "adgcl encoder loss is not finite");
    }
    encoder_opt.zero_grad();
    tape.backward(terms.nce);
    encoder_opt.step();
  }
  {
    Tape tape;
    auto enc = bind_frozen(tape, encoder.parameters());
    auto proj = bind_frozen(tape, heads.projector);
    auto aug_params = bind_trainable(tape, aug.parameters());
    std::vector<Var> logits;
    for (const Graph* g : batch) logits.push_back(aug.edge_logits(aug_params, *g, tape));
    auto noise = noise_for("adgcl.augmenter");
    AdgclTerms terms = adgcl_terms(encoder, enc, proj, batch, logits, noise,
                                   objective.temperature, aug.temperature());
    Var loss = adgcl_augmenter_loss(terms, objective.adgcl_lambda);
    out.augmenter_loss = loss.scalar();
    if (!std::isfinite(out.augmenter_loss)) {
      fail(ErrorCode::kTrainingDiverged, "adgcl augmenter loss is not finite");
    }
    augmenter_opt.zero_grad();
    tape.backward(loss);
    augmenter_opt.step();
  }
  return out;
}

Var dgi_objective(const EncoderModel& encoder, std::span<const Var> params, Var bilinear,
                  const Graph& g, std::uint64_t corruption_seed, Rng* dropout_rng) {
  Tape& tape = tape_of(params);
  AugmentSpec shuffle{AugmentKind::kFeatureShuffle, 1.0};
  shuffle.seed = corruption_seed;
  const Graph corrupted = augment(g, shuffle);
  Var w = tape.constant(dense_adjacency(g));
  Var h = encoder.forward(params, w, tape.constant(g.features()), dropout_rng);
  Var h_neg = encoder.forward(params, w, tape.constant(corrupted.features()), dropout_rng);
  return dgi_loss(h, h_neg, dgi_summary(h), bilinear);
}

Var infograph_objective(const EncoderModel& encoder, std::span<const Var> params,
                        std::span<const Var> discriminator, std::span<const Graph* const> batch,
                        Rng* dropout_rng) {
  if (batch.size() < 2) fail(ErrorCode::kNeedNegatives, "InfoGraph needs a batch of at least 2");
  Tape& tape = tape_of(params);
  std::vector<Var> patches, summaries;
  std::vector<int> node_graph;
  for (size_t k = 0; k < batch.size(); ++k) {
    Var h = encode(encoder, params, *batch[k], tape, dropout_rng);
    patches.push_back(h);
    summaries.push_back(readout(h, encoder.config().readout));
    node_graph.insert(node_graph.end(), static_cast<size_t>(batch[k]->num_nodes()),
                      static_cast<int>(k));
  }
  return infograph_loss(ad::concat_rows(patches), node_graph, ad::concat_rows(summaries),
                        discriminator);
}

Var graphcl_graph_objective(const EncoderModel& encoder, std::span<const Var> params,
                            std::span<const Var> projector, const ObjectiveConfig& objective,
                            std::span<const Graph* const> batch, std::uint64_t seed,
                            Rng* dropout_rng) {
  if (batch.size() < 2) fail(ErrorCode::kNeedNegatives, "GraphCL needs a batch of at least 2");
  Tape& tape = tape_of(params);
  std::vector<Var> first, second;
  for (size_t k = 0; k < batch.size(); ++k) {
    const Graph a = apply_view(*batch[k], objective.view1, derive_seed(seed, "view1", k)).graph;
    const Graph b = apply_view(*batch[k], objective.view2, derive_seed(seed, "view2", k)).graph;
    first.push_back(encode_readout(encoder, params, a, tape, dropout_rng));
    second.push_back(encode_readout(encoder, params, b, tape, dropout_rng));
  }
  return info_nce_loss(project(projector, ad::concat_rows(first)),
                       project(projector, ad::concat_rows(second)), objective.temperature);
}

Var node_contrast_objective(const EncoderModel& encoder, std::span<const Var> params,
                            std::span<const Var> projector, const ObjectiveConfig& objective,
                            const Graph& g, int batch_size, std::uint64_t seed,
                            Rng* dropout_rng) {
  Tape& tape = tape_of(params);
  const AugmentedGraph a = apply_view(g, objective.view1, derive_seed(seed, "view1"));
  const AugmentedGraph b = apply_view(g, objective.view2, derive_seed(seed, "view2"));
  // Position of each source node in each view, -1 when dropped.
  std::vector<int> pos_a(static_cast<size_t>(g.num_nodes()), -1);
  std::vector<int> pos_b(static_cast<size_t>(g.num_nodes()), -1);
  for (size_t k = 0; k < a.kept.size(); ++k) pos_a[static_cast<size_t>(a.kept[k])] = static_cast<int>(k);
  for (size_t k = 0; k < b.kept.size(); ++k) pos_b[static_cast<size_t>(b.kept[k])] = static_cast<int>(k);
  std::vector<int> common;
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (pos_a[static_cast<size_t>(v)] >= 0 && pos_b[static_cast<size_t>(v)] >= 0) {
      common.push_back(v);
    }
  }
  if (batch_size > 0 && static_cast<int>(common.size()) > batch_size) {
    Rng rng(derive_seed(seed, "node.batch"));
    shuffle(common.begin(), common.end(), rng);
    common.resize(static_cast<size_t>(batch_size));
    std::sort(common.begin(), common.end());
  }
  if (common.size() < 2) fail(ErrorCode::kNeedNegatives, "fewer than 2 nodes survive both views");
  std::vector<int> rows_a, rows_b;
  for (int v : common) {
    rows_a.push_back(pos_a[static_cast<size_t>(v)]);
    rows_b.push_back(pos_b[static_cast<size_t>(v)]);
  }
  Var ha = encode(encoder, params, a.graph, tape, dropout_rng);
  Var hb = encode(encoder, params, b.graph, tape, dropout_rng);
  return info_nce_loss(project(projector, ad::row_index(ha, rows_a)),
                       project(projector, ad::row_index(hb, rows_b)), objective.temperature);
}

TrainedEncoder train_encoder(const GraphDataset& dataset, const EncoderConfig& encoder_config,
                             const ObjectiveConfig& objective, const TrainConfig& config) {
  encoder_config.validate();
  objective.validate();
  if (config.epochs < 0) fail(ErrorCode::kConfigError, "epochs must be >= 0");
  if (!(config.lr >= 0.0)) fail(ErrorCode::kConfigError, "lr must be >= 0");
  if (config.batch_size < 2) fail(ErrorCode::kConfigError, "batch_size must be >= 2");
  if (config.patience && *config.patience < 1) {
    fail(ErrorCode::kConfigError, "patience must be >= 1 when set");
  }
  const bool node_task = dataset.task() == Task::kNode;
  const ObjectiveKind kind = objective.kind;
  if (node_task && (kind == ObjectiveKind::kInfoGraph || kind == ObjectiveKind::kAdGcl)) {
    fail(ErrorCode::kConfigError,
         std::string(objective_name(kind)) + " requires a graph-classification dataset");
  }
  if (!node_task && (kind == ObjectiveKind::kDgi || kind == ObjectiveKind::kGca)) {
    fail(ErrorCode::kConfigError,
         std::string(objective_name(kind)) + " requires a node-classification dataset");
  }

  const int input_dim = dataset.feature_dim();
  TrainedEncoder result{EncoderModel(encoder_config, input_dim,
                                     derive_seed(config.seed, "encoder")),
                        {}, false};
  EncoderModel& encoder = result.encoder;
  ContrastiveHeads heads(objective, input_dim, encoder_config.hidden_dim, config.seed);
  Adam opt(collect_parameters(encoder.parameters(), heads.projector, heads.bilinear,
                              heads.discriminator),
           config.lr);
  std::optional<Adam> aug_opt;
  if (heads.augmenter) aug_opt.emplace(collect_parameters(heads.augmenter->parameters()),
                                       objective.augmenter_lr);
  const bool use_dropout = encoder_config.dropout > 0.0;

  std::vector<const Graph*> graphs;
  for (const auto& g : dataset.graphs()) graphs.push_back(&g);

  // One gradient step on the tape-level loss returned by build().
  auto step = [&](auto&& build, Rng* rng) {
    Tape tape;
    auto enc = bind_trainable(tape, encoder.parameters());
    auto proj = bind_trainable(tape, heads.projector);
    auto bil = bind_trainable(tape, heads.bilinear);
    auto disc = bind_trainable(tape, heads.discriminator);
    Var loss = build(enc, proj, bil, disc, rng);
    const double value = loss.scalar();
    if (std::isfinite(value)) {
      opt.zero_grad();
      tape.backward(loss);
      opt.step();
    }
    return value;
  };

  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t epoch_seed = derive_seed(config.seed, "epoch", static_cast<std::uint64_t>(epoch));
    Rng dropout_rng(derive_seed(epoch_seed, "dropout"));
    Rng* rng = use_dropout ? &dropout_rng : nullptr;
    double total = 0.0;
    int count = 0;
    auto add_loss = [&](double v) {
      if (!std::isfinite(v)) {
        fail(ErrorCode::kTrainingDiverged,
             "non-finite loss at epoch " + std::to_string(epoch));
      }
      total += v;
      ++count;
    };

    if (kind == ObjectiveKind::kDgi) {
      add_loss(step(
          [&](auto& enc, auto&, auto& bil, auto&, Rng* r) {
            return dgi_objective(encoder, enc, bil[0], *graphs[0],
                                 derive_seed(epoch_seed, "corruption"), r);
          },
          rng));
    } else if (kind == ObjectiveKind::kGca) {
      add_loss(step(
          [&](auto& enc, auto& proj, auto&, auto&, Rng* r) {
            return node_contrast_objective(encoder, enc, proj, objective, *graphs[0], 0,
                                           derive_seed(epoch_seed, "views"), r);
          },
          rng));
    } else if (kind == ObjectiveKind::kGraphCl && node_task) {
      const int n = graphs[0]->num_nodes();
      const int batches = std::max(1, (n + config.batch_size - 1) / config.batch_size);
      for (int b = 0; b < batches; ++b) {
        add_loss(step(
            [&](auto& enc, auto& proj, auto&, auto&, Rng* r) {
              return node_contrast_objective(encoder, enc, proj, objective, *graphs[0],
                                             config.batch_size,
                                             derive_seed(epoch_seed, "views", b), r);
            },
            rng));
      }
    } else {
      std::vector<const Graph*> order = graphs;
      Rng order_rng(derive_seed(epoch_seed, "order"));
      shuffle(order.begin(), order.end(), order_rng);
      for (size_t lo = 0, b = 0; lo < order.size(); lo += static_cast<size_t>(config.batch_size), ++b) {
        const size_t hi = std::min(order.size(), lo + static_cast<size_t>(config.batch_size));
        if (hi - lo < 2) continue;
        std::span<const Graph* const> batch(order.data() + lo, hi - lo);
        const std::uint64_t batch_seed = derive_seed(epoch_seed, "batch", b);
        if (kind == ObjectiveKind::kAdGcl) {
          add_loss(adgcl_step(batch, encoder, heads, objective, opt, *aug_opt, batch_seed)
                       .encoder_loss);
        } else if (kind == ObjectiveKind::kInfoGraph) {
          add_loss(step(
              [&](auto& enc, auto&, auto&, auto& disc, Rng* r) {
                return infograph_objective(encoder, enc, disc, batch, r);
              },
              rng));
        } else {
          add_loss(step(
              [&](auto& enc, auto& proj, auto&, auto&, Rng* r) {
                return graphcl_graph_objective(encoder, enc, proj, objective, batch, batch_seed,
                                               r);
              },
              rng));
        }
      }
      if (count == 0) fail(ErrorCode::kNeedNegatives, "no training batch holds 2 or more graphs");
    }

    const double loss = total / count;
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(EpochRecord{epoch, loss, ms});
    if (loss < best) {
      best = loss;
      stale = 0;
    } else if (config.patience && ++stale >= *config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace grail
