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

#include "grail/probe.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "grail/error.hpp"
#include "grail/optim.hpp"
#include "grail/seeds.hpp"

namespace grail {

namespace {

std::vector<int> all_rows(int n) {
  std::vector<int> r(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) r[static_cast<size_t>(i)] = i;
  return r;
}

}  // namespace

LinearProbe::LinearProbe(int input_dim, int num_classes, std::uint64_t seed) {
  if (input_dim < 1 || num_classes < 1) fail(ErrorCode::kConfigError, "probe dims must be >= 1");
  Rng rng(derive_seed(seed, "probe"));
  const double bound = std::sqrt(6.0 / (input_dim + num_classes));
  Matrix w(input_dim, num_classes);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = (2.0 * uniform01(rng) - 1.0) * bound;
  params_.emplace_back("probe.weight", std::move(w));
  params_.emplace_back("probe.bias", Matrix::Zero(1, num_classes));
}

LinearProbe::LinearProbe(std::vector<Parameter> params) : params_(std::move(params)) {
  if (params_.size() != 2 || params_[0].name != "probe.weight" || params_[1].name != "probe.bias" ||
      params_[1].value.rows() != 1 || params_[1].value.cols() != params_[0].value.cols()) {
    fail(ErrorCode::kShapeMismatch, "probe parameters must be probe.weight (q x k), probe.bias (1 x k)");
  }
  for (const auto& p : params_) {
    if (!p.value.allFinite()) fail(ErrorCode::kNonFinite, "probe parameter " + p.name + " is not finite");
  }
}

Var LinearProbe::logits(std::span<const Var> params, Var h) const {
  if (params.size() != 2) fail(ErrorCode::kShapeMismatch, "probe expects 2 bound parameters");
  return ad::add_row(ad::matmul(h, params[0]), params[1]);
}

Matrix LinearProbe::logits(const Matrix& h) const {
  if (h.cols() != params_[0].value.rows()) {
    fail(ErrorCode::kShapeMismatch, "embedding dim does not match probe");
  }
  Matrix out = h * params_[0].value;
  out.rowwise() += params_[1].value.row(0);
  return out;
}

Var cross_entropy(Var logits, std::span<const int> labels,
                  std::optional<std::span<const int>> rows) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    fail(ErrorCode::kShapeMismatch, "one label per logit row expected");
  }
  std::vector<int> sel = rows ? std::vector<int>(rows->begin(), rows->end())
                              : all_rows(static_cast<int>(logits.rows()));
  if (sel.empty()) fail(ErrorCode::kEmptySelection, "cross_entropy over an empty selection");
  std::vector<int> targets;
  for (int r : sel) {
    if (r < 0 || r >= logits.rows()) fail(ErrorCode::kShapeMismatch, "row index out of range");
    const int y = labels[static_cast<size_t>(r)];
    if (y < 0 || y >= logits.cols()) fail(ErrorCode::kShapeMismatch, "label out of range");
    targets.push_back(y);
  }
  Var picked = ad::pick(ad::log_softmax_rows(ad::row_index(logits, sel)), targets);
  return ad::neg(ad::mean(picked));
}

std::vector<int> predict(const Matrix& logits) {
  std::vector<int> out(static_cast<size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = static_cast<int>(c);
    }
    out[static_cast<size_t>(r)] = best;
  }
  return out;
}

Matrix unit_embeddings(const EncoderModel& encoder, const GraphDataset& dataset,
                       std::span<const Graph> graph_override) {
  if (!graph_override.empty() && graph_override.size() != dataset.graphs().size()) {
    fail(ErrorCode::kShapeMismatch, "graph_override must replace every dataset graph");
  }
  std::span<const Graph> graphs = graph_override.empty()
                                      ? std::span<const Graph>(dataset.graphs())
                                      : graph_override;
  if (dataset.task() == Task::kNode) return encode_graph_nodes(encoder, graphs[0]);
  return encode_graph_level(encoder, graphs);
}

LinearProbe train_probe_on_embeddings(const Matrix& embeddings, std::span<const int> labels,
                                      std::span<const int> train_rows, int num_classes,
                                      const ProbeConfig& config) {
  if (config.epochs < 0 || !(config.lr >= 0.0)) fail(ErrorCode::kConfigError, "invalid probe config");
  if (train_rows.empty()) fail(ErrorCode::kEmptySelection, "probe training split is empty");
  LinearProbe probe(static_cast<int>(embeddings.cols()), num_classes, config.seed);
  Adam opt(collect_parameters(probe.parameters()), config.lr);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Tape tape;
    auto params = bind_trainable(tape, probe.parameters());
    Var loss = cross_entropy(probe.logits(params, tape.constant(embeddings)), labels, train_rows);
    if (!std::isfinite(loss.scalar())) {
      fail(ErrorCode::kTrainingDiverged, "probe loss not finite at epoch " + std::to_string(epoch));
    }
    opt.zero_grad();
    tape.backward(loss);
    opt.step();
  }
  return probe;
}

LinearProbe train_probe(const EncoderModel& encoder, const GraphDataset& dataset,
                        const ProbeConfig& config) {
  const Matrix emb = unit_embeddings(encoder, dataset);
  const auto labels = dataset.labels();
  return train_probe_on_embeddings(emb, labels, dataset.split().train, dataset.num_classes(),
                                   config);
}

double accuracy_from_logits(const Matrix& logits, std::span<const int> labels,
                            std::span<const int> rows) {
  if (rows.empty()) fail(ErrorCode::kEmptySelection, "accuracy over an empty split");
  const auto pred = predict(logits);
  int hits = 0;
  for (int r : rows) {
    hits += pred[static_cast<size_t>(r)] == labels[static_cast<size_t>(r)] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double accuracy(const LinearProbe& probe, const EncoderModel& encoder,
                const GraphDataset& dataset, std::span<const int> rows,
                std::span<const Graph> graph_override) {
  if (rows.empty()) fail(ErrorCode::kEmptySelection, "accuracy over an empty split");
  const auto labels = dataset.labels();
  return accuracy_from_logits(probe.logits(unit_embeddings(encoder, dataset, graph_override)),
                              labels, rows);
}

SupervisedModel train_supervised(const GraphDataset& dataset, const EncoderConfig& encoder_config,
                                 const SupervisedConfig& config) {
  encoder_config.validate();
  if (config.epochs < 0 || !(config.lr >= 0.0) || config.batch_size < 1) {
    fail(ErrorCode::kConfigError, "invalid supervised training config");
  }
  if (config.patience && *config.patience < 1) fail(ErrorCode::kConfigError, "patience must be >= 1");
  const auto& train = dataset.split().train;
  if (train.empty()) fail(ErrorCode::kEmptySelection, "training split is empty");
  SupervisedModel m{EncoderModel(encoder_config, dataset.feature_dim(),
                                 derive_seed(config.seed, "encoder")),
                    LinearProbe(encoder_config.hidden_dim, dataset.num_classes(),
                                derive_seed(config.seed, "head")),
                    {},
                    false};
  Adam opt(collect_parameters(m.encoder.parameters(), m.probe.parameters()), config.lr);
  const auto labels = dataset.labels();
  const bool use_dropout = encoder_config.dropout > 0.0;

  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t epoch_seed = derive_seed(config.seed, "epoch", static_cast<std::uint64_t>(epoch));
    Rng dropout_rng(derive_seed(epoch_seed, "dropout"));
    Rng* rng = use_dropout ? &dropout_rng : nullptr;
    double total = 0.0;
    int count = 0;
    auto run_batch = [&](auto&& build) {
      Tape tape;
      auto enc = bind_trainable(tape, m.encoder.parameters());
      auto head = bind_trainable(tape, m.probe.parameters());
      Var loss = build(tape, enc, head);
      if (!std::isfinite(loss.scalar())) {
        fail(ErrorCode::kTrainingDiverged, "non-finite loss at epoch " + std::to_string(epoch));
      }
      opt.zero_grad();
      tape.backward(loss);
      opt.step();
      total += loss.scalar();
      ++count;
    };
    if (dataset.task() == Task::kNode) {
      const Graph& g = dataset.graph(0);
      run_batch([&](Tape& tape, auto& enc, auto& head) {
        Var h = m.encoder.forward(enc, tape.constant(dense_adjacency(g)),
                                  tape.constant(g.features()), rng);
        return cross_entropy(m.probe.logits(head, h), labels, train);
      });
    } else {
      std::vector<int> order = train;
      Rng order_rng(derive_seed(epoch_seed, "order"));
      shuffle(order.begin(), order.end(), order_rng);
      for (size_t lo = 0; lo < order.size(); lo += static_cast<size_t>(config.batch_size)) {
        const size_t hi = std::min(order.size(), lo + static_cast<size_t>(config.batch_size));
        run_batch([&](Tape& tape, auto& enc, auto& head) {
          std::vector<Var> rows;
          std::vector<int> ys;
          for (size_t k = lo; k < hi; ++k) {
            const Graph& g = dataset.graph(order[k]);
            Var h = m.encoder.forward(enc, tape.constant(dense_adjacency(g)),
                                      tape.constant(g.features()), rng);
            rows.push_back(readout(h, encoder_config.readout));
            ys.push_back(labels[static_cast<size_t>(order[k])]);
          }
          return cross_entropy(m.probe.logits(head, ad::concat_rows(rows)), ys);
        });
      }
    }
    const double loss = total / count;
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    m.history.push_back(EpochRecord{epoch, loss, ms});
    if (loss < best) {
      best = loss;
      stale = 0;
    } else if (config.patience && ++stale >= *config.patience) {
      m.early_stopped = true;
      break;
    }
  }
  return m;
}

}  // namespace grail
