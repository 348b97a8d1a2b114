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
#include <span>
#include <vector>

#include "grail/contrastive.hpp"
#include "grail/encoders.hpp"
#include "grail/graph.hpp"

namespace grail {

// Linear classifier on frozen representations: logits = H W + b.
class LinearProbe {
 public:
  LinearProbe(int input_dim, int num_classes, std::uint64_t seed);
  explicit LinearProbe(std::vector<Parameter> params);

  int input_dim() const { return static_cast<int>(params_[0].value.rows()); }
  int num_classes() const { return static_cast<int>(params_[0].value.cols()); }
  // probe.weight (q x k), probe.bias (1 x k).
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

  Var logits(std::span<const Var> params, Var h) const;
  Matrix logits(const Matrix& h) const;

 private:
  std::vector<Parameter> params_;
};

// Mean of -log softmax(logits)[label] over the selected rows (all rows when
// rows is empty-optional).
Var cross_entropy(Var logits, std::span<const int> labels,
                  std::optional<std::span<const int>> rows = std::nullopt);

// Argmax per row; ties go to the lowest class index.
std::vector<int> predict(const Matrix& logits);

struct ProbeConfig {
  int epochs = 300;
  double lr = 1e-2;
  std::uint64_t seed = 0;
};

// Representation of every split unit (node or graph) in eval mode.
// graph_override replaces the dataset graphs one-for-one.
Matrix unit_embeddings(const EncoderModel& encoder, const GraphDataset& dataset,
                       std::span<const Graph> graph_override = {});

LinearProbe train_probe_on_embeddings(const Matrix& embeddings, std::span<const int> labels,
                                      std::span<const int> train_rows, int num_classes,
                                      const ProbeConfig& config);
LinearProbe train_probe(const EncoderModel& encoder, const GraphDataset& dataset,
                        const ProbeConfig& config);

double accuracy_from_logits(const Matrix& logits, std::span<const int> labels,
                            std::span<const int> rows);
double accuracy(const LinearProbe& probe, const EncoderModel& encoder,
                const GraphDataset& dataset, std::span<const int> rows,
                std::span<const Graph> graph_override = {});

// Non-contrastive baseline: encoder and linear head trained end-to-end on the
// training labels.
struct SupervisedConfig {
  int epochs = 200;
  double lr = 1e-2;
  std::optional<int> patience;
  int batch_size = 64;
  std::uint64_t seed = 0;
};

struct SupervisedModel {
  EncoderModel encoder;
  LinearProbe probe;
  std::vector<EpochRecord> history;
  bool early_stopped = false;
};

SupervisedModel train_supervised(const GraphDataset& dataset, const EncoderConfig& encoder_config,
                                 const SupervisedConfig& config);

}  // namespace grail
