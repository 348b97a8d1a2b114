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

#include "grail/autodiff.hpp"
#include "grail/graph.hpp"
#include "grail/seeds.hpp"

namespace grail {

enum class EncoderKind { kGcn, kGin };
enum class Activation { kRelu, kPrelu };
enum class ReadoutKind { kMean, kSum };

std::string_view encoder_kind_name(EncoderKind k);
EncoderKind parse_encoder_kind(std::string_view s);
std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view s);
std::string_view readout_name(ReadoutKind r);
ReadoutKind parse_readout(std::string_view s);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kGcn;
  int num_layers = 1;
  int hidden_dim = 64;
  double dropout = 0.0;
  Activation activation = Activation::kRelu;
  ReadoutKind readout = ReadoutKind::kMean;

  void validate() const;
};

// Parameter layout per layer l:
//   GCN: layer{l}.weight (in x hidden), layer{l}.bias (1 x hidden)
//   GIN: layer{l}.mlp0.{weight,bias}, layer{l}.mlp1.{weight,bias}
//   prelu activation adds layer{l}.prelu (1 x 1)
class EncoderModel {
 public:
  EncoderModel(EncoderConfig config, int input_dim, std::uint64_t seed);
  EncoderModel(EncoderConfig config, int input_dim, std::vector<Parameter> params);

  const EncoderConfig& config() const { return config_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return config_.hidden_dim; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

  // Node representations. `w` is a (possibly relaxed) symmetric adjacency
  // without self-loops, `params` comes from bind_trainable/bind_frozen.
  // Dropout is applied only when dropout_rng is non-null.
  Var forward(std::span<const Var> params, Var w, Var x, Rng* dropout_rng = nullptr) const;

 private:
  void check_layout() const;

  EncoderConfig config_;
  int input_dim_;
  std::vector<Parameter> params_;
};

std::vector<Var> bind_trainable(Tape& tape, std::vector<Parameter>& params);
std::vector<Var> bind_frozen(Tape& tape, const std::vector<Parameter>& params);

// FNV-1a over names, shapes and raw values.
std::uint64_t parameter_checksum(const std::vector<Parameter>& params);

// D^-1/2 (W + I) D^-1/2 with D the row sums of W + I.
Var normalize_adjacency(Var w);
Matrix normalize_adjacency(const Matrix& w);

Var readout(Var h, ReadoutKind kind);
// sigmoid(mean of rows).
Var dgi_summary(Var h);

// Eval-mode helpers on concrete graphs.
Matrix encode_graph_nodes(const EncoderModel& model, const Graph& g);
Matrix encode_graph_nodes(const EncoderModel& model, const Matrix& adjacency, const Matrix& x);
// One readout row per graph.
Matrix encode_graph_level(const EncoderModel& model, std::span<const Graph> graphs);

}  // namespace grail
