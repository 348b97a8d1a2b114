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

#include "grail/encoders.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "grail/error.hpp"

namespace grail {

std::string_view encoder_kind_name(EncoderKind k) { return k == EncoderKind::kGcn ? "gcn" : "gin"; }

EncoderKind parse_encoder_kind(std::string_view s) {
  if (s == "gcn" || s == "GCN") return EncoderKind::kGcn;
  if (s == "gin" || s == "GIN") return EncoderKind::kGin;
  fail(ErrorCode::kConfigError, "unknown encoder kind \"" + std::string(s) + "\"");
}

std::string_view activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "prelu"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "prelu") return Activation::kPrelu;
  fail(ErrorCode::kConfigError, "unknown activation \"" + std::string(s) + "\"");
}

std::string_view readout_name(ReadoutKind r) { return r == ReadoutKind::kMean ? "mean" : "sum"; }

ReadoutKind parse_readout(std::string_view s) {
  if (s == "mean") return ReadoutKind::kMean;
  if (s == "sum") return ReadoutKind::kSum;
  fail(ErrorCode::kConfigError, "unknown readout \"" + std::string(s) + "\"");
}

void EncoderConfig::validate() const {
  if (num_layers < 1) fail(ErrorCode::kConfigError, "num_layers must be >= 1");
  if (hidden_dim < 1) fail(ErrorCode::kConfigError, "hidden_dim must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorCode::kConfigError, "dropout must be in [0, 1)");
}

namespace {

Matrix glorot(int in, int out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (in + out));
  Matrix m(in, out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform01(rng) - 1.0) * bound;
  return m;
}

int params_per_layer(const EncoderConfig& c) {
  const int base = c.kind == EncoderKind::kGcn ? 2 : 4;
  return base + (c.activation == Activation::kPrelu ? 1 : 0);
}

Var apply_dropout(Var h, double p, Rng* rng) {
  if (rng == nullptr || p <= 0.0) return h;
  Matrix mask(h.rows(), h.cols());
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = uniform01(*rng) < p ? 0.0 : keep;
  }
  return ad::mul(h, h.tape()->constant(std::move(mask)));
}

}  // namespace

EncoderModel::EncoderModel(EncoderConfig config, int input_dim, std::uint64_t seed)
    : config_(config), input_dim_(input_dim) {
  config_.validate();
  if (input_dim < 1) fail(ErrorCode::kConfigError, "input_dim must be >= 1");
  Rng rng(seed);
  const int q = config_.hidden_dim;
  for (int l = 0; l < config_.num_layers; ++l) {
    const int in = l == 0 ? input_dim : q;
    const std::string p = "layer" + std::to_string(l);
    if (config_.kind == EncoderKind::kGcn) {
      params_.emplace_back(p + ".weight", glorot(in, q, rng));
      params_.emplace_back(p + ".bias", Matrix::Zero(1, q));
    } else {
      params_.emplace_back(p + ".mlp0.weight", glorot(in, q, rng));
      params_.emplace_back(p + ".mlp0.bias", Matrix::Zero(1, q));
      params_.emplace_back(p + ".mlp1.weight", glorot(q, q, rng));
      params_.emplace_back(p + ".mlp1.bias", Matrix::Zero(1, q));
    }
    if (config_.activation == Activation::kPrelu) {
      params_.emplace_back(p + ".prelu", Matrix::Constant(1, 1, 0.25));
    }
  }
}

EncoderModel::EncoderModel(EncoderConfig config, int input_dim, std::vector<Parameter> params)
    : config_(config), input_dim_(input_dim), params_(std::move(params)) {
  config_.validate();
  check_layout();
}

void EncoderModel::check_layout() const {
  const int per = params_per_layer(config_);
  if (static_cast<int>(params_.size()) != per * config_.num_layers) {
    fail(ErrorCode::kValidationError, "encoder parameter count does not match config");
  }
  const int q = config_.hidden_dim;
  for (int l = 0; l < config_.num_layers; ++l) {
    const int in = l == 0 ? input_dim_ : q;
    const auto& w0 = params_[static_cast<size_t>(l * per)].value;
    if (w0.rows() != in || w0.cols() != q) {
      fail(ErrorCode::kValidationError, "encoder layer " + std::to_string(l) + " weight shape");
    }
  }
}

Var EncoderModel::forward(std::span<const Var> params, Var w, Var x, Rng* dropout_rng) const {
  if (params.size() != params_.size()) {
    fail(ErrorCode::kShapeMismatch, "bound parameter count does not match model");
  }
  if (x.cols() != input_dim_) {
    fail(ErrorCode::kShapeMismatch, "feature dim " + std::to_string(x.cols()) +
                                        " != encoder input " + std::to_string(input_dim_));
  }
  if (w.rows() != x.rows() || w.cols() != x.rows()) {
    fail(ErrorCode::kShapeMismatch, "adjacency does not match node count");
  }
  const int per = params_per_layer(config_);
  Var h = x;
  Var a_hat;
  if (config_.kind == EncoderKind::kGcn) a_hat = normalize_adjacency(w);
  for (int l = 0; l < config_.num_layers; ++l) {
    const size_t base = static_cast<size_t>(l * per);
    h = apply_dropout(h, config_.dropout, dropout_rng);
    Var z;
    if (config_.kind == EncoderKind::kGcn) {
      z = ad::add_row(ad::matmul(a_hat, ad::matmul(h, params[base])), params[base + 1]);
    } else {
      Var agg = ad::add(h, ad::weighted_message_pass(w, h));
      Var hidden = ad::relu(ad::add_row(ad::matmul(agg, params[base]), params[base + 1]));
      z = ad::add_row(ad::matmul(hidden, params[base + 2]), params[base + 3]);
    }
    h = config_.activation == Activation::kRelu ? ad::relu(z) : ad::prelu(z, params[base + per - 1]);
  }
  return h;
}

std::vector<Var> bind_trainable(Tape& tape, std::vector<Parameter>& params) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (auto& p : params) out.push_back(tape.param(p));
  return out;
}

std::vector<Var> bind_frozen(Tape& tape, const std::vector<Parameter>& params) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(tape.constant(p.value));
  return out;
}

std::uint64_t parameter_checksum(const std::vector<Parameter>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& p : params) {
    mix(p.name.data(), p.name.size());
    const std::int64_t shape[2] = {p.value.rows(), p.value.cols()};
    mix(shape, sizeof(shape));
    mix(p.value.data(), static_cast<size_t>(p.value.size()) * sizeof(double));
  }
  return h;
}

Var normalize_adjacency(Var w) {
  Var w_self = ad::add_identity(w);
  Var deg_inv_sqrt = ad::pow(ad::sum_cols(w_self), -0.5);
  return ad::scale_cols(ad::scale_rows(w_self, deg_inv_sqrt), ad::transpose(deg_inv_sqrt));
}

Matrix normalize_adjacency(const Matrix& w) {
  Tape tape;
  return normalize_adjacency(tape.constant(w)).value();
}

Var readout(Var h, ReadoutKind kind) {
  return kind == ReadoutKind::kMean ? ad::mean_rows(h) : ad::sum_rows(h);
}

Var dgi_summary(Var h) { return ad::sigmoid(ad::mean_rows(h)); }

Matrix encode_graph_nodes(const EncoderModel& model, const Matrix& adjacency, const Matrix& x) {
  Tape tape;
  auto params = bind_frozen(tape, model.parameters());
  return model.forward(params, tape.constant(adjacency), tape.constant(x)).value();
}

Matrix encode_graph_nodes(const EncoderModel& model, const Graph& g) {
  return encode_graph_nodes(model, dense_adjacency(g), g.features());
}

Matrix encode_graph_level(const EncoderModel& model, std::span<const Graph> graphs) {
  Matrix out(static_cast<Eigen::Index>(graphs.size()), model.output_dim());
  for (size_t k = 0; k < graphs.size(); ++k) {
    Tape tape;
    auto params = bind_frozen(tape, model.parameters());
    Var h = model.forward(params, tape.constant(dense_adjacency(graphs[k])),
                          tape.constant(graphs[k].features()));
    out.row(static_cast<Eigen::Index>(k)) = readout(h, model.config().readout).value().row(0);
  }
  return out;
}

}  // namespace grail
