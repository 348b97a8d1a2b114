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

#include "grail/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "grail/data_io.hpp"
#include "grail/error.hpp"

namespace grail {

using json = nlohmann::json;

namespace {

constexpr const char* kFormat = "grail-checkpoint";
constexpr int kVersion = 1;

void put_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double get_le(const std::string& in, size_t offset) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + static_cast<size_t>(b)]))
            << (8 * b);
  }
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void save_parameters(const std::string& kind, json meta, const std::vector<Parameter>& params,
                     const std::string& manifest_path) {
  const std::string blob_path = blob_path_for(manifest_path);
  std::string blob;
  json entries = json::array();
  for (const auto& p : params) {
    entries.push_back({{"name", p.name},
                       {"shape", {p.value.rows(), p.value.cols()}},
                       {"offset", blob.size() / 8}});
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) put_le(blob, p.value(r, c));
    }
  }
  json doc{{"format", kFormat},
           {"version", kVersion},
           {"kind", kind},
           {"meta", std::move(meta)},
           {"blob", std::filesystem::path(blob_path).filename().string()},
           {"parameters", std::move(entries)}};
  write_text_file(blob_path, blob);
  write_text_file(manifest_path, doc.dump(2));
}

std::pair<json, std::vector<Parameter>> load_parameters(const std::string& kind,
                                                        const std::string& manifest_path) {
  json doc;
  const std::string text = read_text_file(manifest_path);
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, manifest_path + ": " + e.what());
  }
  try {
    if (doc.at("format") != kFormat) fail(ErrorCode::kParseError, manifest_path + ": not a checkpoint");
    if (doc.at("kind") != kind) {
      fail(ErrorCode::kParseError, manifest_path + ": expected a " + kind + " checkpoint");
    }
    const auto blob_file =
        std::filesystem::path(manifest_path).parent_path() / doc.at("blob").get<std::string>();
    const std::string blob = read_text_file(blob_file.string());
    std::vector<Parameter> params;
    for (const auto& e : doc.at("parameters")) {
      const auto rows = e.at("shape").at(0).get<Eigen::Index>();
      const auto cols = e.at("shape").at(1).get<Eigen::Index>();
      const auto offset = e.at("offset").get<size_t>();
      if (rows < 0 || cols < 0 || (offset + static_cast<size_t>(rows * cols)) * 8 > blob.size()) {
        fail(ErrorCode::kParseError, manifest_path + ": blob too short for " +
                                         e.at("name").get<std::string>());
      }
      Matrix v(rows, cols);
      size_t pos = offset * 8;
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c, pos += 8) v(r, c) = get_le(blob, pos);
      }
      params.emplace_back(e.at("name").get<std::string>(), std::move(v));
    }
    return {doc.at("meta"), std::move(params)};
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, manifest_path + ": " + e.what());
  }
}

}  // namespace

std::string blob_path_for(const std::string& manifest_path) {
  return std::filesystem::path(manifest_path).replace_extension(".bin").string();
}

void save_encoder(const EncoderModel& model, const std::string& manifest_path) {
  const auto& c = model.config();
  json meta{{"encoder", std::string(encoder_kind_name(c.kind))},
            {"num_layers", c.num_layers},
            {"hidden_dim", c.hidden_dim},
            {"dropout", c.dropout},
            {"activation", std::string(activation_name(c.activation))},
            {"readout", std::string(readout_name(c.readout))},
            {"input_dim", model.input_dim()}};
  save_parameters("encoder", std::move(meta), model.parameters(), manifest_path);
}

EncoderModel load_encoder(const std::string& manifest_path) {
  auto [meta, params] = load_parameters("encoder", manifest_path);
  try {
    EncoderConfig c;
    c.kind = parse_encoder_kind(meta.at("encoder").get<std::string>());
    c.num_layers = meta.at("num_layers").get<int>();
    c.hidden_dim = meta.at("hidden_dim").get<int>();
    c.dropout = meta.at("dropout").get<double>();
    c.activation = parse_activation(meta.at("activation").get<std::string>());
    c.readout = parse_readout(meta.at("readout").get<std::string>());
    return EncoderModel(c, meta.at("input_dim").get<int>(), std::move(params));
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, manifest_path + ": " + e.what());
  }
}

void save_probe(const LinearProbe& probe, const std::string& manifest_path) {
  json meta{{"input_dim", probe.input_dim()}, {"num_classes", probe.num_classes()}};
  save_parameters("probe", std::move(meta), probe.parameters(), manifest_path);
}

LinearProbe load_probe(const std::string& manifest_path) {
  auto loaded = load_parameters("probe", manifest_path);
  return LinearProbe(std::move(loaded.second));
}

}  // namespace grail
