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

#include <filesystem>

#include "grail/checkpoint.hpp"
#include "grail/data_io.hpp"
#include "grail/error.hpp"
#include "support.hpp"

using namespace grail;
using namespace grail::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / "grail_test_checkpoint";
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("encoder round trip is bitwise") {
  const fs::path dir = scratch_dir();
  for (auto kind : {EncoderKind::kGcn, EncoderKind::kGin}) {
    EncoderConfig c;
    c.kind = kind;
    c.num_layers = 3;
    c.hidden_dim = 7;
    c.activation = Activation::kPrelu;
    c.readout = ReadoutKind::kSum;
    c.dropout = 0.25;
    const EncoderModel m(c, 5, 42);
    const std::string path = (dir / "enc.json").string();
    save_encoder(m, path);
    CHECK(fs::exists(blob_path_for(path)));
    const EncoderModel back = load_encoder(path);
    CHECK(parameter_checksum(back.parameters()) == parameter_checksum(m.parameters()));
    CHECK(back.config().kind == kind);
    CHECK(back.config().num_layers == 3);
    CHECK(back.config().activation == Activation::kPrelu);
    CHECK(back.config().readout == ReadoutKind::kSum);
    CHECK(back.config().dropout == 0.25);
    CHECK(back.input_dim() == 5);
    const Graph g = random_graph(6, 0.5, 5, 1);
    CHECK(encode_graph_nodes(back, g) == encode_graph_nodes(m, g));
  }
}

TEST_CASE("probe round trip is bitwise") {
  const fs::path dir = scratch_dir();
  const LinearProbe p(6, 3, 9);
  const std::string path = (dir / "probe.json").string();
  save_probe(p, path);
  const LinearProbe back = load_probe(path);
  CHECK(parameter_checksum(back.parameters()) == parameter_checksum(p.parameters()));
}

TEST_CASE("corrupt checkpoints are rejected") {
  const fs::path dir = scratch_dir();
  const std::string path = (dir / "enc.json").string();
  EncoderConfig c;
  save_encoder(EncoderModel(c, 3, 1), path);
  fs::resize_file(blob_path_for(path), 8);
  CHECK_THROWS_AS(load_encoder(path), Error);
  CHECK_THROWS_AS(load_probe(path), Error);
  CHECK_THROWS_AS(load_encoder((dir / "none.json").string()), Error);
}
