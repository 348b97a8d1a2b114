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

#include <string>
#include <vector>

#include "grail/encoders.hpp"
#include "grail/probe.hpp"

namespace grail {

// Checkpoints are a JSON manifest (config, parameter names and shapes) next to
// a binary blob of row-major little-endian float64 values. The blob path is
// the manifest path with its extension replaced by ".bin".
std::string blob_path_for(const std::string& manifest_path);

void save_encoder(const EncoderModel& model, const std::string& manifest_path);
EncoderModel load_encoder(const std::string& manifest_path);

void save_probe(const LinearProbe& probe, const std::string& manifest_path);
LinearProbe load_probe(const std::string& manifest_path);

}  // namespace grail
