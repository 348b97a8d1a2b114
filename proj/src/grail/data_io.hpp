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
#include <string>

#include "grail/graph.hpp"

namespace grail {

struct SbmSpec {
  int blocks = 2;
  int nodes_per_block = 100;
  double p_in = 0.1;
  double p_out = 0.01;
  int feature_dim = 16;
  double feature_signal = 1.0;  // distance of each class mean from the origin
  std::uint64_t seed = 0;

  void validate() const;
};

// Canonical JSON dataset document. A missing split is replaced by a seeded
// 80/20 random split.
GraphDataset parse_dataset(const std::string& text, std::uint64_t split_seed = 0);
GraphDataset load_dataset(const std::string& path, std::uint64_t split_seed = 0);
std::string dataset_to_json(const GraphDataset& dataset);
void save_dataset(const GraphDataset& dataset, const std::string& path);

// Single SBM graph with node label = block id and Gaussian class-mean
// features plus unit noise.
GraphDataset generate_sbm_node_dataset(const SbmSpec& spec);

// Half the graphs drawn from spec_a (label 0), half from spec_b (label 1),
// shuffled, 80/20 split. Each graph reuses the spec with a derived seed.
GraphDataset generate_graph_classification_dataset(int num_graphs, const SbmSpec& spec_a,
                                                   const SbmSpec& spec_b, std::uint64_t seed);

// Node dataset from three CSV files: edges ("i,j" per line), features (one row per
// node), labels (one label per line, or "node,label"). Header lines are
// skipped.
GraphDataset convert_edgelist(const std::string& edges_csv, const std::string& features_csv,
                              const std::string& labels_csv, std::uint64_t split_seed = 0);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace grail
