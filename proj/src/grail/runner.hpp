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
#include <string>
#include <vector>

#include "grail/attacks.hpp"
#include "grail/contrastive.hpp"
#include "grail/data_io.hpp"
#include "grail/encoders.hpp"
#include "grail/metrics.hpp"
#include "grail/probe.hpp"

namespace grail {

// Either a contrastive objective followed by a frozen-encoder probe, or a
// supervised baseline trained end-to-end.
struct ModelSpec {
  std::string id;
  std::optional<ObjectiveKind> objective;  // empty: supervised baseline
  EncoderConfig encoder;
  ObjectiveConfig objective_config;
  double lr = 1e-3;
  int epochs = 100;
  std::optional<int> patience;
  int batch_size = 64;
  ProbeConfig probe;
};

struct AttackSpec {
  std::string id;  // defaults to the attack kind name
  AttackConfig config;
};

struct DatasetSource {
  std::optional<std::string> path;
  std::optional<SbmSpec> sbm;
  // Graph classification from two SBM specs.
  std::optional<SbmSpec> graph_sbm_a;
  std::optional<SbmSpec> graph_sbm_b;
  int num_graphs = 100;
  std::uint64_t split_seed = 0;
};

struct ExperimentConfig {
  std::string dataset_id;
  DatasetSource dataset;
  std::vector<ModelSpec> models;
  std::vector<AttackSpec> attacks;
  double budget_fraction = 0.05;
  int num_seeds = 15;
  std::string output_dir = "grail_out";
  std::uint64_t base_seed = 0;
  bool save_checkpoints = true;

  void validate() const;
};

// Hyperparameter defaults for a model name ("dgi", "graphcl", "gca",
// "infograph", "adgcl", "gcn", "gin") on a task. Unknown pairs are a
// ConfigError.
ModelSpec default_model_spec(const std::string& model, Task task);

// Parses the JSON config. Relative paths resolve against base_dir.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& base_dir = "");
ExperimentConfig load_experiment_config(const std::string& path);

// One entry of the config's "attacks" list.
AttackSpec parse_attack_spec(const std::string& text);

// Same shape as the "dataset" object of the experiment config.
DatasetSource parse_dataset_source(const std::string& text, const std::string& base_dir = "");
GraphDataset materialize_dataset(const DatasetSource& source);

struct SeedFailure {
  std::string model_id;
  int seed = 0;
  std::string stage;
  std::string message;
};

struct RunOptions {
  int threads = 0;  // 0: GRAIL_THREADS or hardware concurrency
  // Stop scheduling work once this many new records have been written.
  std::optional<int> max_new_records;
};

struct RunOutcome {
  std::vector<EvalRecord> records;  // every record in the output file
  int new_records = 0;
  std::vector<SeedFailure> failures;
};

std::string records_path(const ExperimentConfig& config);

RunOutcome run_protocol(const ExperimentConfig& config, const RunOptions& options = {});

struct ReportFiles {
  std::string json_path;
  std::string table_path;
  std::string table;
};

// Writes <stem>.summary.json and <stem>.summary.txt next to the records.
ReportFiles report(const std::string& records_file,
                   const std::optional<std::string>& reference = std::nullopt);

int worker_count(int requested, int work_items);

}  // namespace grail
