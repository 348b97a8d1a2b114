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

#include "grail/grail.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "grail/attacks.hpp"
#include "grail/checkpoint.hpp"
#include "grail/data_io.hpp"
#include "grail/error.hpp"
#include "grail/probe.hpp"
#include "grail/runner.hpp"

struct grail_dataset {
  grail::GraphDataset value;
};
struct grail_encoder {
  grail::EncoderModel value;
};
struct grail_probe {
  grail::LinearProbe value;
};

namespace {

thread_local std::string last_error;

grail_status set_error(grail_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename F>
grail_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return GRAIL_OK;
  } catch (const grail::Error& e) {
    return set_error(static_cast<grail_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GRAIL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GRAIL_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(GRAIL_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename... P>
bool any_null(P... ptrs) {
  return ((ptrs == nullptr) || ...);
}

}  // namespace

#define GRAIL_REQUIRE(...)                                                    \
  do {                                                                        \
    if (any_null(__VA_ARGS__)) {                                              \
      return set_error(GRAIL_ERR_INVALID_ARGUMENT, "null argument");          \
    }                                                                         \
  } while (0)

extern "C" {

const char* grail_version(void) { return "0.1.0"; }

const char* grail_status_name(grail_status status) {
  switch (status) {
    case GRAIL_OK: return "Ok";
    case GRAIL_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case GRAIL_ERR_INTERNAL: return "Internal";
    default: break;
  }
  const std::string_view name = grail::error_code_name(static_cast<grail::ErrorCode>(status));
  return name.data();
}

const char* grail_last_error(void) { return last_error.c_str(); }

void grail_string_free(char* s) { std::free(s); }

grail_status grail_dataset_load(const char* path, uint64_t split_seed, grail_dataset** out) {
  GRAIL_REQUIRE(path, out);
  return guarded([&] { *out = new grail_dataset{grail::load_dataset(path, split_seed)}; });
}

grail_status grail_dataset_parse(const char* json_text, uint64_t split_seed, grail_dataset** out) {
  GRAIL_REQUIRE(json_text, out);
  return guarded([&] { *out = new grail_dataset{grail::parse_dataset(json_text, split_seed)}; });
}

grail_status grail_dataset_generate(const char* spec_json, grail_dataset** out) {
  GRAIL_REQUIRE(spec_json, out);
  return guarded([&] {
    *out = new grail_dataset{grail::materialize_dataset(grail::parse_dataset_source(spec_json))};
  });
}

grail_status grail_dataset_save(const grail_dataset* dataset, const char* path) {
  GRAIL_REQUIRE(dataset, path);
  return guarded([&] { grail::save_dataset(dataset->value, path); });
}

grail_status grail_dataset_to_json(const grail_dataset* dataset, char** out) {
  GRAIL_REQUIRE(dataset, out);
  return guarded([&] { *out = dup_string(grail::dataset_to_json(dataset->value)); });
}

grail_status grail_dataset_info(const grail_dataset* dataset, grail_task* task, int* num_graphs,
                                int* num_classes, int* feature_dim) {
  GRAIL_REQUIRE(dataset);
  const auto& d = dataset->value;
  if (task) *task = d.task() == grail::Task::kNode ? GRAIL_TASK_NODE : GRAIL_TASK_GRAPH;
  if (num_graphs) *num_graphs = static_cast<int>(d.graphs().size());
  if (num_classes) *num_classes = d.num_classes();
  if (feature_dim) *feature_dim = d.feature_dim();
  last_error.clear();
  return GRAIL_OK;
}

void grail_dataset_free(grail_dataset* dataset) { delete dataset; }

grail_status grail_convert_edgelist(const char* edges_csv, const char* features_csv,
                                    const char* labels_csv, uint64_t split_seed,
                                    const char* out_path) {
  GRAIL_REQUIRE(edges_csv, features_csv, labels_csv, out_path);
  return guarded([&] {
    const grail::GraphDataset d =
        grail::convert_edgelist(edges_csv, features_csv, labels_csv, split_seed);
    grail::save_dataset(d, out_path);
  });
}

grail_status grail_encoder_load(const char* manifest_path, grail_encoder** out) {
  GRAIL_REQUIRE(manifest_path, out);
  return guarded([&] { *out = new grail_encoder{grail::load_encoder(manifest_path)}; });
}

grail_status grail_encoder_save(const grail_encoder* encoder, const char* manifest_path) {
  GRAIL_REQUIRE(encoder, manifest_path);
  return guarded([&] { grail::save_encoder(encoder->value, manifest_path); });
}

grail_status grail_encoder_checksum(const grail_encoder* encoder, uint64_t* out) {
  GRAIL_REQUIRE(encoder, out);
  return guarded([&] { *out = grail::parameter_checksum(encoder->value.parameters()); });
}

void grail_encoder_free(grail_encoder* encoder) { delete encoder; }

grail_status grail_probe_load(const char* manifest_path, grail_probe** out) {
  GRAIL_REQUIRE(manifest_path, out);
  return guarded([&] { *out = new grail_probe{grail::load_probe(manifest_path)}; });
}

grail_status grail_probe_save(const grail_probe* probe, const char* manifest_path) {
  GRAIL_REQUIRE(probe, manifest_path);
  return guarded([&] { grail::save_probe(probe->value, manifest_path); });
}

void grail_probe_free(grail_probe* probe) { delete probe; }

grail_status grail_accuracy(const grail_probe* probe, const grail_encoder* encoder,
                            const grail_dataset* dataset, double* out) {
  GRAIL_REQUIRE(probe, encoder, dataset, out);
  return guarded([&] {
    *out = grail::accuracy(probe->value, encoder->value, dataset->value,
                           dataset->value.split().test);
  });
}

grail_status grail_attack(const grail_probe* probe, const grail_encoder* encoder,
                          const grail_dataset* dataset, const char* attack_json,
                          double budget_fraction, uint64_t seed, char** result_json) {
  GRAIL_REQUIRE(probe, encoder, dataset, result_json);
  return guarded([&] {
    grail::AttackConfig config;
    if (attack_json) config = grail::parse_attack_spec(attack_json).config;
    config.seed = seed;
    const grail::AttackResult r =
        grail::run_attack(probe->value, encoder->value, dataset->value, budget_fraction, config);
    *result_json = dup_string(grail::attack_result_json(r));
  });
}

grail_status grail_run(const char* config_path, int threads, int* new_records, int* failed_seeds,
                       char** records_path) {
  GRAIL_REQUIRE(config_path);
  return guarded([&] {
    const grail::ExperimentConfig config = grail::load_experiment_config(config_path);
    grail::RunOptions options;
    options.threads = threads;
    const grail::RunOutcome outcome = grail::run_protocol(config, options);
    if (new_records) *new_records = outcome.new_records;
    if (failed_seeds) *failed_seeds = static_cast<int>(outcome.failures.size());
    if (records_path) *records_path = dup_string(grail::records_path(config));
  });
}

grail_status grail_report(const char* records_path, const char* reference, char** table) {
  GRAIL_REQUIRE(records_path);
  return guarded([&] {
    std::optional<std::string> ref;
    if (reference) ref = reference;
    const grail::ReportFiles files = grail::report(records_path, ref);
    if (table) *table = dup_string(files.table);
  });
}

}  // extern "C"
