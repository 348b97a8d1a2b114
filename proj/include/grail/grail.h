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

/* Robustness evaluation of graph contrastive encoders: C interface.
 *
 * All functions return a grail_status. On failure a message is available from
 * grail_last_error() on the calling thread until the next call on that
 * thread. Strings returned through char** belong to the caller and must be
 * released with grail_string_free(). Handles are released with the matching
 * *_free function; passing NULL to a free function is a no-op.
 */
#ifndef GRAIL_GRAIL_H_
#define GRAIL_GRAIL_H_

#include <stdint.h>

#if defined(_WIN32)
#define GRAIL_API __declspec(dllexport)
#else
#define GRAIL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum grail_status {
  GRAIL_OK = 0,
  GRAIL_ERR_SPLIT_TOO_SMALL = 10,
  GRAIL_ERR_INVALID_FLIP = 11,
  GRAIL_ERR_INVALID_GRAPH = 12,
  GRAIL_ERR_SHAPE_MISMATCH = 20,
  GRAIL_ERR_NON_SCALAR_LOSS = 21,
  GRAIL_ERR_ASYMMETRIC_ADJACENCY = 22,
  GRAIL_ERR_NON_FINITE = 23,
  GRAIL_ERR_DEGENERATE_AUGMENTATION = 30,
  GRAIL_ERR_CENTRALITY_DIVERGED = 31,
  GRAIL_ERR_NEED_NEGATIVES = 40,
  GRAIL_ERR_TRAINING_DIVERGED = 41,
  GRAIL_ERR_EMPTY_SELECTION = 50,
  GRAIL_ERR_BUDGET_INFEASIBLE = 60,
  GRAIL_ERR_UNDEFINED_DROP = 70,
  GRAIL_ERR_NO_RECORDS = 71,
  GRAIL_ERR_INCOMPLETE_COVERAGE = 72,
  GRAIL_ERR_PARSE = 80,
  GRAIL_ERR_VALIDATION = 81,
  GRAIL_ERR_CONFIG = 82,
  GRAIL_ERR_IO = 83,
  GRAIL_ERR_INVALID_ARGUMENT = 90,
  GRAIL_ERR_INTERNAL = 99
} grail_status;

typedef enum grail_task { GRAIL_TASK_NODE = 0, GRAIL_TASK_GRAPH = 1 } grail_task;

typedef struct grail_dataset grail_dataset;
typedef struct grail_encoder grail_encoder;
typedef struct grail_probe grail_probe;

GRAIL_API const char* grail_version(void);
GRAIL_API const char* grail_status_name(grail_status status);
GRAIL_API const char* grail_last_error(void);
GRAIL_API void grail_string_free(char* s);

/* Datasets. split_seed only matters for files without a stored split. */
GRAIL_API grail_status grail_dataset_load(const char* path, uint64_t split_seed,
                                          grail_dataset** out);
GRAIL_API grail_status grail_dataset_parse(const char* json_text, uint64_t split_seed,
                                           grail_dataset** out);
/* spec_json has the shape of the config's "dataset" object:
 * {"sbm": {...}} or {"graph_sbm": {"num_graphs": n, "a": {...}, "b": {...}}}. */
GRAIL_API grail_status grail_dataset_generate(const char* spec_json, grail_dataset** out);
GRAIL_API grail_status grail_dataset_save(const grail_dataset* dataset, const char* path);
GRAIL_API grail_status grail_dataset_to_json(const grail_dataset* dataset, char** out);
GRAIL_API grail_status grail_dataset_info(const grail_dataset* dataset, grail_task* task,
                                          int* num_graphs, int* num_classes, int* feature_dim);
GRAIL_API void grail_dataset_free(grail_dataset* dataset);

/* Node dataset from edges / features / labels CSV files, written as JSON. */
GRAIL_API grail_status grail_convert_edgelist(const char* edges_csv, const char* features_csv,
                                              const char* labels_csv, uint64_t split_seed,
                                              const char* out_path);

/* Checkpoints written by grail_run (or the C++ API). */
GRAIL_API grail_status grail_encoder_load(const char* manifest_path, grail_encoder** out);
GRAIL_API grail_status grail_encoder_save(const grail_encoder* encoder, const char* manifest_path);
GRAIL_API grail_status grail_encoder_checksum(const grail_encoder* encoder, uint64_t* out);
GRAIL_API void grail_encoder_free(grail_encoder* encoder);
GRAIL_API grail_status grail_probe_load(const char* manifest_path, grail_probe** out);
GRAIL_API grail_status grail_probe_save(const grail_probe* probe, const char* manifest_path);
GRAIL_API void grail_probe_free(grail_probe* probe);

/* Test-split accuracy of probe(encoder(graph)). */
GRAIL_API grail_status grail_accuracy(const grail_probe* probe, const grail_encoder* encoder,
                                      const grail_dataset* dataset, double* out);

/* Evasion attack on the test split. attack_json holds the attack settings
 * ({"kind": "prbcd", "steps": 100, ...}; NULL means PR-BCD defaults). The
 * result is one JSON line. */
GRAIL_API grail_status grail_attack(const grail_probe* probe, const grail_encoder* encoder,
                                    const grail_dataset* dataset, const char* attack_json,
                                    double budget_fraction, uint64_t seed, char** result_json);

/* Runs or resumes an experiment. threads <= 0 uses GRAIL_THREADS or the
 * hardware concurrency. Seeds that fail are counted in *failed_seeds and
 * logged to failures.jsonl; the call still returns GRAIL_OK. */
GRAIL_API grail_status grail_run(const char* config_path, int threads, int* new_records,
                                 int* failed_seeds, char** records_path);

/* Summarizes a records file; reference may be NULL. Writes the summary files
 * next to the records and returns the text table. */
GRAIL_API grail_status grail_report(const char* records_path, const char* reference,
                                    char** table);

#ifdef __cplusplus
}
#endif

#endif /* GRAIL_GRAIL_H_ */
