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

// Command line front end over the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "grail/grail.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(grail_status s) {
  switch (s) {
    case GRAIL_OK: return kExitOk;
    case GRAIL_ERR_CONFIG:
    case GRAIL_ERR_INVALID_ARGUMENT: return kExitConfig;
    default: return kExitRuntime;
  }
}

int report_failure(grail_status s) {
  std::cerr << "grail: " << grail_last_error() << "\n";
  return exit_code_for(s);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Frees a returned string when leaving scope.
struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { grail_string_free(ptr); }
};

int cmd_gen_data(const std::string& spec_path, const std::string& out) {
  std::ifstream probe(spec_path);
  if (!probe) {
    std::cerr << "grail: cannot read spec '" << spec_path << "'\n";
    return kExitConfig;
  }
  grail_dataset* ds = nullptr;
  grail_status s = grail_dataset_generate(read_file(spec_path).c_str(), &ds);
  if (s != GRAIL_OK) return report_failure(s);
  s = grail_dataset_save(ds, out.c_str());
  grail_dataset_free(ds);
  if (s != GRAIL_OK) return report_failure(s);
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

int cmd_run(const std::string& config, int threads) {
  int new_records = 0, failed = 0;
  OwnedString path;
  const grail_status s = grail_run(config.c_str(), threads, &new_records, &failed, &path.ptr);
  if (s != GRAIL_OK) return report_failure(s);
  std::cout << new_records << " new records in " << path.ptr << "\n";
  if (failed > 0) {
    std::cerr << "grail: " << failed << " seed(s) failed; see failures.jsonl\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_report(const std::string& records, const std::optional<std::string>& reference) {
  OwnedString table;
  const grail_status s =
      grail_report(records.c_str(), reference ? reference->c_str() : nullptr, &table.ptr);
  if (s != GRAIL_OK) return report_failure(s);
  std::cout << table.ptr;
  return kExitOk;
}

struct AttackArgs {
  std::string encoder, probe, data, kind = "prbcd", loss = "ce", out;
  double budget = 0.05;
  int steps = 100;
  int block_size = 0;
  std::uint64_t seed = 0;
};

int cmd_attack(const AttackArgs& a) {
  grail_encoder* enc = nullptr;
  grail_probe* probe = nullptr;
  grail_dataset* ds = nullptr;
  grail_status s = grail_encoder_load(a.encoder.c_str(), &enc);
  if (s == GRAIL_OK) s = grail_probe_load(a.probe.c_str(), &probe);
  if (s == GRAIL_OK) s = grail_dataset_load(a.data.c_str(), 0, &ds);
  OwnedString result;
  if (s == GRAIL_OK) {
    const std::string spec = "{\"kind\":\"" + a.kind + "\",\"loss\":\"" + a.loss +
                             "\",\"steps\":" + std::to_string(a.steps) +
                             ",\"block_size\":" + std::to_string(a.block_size) + "}";
    s = grail_attack(probe, enc, ds, spec.c_str(), a.budget, a.seed, &result.ptr);
  }
  grail_dataset_free(ds);
  grail_probe_free(probe);
  grail_encoder_free(enc);
  if (s != GRAIL_OK) return report_failure(s);
  if (a.out.empty()) {
    std::cout << result.ptr << "\n";
  } else {
    std::ofstream(a.out, std::ios::app) << result.ptr << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial robustness evaluation of graph contrastive encoders"};
  app.set_version_flag("--version", std::string(grail_version()));
  app.require_subcommand(1);

  std::string spec_path, data_out = "data.json";
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset from a JSON spec");
  gen->add_option("spec", spec_path, "Dataset spec ({\"sbm\": {...}} or {\"graph_sbm\": {...}})")
      ->required();
  gen->add_option("-o,--output", data_out, "Output dataset file");

  std::string config_path;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run or resume an experiment");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--threads", threads, "Worker threads (default: GRAIL_THREADS or all cores)");

  std::string records;
  std::optional<std::string> reference;
  auto* rep = app.add_subcommand("report", "Summarize a records file");
  rep->add_option("records", records, "records.jsonl")->required();
  rep->add_option("--reference", reference, "Model id for the delta section");

  AttackArgs attack;
  auto* atk = app.add_subcommand("attack", "Attack a trained encoder and probe");
  atk->add_option("encoder", attack.encoder, "Encoder checkpoint manifest")->required();
  atk->add_option("probe", attack.probe, "Probe checkpoint manifest")->required();
  atk->add_option("data", attack.data, "Dataset file")->required();
  atk->add_option("--kind", attack.kind, "random | pgd | prbcd | grbcd");
  atk->add_option("--budget", attack.budget, "Fraction of edges to flip");
  atk->add_option("--steps", attack.steps, "Attack iterations");
  atk->add_option("--block-size", attack.block_size, "PR-BCD / GR-BCD block size (0: auto)");
  atk->add_option("--loss", attack.loss, "ce | margin");
  atk->add_option("--seed", attack.seed, "Attack seed");
  atk->add_option("-o,--output", attack.out, "Append the JSON result to this file");

  std::string from = "edgelist", edges, features, labels, converted = "data.json";
  std::uint64_t split_seed = 0;
  auto* conv = app.add_subcommand("convert", "Convert CSV triples to the dataset format");
  conv->add_option("--from", from, "Input format")->check(CLI::IsMember({"edgelist"}));
  conv->add_option("edges", edges, "edges.csv")->required();
  conv->add_option("features", features, "features.csv")->required();
  conv->add_option("labels", labels, "labels.csv")->required();
  conv->add_option("-o,--output", converted, "Output dataset file");
  conv->add_option("--split-seed", split_seed, "Seed of the 80/20 split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*gen) return cmd_gen_data(spec_path, data_out);
  if (*run) return cmd_run(config_path, threads);
  if (*rep) return cmd_report(records, reference);
  if (*atk) return cmd_attack(attack);
  if (*conv) {
    const grail_status s = grail_convert_edgelist(edges.c_str(), features.c_str(), labels.c_str(),
                                                  split_seed, converted.c_str());
    if (s != GRAIL_OK) return report_failure(s);
    std::cout << "wrote " << converted << "\n";
    return kExitOk;
  }
  return kExitConfig;
}
