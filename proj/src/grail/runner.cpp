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

#include "grail/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "grail/checkpoint.hpp"
#include "grail/error.hpp"
#include "grail/seeds.hpp"

namespace grail {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(ErrorCode::kConfigError, where + " must be an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) fail(ErrorCode::kConfigError, "unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kConfigError, where + "." + key + " has the wrong type");
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string display_name(const std::string& model) {
  static const std::pair<const char*, const char*> names[] = {
      {"dgi", "DGI"},   {"graphcl", "GraphCL"}, {"gca", "GCA"}, {"infograph", "InfoGraph"},
      {"adgcl", "AD-GCL"}, {"gcn", "GCN"},     {"gin", "GIN"}};
  for (const auto& [k, v] : names) {
    if (model == k) return v;
  }
  return model;
}

SbmSpec parse_sbm(const json& j, const std::string& where) {
  check_keys(j, where, {"blocks", "nodes_per_block", "p_in", "p_out", "feature_dim",
                        "feature_signal", "seed"});
  SbmSpec s;
  s.blocks = get_or(j, "blocks", s.blocks, where);
  s.nodes_per_block = get_or(j, "nodes_per_block", s.nodes_per_block, where);
  s.p_in = get_or(j, "p_in", s.p_in, where);
  s.p_out = get_or(j, "p_out", s.p_out, where);
  s.feature_dim = get_or(j, "feature_dim", s.feature_dim, where);
  s.feature_signal = get_or(j, "feature_signal", s.feature_signal, where);
  s.seed = get_or(j, "seed", s.seed, where);
  s.validate();
  return s;
}

AugmentSpec parse_augment(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "strength", "centrality", "cutoff"});
  AugmentSpec a;
  a.kind = parse_augment_kind(get_or<std::string>(j, "kind", "", where));
  a.strength = get_or(j, "strength", a.strength, where);
  if (j.contains("centrality")) {
    a.centrality = parse_centrality(get_or<std::string>(j, "centrality", "", where));
  }
  a.cutoff = get_or(j, "cutoff", a.cutoff, where);
  a.validate();
  return a;
}

void apply_encoder(const json& j, EncoderConfig& e, const std::string& where) {
  check_keys(j, where, {"kind", "num_layers", "hidden_dim", "dropout", "activation", "readout"});
  if (j.contains("kind")) e.kind = parse_encoder_kind(get_or<std::string>(j, "kind", "", where));
  e.num_layers = get_or(j, "num_layers", e.num_layers, where);
  e.hidden_dim = get_or(j, "hidden_dim", e.hidden_dim, where);
  e.dropout = get_or(j, "dropout", e.dropout, where);
  if (j.contains("activation")) {
    e.activation = parse_activation(get_or<std::string>(j, "activation", "", where));
  }
  if (j.contains("readout")) e.readout = parse_readout(get_or<std::string>(j, "readout", "", where));
}

void apply_objective(const json& j, ObjectiveConfig& o, const std::string& where) {
  check_keys(j, where, {"temperature", "view1", "view2", "adgcl_lambda", "augmenter_temperature",
                        "augmenter_lr"});
  o.temperature = get_or(j, "temperature", o.temperature, where);
  for (const char* key : {"view1", "view2"}) {
    if (!j.contains(key)) continue;
    const json& v = j.at(key);
    if (!v.is_array()) fail(ErrorCode::kConfigError, where + "." + key + " must be a list");
    std::vector<AugmentSpec> view;
    for (size_t k = 0; k < v.size(); ++k) {
      view.push_back(parse_augment(v[k], where + "." + key + "[" + std::to_string(k) + "]"));
    }
    (std::string(key) == "view1" ? o.view1 : o.view2) = std::move(view);
  }
  o.adgcl_lambda = get_or(j, "adgcl_lambda", o.adgcl_lambda, where);
  o.augmenter_temperature = get_or(j, "augmenter_temperature", o.augmenter_temperature, where);
  o.augmenter_lr = get_or(j, "augmenter_lr", o.augmenter_lr, where);
}

AttackSpec parse_attack(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "id", "steps", "lr", "block_size", "resample_keep_fraction",
                        "discretize_samples", "loss"});
  AttackSpec a;
  a.config.kind = parse_attack_kind(get_or<std::string>(j, "kind", "", where));
  a.id = get_or<std::string>(j, "id", std::string(attack_kind_name(a.config.kind)), where);
  a.config.steps = get_or(j, "steps", a.config.steps, where);
  if (j.contains("lr")) a.config.lr = get_or(j, "lr", 0.0, where);
  a.config.block_size = get_or(j, "block_size", a.config.block_size, where);
  a.config.resample_keep_fraction =
      get_or(j, "resample_keep_fraction", a.config.resample_keep_fraction, where);
  a.config.discretize_samples = get_or(j, "discretize_samples", a.config.discretize_samples, where);
  if (j.contains("loss")) a.config.loss = parse_attack_loss(get_or<std::string>(j, "loss", "", where));
  a.config.validate();
  return a;
}

DatasetSource dataset_source_from_json(const json& ds, const std::string& base_dir,
                                      std::string& default_id) {
  check_keys(ds, "dataset", {"path", "sbm", "graph_sbm", "split_seed"});
  DatasetSource src;
  src.split_seed = get_or<std::uint64_t>(ds, "split_seed", 0, "dataset");
  if (ds.contains("path")) {
    const std::string p = get_or<std::string>(ds, "path", "", "dataset");
    src.path = fs::path(p).is_absolute() || base_dir.empty() ? p : (fs::path(base_dir) / p).string();
    default_id = fs::path(*src.path).stem().string();
  }
  if (ds.contains("sbm")) {
    src.sbm = parse_sbm(ds.at("sbm"), "dataset.sbm");
    default_id = "sbm";
  }
  if (ds.contains("graph_sbm")) {
    const json& g = ds.at("graph_sbm");
    check_keys(g, "dataset.graph_sbm", {"num_graphs", "a", "b", "seed"});
    if (!g.contains("a") || !g.contains("b")) {
      fail(ErrorCode::kConfigError, "dataset.graph_sbm needs specs a and b");
    }
    src.graph_sbm_a = parse_sbm(g.at("a"), "dataset.graph_sbm.a");
    src.graph_sbm_b = parse_sbm(g.at("b"), "dataset.graph_sbm.b");
    src.num_graphs = get_or(g, "num_graphs", src.num_graphs, "dataset.graph_sbm");
    src.split_seed = get_or(g, "seed", src.split_seed, "dataset.graph_sbm");
    default_id = "graph_sbm";
  }
  const int sources = (src.path ? 1 : 0) + (src.sbm ? 1 : 0) + (src.graph_sbm_a ? 1 : 0);
  if (sources != 1) fail(ErrorCode::kConfigError, "dataset needs exactly one of path, sbm, graph_sbm");
  return src;
}

Task task_of_source(const DatasetSource& src) {
  if (src.sbm) return Task::kNode;
  if (src.graph_sbm_a) return Task::kGraph;
  return load_dataset(*src.path, src.split_seed).task();
}

std::string record_key(const std::string& model, const std::string& dataset, std::uint64_t seed,
                       const std::string& attack) {
  return model + '\x1f' + dataset + '\x1f' + std::to_string(seed) + '\x1f' + attack;
}

// Loads existing records. A torn final line (no newline, unparsable) is what
// an interrupted append leaves behind; it is dropped and the file truncated.
std::vector<EvalRecord> recover_records(const std::string& path) {
  std::vector<EvalRecord> out;
  if (!fs::exists(path)) return out;
  const std::string text = read_text_file(path);
  size_t pos = 0, good_end = 0;
  int lineno = 0;
  while (pos < text.size()) {
    const size_t nl = text.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string line = text.substr(pos, complete ? nl - pos : std::string::npos);
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      try {
        out.push_back(record_from_json(line));
      } catch (const Error&) {
        if (complete) {
          fail(ErrorCode::kParseError, path + " line " + std::to_string(lineno) + " is not a record");
        }
        break;
      }
    }
    if (!complete) {
      good_end = text.size();
      break;
    }
    pos = nl + 1;
    good_end = pos;
  }
  if (good_end < text.size()) fs::resize_file(path, good_end);
  return out;
}

class RecordWriter {
 public:
  explicit RecordWriter(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) fail(ErrorCode::kIoError, "cannot open '" + path + "' for appending");
  }
  void write(const std::string& line) {
    std::lock_guard<std::mutex> lock(mu_);
    out_ << line << '\n';
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

struct Trained {
  EncoderModel encoder;
  LinearProbe probe;
};

std::string checkpoint_stem(const ExperimentConfig& config, const std::string& model, int seed) {
  std::string safe = model;
  for (char& c : safe) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return (fs::path(config.output_dir) / "checkpoints" / (safe + "_seed" + std::to_string(seed)))
      .string();
}

void write_history(const std::string& path, const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  for (const auto& h : history) {
    out << json{{"epoch", h.epoch}, {"loss", h.loss}, {"wall_ms", h.wall_ms}}.dump() << '\n';
  }
  write_text_file(path, out.str());
}

Trained train_model(const ExperimentConfig& config, const ModelSpec& model,
                    const GraphDataset& dataset, int seed_index, std::string& stage) {
  const std::uint64_t seed =
      derive_seed(config.base_seed, "run.seed", static_cast<std::uint64_t>(seed_index));
  const std::string stem = checkpoint_stem(config, model.id, seed_index);
  if (config.save_checkpoints && fs::exists(stem + ".encoder.json") &&
      fs::exists(stem + ".probe.json")) {
    stage = "checkpoint";
    return {load_encoder(stem + ".encoder.json"), load_probe(stem + ".probe.json")};
  }
  std::vector<EpochRecord> history;
  std::optional<Trained> trained;
  if (model.objective) {
    stage = "train_encoder";
    TrainConfig tc;
    tc.epochs = model.epochs;
    tc.lr = model.lr;
    tc.patience = model.patience;
    tc.batch_size = model.batch_size;
    tc.seed = derive_seed(seed, "stage.encoder");
    TrainedEncoder enc = train_encoder(dataset, model.encoder, model.objective_config, tc);
    history = std::move(enc.history);
    stage = "train_probe";
    ProbeConfig pc = model.probe;
    pc.seed = derive_seed(seed, "stage.probe");
    LinearProbe probe = train_probe(enc.encoder, dataset, pc);
    trained.emplace(Trained{std::move(enc.encoder), std::move(probe)});
  } else {
    stage = "train_supervised";
    SupervisedConfig sc;
    sc.epochs = model.epochs;
    sc.lr = model.lr;
    sc.patience = model.patience;
    sc.batch_size = model.batch_size;
    sc.seed = derive_seed(seed, "stage.supervised");
    SupervisedModel sup = train_supervised(dataset, model.encoder, sc);
    history = std::move(sup.history);
    trained.emplace(Trained{std::move(sup.encoder), std::move(sup.probe)});
  }
  if (config.save_checkpoints) {
    stage = "checkpoint";
    fs::create_directories(fs::path(stem).parent_path());
    save_encoder(trained->encoder, stem + ".encoder.json");
    save_probe(trained->probe, stem + ".probe.json");
    write_history(stem + ".history.jsonl", history);
  }
  return std::move(*trained);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (num_seeds < 1) fail(ErrorCode::kConfigError, "num_seeds must be >= 1");
  if (!(budget_fraction > 0.0 && budget_fraction < 1.0)) {
    fail(ErrorCode::kConfigError, "budget_fraction must lie in (0, 1)");
  }
  if (models.empty()) fail(ErrorCode::kConfigError, "no models configured");
  if (attacks.empty()) fail(ErrorCode::kConfigError, "no attacks configured");
  const int sources = (dataset.path ? 1 : 0) + (dataset.sbm ? 1 : 0) + (dataset.graph_sbm_a ? 1 : 0);
  if (sources != 1) fail(ErrorCode::kConfigError, "dataset needs exactly one of path, sbm, graph_sbm");
  std::set<std::string> ids;
  for (const auto& m : models) {
    if (!ids.insert(m.id).second) fail(ErrorCode::kConfigError, "duplicate model id '" + m.id + "'");
    m.encoder.validate();
    if (m.objective) m.objective_config.validate();
    if (m.epochs < 1) fail(ErrorCode::kConfigError, "epochs must be >= 1");
    if (!(m.lr > 0.0)) fail(ErrorCode::kConfigError, "lr must be > 0");
  }
  ids.clear();
  for (const auto& a : attacks) {
    if (!ids.insert(a.id).second) fail(ErrorCode::kConfigError, "duplicate attack id '" + a.id + "'");
    a.config.validate();
  }
}

ModelSpec default_model_spec(const std::string& model, Task task) {
  ModelSpec m;
  m.id = display_name(model);
  const bool node = task == Task::kNode;
  auto set = [&](EncoderKind kind, double lr, int epochs, std::optional<int> patience,
                 double dropout, int layers, int hidden) {
    m.encoder.kind = kind;
    m.lr = lr;
    m.epochs = epochs;
    m.patience = patience;
    m.encoder.dropout = dropout;
    m.encoder.num_layers = layers;
    m.encoder.hidden_dim = hidden;
  };
  if (model == "gcn" || model == "gin") {
    if (node) {
      set(EncoderKind::kGcn, 1e-2, 200, 10, 0.5, 2, 16);
    } else if (model == "gcn") {
      set(EncoderKind::kGcn, 5e-3, 50, std::nullopt, 0.0, 4, 128);
    } else {
      set(EncoderKind::kGin, 1e-3, 10, std::nullopt, 0.0, 8, 512);
    }
    if (model == "gin") m.encoder.kind = EncoderKind::kGin;
    return m;
  }
  const ObjectiveKind kind = parse_objective(model);
  m.objective = kind;
  m.objective_config = ObjectiveConfig::defaults(kind);
  switch (kind) {
    case ObjectiveKind::kDgi:
      if (!node) break;
      set(EncoderKind::kGcn, 1e-3, 1000, 20, 0.0, 1, 512);
      m.encoder.activation = Activation::kPrelu;
      return m;
    case ObjectiveKind::kGraphCl:
      if (node) {
        set(EncoderKind::kGcn, 1e-3, 1000, 20, 0.0, 1, 512);
      } else {
        set(EncoderKind::kGin, 1e-3, 10, std::nullopt, 0.0, 8, 512);
      }
      return m;
    case ObjectiveKind::kGca:
      if (!node) break;
      set(EncoderKind::kGcn, 1e-3, 500, 20, 0.0, 2, 256);
      return m;
    case ObjectiveKind::kInfoGraph:
      if (node) break;
      set(EncoderKind::kGin, 1e-3, 100, std::nullopt, 0.0, 8, 256);
      m.encoder.readout = ReadoutKind::kSum;
      return m;
    case ObjectiveKind::kAdGcl:
      if (node) break;
      set(EncoderKind::kGin, 1e-2, 150, 20, 0.5, 5, 32);
      m.encoder.readout = ReadoutKind::kSum;
      return m;
  }
  fail(ErrorCode::kConfigError,
       "model '" + model + "' is not defined for " + std::string(task_name(task)) + " tasks");
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, "config", {"dataset", "dataset_id", "models", "model", "attacks",
                             "budget_fraction", "num_seeds", "output_dir", "base_seed",
                             "save_checkpoints"});
  ExperimentConfig c;
  auto resolve = [&](const std::string& p) {
    return fs::path(p).is_absolute() || base_dir.empty() ? p : (fs::path(base_dir) / p).string();
  };

  if (!doc.contains("dataset")) fail(ErrorCode::kConfigError, "config needs a dataset");
  std::string default_id;
  c.dataset = dataset_source_from_json(doc.at("dataset"), base_dir, default_id);
  c.dataset_id = get_or(doc, "dataset_id", default_id, "config");
  c.budget_fraction = get_or(doc, "budget_fraction", c.budget_fraction, "config");
  c.num_seeds = get_or(doc, "num_seeds", c.num_seeds, "config");
  c.output_dir = resolve(get_or(doc, "output_dir", c.output_dir, "config"));
  c.base_seed = get_or(doc, "base_seed", c.base_seed, "config");
  c.save_checkpoints = get_or(doc, "save_checkpoints", c.save_checkpoints, "config");
  const Task task = task_of_source(c.dataset);

  json models = json::array();
  if (doc.contains("models")) models = doc.at("models");
  if (doc.contains("model")) models.push_back(doc.at("model"));
  if (!models.is_array()) fail(ErrorCode::kConfigError, "models must be a list");
  for (size_t i = 0; i < models.size(); ++i) {
    const std::string where = "models[" + std::to_string(i) + "]";
    json m = models[i];
    if (m.is_string()) m = json{{"model", m}};
    check_keys(m, where, {"model", "id", "encoder", "objective", "lr", "epochs", "patience",
                          "batch_size", "probe"});
    ModelSpec spec = default_model_spec(lower(get_or<std::string>(m, "model", "", where)), task);
    spec.id = get_or(m, "id", spec.id, where);
    if (m.contains("encoder")) apply_encoder(m.at("encoder"), spec.encoder, where + ".encoder");
    if (m.contains("objective")) {
      if (!spec.objective) fail(ErrorCode::kConfigError, where + ": supervised models take no objective");
      apply_objective(m.at("objective"), spec.objective_config, where + ".objective");
    }
    spec.lr = get_or(m, "lr", spec.lr, where);
    spec.epochs = get_or(m, "epochs", spec.epochs, where);
    if (m.contains("patience")) {
      if (m.at("patience").is_null()) {
        spec.patience.reset();
      } else {
        spec.patience = get_or(m, "patience", 0, where);
      }
    }
    spec.batch_size = get_or(m, "batch_size", spec.batch_size, where);
    if (m.contains("probe")) {
      const json& p = m.at("probe");
      check_keys(p, where + ".probe", {"epochs", "lr"});
      spec.probe.epochs = get_or(p, "epochs", spec.probe.epochs, where + ".probe");
      spec.probe.lr = get_or(p, "lr", spec.probe.lr, where + ".probe");
    }
    c.models.push_back(std::move(spec));
  }

  if (!doc.contains("attacks") || !doc.at("attacks").is_array()) {
    fail(ErrorCode::kConfigError, "config needs an attacks list");
  }
  const json& attacks = doc.at("attacks");
  for (size_t i = 0; i < attacks.size(); ++i) {
    json a = attacks[i];
    if (a.is_string()) a = json{{"kind", a}};
    c.attacks.push_back(parse_attack(a, "attacks[" + std::to_string(i) + "]"));
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, e.message());
  }
  return parse_experiment_config(text, fs::path(path).parent_path().string());
}

AttackSpec parse_attack_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("attack spec is not valid JSON: ") + e.what());
  }
  if (doc.is_string()) doc = json{{"kind", doc}};
  return parse_attack(doc, "attack");
}

DatasetSource parse_dataset_source(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("dataset spec is not valid JSON: ") + e.what());
  }
  std::string unused;
  return dataset_source_from_json(doc, base_dir, unused);
}

GraphDataset materialize_dataset(const DatasetSource& source) {
  if (source.path) return load_dataset(*source.path, source.split_seed);
  if (source.sbm) return generate_sbm_node_dataset(*source.sbm);
  if (source.graph_sbm_a && source.graph_sbm_b) {
    return generate_graph_classification_dataset(source.num_graphs, *source.graph_sbm_a,
                                                 *source.graph_sbm_b, source.split_seed);
  }
  fail(ErrorCode::kConfigError, "dataset source is empty");
}

std::string records_path(const ExperimentConfig& config) {
  return (fs::path(config.output_dir) / "records.jsonl").string();
}

int worker_count(int requested, int work_items) {
  int n = requested;
  if (n <= 0) {
    n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("GRAIL_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) n = std::min(n, cap);
    }
  }
  return std::max(1, std::min(n, work_items));
}

RunOutcome run_protocol(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const GraphDataset dataset = materialize_dataset(config.dataset);
  fs::create_directories(config.output_dir);
  const std::string path = records_path(config);

  RunOutcome outcome;
  outcome.records = recover_records(path);
  std::set<std::string> done;
  for (const auto& r : outcome.records) {
    done.insert(record_key(r.model_id, r.dataset_id, r.seed, r.attack_id));
  }

  struct Job {
    const ModelSpec* model;
    int seed;
    std::vector<const AttackSpec*> pending;
  };
  std::vector<Job> jobs;
  for (int s = 0; s < config.num_seeds; ++s) {
    for (const auto& m : config.models) {
      Job job{&m, s, {}};
      for (const auto& a : config.attacks) {
        if (!done.count(record_key(m.id, config.dataset_id, static_cast<std::uint64_t>(s), a.id))) {
          job.pending.push_back(&a);
        }
      }
      if (!job.pending.empty()) jobs.push_back(std::move(job));
    }
  }

  RecordWriter writer(path);
  std::mutex mu;
  std::atomic<size_t> next{0};
  std::atomic<int> written{0};
  auto budget_left = [&] {
    return !options.max_new_records || written.load() < *options.max_new_records;
  };

  auto worker = [&] {
    for (;;) {
      const size_t j = next.fetch_add(1);
      if (j >= jobs.size() || !budget_left()) return;
      const Job& job = jobs[j];
      std::string stage = "setup";
      try {
        const Trained model = train_model(config, *job.model, dataset, job.seed, stage);
        stage = "clean_accuracy";
        const double acc_clean =
            accuracy(model.probe, model.encoder, dataset, dataset.split().test);
        const std::uint64_t seed =
            derive_seed(config.base_seed, "run.seed", static_cast<std::uint64_t>(job.seed));
        for (const AttackSpec* a : job.pending) {
          if (!budget_left()) return;
          stage = "attack:" + a->id;
          AttackConfig ac = a->config;
          ac.seed = derive_seed(seed, "stage.attack." + a->id);
          const AttackResult res =
              run_attack(model.probe, model.encoder, dataset, config.budget_fraction, ac);
          EvalRecord rec{job.model->id,   config.dataset_id, a->id,     static_cast<std::uint64_t>(job.seed),
                         acc_clean,        res.acc_adv,       res.delta, res.wall_ms};
          writer.write(record_to_json(rec));
          written.fetch_add(1);
          std::lock_guard<std::mutex> lock(mu);
          outcome.records.push_back(rec);
          ++outcome.new_records;
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        outcome.failures.push_back({job.model->id, job.seed, stage, e.what()});
      }
    }
  };

  const int threads = worker_count(options.threads, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (!outcome.failures.empty()) {
    std::ostringstream out;
    for (const auto& f : outcome.failures) {
      out << json{{"model", f.model_id}, {"seed", f.seed}, {"stage", f.stage}, {"error", f.message}}
                 .dump()
          << '\n';
    }
    std::ofstream(fs::path(config.output_dir) / "failures.jsonl", std::ios::app) << out.str();
  }
  std::sort(outcome.records.begin(), outcome.records.end(), [](const EvalRecord& a, const EvalRecord& b) {
    return std::tie(a.model_id, a.dataset_id, a.seed, a.attack_id) <
           std::tie(b.model_id, b.dataset_id, b.seed, b.attack_id);
  });
  return outcome;
}

ReportFiles report(const std::string& records_file, const std::optional<std::string>& reference) {
  const std::vector<EvalRecord> records = load_records(records_file);
  const RobustnessSummary summary = summarize(records, reference);
  const fs::path p(records_file);
  const fs::path stem = p.parent_path() / p.stem();
  ReportFiles files;
  files.json_path = stem.string() + ".summary.json";
  files.table_path = stem.string() + ".summary.txt";
  files.table = summary_table(summary);
  write_text_file(files.json_path, summary_json(summary) + "\n");
  write_text_file(files.table_path, files.table);
  return files;
}

}  // namespace grail
