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

#include "grail/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "grail/error.hpp"
#include "grail/seeds.hpp"

namespace grail {

using json = nlohmann::json;

namespace {

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  fail(ErrorCode::kParseError, "field '" + field + "': " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path + key, "missing");
  return *it;
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) field_error(path, "expected an integer");
  return v.get<int>();
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number");
  return v.get<double>();
}

std::vector<int> int_list(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array");
  std::vector<int> out;
  for (size_t k = 0; k < v.size(); ++k) {
    out.push_back(as_int(v[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

Graph parse_graph(const json& g, size_t index) {
  const std::string path = "graphs[" + std::to_string(index) + "].";
  if (!g.is_object()) field_error("graphs[" + std::to_string(index) + "]", "expected an object");
  const int n = as_int(require(g, "num_nodes", path), path + "num_nodes");
  if (n < 0) field_error(path + "num_nodes", "must be >= 0");
  const json& edges = require(g, "edges", path);
  if (!edges.is_array()) field_error(path + "edges", "expected an array");
  std::vector<std::pair<int, int>> pairs;
  for (size_t k = 0; k < edges.size(); ++k) {
    const std::string ep = path + "edges[" + std::to_string(k) + "]";
    if (!edges[k].is_array() || edges[k].size() != 2) field_error(ep, "expected [i, j]");
    pairs.emplace_back(as_int(edges[k][0], ep), as_int(edges[k][1], ep));
  }
  const json& feats = require(g, "features", path);
  if (!feats.is_array()) field_error(path + "features", "expected an array of rows");
  const int f = feats.empty() ? 0 : static_cast<int>(feats[0].is_array() ? feats[0].size() : 0);
  Matrix x(static_cast<Eigen::Index>(feats.size()), f);
  for (size_t r = 0; r < feats.size(); ++r) {
    const std::string rp = path + "features[" + std::to_string(r) + "]";
    if (!feats[r].is_array() || static_cast<int>(feats[r].size()) != f) {
      field_error(rp, "expected a row of length " + std::to_string(f));
    }
    for (int c = 0; c < f; ++c) {
      x(static_cast<Eigen::Index>(r), c) = as_number(feats[r][static_cast<size_t>(c)], rp);
    }
  }
  std::optional<std::vector<int>> labels;
  if (auto it = g.find("node_labels"); it != g.end() && !it->is_null()) {
    labels = int_list(*it, path + "node_labels");
    if (static_cast<int>(labels->size()) != n) {
      fail(ErrorCode::kValidationError,
           "graph " + std::to_string(index) + ": node_labels length differs from num_nodes");
    }
  }
  std::optional<int> graph_label;
  if (auto it = g.find("graph_label"); it != g.end() && !it->is_null()) {
    graph_label = as_int(*it, path + "graph_label");
  }
  try {
    return Graph::from_pairs(n, pairs, std::move(x), std::move(labels), graph_label);
  } catch (const Error& e) {
    fail(ErrorCode::kValidationError, "graph " + std::to_string(index) + ": " + e.what());
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

bool parse_double(const std::string& s, double& out) {
  try {
    size_t used = 0;
    out = std::stod(s, &used);
    return s.find_first_not_of(" \t", used) == std::string::npos;
  } catch (const std::exception&) {
    return false;
  }
}

// Numeric table; a non-numeric first row is treated as a header.
std::vector<std::vector<double>> numeric_csv(const std::string& path) {
  auto rows = read_csv(path);
  std::vector<std::vector<double>> out;
  for (size_t r = 0; r < rows.size(); ++r) {
    std::vector<double> vals;
    bool ok = true;
    for (const auto& cell : rows[r]) {
      double v = 0.0;
      if (!parse_double(cell, v)) {
        ok = false;
        break;
      }
      vals.push_back(v);
    }
    if (!ok) {
      if (r == 0) continue;
      fail(ErrorCode::kParseError, path + " line " + std::to_string(r + 1) + ": not numeric");
    }
    out.push_back(std::move(vals));
  }
  return out;
}

int exact_int(double v, const std::string& where) {
  if (std::floor(v) != v) fail(ErrorCode::kParseError, where + ": expected an integer");
  return static_cast<int>(v);
}

}  // namespace

void SbmSpec::validate() const {
  if (blocks < 1 || nodes_per_block < 1) fail(ErrorCode::kConfigError, "sbm needs blocks and nodes");
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    fail(ErrorCode::kConfigError, "sbm probabilities must lie in [0, 1]");
  }
  if (p_out > p_in) fail(ErrorCode::kConfigError, "sbm requires p_out <= p_in");
  if (feature_dim < 1) fail(ErrorCode::kConfigError, "sbm feature_dim must be >= 1");
  if (!std::isfinite(feature_signal) || feature_signal < 0.0) {
    fail(ErrorCode::kConfigError, "sbm feature_signal must be finite and >= 0");
  }
}

GraphDataset parse_dataset(const std::string& text, std::uint64_t split_seed) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, "line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) field_error("<root>", "expected an object");
  const json& task_field = require(doc, "task", "");
  if (!task_field.is_string()) field_error("task", "expected \"node\" or \"graph\"");
  Task task;
  try {
    task = parse_task(task_field.get<std::string>());
  } catch (const Error&) {
    field_error("task", "expected \"node\" or \"graph\"");
  }
  const int k = as_int(require(doc, "num_classes", ""), "num_classes");
  const json& gs = require(doc, "graphs", "");
  if (!gs.is_array()) field_error("graphs", "expected an array");
  std::vector<Graph> graphs;
  for (size_t i = 0; i < gs.size(); ++i) graphs.push_back(parse_graph(gs[i], i));
  if (graphs.empty()) fail(ErrorCode::kValidationError, "dataset has no graphs");
  Split split;
  if (auto it = doc.find("split"); it != doc.end() && !it->is_null()) {
    split.train = int_list(require(*it, "train", "split."), "split.train");
    split.test = int_list(require(*it, "test", "split."), "split.test");
  } else {
    const int units = task == Task::kNode ? graphs.front().num_nodes()
                                          : static_cast<int>(graphs.size());
    split = random_split(units, 0.8, split_seed);
  }
  return GraphDataset(task, k, std::move(graphs), std::move(split));
}

GraphDataset load_dataset(const std::string& path, std::uint64_t split_seed) {
  try {
    return parse_dataset(read_text_file(path), split_seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError) throw;
    throw Error(e.code(), path + ": " + e.message());
  }
}

std::string dataset_to_json(const GraphDataset& dataset) {
  json doc;
  doc["task"] = std::string(task_name(dataset.task()));
  doc["num_classes"] = dataset.num_classes();
  json graphs = json::array();
  for (const auto& g : dataset.graphs()) {
    json jg;
    jg["num_nodes"] = g.num_nodes();
    json edges = json::array();
    for (const auto& e : g.edges()) edges.push_back({e.i, e.j});
    jg["edges"] = std::move(edges);
    json feats = json::array();
    for (Eigen::Index r = 0; r < g.features().rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < g.features().cols(); ++c) row.push_back(g.features()(r, c));
      feats.push_back(std::move(row));
    }
    jg["features"] = std::move(feats);
    if (g.node_labels()) jg["node_labels"] = *g.node_labels();
    if (g.graph_label()) jg["graph_label"] = *g.graph_label();
    graphs.push_back(std::move(jg));
  }
  doc["graphs"] = std::move(graphs);
  doc["split"] = {{"train", dataset.split().train}, {"test", dataset.split().test}};
  return doc.dump();
}

void save_dataset(const GraphDataset& dataset, const std::string& path) {
  write_text_file(path, dataset_to_json(dataset));
}

GraphDataset generate_sbm_node_dataset(const SbmSpec& spec) {
  spec.validate();
  const int n = spec.blocks * spec.nodes_per_block;
  Rng graph_rng(derive_seed(spec.seed, "sbm.edges"));
  std::vector<int> labels(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) labels[static_cast<size_t>(v)] = v / spec.nodes_per_block;
  std::vector<NodePair> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = labels[static_cast<size_t>(i)] == labels[static_cast<size_t>(j)] ? spec.p_in
                                                                                        : spec.p_out;
      if (uniform01(graph_rng) < p) edges.push_back({i, j});
    }
  }
  Rng mean_rng(derive_seed(spec.seed, "sbm.means"));
  Matrix means(spec.blocks, spec.feature_dim);
  for (int c = 0; c < spec.blocks; ++c) {
    for (int d = 0; d < spec.feature_dim; ++d) means(c, d) = standard_normal(mean_rng);
    const double norm = means.row(c).norm();
    if (norm > 0.0) means.row(c) *= spec.feature_signal / norm;
  }
  Rng noise_rng(derive_seed(spec.seed, "sbm.noise"));
  Matrix x(n, spec.feature_dim);
  for (int v = 0; v < n; ++v) {
    for (int d = 0; d < spec.feature_dim; ++d) {
      x(v, d) = means(labels[static_cast<size_t>(v)], d) + standard_normal(noise_rng);
    }
  }
  Graph g(n, std::move(edges), std::move(x), labels);
  Split split = random_split(n, 0.8, derive_seed(spec.seed, "sbm.split"));
  return GraphDataset(Task::kNode, spec.blocks, {std::move(g)}, std::move(split));
}

GraphDataset generate_graph_classification_dataset(int num_graphs, const SbmSpec& spec_a,
                                                   const SbmSpec& spec_b, std::uint64_t seed) {
  spec_a.validate();
  spec_b.validate();
  if (num_graphs < 2) fail(ErrorCode::kConfigError, "need at least 2 graphs");
  if (spec_a.feature_dim != spec_b.feature_dim) {
    fail(ErrorCode::kConfigError, "both specs must share feature_dim");
  }
  std::vector<int> order(static_cast<size_t>(num_graphs));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "graphs.order"));
  shuffle(order.begin(), order.end(), rng);
  std::vector<Graph> graphs;
  for (int k = 0; k < num_graphs; ++k) {
    const int source = order[static_cast<size_t>(k)];
    const int label = source < num_graphs / 2 ? 0 : 1;
    SbmSpec spec = label == 0 ? spec_a : spec_b;
    spec.seed = derive_seed(seed, "graphs.member", static_cast<std::uint64_t>(source));
    const Graph g = generate_sbm_node_dataset(spec).graph(0);
    graphs.emplace_back(g.num_nodes(), g.edges(), g.features(), std::nullopt, label);
  }
  Split split = random_split(num_graphs, 0.8, derive_seed(seed, "graphs.split"));
  return GraphDataset(Task::kGraph, 2, std::move(graphs), std::move(split));
}

GraphDataset convert_edgelist(const std::string& edges_csv, const std::string& features_csv,
                              const std::string& labels_csv, std::uint64_t split_seed) {
  const auto feats = numeric_csv(features_csv);
  if (feats.empty()) fail(ErrorCode::kParseError, features_csv + ": no feature rows");
  const int n = static_cast<int>(feats.size());
  const size_t f = feats.front().size();
  Matrix x(n, static_cast<Eigen::Index>(f));
  for (int r = 0; r < n; ++r) {
    if (feats[static_cast<size_t>(r)].size() != f) {
      fail(ErrorCode::kParseError, features_csv + ": row " + std::to_string(r) + " has wrong width");
    }
    for (size_t c = 0; c < f; ++c) x(r, static_cast<Eigen::Index>(c)) = feats[static_cast<size_t>(r)][c];
  }
  std::vector<std::pair<int, int>> pairs;
  for (const auto& row : numeric_csv(edges_csv)) {
    if (row.size() < 2) fail(ErrorCode::kParseError, edges_csv + ": expected i,j per line");
    pairs.emplace_back(exact_int(row[0], edges_csv), exact_int(row[1], edges_csv));
  }
  std::vector<int> labels(static_cast<size_t>(n), -1);
  const auto label_rows = numeric_csv(labels_csv);
  for (size_t r = 0; r < label_rows.size(); ++r) {
    const auto& row = label_rows[r];
    const int node = row.size() >= 2 ? exact_int(row[0], labels_csv) : static_cast<int>(r);
    const int y = exact_int(row.size() >= 2 ? row[1] : row[0], labels_csv);
    if (node < 0 || node >= n) fail(ErrorCode::kValidationError, labels_csv + ": node out of range");
    labels[static_cast<size_t>(node)] = y;
  }
  if (std::any_of(labels.begin(), labels.end(), [](int y) { return y < 0; })) {
    fail(ErrorCode::kValidationError, labels_csv + ": every node needs a label >= 0");
  }
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  Graph g = [&] {
    try {
      return Graph::from_pairs(n, pairs, std::move(x), labels);
    } catch (const Error& e) {
      fail(ErrorCode::kValidationError, std::string("graph 0: ") + e.what());
    }
  }();
  return GraphDataset(Task::kNode, k, {std::move(g)}, random_split(n, 0.8, split_seed));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path);
}

}  // namespace grail
