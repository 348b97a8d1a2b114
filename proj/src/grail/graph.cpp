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

#include "grail/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "grail/error.hpp"
#include "grail/seeds.hpp"

namespace grail {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSplitTooSmall: return "SplitTooSmall";
    case ErrorCode::kInvalidFlip: return "InvalidFlip";
    case ErrorCode::kInvalidGraph: return "InvalidGraph";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonScalarLoss: return "NonScalarLoss";
    case ErrorCode::kAsymmetricAdjacency: return "AsymmetricAdjacency";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDegenerateAugmentation: return "DegenerateAugmentation";
    case ErrorCode::kCentralityDiverged: return "CentralityDiverged";
    case ErrorCode::kNeedNegatives: return "NeedNegatives";
    case ErrorCode::kTrainingDiverged: return "TrainingDiverged";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kBudgetInfeasible: return "BudgetInfeasible";
    case ErrorCode::kUndefinedDrop: return "UndefinedDrop";
    case ErrorCode::kNoRecords: return "NoRecords";
    case ErrorCode::kIncompleteCoverage: return "IncompleteCoverage";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

double standard_normal(Rng& rng) {
  // Box-Muller on the platform-stable uniform.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::string_view task_name(Task task) { return task == Task::kNode ? "node" : "graph"; }

Task parse_task(std::string_view name) {
  if (name == "node") return Task::kNode;
  if (name == "graph") return Task::kGraph;
  fail(ErrorCode::kValidationError, "task must be \"node\" or \"graph\", got \"" +
                                        std::string(name) + "\"");
}

Graph::Graph(int num_nodes, std::vector<NodePair> edges, Matrix features,
             std::optional<std::vector<int>> node_labels, std::optional<int> graph_label,
             std::optional<NodeMasks> masks)
    : num_nodes_(num_nodes),
      edges_(std::move(edges)),
      features_(std::move(features)),
      node_labels_(std::move(node_labels)),
      graph_label_(graph_label),
      masks_(std::move(masks)) {
  if (num_nodes_ < 0) fail(ErrorCode::kInvalidGraph, "negative node count");
  if (features_.rows() != num_nodes_) {
    fail(ErrorCode::kInvalidGraph, "feature rows " + std::to_string(features_.rows()) +
                                       " != num_nodes " + std::to_string(num_nodes_));
  }
  if (!features_.allFinite()) fail(ErrorCode::kInvalidGraph, "non-finite feature value");
  std::sort(edges_.begin(), edges_.end());
  for (size_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    if (e.i == e.j) fail(ErrorCode::kInvalidGraph, "self-loop at node " + std::to_string(e.i));
    if (!(0 <= e.i && e.i < e.j && e.j < num_nodes_)) {
      fail(ErrorCode::kInvalidGraph, "edge (" + std::to_string(e.i) + "," +
                                         std::to_string(e.j) + ") violates 0 <= i < j < n");
    }
    if (k > 0 && edges_[k - 1] == e) {
      fail(ErrorCode::kInvalidGraph, "duplicate edge (" + std::to_string(e.i) + "," +
                                         std::to_string(e.j) + ")");
    }
  }
  if (node_labels_ && static_cast<int>(node_labels_->size()) != num_nodes_) {
    fail(ErrorCode::kInvalidGraph, "node_labels length != num_nodes");
  }
  if (masks_) {
    const auto n = static_cast<size_t>(num_nodes_);
    if (masks_->train.size() != n || masks_->test.size() != n) {
      fail(ErrorCode::kInvalidGraph, "mask length != num_nodes");
    }
    for (size_t v = 0; v < n; ++v) {
      if (masks_->train[v] && masks_->test[v]) {
        fail(ErrorCode::kInvalidGraph, "node " + std::to_string(v) + " in both masks");
      }
    }
  }
}

Graph Graph::from_pairs(int num_nodes, std::span<const std::pair<int, int>> pairs,
                        Matrix features, std::optional<std::vector<int>> node_labels,
                        std::optional<int> graph_label, std::optional<NodeMasks> masks) {
  std::vector<NodePair> edges;
  edges.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    if (a == b) fail(ErrorCode::kInvalidGraph, "self-loop at node " + std::to_string(a));
    edges.push_back(NodePair::ordered(a, b));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Graph(num_nodes, std::move(edges), std::move(features), std::move(node_labels),
               graph_label, std::move(masks));
}

bool Graph::has_edge(int a, int b) const {
  if (a == b) return false;
  return std::binary_search(edges_.begin(), edges_.end(), NodePair::ordered(a, b));
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<size_t>(num_nodes_), 0);
  for (const auto& e : edges_) {
    ++deg[static_cast<size_t>(e.i)];
    ++deg[static_cast<size_t>(e.j)];
  }
  return deg;
}

std::vector<std::vector<int>> Graph::adjacency_lists() const {
  std::vector<std::vector<int>> adj(static_cast<size_t>(num_nodes_));
  for (const auto& e : edges_) {
    adj[static_cast<size_t>(e.i)].push_back(e.j);
    adj[static_cast<size_t>(e.j)].push_back(e.i);
  }
  return adj;
}

Graph Graph::with_features(Matrix features) const {
  return Graph(num_nodes_, edges_, std::move(features), node_labels_, graph_label_, masks_);
}

Graph Graph::with_edges(std::vector<NodePair> edges) const {
  return Graph(num_nodes_, std::move(edges), features_, node_labels_, graph_label_, masks_);
}

GraphDataset::GraphDataset(Task task, int num_classes, std::vector<Graph> graphs, Split split)
    : task_(task), num_classes_(num_classes), graphs_(std::move(graphs)), split_(std::move(split)) {
  if (graphs_.empty()) fail(ErrorCode::kValidationError, "dataset has no graphs");
  if (num_classes_ < 1) fail(ErrorCode::kValidationError, "num_classes must be >= 1");
  const int f = graphs_.front().feature_dim();
  for (size_t k = 0; k < graphs_.size(); ++k) {
    if (graphs_[k].feature_dim() != f) {
      fail(ErrorCode::kValidationError,
           "graph " + std::to_string(k) + ": feature dim differs from graph 0");
    }
  }
  if (task_ == Task::kNode) {
    if (graphs_.size() != 1) {
      fail(ErrorCode::kValidationError, "node-classification dataset must hold one graph");
    }
    const auto& labels = graphs_[0].node_labels();
    if (!labels) fail(ErrorCode::kValidationError, "graph 0: node_labels missing");
    for (int y : *labels) {
      if (y < 0 || y >= num_classes_) {
        fail(ErrorCode::kValidationError, "graph 0: node label out of range");
      }
    }
  } else {
    for (size_t k = 0; k < graphs_.size(); ++k) {
      const auto& y = graphs_[k].graph_label();
      if (!y || *y < 0 || *y >= num_classes_) {
        fail(ErrorCode::kValidationError,
             "graph " + std::to_string(k) + ": graph_label missing or out of range");
      }
      if (graphs_[k].num_nodes() < 1) {
        fail(ErrorCode::kValidationError, "graph " + std::to_string(k) + ": no nodes");
      }
    }
  }
  const int units = num_units();
  std::vector<char> seen(static_cast<size_t>(units), 0);
  auto check = [&](const std::vector<int>& idx, const char* name) {
    for (int v : idx) {
      if (v < 0 || v >= units) {
        fail(ErrorCode::kValidationError, std::string("split.") + name + " index out of range");
      }
      if (seen[static_cast<size_t>(v)]++) {
        fail(ErrorCode::kValidationError, std::string("split.") + name + " index " +
                                              std::to_string(v) + " repeated or in both lists");
      }
    }
  };
  check(split_.train, "train");
  check(split_.test, "test");
}

int GraphDataset::num_units() const {
  return task_ == Task::kNode ? graphs_.front().num_nodes() : static_cast<int>(graphs_.size());
}

std::vector<int> GraphDataset::labels() const {
  if (task_ == Task::kNode) return *graphs_.front().node_labels();
  std::vector<int> out;
  out.reserve(graphs_.size());
  for (const auto& g : graphs_) out.push_back(*g.graph_label());
  return out;
}

Matrix dense_adjacency(const Graph& g) {
  Matrix a = Matrix::Zero(g.num_nodes(), g.num_nodes());
  for (const auto& e : g.edges()) {
    a(e.i, e.j) = 1.0;
    a(e.j, e.i) = 1.0;
  }
  return a;
}

Split random_split(int n, double train_fraction, std::uint64_t seed) {
  if (n < 2) fail(ErrorCode::kSplitTooSmall, "need at least 2 units, got " + std::to_string(n));
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorCode::kValidationError, "train_fraction must lie in (0, 1)");
  }
  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  shuffle(perm.begin(), perm.end(), rng);
  int n_train = static_cast<int>(std::lround(train_fraction * n));
  n_train = std::clamp(n_train, 1, n - 1);
  Split s;
  s.train.assign(perm.begin(), perm.begin() + n_train);
  s.test.assign(perm.begin() + n_train, perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Graph apply_perturbation(const Graph& g, std::span<const NodePair> flips) {
  std::vector<NodePair> sorted;
  sorted.reserve(flips.size());
  for (const auto& f : flips) {
    if (f.i == f.j) fail(ErrorCode::kInvalidFlip, "self-loop flip at node " + std::to_string(f.i));
    auto p = NodePair::ordered(f.i, f.j);
    if (p.i < 0 || p.j >= g.num_nodes()) fail(ErrorCode::kInvalidFlip, "flip out of range");
    sorted.push_back(p);
  }
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    fail(ErrorCode::kInvalidFlip, "duplicate pair in flip set");
  }
  std::vector<NodePair> out;
  out.reserve(g.edges().size() + sorted.size());
  std::set_symmetric_difference(g.edges().begin(), g.edges().end(), sorted.begin(), sorted.end(),
                                std::back_inserter(out));
  return g.with_edges(std::move(out));
}

NodePair pair_from_index(int n, std::int64_t index) {
  // Row i owns (n-1-i) pairs; walk rows. O(n) but only used off the hot path.
  std::int64_t remaining = index;
  for (int i = 0; i < n - 1; ++i) {
    const std::int64_t row = n - 1 - i;
    if (remaining < row) return {i, static_cast<int>(i + 1 + remaining)};
    remaining -= row;
  }
  fail(ErrorCode::kInvalidFlip, "candidate index out of range");
}

std::int64_t index_from_pair(int n, NodePair p) {
  const std::int64_t i = p.i;
  return i * (2 * static_cast<std::int64_t>(n) - i - 1) / 2 + (p.j - p.i - 1);
}

}  // namespace grail
