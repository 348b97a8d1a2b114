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

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace grail {

using Matrix = Eigen::MatrixXd;

// Unordered node pair stored with i < j.
struct NodePair {
  int i = 0;
  int j = 0;

  static NodePair ordered(int a, int b) { return a < b ? NodePair{a, b} : NodePair{b, a}; }
  auto operator<=>(const NodePair&) const = default;
};

enum class Task { kNode, kGraph };

std::string_view task_name(Task task);
Task parse_task(std::string_view name);

struct NodeMasks {
  std::vector<bool> train;
  std::vector<bool> test;
};

// Immutable undirected attributed graph. Edges are kept sorted, unique and
// with i < j, so symmetry of the adjacency is a property of the
// representation.
class Graph {
 public:
  // Validates every invariant; edges must already satisfy i < j and be
  // duplicate-free (any order). Use from_pairs() for raw input.
  Graph(int num_nodes, std::vector<NodePair> edges, Matrix features,
        std::optional<std::vector<int>> node_labels = std::nullopt,
        std::optional<int> graph_label = std::nullopt,
        std::optional<NodeMasks> masks = std::nullopt);

  // Normalizes orientation and drops duplicates; self-loops and out-of-range
  // endpoints are still rejected.
  static Graph from_pairs(int num_nodes, std::span<const std::pair<int, int>> pairs,
                          Matrix features,
                          std::optional<std::vector<int>> node_labels = std::nullopt,
                          std::optional<int> graph_label = std::nullopt,
                          std::optional<NodeMasks> masks = std::nullopt);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int feature_dim() const { return static_cast<int>(features_.cols()); }
  const std::vector<NodePair>& edges() const { return edges_; }
  const Matrix& features() const { return features_; }
  const std::optional<std::vector<int>>& node_labels() const { return node_labels_; }
  const std::optional<int>& graph_label() const { return graph_label_; }
  const std::optional<NodeMasks>& masks() const { return masks_; }

  bool has_edge(int a, int b) const;
  std::vector<int> degrees() const;
  std::vector<std::vector<int>> adjacency_lists() const;

  Graph with_features(Matrix features) const;
  Graph with_edges(std::vector<NodePair> edges) const;

 private:
  int num_nodes_;
  std::vector<NodePair> edges_;
  Matrix features_;
  std::optional<std::vector<int>> node_labels_;
  std::optional<int> graph_label_;
  std::optional<NodeMasks> masks_;
};

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

class GraphDataset {
 public:
  GraphDataset(Task task, int num_classes, std::vector<Graph> graphs, Split split);

  Task task() const { return task_; }
  int num_classes() const { return num_classes_; }
  const std::vector<Graph>& graphs() const { return graphs_; }
  const Graph& graph(int index) const { return graphs_.at(static_cast<size_t>(index)); }
  const Split& split() const { return split_; }
  int feature_dim() const { return graphs_.front().feature_dim(); }
  // Labels of the split units: node labels of the single graph, or graph
  // labels of the collection.
  std::vector<int> labels() const;
  int num_units() const;

 private:
  Task task_;
  int num_classes_;
  std::vector<Graph> graphs_;
  Split split_;
};

Matrix dense_adjacency(const Graph& g);

Split random_split(int n, double train_fraction, std::uint64_t seed);

// Toggles every listed pair. Pairs may be given in either orientation but must
// be distinct, in range and not self-loops.
Graph apply_perturbation(const Graph& g, std::span<const NodePair> flips);

// Number of unordered non-self-loop pairs, n(n-1)/2.
inline std::int64_t num_candidate_pairs(int n) {
  return static_cast<std::int64_t>(n) * (n - 1) / 2;
}

// Bijection between linear candidate index and pair, row-major over i < j.
NodePair pair_from_index(int n, std::int64_t index);
std::int64_t index_from_pair(int n, NodePair p);

}  // namespace grail
