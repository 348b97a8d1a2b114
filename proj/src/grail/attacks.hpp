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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grail/encoders.hpp"
#include "grail/graph.hpp"
#include "grail/probe.hpp"

namespace grail {

enum class AttackKind { kRandom, kPgd, kPrbcd, kGrbcd };
enum class AttackLossKind { kCrossEntropy, kMargin };

std::string_view attack_kind_name(AttackKind k);
AttackKind parse_attack_kind(std::string_view s);
std::string_view attack_loss_name(AttackLossKind k);
AttackLossKind parse_attack_loss(std::string_view s);

struct AttackConfig {
  AttackKind kind = AttackKind::kPrbcd;
  int steps = 100;  // gradient iterations (pgd, prbcd) or greedy steps (grbcd)
  // Base step size; the step at iteration t is lr / sqrt(t). Unset means
  // 100 * delta / num_nodes.
  std::optional<double> lr;
  int block_size = 0;  // 0: min(candidates, max(10 * delta, 2000))
  double resample_keep_fraction = 0.5;
  int discretize_samples = 20;
  AttackLossKind loss = AttackLossKind::kCrossEntropy;
  std::uint64_t seed = 0;

  void validate() const;
};

// Round-half-away of fraction * num_edges.
int budget_from_fraction(int num_edges, double fraction);

// Euclidean projection of p onto {x in [0,1]^E : sum x <= delta}.
std::vector<double> project_budget(std::span<const double> p, double delta);

// delta split into `steps` near-equal chunks, remainder to the earliest.
std::vector<int> greedy_chunks(int delta, int steps);

// What the attack scores on one graph: node task scores `rows` of the node
// logits against `labels` (indexed by node); graph task scores the readout
// row against labels[0].
struct AttackTarget {
  const Graph* graph = nullptr;
  Task task = Task::kNode;
  std::vector<int> rows;
  std::vector<int> labels;
};

AttackTarget node_attack_target(const GraphDataset& dataset);
AttackTarget graph_attack_target(const GraphDataset& dataset, int graph_index);

// L_atk on a (possibly relaxed) adjacency. Lower means a stronger attack.
Var attack_loss(const LinearProbe& probe, const EncoderModel& encoder, const AttackTarget& target,
                Var adjacency, AttackLossKind kind);
double attack_loss_value(const LinearProbe& probe, const EncoderModel& encoder,
                         const AttackTarget& target, const Matrix& adjacency, AttackLossKind kind);

// Outcome on a single graph.
struct GraphAttack {
  std::vector<NodePair> flips;
  std::vector<double> loss_trace;
  // Final relaxed weights over the entries the attack held (candidate index,
  // weight); empty for discrete attacks.
  std::vector<std::int64_t> relaxed_index;
  std::vector<double> relaxed_weight;
  std::int64_t max_live_weights = 0;
};

GraphAttack random_flip_attack(const Graph& g, int delta, std::uint64_t seed);
GraphAttack pgd_attack(const AttackTarget& target, const LinearProbe& probe,
                       const EncoderModel& encoder, int delta, const AttackConfig& config);
GraphAttack prbcd_attack(const AttackTarget& target, const LinearProbe& probe,
                         const EncoderModel& encoder, int delta, const AttackConfig& config);
GraphAttack grbcd_attack(const AttackTarget& target, const LinearProbe& probe,
                         const EncoderModel& encoder, int delta, const AttackConfig& config);
GraphAttack attack_graph(const AttackTarget& target, const LinearProbe& probe,
                         const EncoderModel& encoder, int delta, const AttackConfig& config);

struct GraphFlips {
  int graph = 0;
  int delta = 0;
  std::vector<NodePair> flips;
};

struct AttackResult {
  AttackKind kind = AttackKind::kRandom;
  Task task = Task::kNode;
  int delta = 0;                   // total budget over attacked graphs
  std::vector<NodePair> flips;     // node task
  std::vector<GraphFlips> graphs;  // graph task: one entry per test graph
  double acc_adv = 0.0;
  std::vector<double> loss_trace;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
};

// Evasion attack on the test split: the single graph for node tasks, each
// test graph independently for graph tasks.
AttackResult run_attack(const LinearProbe& probe, const EncoderModel& encoder,
                        const GraphDataset& dataset, double budget_fraction,
                        const AttackConfig& config);

// Dataset graphs with the result's flips applied.
std::vector<Graph> perturbed_graphs(const GraphDataset& dataset, const AttackResult& result);

std::string attack_result_json(const AttackResult& result);

}  // namespace grail
