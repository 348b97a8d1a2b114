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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace grail {

struct EvalRecord {
  std::string model_id;
  std::string dataset_id;
  std::string attack_id;
  std::uint64_t seed = 0;  // seed index within the run
  double acc_clean = 0.0;
  double acc_adv = 0.0;
  int delta_budget = 0;
  double wall_ms = 0.0;
};

std::string record_to_json(const EvalRecord& r);
EvalRecord record_from_json(const std::string& line);
// Parses a JSONL file, ignoring blank lines. ParseError names the line.
std::vector<EvalRecord> load_records(const std::string& path);

// (acc_clean - acc_adv) / acc_clean. Negative values pass through.
double relative_drop(double acc_clean, double acc_adv);

// Attack with the largest drop; ties go to the lexicographically first id.
std::pair<std::string, double> min_over_attacks(
    std::span<const std::pair<std::string, double>> drops);

// Mean over datasets of (R_model - R_reference).
double model_delta(const std::map<std::string, double>& model,
                   const std::map<std::string, double>& reference,
                   std::span<const std::string> datasets);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for one value
  int count = 0;
};

MeanStd mean_std(std::span<const double> values);

struct AttackSummary {
  std::string attack_id;
  MeanStd acc_adv;
  double drop = 0.0;
  bool negative_drop = false;
  int delta_budget = 0;
};

struct GroupSummary {
  std::string model_id;
  std::string dataset_id;
  MeanStd acc_clean;
  std::vector<AttackSummary> attacks;  // random, pgd, prbcd, grbcd, then by id
  std::string min_attack;
  double min_drop = 0.0;
};

struct RobustnessSummary {
  std::vector<GroupSummary> groups;  // sorted by (model, dataset)
  std::optional<std::string> reference;
  // model -> delta against the reference over the datasets both cover.
  std::map<std::string, double> deltas;
};

RobustnessSummary summarize(std::span<const EvalRecord> records,
                            const std::optional<std::string>& reference = std::nullopt);
std::string summary_json(const RobustnessSummary& summary);
std::string summary_table(const RobustnessSummary& summary);

}  // namespace grail
