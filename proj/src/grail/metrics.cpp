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

#include "grail/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "grail/data_io.hpp"
#include "grail/error.hpp"

namespace grail {

using json = nlohmann::json;

namespace {

std::string fixed(double v, int width, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*f", width, prec, v);
  return buf;
}

// Display width in code points; the table uses a few non-ASCII symbols.
size_t display_width(const std::string& s) {
  size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad(const std::string& s, size_t width) {
  const size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

// Known attacks in their customary order, then anything else by name.
bool attack_before(const std::string& a, const std::string& b) {
  static const char* order[] = {"random", "pgd", "prbcd", "grbcd"};
  auto rank = [](const std::string& s) {
    for (int i = 0; i < 4; ++i) {
      if (s == order[i]) return i;
    }
    return 4;
  };
  const int ra = rank(a), rb = rank(b);
  return ra != rb ? ra < rb : a < b;
}

}  // namespace

std::string record_to_json(const EvalRecord& r) {
  json doc{{"model", r.model_id},     {"dataset", r.dataset_id}, {"attack", r.attack_id},
           {"seed", r.seed},          {"acc_clean", r.acc_clean}, {"acc_adv", r.acc_adv},
           {"delta", r.delta_budget}, {"wall_ms", r.wall_ms}};
  return doc.dump();
}

EvalRecord record_from_json(const std::string& line) {
  try {
    const json doc = json::parse(line);
    EvalRecord r;
    r.model_id = doc.at("model").get<std::string>();
    r.dataset_id = doc.at("dataset").get<std::string>();
    r.attack_id = doc.at("attack").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.acc_clean = doc.at("acc_clean").get<double>();
    r.acc_adv = doc.at("acc_adv").get<double>();
    r.delta_budget = doc.value("delta", 0);
    r.wall_ms = doc.value("wall_ms", 0.0);
    if (!(r.acc_clean >= 0.0 && r.acc_clean <= 1.0 && r.acc_adv >= 0.0 && r.acc_adv <= 1.0)) {
      fail(ErrorCode::kValidationError, "accuracies must lie in [0, 1]");
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, e.what());
  }
}

std::vector<EvalRecord> load_records(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<EvalRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const Error& e) {
      throw Error(e.code(), path + " line " + std::to_string(lineno) + ": " + e.message());
    }
  }
  return out;
}

double relative_drop(double acc_clean, double acc_adv) {
  if (acc_clean == 0.0) fail(ErrorCode::kUndefinedDrop, "clean accuracy is 0");
  return (acc_clean - acc_adv) / acc_clean;
}

std::pair<std::string, double> min_over_attacks(
    std::span<const std::pair<std::string, double>> drops) {
  if (drops.empty()) fail(ErrorCode::kNoRecords, "no attacks to aggregate");
  const std::pair<std::string, double>* best = &drops[0];
  for (const auto& d : drops) {
    if (d.second > best->second || (d.second == best->second && d.first < best->first)) best = &d;
  }
  return *best;
}

double model_delta(const std::map<std::string, double>& model,
                   const std::map<std::string, double>& reference,
                   std::span<const std::string> datasets) {
  if (datasets.empty()) fail(ErrorCode::kIncompleteCoverage, "no datasets to compare");
  double total = 0.0;
  for (const auto& d : datasets) {
    auto m = model.find(d);
    auto r = reference.find(d);
    if (m == model.end() || r == reference.end()) {
      fail(ErrorCode::kIncompleteCoverage, "missing drop for dataset '" + d + "'");
    }
    total += m->second - r->second;
  }
  return total / static_cast<double>(datasets.size());
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  double s = 0.0;
  for (double v : values) s += v;
  out.mean = s / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

RobustnessSummary summarize(std::span<const EvalRecord> records,
                            const std::optional<std::string>& reference) {
  if (records.empty()) fail(ErrorCode::kNoRecords, "no records to summarize");
  // (model, dataset) -> attack -> records
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<const EvalRecord*>>>
      grouped;
  for (const auto& r : records) grouped[{r.model_id, r.dataset_id}][r.attack_id].push_back(&r);

  RobustnessSummary out;
  out.reference = reference;
  for (const auto& [key, by_attack] : grouped) {
    GroupSummary g;
    g.model_id = key.first;
    g.dataset_id = key.second;
    std::map<std::uint64_t, double> clean_by_seed;
    for (const auto& [attack, recs] : by_attack) {
      for (const auto* r : recs) clean_by_seed.emplace(r->seed, r->acc_clean);
    }
    std::vector<double> clean;
    for (const auto& [seed, acc] : clean_by_seed) clean.push_back(acc);
    g.acc_clean = mean_std(clean);
    std::vector<std::pair<std::string, double>> drops;
    for (const auto& [attack, recs] : by_attack) {
      AttackSummary a;
      a.attack_id = attack;
      // Seed order, as for the clean mean, so the summary does not depend on
      // the order records were appended in.
      std::map<std::uint64_t, std::vector<double>> adv_by_seed;
      for (const auto* r : recs) adv_by_seed[r->seed].push_back(r->acc_adv);
      std::vector<double> adv;
      for (const auto& [seed, values] : adv_by_seed) adv.insert(adv.end(), values.begin(), values.end());
      a.acc_adv = mean_std(adv);
      a.drop = relative_drop(g.acc_clean.mean, a.acc_adv.mean);
      if (std::abs(a.drop) < 1e-12) a.drop = 0.0;  // rounding in the two means
      a.negative_drop = a.drop < 0.0;
      a.delta_budget = recs.front()->delta_budget;
      drops.emplace_back(attack, a.drop);
      g.attacks.push_back(std::move(a));
    }
    std::sort(g.attacks.begin(), g.attacks.end(), [](const AttackSummary& a, const AttackSummary& b) {
      return attack_before(a.attack_id, b.attack_id);
    });
    std::tie(g.min_attack, g.min_drop) = min_over_attacks(drops);
    out.groups.push_back(std::move(g));
  }
  if (reference) {
    std::map<std::string, std::map<std::string, double>> drops_by_model;
    for (const auto& g : out.groups) drops_by_model[g.model_id][g.dataset_id] = g.min_drop;
    auto ref = drops_by_model.find(*reference);
    if (ref == drops_by_model.end()) {
      fail(ErrorCode::kIncompleteCoverage, "reference model '" + *reference + "' has no records");
    }
    std::vector<std::string> datasets;
    for (const auto& [d, v] : ref->second) datasets.push_back(d);
    for (const auto& [model, drops] : drops_by_model) {
      out.deltas[model] = model_delta(drops, ref->second, datasets);
    }
  }
  return out;
}

std::string summary_json(const RobustnessSummary& summary) {
  auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}, {"n", m.count}}; };
  json groups = json::array();
  for (const auto& g : summary.groups) {
    json attacks = json::array();
    for (const auto& a : g.attacks) {
      attacks.push_back({{"attack", a.attack_id},
                         {"acc_adv", ms(a.acc_adv)},
                         {"drop", a.drop},
                         {"negative_drop", a.negative_drop},
                         {"delta", a.delta_budget}});
    }
    groups.push_back({{"model", g.model_id},
                      {"dataset", g.dataset_id},
                      {"acc_clean", ms(g.acc_clean)},
                      {"attacks", std::move(attacks)},
                      {"min", {{"attack", g.min_attack}, {"drop", g.min_drop}}}});
  }
  json doc{{"groups", std::move(groups)}};
  if (summary.reference) {
    doc["reference"] = *summary.reference;
    doc["delta"] = summary.deltas;
  }
  return doc.dump(2);
}

std::string summary_table(const RobustnessSummary& summary) {
  // Columns: one block per dataset holding "acc ± std" and the drop.
  std::set<std::string> dataset_set, model_set;
  for (const auto& g : summary.groups) {
    dataset_set.insert(g.dataset_id);
    model_set.insert(g.model_id);
  }
  const std::vector<std::string> datasets(dataset_set.begin(), dataset_set.end());
  auto find = [&](const std::string& m, const std::string& d) -> const GroupSummary* {
    for (const auto& g : summary.groups) {
      if (g.model_id == m && g.dataset_id == d) return &g;
    }
    return nullptr;
  };
  auto cell = [](const MeanStd& m) { return fixed(100.0 * m.mean, 6) + " ± " + fixed(100.0 * m.std, 5); };
  auto drop = [](double d) { return "(↓ " + fixed(100.0 * d, 6) + ")"; };
  const size_t w_model = 10, w_attack = 10, w_cell = 20, w_drop = 11;

  std::ostringstream out;
  out << pad("Model", w_model) << pad("Attack", w_attack);
  for (const auto& d : datasets) out << pad(d, w_cell + w_drop + 2);
  out << "\n";
  for (const auto& m : model_set) {
    std::vector<std::string> rows{"Clean"};
    for (const auto& d : datasets) {
      if (const auto* g = find(m, d)) {
        for (const auto& a : g->attacks) {
          if (std::find(rows.begin(), rows.end(), a.attack_id) == rows.end()) rows.push_back(a.attack_id);
        }
      }
    }
    std::sort(rows.begin() + 1, rows.end(), attack_before);
    rows.push_back("Min");
    for (size_t r = 0; r < rows.size(); ++r) {
      out << pad(r == 0 ? m : "", w_model) << pad(rows[r], w_attack);
      for (const auto& d : datasets) {
        const auto* g = find(m, d);
        std::string c, dr;
        if (g && r == 0) {
          c = cell(g->acc_clean);
        } else if (g && rows[r] == "Min") {
          for (const auto& a : g->attacks) {
            if (a.attack_id == g->min_attack) c = cell(a.acc_adv);
          }
          dr = drop(g->min_drop) + " " + g->min_attack;
        } else if (g) {
          for (const auto& a : g->attacks) {
            if (a.attack_id == rows[r]) {
              c = cell(a.acc_adv);
              dr = drop(a.drop) + (a.negative_drop ? "*" : "");
            }
          }
        }
        out << pad(c, w_cell) << "  " << pad(dr, w_drop);
      }
      out << "\n";
    }
  }
  if (summary.reference) {
    out << "\ndelta vs " << *summary.reference << " (percentage points of Min drop)\n";
    for (const auto& [model, d] : summary.deltas) {
      out << pad(model, w_model) << fixed(100.0 * d, 8) << "\n";
    }
  }
  return out.str();
}

}  // namespace grail
