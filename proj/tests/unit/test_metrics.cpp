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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "grail/error.hpp"
#include "grail/metrics.hpp"

using namespace grail;

namespace {

using Drops = std::vector<std::pair<std::string, double>>;

EvalRecord rec(std::string model, std::string dataset, std::string attack, std::uint64_t seed,
               double clean, double adv) {
  EvalRecord r;
  r.model_id = std::move(model);
  r.dataset_id = std::move(dataset);
  r.attack_id = std::move(attack);
  r.seed = seed;
  r.acc_clean = clean;
  r.acc_adv = adv;
  r.delta_budget = 3;
  return r;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kParseError;
}

}  // namespace

TEST_CASE("relative drop examples") {
  CHECK(std::abs(relative_drop(0.7398, 0.6804) - 0.0803) < 5e-5);
  CHECK(std::abs(relative_drop(0.7467, 0.3391) - 0.5459) < 5e-5);
  CHECK(relative_drop(0.6, 0.6) == 0.0);
  CHECK(relative_drop(0.8, 0.0) == 1.0);
  CHECK(relative_drop(0.5, 0.6) < 0.0);
  CHECK(code_of([] { relative_drop(0.0, 0.0); }) == ErrorCode::kUndefinedDrop);
}

TEST_CASE("relative drop is scale invariant") {
  for (double k : {0.01, 0.5, 3.0, 100.0}) {
    CHECK(relative_drop(k * 0.74, k * 0.31) == doctest::Approx(relative_drop(0.74, 0.31)));
  }
}

TEST_CASE("min over attacks") {
  const Drops gcn_dd{{"random", 13.98}, {"pgd", 26.85}, {"prbcd", 87.57}, {"grbcd", 18.24}};
  const auto best = min_over_attacks(gcn_dd);
  CHECK(best.first == "prbcd");
  CHECK(best.second == 87.57);

  const Drops single{{"pgd", 0.1}};
  CHECK(min_over_attacks(single).first == "pgd");

  const Drops tied{{"random", 0.2}, {"grbcd", 0.2}, {"pgd", 0.2}};
  CHECK(min_over_attacks(tied).first == "grbcd");

  CHECK(code_of([] { min_over_attacks(Drops{}); }) == ErrorCode::kNoRecords);
}

TEST_CASE("model delta") {
  const std::vector<std::string> ds{"PROTEINS", "NCI1", "DD"};
  const std::map<std::string, double> graphcl{{"PROTEINS", 38.89}, {"NCI1", 55.94}, {"DD", 75.34}};
  const std::map<std::string, double> gcn{{"PROTEINS", 8.04}, {"NCI1", 54.59}, {"DD", 87.57}};
  CHECK(model_delta(graphcl, gcn, ds) == doctest::Approx(6.656666).epsilon(1e-6));
  CHECK(model_delta(gcn, gcn, ds) == 0.0);
  CHECK(model_delta(gcn, graphcl, ds) == doctest::Approx(-model_delta(graphcl, gcn, ds)));

  const std::vector<std::string> two{"a", "b"};
  CHECK(model_delta({{"a", 20.0}, {"b", 0.0}}, {{"a", 10.0}, {"b", 10.0}}, two) == 0.0);

  const std::vector<std::string> more{"PROTEINS", "Cora"};
  CHECK(code_of([&] { model_delta(graphcl, gcn, more); }) == ErrorCode::kIncompleteCoverage);
}

TEST_CASE("mean and sample std") {
  const std::vector<double> one{0.4};
  CHECK(mean_std(one).std == 0.0);
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto m = mean_std(v);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(m.count == 4);
}

TEST_CASE("record json round trip and validation") {
  auto r = rec("DGI", "sbm", "prbcd", 4, 0.75, 0.5);
  r.wall_ms = 12.5;
  const auto back = record_from_json(record_to_json(r));
  CHECK(back.model_id == "DGI");
  CHECK(back.attack_id == "prbcd");
  CHECK(back.seed == 4);
  CHECK(back.acc_clean == 0.75);
  CHECK(back.acc_adv == 0.5);
  CHECK(back.delta_budget == 3);
  CHECK(back.wall_ms == 12.5);

  CHECK(code_of([] { record_from_json("{\"model\": 1"); }) == ErrorCode::kParseError);
  CHECK(code_of([] { record_from_json(R"({"model":"m","dataset":"d","attack":"a","seed":0,)"
                                      R"("acc_clean":1.5,"acc_adv":0.2})"); }) ==
        ErrorCode::kValidationError);
}

TEST_CASE("load records names the failing line") {
  const auto path = std::filesystem::temp_directory_path() / "grail_metrics_records.jsonl";
  {
    std::ofstream out(path);
    out << record_to_json(rec("m", "d", "random", 0, 0.5, 0.4)) << "\n\n";
    out << "not json\n";
  }
  try {
    load_records(path.string());
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("summarize uses seed-mean accuracies") {
  const std::vector<EvalRecord> records{
      rec("DGI", "sbm", "random", 0, 0.80, 0.78), rec("DGI", "sbm", "prbcd", 0, 0.80, 0.60),
      rec("DGI", "sbm", "random", 1, 0.60, 0.58), rec("DGI", "sbm", "prbcd", 1, 0.60, 0.30)};
  const auto s = summarize(records);
  REQUIRE(s.groups.size() == 1);
  const auto& g = s.groups[0];
  CHECK(g.acc_clean.mean == doctest::Approx(0.70));
  CHECK(g.acc_clean.count == 2);
  REQUIRE(g.attacks.size() == 2);
  CHECK(g.attacks[0].attack_id == "random");
  CHECK(g.attacks[1].attack_id == "prbcd");
  CHECK(g.attacks[1].acc_adv.mean == doctest::Approx(0.45));
  CHECK(g.attacks[1].drop == doctest::Approx((0.70 - 0.45) / 0.70));
  CHECK(g.min_attack == "prbcd");
  for (const auto& a : g.attacks) CHECK(a.acc_adv.mean >= g.attacks[1].acc_adv.mean);
}

TEST_CASE("summarize keeps negative drops") {
  const std::vector<EvalRecord> records{rec("GCN", "sbm", "random", 0, 0.5, 0.6)};
  const auto s = summarize(records);
  CHECK(s.groups[0].attacks[0].drop == doctest::Approx(-0.2));
  CHECK(s.groups[0].attacks[0].negative_drop);
  CHECK(s.groups[0].acc_clean.std == 0.0);
  CHECK(summary_table(s).find("*") != std::string::npos);
}

TEST_CASE("an attack without effect has a drop of exactly zero") {
  std::vector<EvalRecord> records;
  const double clean[] = {0.7, 0.85, 0.8, 0.75, 0.9, 0.65, 0.7};
  const double adv[] = {0.7, 0.8, 0.8, 0.75, 0.9, 0.65, 0.75};
  for (std::uint64_t s = 0; s < 7; ++s) records.push_back(rec("DGI", "sbm", "grbcd", 6 - s, clean[s], adv[s]));
  const auto summary = summarize(records);
  CHECK(summary.groups[0].attacks[0].drop == 0.0);
  CHECK_FALSE(summary.groups[0].attacks[0].negative_drop);
}

TEST_CASE("summarize deltas against a reference") {
  const std::vector<EvalRecord> records{
      rec("GCN", "a", "pgd", 0, 0.8, 0.4), rec("GCN", "b", "pgd", 0, 0.8, 0.6),
      rec("DGI", "a", "pgd", 0, 0.8, 0.6), rec("DGI", "b", "pgd", 0, 0.8, 0.4)};
  const auto s = summarize(records, std::string("GCN"));
  CHECK(s.deltas.at("GCN") == 0.0);
  CHECK(s.deltas.at("DGI") == doctest::Approx(0.0));
  CHECK(code_of([&] { summarize(records, std::string("GIN")); }) ==
        ErrorCode::kIncompleteCoverage);
  CHECK(code_of([] { summarize(std::vector<EvalRecord>{}); }) == ErrorCode::kNoRecords);
}

TEST_CASE("summary table layout") {
  std::vector<EvalRecord> records;
  for (std::uint64_t s = 0; s < 3; ++s) {
    for (const char* a : {"grbcd", "random", "prbcd", "pgd"}) {
      records.push_back(rec("GCN", "sbm", a, s, 0.9, 0.5 + 0.05 * static_cast<double>(s)));
    }
  }
  const auto s = summarize(records, std::string("GCN"));
  const auto table = summary_table(s);
  const auto pos = [&](const char* needle) { return table.find(needle); };
  REQUIRE(pos("Model") == 0);
  CHECK(pos("Clean") < pos("random"));
  CHECK(pos("random") < pos("pgd"));
  CHECK(pos("pgd") < pos("prbcd"));
  CHECK(pos("prbcd") < pos("grbcd"));
  CHECK(pos("grbcd") < pos("Min"));
  CHECK(pos("↓") != std::string::npos);
  CHECK(pos("90.00 ±") != std::string::npos);
  CHECK(pos("delta vs GCN") != std::string::npos);

  const auto doc = summary_json(s);
  CHECK(doc.find("\"min\"") != std::string::npos);
  CHECK(doc.find("\"reference\": \"GCN\"") != std::string::npos);
}
