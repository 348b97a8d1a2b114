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

#include "grail/attacks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "grail/error.hpp"
#include "grail/seeds.hpp"

namespace grail {

namespace {

using Index = std::int64_t;

// k distinct indices from [0, c) minus `exclude`, sorted ascending.
std::vector<Index> sample_distinct(Index c, Index k, Rng& rng,
                                   const std::set<Index>& exclude = {}) {
  const Index available = c - static_cast<Index>(exclude.size());
  k = std::min(k, available);
  std::vector<Index> out;
  if (k <= 0) return out;
  if (2 * k < available) {
    std::unordered_set<Index> seen;
    while (static_cast<Index>(out.size()) < k) {
      const auto v = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(c)));
      if (exclude.count(v) || !seen.insert(v).second) continue;
      out.push_back(v);
    }
  } else {
    std::vector<Index> pool;
    pool.reserve(static_cast<size_t>(available));
    for (Index v = 0; v < c; ++v) {
      if (!exclude.count(v)) pool.push_back(v);
    }
    if (k < available) {
      for (Index i = 0; i < k; ++i) {
        const auto j = i + static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(available - i)));
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
      }
    }
    out.assign(pool.begin(), pool.begin() + k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Index> all_candidates(Index c) {
  std::vector<Index> v(static_cast<size_t>(c));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

Matrix relaxed_adjacency(const Matrix& a, int n, std::span<const Index> idx,
                         std::span<const double> w) {
  Matrix out = a;
  for (size_t k = 0; k < idx.size(); ++k) {
    const NodePair p = pair_from_index(n, idx[k]);
    const double v = a(p.i, p.j) + (1.0 - 2.0 * a(p.i, p.j)) * w[k];
    out(p.i, p.j) = v;
    out(p.j, p.i) = v;
  }
  return out;
}

struct LossGrad {
  double loss;
  Matrix grad;  // dL / dA~ (n x n, unsymmetrized)
};

LossGrad loss_and_grad(const LinearProbe& probe, const EncoderModel& encoder,
                       const AttackTarget& target, const Matrix& adjacency, AttackLossKind kind) {
  Tape tape;
  Var w = tape.leaf(adjacency);
  Var loss = attack_loss(probe, encoder, target, w, kind);
  tape.backward(loss);
  return {loss.scalar(), tape.grad(w)};
}

// dL/dp for p flipping each entry toward its complement.
std::vector<double> flip_gradient(const Matrix& a, const Matrix& g, int n,
                                  std::span<const Index> idx) {
  std::vector<double> out(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    const NodePair p = pair_from_index(n, idx[k]);
    out[k] = (1.0 - 2.0 * a(p.i, p.j)) * (g(p.i, p.j) + g(p.j, p.i));
  }
  return out;
}

double graph_loss(const LinearProbe& probe, const EncoderModel& encoder, const AttackTarget& target,
                  std::span<const NodePair> flips, AttackLossKind kind) {
  const Graph g = apply_perturbation(*target.graph, flips);
  return attack_loss_value(probe, encoder, target, dense_adjacency(g), kind);
}

double resolve_lr(const AttackConfig& config, int delta, int n) {
  return config.lr ? *config.lr : 100.0 * delta / std::max(n, 1);
}

Index resolve_block(const AttackConfig& config, int delta, Index candidates) {
  const Index want = config.block_size > 0
                         ? config.block_size
                         : std::max<Index>(10 * static_cast<Index>(delta), 2000);
  return std::min(want, candidates);
}

void check_budget(int delta, Index candidates) {
  if (delta < 0) fail(ErrorCode::kBudgetInfeasible, "negative budget");
  if (delta > candidates) {
    fail(ErrorCode::kBudgetInfeasible, "budget " + std::to_string(delta) + " exceeds " +
                                           std::to_string(candidates) + " candidate pairs");
  }
}

// One projected gradient step on the held weights; returns the loss at the
// point before the step.
double relaxed_step(const LinearProbe& probe, const EncoderModel& encoder,
                    const AttackTarget& target, const Matrix& a, std::span<const Index> idx,
                    std::vector<double>& w, int delta, double step, AttackLossKind kind) {
  const int n = target.graph->num_nodes();
  const LossGrad lg = loss_and_grad(probe, encoder, target, relaxed_adjacency(a, n, idx, w), kind);
  const auto g = flip_gradient(a, lg.grad, n, idx);
  for (size_t k = 0; k < w.size(); ++k) w[k] -= step * g[k];
  w = project_budget(w, static_cast<double>(delta));
  return lg.loss;
}

// Best feasible Bernoulli sample of the relaxed weights; top-delta fallback.
std::vector<NodePair> discretize(const LinearProbe& probe, const EncoderModel& encoder,
                                 const AttackTarget& target, std::span<const Index> idx,
                                 std::span<const double> w, int delta, int samples,
                                 AttackLossKind kind, Rng& rng) {
  const int n = target.graph->num_nodes();
  std::vector<NodePair> best;
  double best_loss = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int s = 0; s < samples; ++s) {
    std::vector<NodePair> flips;
    for (size_t k = 0; k < idx.size(); ++k) {
      if (w[k] > 0.0 && uniform01(rng) < w[k]) flips.push_back(pair_from_index(n, idx[k]));
    }
    if (static_cast<int>(flips.size()) > delta) continue;
    const double l = graph_loss(probe, encoder, target, flips, kind);
    if (!found || l < best_loss) {
      best_loss = l;
      best = std::move(flips);
      found = true;
    }
  }
  if (found) return best;
  std::vector<size_t> order;
  for (size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) order.push_back(k);
  }
  std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return w[x] > w[y]; });
  order.resize(std::min(order.size(), static_cast<size_t>(delta)));
  std::sort(order.begin(), order.end());
  for (size_t k : order) best.push_back(pair_from_index(n, idx[k]));
  return best;
}

}  // namespace

std::string_view attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::kRandom: return "random";
    case AttackKind::kPgd: return "pgd";
    case AttackKind::kPrbcd: return "prbcd";
    case AttackKind::kGrbcd: return "grbcd";
  }
  return "?";
}

AttackKind parse_attack_kind(std::string_view s) {
  for (auto k : {AttackKind::kRandom, AttackKind::kPgd, AttackKind::kPrbcd, AttackKind::kGrbcd}) {
    if (attack_kind_name(k) == s) return k;
  }
  fail(ErrorCode::kConfigError, "unknown attack '" + std::string(s) + "'");
}

std::string_view attack_loss_name(AttackLossKind k) {
  return k == AttackLossKind::kCrossEntropy ? "ce" : "margin";
}

AttackLossKind parse_attack_loss(std::string_view s) {
  if (s == "ce") return AttackLossKind::kCrossEntropy;
  if (s == "margin") return AttackLossKind::kMargin;
  fail(ErrorCode::kConfigError, "unknown attack loss '" + std::string(s) + "'");
}

void AttackConfig::validate() const {
  if (steps < 1) fail(ErrorCode::kConfigError, "attack steps must be >= 1");
  if (lr && !(*lr >= 0.0 && std::isfinite(*lr))) fail(ErrorCode::kConfigError, "attack lr must be >= 0");
  if (block_size < 0) fail(ErrorCode::kConfigError, "block_size must be >= 0");
  if (!(resample_keep_fraction > 0.0 && resample_keep_fraction <= 1.0)) {
    fail(ErrorCode::kConfigError, "resample_keep_fraction must lie in (0, 1]");
  }
  if (discretize_samples < 1) fail(ErrorCode::kConfigError, "discretize_samples must be >= 1");
}

int budget_from_fraction(int num_edges, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    fail(ErrorCode::kConfigError, "budget fraction must lie in [0, 1]");
  }
  return static_cast<int>(std::lround(fraction * num_edges));
}

std::vector<double> project_budget(std::span<const double> p, double delta) {
  std::vector<double> out(p.size());
  auto clipped_sum = [&](double mu) {
    double s = 0.0;
    for (size_t k = 0; k < p.size(); ++k) s += std::clamp(p[k] - mu, 0.0, 1.0);
    return s;
  };
  if (clipped_sum(0.0) <= delta) {
    for (size_t k = 0; k < p.size(); ++k) out[k] = std::clamp(p[k], 0.0, 1.0);
    return out;
  }
  // The clipped sum is non-increasing in mu; bracket and bisect.
  double lo = 0.0;
  double hi = *std::max_element(p.begin(), p.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = clipped_sum(mid);
    if (s > delta) {
      lo = mid;
    } else {
      hi = mid;
      if (delta - s <= 1e-7) break;
    }
  }
  for (size_t k = 0; k < p.size(); ++k) out[k] = std::clamp(p[k] - hi, 0.0, 1.0);
  return out;
}

std::vector<int> greedy_chunks(int delta, int steps) {
  if (steps < 1) fail(ErrorCode::kConfigError, "greedy steps must be >= 1");
  std::vector<int> out(static_cast<size_t>(steps), delta / steps);
  for (int k = 0; k < delta % steps; ++k) ++out[static_cast<size_t>(k)];
  return out;
}

AttackTarget node_attack_target(const GraphDataset& dataset) {
  if (dataset.task() != Task::kNode) fail(ErrorCode::kConfigError, "not a node dataset");
  AttackTarget t;
  t.graph = &dataset.graph(0);
  t.task = Task::kNode;
  t.rows = dataset.split().test;
  t.labels = dataset.labels();
  if (t.rows.empty()) fail(ErrorCode::kEmptySelection, "test split is empty");
  return t;
}

AttackTarget graph_attack_target(const GraphDataset& dataset, int graph_index) {
  if (dataset.task() != Task::kGraph) fail(ErrorCode::kConfigError, "not a graph dataset");
  AttackTarget t;
  t.graph = &dataset.graph(graph_index);
  t.task = Task::kGraph;
  t.rows = {0};
  t.labels = {*t.graph->graph_label()};
  return t;
}

Var attack_loss(const LinearProbe& probe, const EncoderModel& encoder, const AttackTarget& target,
                Var adjacency, AttackLossKind kind) {
  Tape& tape = *adjacency.tape();
  auto enc = bind_frozen(tape, encoder.parameters());
  auto head = bind_frozen(tape, probe.parameters());
  Var h = encoder.forward(enc, adjacency, tape.constant(target.graph->features()));
  if (target.task == Task::kGraph) h = readout(h, encoder.config().readout);
  Var logits = probe.logits(head, h);
  if (kind == AttackLossKind::kCrossEntropy) {
    return ad::neg(cross_entropy(logits, target.labels, target.rows));
  }
  if (logits.cols() < 2) fail(ErrorCode::kConfigError, "margin loss needs at least 2 classes");
  Var sel = ad::row_index(logits, target.rows);
  const Matrix& z = sel.value();
  std::vector<int> truth, other;
  for (size_t r = 0; r < target.rows.size(); ++r) {
    const int y = target.labels[static_cast<size_t>(target.rows[r])];
    int best = -1;
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      if (c == y) continue;
      if (best < 0 || z(static_cast<Eigen::Index>(r), c) > z(static_cast<Eigen::Index>(r), best)) {
        best = static_cast<int>(c);
      }
    }
    truth.push_back(y);
    other.push_back(best);
  }
  return ad::mean(ad::tanh(ad::sub(ad::pick(sel, truth), ad::pick(sel, other))));
}

double attack_loss_value(const LinearProbe& probe, const EncoderModel& encoder,
                         const AttackTarget& target, const Matrix& adjacency, AttackLossKind kind) {
  Tape tape;
  return attack_loss(probe, encoder, target, tape.constant(adjacency), kind).scalar();
}

GraphAttack random_flip_attack(const Graph& g, int delta, std::uint64_t seed) {
  const Index c = num_candidate_pairs(g.num_nodes());
  check_budget(delta, c);
  Rng rng(derive_seed(seed, "random.flips"));
  GraphAttack out;
  for (Index k : sample_distinct(c, delta, rng)) out.flips.push_back(pair_from_index(g.num_nodes(), k));
  return out;
}

GraphAttack pgd_attack(const AttackTarget& target, const LinearProbe& probe,
                       const EncoderModel& encoder, int delta, const AttackConfig& config) {
  config.validate();
  const int n = target.graph->num_nodes();
  const Index c = num_candidate_pairs(n);
  check_budget(delta, c);
  GraphAttack out;
  if (delta == 0) return out;
  const Matrix a = dense_adjacency(*target.graph);
  const double lr = resolve_lr(config, delta, n);
  const std::vector<Index> idx = all_candidates(c);
  std::vector<double> w(idx.size(), 0.0);
  for (int t = 1; t <= config.steps; ++t) {
    out.loss_trace.push_back(relaxed_step(probe, encoder, target, a, idx, w, delta,
                                          lr / std::sqrt(static_cast<double>(t)), config.loss));
  }
  Rng rng(derive_seed(config.seed, "discretize"));
  out.flips = discretize(probe, encoder, target, idx, w, delta, config.discretize_samples,
                         config.loss, rng);
  out.relaxed_index = idx;
  out.relaxed_weight = w;
  out.max_live_weights = c;
  return out;
}

GraphAttack prbcd_attack(const AttackTarget& target, const LinearProbe& probe,
                         const EncoderModel& encoder, int delta, const AttackConfig& config) {
  config.validate();
  const int n = target.graph->num_nodes();
  const Index c = num_candidate_pairs(n);
  check_budget(delta, c);
  GraphAttack out;
  if (delta == 0) return out;
  const Index block = resolve_block(config, delta, c);
  if (block < delta) fail(ErrorCode::kConfigError, "block_size must be >= the budget");
  const Matrix a = dense_adjacency(*target.graph);
  const double lr = resolve_lr(config, delta, n);
  Rng block_rng(derive_seed(config.seed, "prbcd.block"));
  std::vector<Index> idx = block == c ? all_candidates(c) : sample_distinct(c, block, block_rng);
  std::vector<double> w(idx.size(), 0.0);
  out.max_live_weights = static_cast<Index>(w.size());
  const auto keep = static_cast<Index>(std::lround(config.resample_keep_fraction * static_cast<double>(block)));
  for (int t = 1; t <= config.steps; ++t) {
    out.loss_trace.push_back(relaxed_step(probe, encoder, target, a, idx, w, delta,
                                          lr / std::sqrt(static_cast<double>(t)), config.loss));
    if (t == config.steps || block == c || keep >= block) continue;
    // Survival of the fittest: keep the heaviest entries, refill the rest.
    std::vector<size_t> order(idx.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return w[x] > w[y]; });
    std::set<Index> kept_set;
    std::vector<std::pair<Index, double>> next;
    for (Index k = 0; k < keep; ++k) {
      const size_t s = order[static_cast<size_t>(k)];
      kept_set.insert(idx[s]);
      next.emplace_back(idx[s], w[s]);
    }
    for (Index v : sample_distinct(c, block - keep, block_rng, kept_set)) next.emplace_back(v, 0.0);
    std::sort(next.begin(), next.end());
    idx.clear();
    w.clear();
    for (const auto& [v, x] : next) {
      idx.push_back(v);
      w.push_back(x);
    }
    out.max_live_weights = std::max(out.max_live_weights, static_cast<Index>(w.size()));
  }
  Rng rng(derive_seed(config.seed, "discretize"));
  out.flips = discretize(probe, encoder, target, idx, w, delta, config.discretize_samples,
                         config.loss, rng);
  out.relaxed_index = idx;
  out.relaxed_weight = w;
  return out;
}

GraphAttack grbcd_attack(const AttackTarget& target, const LinearProbe& probe,
                         const EncoderModel& encoder, int delta, const AttackConfig& config) {
  config.validate();
  const int n = target.graph->num_nodes();
  const Index c = num_candidate_pairs(n);
  check_budget(delta, c);
  GraphAttack out;
  if (delta == 0) return out;
  const Index block = resolve_block(config, delta, c);
  Rng block_rng(derive_seed(config.seed, "grbcd.block"));
  std::set<Index> committed;
  Graph current = *target.graph;
  double current_loss = attack_loss_value(probe, encoder, target, dense_adjacency(current), config.loss);
  for (int chunk : greedy_chunks(delta, config.steps)) {
    if (chunk > 0) {
      const std::vector<Index> idx = sample_distinct(c, block, block_rng, committed);
      out.max_live_weights = std::max(out.max_live_weights, static_cast<Index>(idx.size()));
      const Matrix a = dense_adjacency(current);
      const LossGrad lg = loss_and_grad(probe, encoder, target, a, config.loss);
      const auto g = flip_gradient(a, lg.grad, n, idx);
      std::vector<size_t> order;
      for (size_t k = 0; k < g.size(); ++k) {
        if (g[k] < 0.0) order.push_back(k);
      }
      std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return g[x] < g[y]; });
      order.resize(std::min(order.size(), static_cast<size_t>(chunk)));
      std::vector<NodePair> chosen;
      for (size_t k : order) chosen.push_back(pair_from_index(n, idx[k]));
      // Re-evaluation guard: never accept flips that increase the loss.
      const Graph whole = apply_perturbation(current, chosen);
      const double whole_loss =
          attack_loss_value(probe, encoder, target, dense_adjacency(whole), config.loss);
      if (whole_loss <= current_loss) {
        current = whole;
        current_loss = whole_loss;
        for (const auto& p : chosen) committed.insert(index_from_pair(n, p));
      } else {
        for (const auto& p : chosen) {
          const NodePair one[] = {p};
          Graph trial = apply_perturbation(current, one);
          const double l = attack_loss_value(probe, encoder, target, dense_adjacency(trial), config.loss);
          if (l <= current_loss) {
            current = std::move(trial);
            current_loss = l;
            committed.insert(index_from_pair(n, p));
          }
        }
      }
    }
    out.loss_trace.push_back(current_loss);
  }
  for (Index k : committed) out.flips.push_back(pair_from_index(n, k));
  return out;
}

GraphAttack attack_graph(const AttackTarget& target, const LinearProbe& probe,
                         const EncoderModel& encoder, int delta, const AttackConfig& config) {
  switch (config.kind) {
    case AttackKind::kRandom: return random_flip_attack(*target.graph, delta, config.seed);
    case AttackKind::kPgd: return pgd_attack(target, probe, encoder, delta, config);
    case AttackKind::kPrbcd: return prbcd_attack(target, probe, encoder, delta, config);
    case AttackKind::kGrbcd: return grbcd_attack(target, probe, encoder, delta, config);
  }
  fail(ErrorCode::kConfigError, "unhandled attack kind");
}

AttackResult run_attack(const LinearProbe& probe, const EncoderModel& encoder,
                        const GraphDataset& dataset, double budget_fraction,
                        const AttackConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  AttackResult r;
  r.kind = config.kind;
  r.task = dataset.task();
  r.seed = config.seed;
  if (dataset.task() == Task::kNode) {
    const AttackTarget target = node_attack_target(dataset);
    r.delta = budget_from_fraction(target.graph->num_edges(), budget_fraction);
    GraphAttack ga = attack_graph(target, probe, encoder, r.delta, config);
    r.flips = std::move(ga.flips);
    r.loss_trace = std::move(ga.loss_trace);
  } else {
    std::vector<double> trace_sum;
    std::vector<int> trace_count;
    for (int gi : dataset.split().test) {
      const AttackTarget target = graph_attack_target(dataset, gi);
      const int d = budget_from_fraction(target.graph->num_edges(), budget_fraction);
      AttackConfig sub = config;
      sub.seed = derive_seed(config.seed, "graph", static_cast<std::uint64_t>(gi));
      GraphAttack ga = attack_graph(target, probe, encoder, d, sub);
      for (size_t k = 0; k < ga.loss_trace.size(); ++k) {
        if (k >= trace_sum.size()) {
          trace_sum.push_back(0.0);
          trace_count.push_back(0);
        }
        trace_sum[k] += ga.loss_trace[k];
        ++trace_count[k];
      }
      r.delta += d;
      r.graphs.push_back(GraphFlips{gi, d, std::move(ga.flips)});
    }
    for (size_t k = 0; k < trace_sum.size(); ++k) r.loss_trace.push_back(trace_sum[k] / trace_count[k]);
  }
  const auto graphs = perturbed_graphs(dataset, r);
  r.acc_adv = accuracy(probe, encoder, dataset, dataset.split().test, graphs);
  r.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<Graph> perturbed_graphs(const GraphDataset& dataset, const AttackResult& result) {
  std::vector<Graph> out = dataset.graphs();
  if (dataset.task() == Task::kNode) {
    out[0] = apply_perturbation(out[0], result.flips);
  } else {
    for (const auto& gf : result.graphs) {
      out[static_cast<size_t>(gf.graph)] = apply_perturbation(out[static_cast<size_t>(gf.graph)], gf.flips);
    }
  }
  return out;
}

std::string attack_result_json(const AttackResult& r) {
  using json = nlohmann::json;
  auto pairs = [](const std::vector<NodePair>& flips) {
    json a = json::array();
    for (const auto& p : flips) a.push_back({p.i, p.j});
    return a;
  };
  json doc{{"attack", std::string(attack_kind_name(r.kind))},
           {"delta", r.delta},
           {"flips", pairs(r.flips)},
           {"acc_adv", r.acc_adv},
           {"loss_trace", r.loss_trace},
           {"seed", r.seed},
           {"wall_ms", r.wall_ms}};
  if (r.task == Task::kGraph) {
    json graphs = json::array();
    for (const auto& g : r.graphs) {
      graphs.push_back({{"graph", g.graph}, {"delta", g.delta}, {"flips", pairs(g.flips)}});
    }
    doc["graphs"] = std::move(graphs);
  }
  return doc.dump();
}

}  // namespace grail
