/*
 * Copyright 2026 The neuso Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "planner.hpp"

#include <algorithm>
#include <cmath>

namespace neuso {

namespace {

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

// Fills steps[i] from a finished order; estimates are filled by the caller.
PlanTrace trace_for(std::string name, std::vector<VertexId> order) {
  PlanTrace t;
  t.planner = std::move(name);
  VertexSet prefix;
  for (VertexId u : order) {
    PlanStep s;
    s.predecessor = prefix;
    s.added = u;
    prefix = prefix.with(u);
    s.state = prefix;
    t.steps.push_back(s);
  }
  t.order.order = std::move(order);
  return t;
}

}  // namespace

nlohmann::ordered_json PlanTrace::to_json() const {
  nlohmann::ordered_json j;
  j["planner"] = planner;
  j["order"] = order.order;
  auto steps_json = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    nlohmann::ordered_json e;
    e["added"] = s.added;
    e["predecessor"] = s.predecessor.bits();
    e["state"] = s.state.bits();
    e["step_cost"] = number_or_null(s.step_cost);
    e["min_cost"] = number_or_null(s.min_cost);
    steps_json.push_back(std::move(e));
  }
  j["steps"] = std::move(steps_json);
  j["model_invocations"] = model_invocations;
  return j;
}

std::vector<double> ModelOracle::step_costs(std::span<const std::pair<VertexSet, VertexSet>> transitions) {
  return predictor_.cost(transitions);
}

std::vector<double> ModelOracle::min_costs(std::span<const VertexSet> states) { return predictor_.min_cost(states); }

std::vector<double> CcgOracle::step_costs(std::span<const std::pair<VertexSet, VertexSet>> transitions) {
  std::vector<double> out;
  for (auto [from, to] : transitions) {
    ++calls_;
    const VertexSet added = to - from;
    auto it = added.size() == 1 ? ccg_.transitions.find({from, added.lowest()}) : ccg_.transitions.end();
    out.push_back(it == ccg_.transitions.end() || it->second.truncated ? kUnknownCost
                                                                       : static_cast<double>(it->second.cost));
  }
  return out;
}

std::vector<double> CcgOracle::min_costs(std::span<const VertexSet> states) {
  std::vector<double> out;
  for (VertexSet s : states) {
    if (s.empty()) {
      out.push_back(0.0);
      continue;
    }
    ++calls_;
    auto it = ccg_.states.find(s);
    out.push_back(it == ccg_.states.end() || !it->second.min_cost ? kUnknownCost
                                                                   : static_cast<double>(*it->second.min_cost));
  }
  return out;
}

std::vector<std::pair<VertexId, VertexSet>> in_neighbors(std::span<const VertexSet> masks, VertexSet s) {
  std::vector<std::pair<VertexId, VertexSet>> out;
  s.for_each([&](VertexId u) {
    const VertexSet rest = s.without(u);
    if (connected(masks, rest)) out.emplace_back(u, rest);
  });
  return out;
}

PlanTrace plan_top_down(const LabeledGraph& q, PlanOracle& oracle, const std::string& name) {
  const std::size_t n = q.vertex_count();
  require_query_size(q);
  if (n == 0) throw ContractError("cannot plan an empty query");
  const auto masks = neighbor_masks(q);
  if (!connected(masks, VertexSet::full(n))) throw ContractError("query is not connected");

  const std::size_t before = oracle.invocations();
  std::vector<PlanStep> reversed;
  VertexSet s = VertexSet::full(n);
  while (!s.empty()) {
    const auto cands = in_neighbors(masks, s);
    std::vector<std::pair<VertexSet, VertexSet>> trans;
    std::vector<VertexSet> preds;
    for (auto [u, rest] : cands) {
      trans.emplace_back(rest, s);
      preds.push_back(rest);
    }
    const auto step = oracle.step_costs(trans);
    const auto mc = oracle.min_costs(preds);
    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i)
      if (step[i] + mc[i] < step[best] + mc[best]) best = i;
    PlanStep ps;
    ps.state = s;
    ps.predecessor = cands[best].second;
    ps.added = cands[best].first;
    ps.step_cost = step[best];
    ps.min_cost = mc[best];
    reversed.push_back(ps);
    s = ps.predecessor;
  }
  PlanTrace t;
  t.planner = name;
  t.steps.assign(reversed.rbegin(), reversed.rend());
  for (const auto& ps : t.steps) t.order.order.push_back(ps.added);
  t.model_invocations = oracle.invocations() - before;
  return t;
}

PlanTrace plan_neuso(const LabeledGraph& q, const CandidateContext& ctx, const Model& model) {
  ModelOracle oracle(model, q, ctx);
  return plan_top_down(q, oracle, "neuso");
}

PlanTrace plan_gcbo(const LabeledGraph& q, const CandidateContext& ctx) {
  const std::size_t n = q.vertex_count();
  require_query_size(q);
  if (n == 0) throw ContractError("cannot plan an empty query");
  const auto masks = neighbor_masks(q);
  VertexId start = 0;
  for (VertexId u = 1; u < n; ++u)
    if (ctx.candidate_count(u) < ctx.candidate_count(start)) start = u;
  std::vector<VertexId> order{start};
  std::vector<double> step_cost{static_cast<double>(ctx.candidate_count(start))};
  double card = step_cost[0];
  VertexSet done = VertexSet::single(start);
  while (order.size() < n) {
    const VertexSet next = frontier(masks, done);
    if (next.empty()) throw ContractError("query is not connected");
    std::optional<std::pair<double, VertexId>> best;
    next.for_each([&](VertexId v) {
      const double c = gcbo_cost(card, q, ctx, done, v);
      if (!best || c < best->first) best = std::make_pair(c, v);
    });
    order.push_back(best->second);
    step_cost.push_back(best->first);
    card = best->first;
    done = done.with(best->second);
  }
  PlanTrace t = trace_for("gcbo", std::move(order));
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    t.steps[i].step_cost = step_cost[i];
    t.steps[i].min_cost = kUnknownCost;
  }
  return t;
}

PlanTrace plan_baseline(const LabeledGraph& q, const CandidateContext& ctx, BaselineKind kind) {
  const std::size_t n = q.vertex_count();
  require_query_size(q);
  if (n == 0) throw ContractError("cannot plan an empty query");
  const auto masks = neighbor_masks(q);
  // Larger score wins; ties keep the smaller id.
  auto score = [&](VertexId v, VertexSet done) -> double {
    if (kind == BaselineKind::CandidateSize) return -static_cast<double>(ctx.candidate_count(v));
    if (done.empty()) return static_cast<double>(q.degree(v));
    return static_cast<double>((masks[v] & done).size());
  };
  std::vector<VertexId> order;
  VertexSet done;
  while (order.size() < n) {
    const VertexSet pool = done.empty() ? VertexSet::full(n) : frontier(masks, done);
    if (pool.empty()) throw ContractError("query is not connected");
    std::optional<std::pair<double, VertexId>> best;
    pool.for_each([&](VertexId v) {
      const double sc = score(v, done);
      if (!best || sc > best->first) best = std::make_pair(sc, v);
    });
    order.push_back(best->second);
    done = done.with(best->second);
  }
  PlanTrace t = trace_for(kind == BaselineKind::CandidateSize ? "candidate_size" : "backward_edges", std::move(order));
  for (auto& s : t.steps) s.step_cost = s.min_cost = kUnknownCost;
  return t;
}

PlanTrace plan_from_ccg(const Ccg& ccg, std::size_t query_size) {
  // Cost-to-go over states, largest first.
  std::vector<VertexSet> states;
  for (const auto& [s, r] : ccg.states) states.push_back(s);
  std::stable_sort(states.begin(), states.end(), [](VertexSet a, VertexSet b) { return a.size() > b.size(); });
  std::map<VertexSet, std::uint64_t> to_go;
  to_go[ccg.goal] = 0;
  auto best_step = [&](VertexSet s) {
    std::optional<std::pair<std::uint64_t, VertexId>> best;
    for (auto it = ccg.transitions.lower_bound({s, 0}); it != ccg.transitions.end() && it->first.first == s; ++it) {
      if (it->second.truncated) continue;
      auto next = to_go.find(s.with(it->first.second));
      if (next == to_go.end()) continue;
      const std::uint64_t total = it->second.cost + next->second;
      if (!best || total < best->first) best = std::make_pair(total, it->first.second);
    }
    return best;
  };
  for (VertexSet s : states) {
    if (s == ccg.goal) continue;
    if (auto b = best_step(s)) to_go[s] = b->first;
  }
  if (!to_go.count(VertexSet{})) throw std::runtime_error("no complete untruncated path in the CCG");

  std::vector<VertexId> order;
  std::vector<double> costs;
  VertexSet s;
  while (order.size() < query_size) {
    auto b = best_step(s);
    order.push_back(b->second);
    costs.push_back(static_cast<double>(ccg.transitions.at({s, b->second}).cost));
    s = s.with(b->second);
  }
  PlanTrace t = trace_for("exact", std::move(order));
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    t.steps[i].step_cost = costs[i];
    auto it = ccg.states.find(t.steps[i].predecessor);
    t.steps[i].min_cost = it != ccg.states.end() && it->second.min_cost ? static_cast<double>(*it->second.min_cost) : kUnknownCost;
  }
  return t;
}

PlanTrace plan_exact(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                     const ExecutionBudget& budget, std::size_t state_limit) {
  const Ccg ccg = exact_min_costs(build_full_ccg(g, q, ctx, budget, state_limit));
  return plan_from_ccg(ccg, q.vertex_count());
}

std::optional<std::uint64_t> path_cost(const Ccg& ccg, const MatchingOrder& order) {
  std::uint64_t total = 0;
  VertexSet s;
  for (VertexId u : order.order) {
    auto it = ccg.transitions.find({s, u});
    if (it == ccg.transitions.end() || it->second.truncated) return std::nullopt;
    total += it->second.cost;
    s = s.with(u);
  }
  return total;
}

}  // namespace neuso
