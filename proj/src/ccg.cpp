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

#include "ccg.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace neuso {

const char* to_string(Exploration e) {
  switch (e) {
    case Exploration::Full: return "Full";
    case Exploration::Partial: return "Partial";
    case Exploration::Unvisited: return "Unvisited";
  }
  return "Unvisited";
}

std::vector<std::pair<VertexSet, std::uint64_t>> Ccg::in_transitions(VertexSet s) const {
  std::vector<std::pair<VertexSet, std::uint64_t>> out;
  s.for_each([&](VertexId u) {
    auto it = transitions.find({s.without(u), u});
    if (it != transitions.end() && !it->second.truncated) out.emplace_back(s.without(u), it->second.cost);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VertexSet> connected_states(const LabeledGraph& q, std::size_t limit) {
  auto masks = neighbor_masks(q);
  std::vector<VertexSet> out{VertexSet{}};
  std::vector<VertexSet> layer;
  for (VertexId u = 0; u < q.vertex_count(); ++u) layer.push_back(VertexSet::single(u));
  while (!layer.empty()) {
    if (out.size() + layer.size() > limit)
      throw StateLimitExceeded("query has more than " + std::to_string(limit) + " connected subqueries");
    out.insert(out.end(), layer.begin(), layer.end());
    std::set<VertexSet> next;
    for (VertexSet s : layer) frontier(masks, s).for_each([&](VertexId u) { next.insert(s.with(u)); });
    layer.assign(next.begin(), next.end());
  }
  return out;
}

Ccg build_full_ccg(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                   const ExecutionBudget& budget, std::size_t limit) {
  budget.validate();
  Ccg ccg;
  ccg.goal = VertexSet::full(q.vertex_count());
  const auto states = connected_states(q, limit);
  for (VertexSet s : states) ccg.states[s].explored = Exploration::Full;
  ccg.states[VertexSet{}].cardinality = 1;

  for (VertexSet s : states) {
    if (s == ccg.goal) continue;
    auto& record = ccg.states[s];
    const bool hopeless = budget.max_matches && record.cardinality && *record.cardinality > *budget.max_matches;
    ExtensionMeasurement ext;
    if (hopeless) {
      ext.added = frontier(neighbor_masks(q), s).members();
      ext.transitions.assign(ext.added.size(), TransitionMeasurement{.truncated = true});
      ext.from_truncated = true;
    } else {
      ext = measure_extensions(g, q, ctx, s, budget);
      if (!ext.from_truncated) {
        if (record.cardinality && *record.cardinality != ext.from_matches)
          throw std::logic_error("inconsistent cardinality for state " + std::to_string(s.bits()));
        record.cardinality = ext.from_matches;
      }
    }
    for (std::size_t i = 0; i < ext.added.size(); ++i) {
      const auto& t = ext.transitions[i];
      ccg.transitions[{s, ext.added[i]}] = TransitionRecord{t.cost, t.truncated};
      if (t.truncated) continue;
      auto& next = ccg.states[s.with(ext.added[i])];
      if (next.cardinality && *next.cardinality != t.extended_matches)
        throw std::logic_error("inconsistent cardinality for state " + std::to_string(s.with(ext.added[i]).bits()));
      next.cardinality = t.extended_matches;
    }
  }
  return ccg;
}

Ccg exact_min_costs(Ccg ccg) {
  // std::map orders by bits, not size; sort explicitly.
  std::vector<VertexSet> order;
  for (auto& [s, r] : ccg.states) order.push_back(s);
  std::stable_sort(order.begin(), order.end(), [](VertexSet a, VertexSet b) { return a.size() < b.size(); });
  for (VertexSet s : order) {
    auto& rec = ccg.states[s];
    if (s.empty()) {
      rec.min_cost = 0;
      continue;
    }
    std::optional<std::uint64_t> best;
    for (auto [pred, cost] : ccg.in_transitions(s)) {
      auto it = ccg.states.find(pred);
      if (it == ccg.states.end() || !it->second.min_cost) continue;
      const std::uint64_t len = *it->second.min_cost + cost;
      if (!best || len < *best) best = len;
    }
    rec.min_cost = best;
  }
  return ccg;
}

std::vector<TrainingSample> collect_partial(const LabeledGraph& g, const LabeledGraph& q,
                                            const CandidateContext& ctx, const MatchingOrder& seed_order,
                                            const ExecutionBudget& budget, const std::string& query_id) {
  budget.validate();
  if (!validate_order(q, seed_order)) throw ContractError("seed order is not a valid matching order");
  std::map<VertexSet, TrainingSample> samples;
  auto sample_at = [&](VertexSet s) -> TrainingSample& {
    auto& smp = samples[s];
    smp.query_id = query_id;
    smp.state = s;
    smp.exploration = Exploration::Partial;
    return smp;
  };
  sample_at(VertexSet{}).cardinality = 1;

  const auto& o = seed_order.order;
  const std::uint64_t first_cost = ctx.candidate_count(o[0]);
  if (budget.max_probes && first_cost > *budget.max_probes) return {samples[VertexSet{}]};
  auto& first = sample_at(VertexSet::single(o[0]));
  first.cardinality = first_cost;
  first.in_transitions.emplace_back(VertexSet{}, first_cost);

  VertexSet path = VertexSet::single(o[0]);
  for (std::size_t i = 1; i < o.size(); ++i) {
    auto ext = measure_extensions(g, q, ctx, path, budget);
    bool path_ok = false;
    for (std::size_t j = 0; j < ext.added.size(); ++j) {
      const auto& t = ext.transitions[j];
      if (t.truncated) continue;
      auto& smp = sample_at(path.with(ext.added[j]));
      smp.cardinality = t.extended_matches;
      smp.in_transitions.emplace_back(path, t.cost);
      if (ext.added[j] == o[i]) path_ok = true;
    }
    if (!path_ok) break;
    path = path.with(o[i]);
  }

  std::vector<TrainingSample> out;
  for (auto& [s, smp] : samples) out.push_back(std::move(smp));
  return out;
}

std::vector<TrainingSample> samples_from_ccg(const Ccg& ccg, const std::string& query_id) {
  std::vector<TrainingSample> out;
  for (auto& [s, rec] : ccg.states) {
    TrainingSample smp;
    smp.query_id = query_id;
    smp.state = s;
    smp.exploration = rec.explored == Exploration::Unvisited ? Exploration::Full : rec.explored;
    smp.cardinality = rec.cardinality;
    smp.min_cost = rec.min_cost;
    smp.in_transitions = ccg.in_transitions(s);
    out.push_back(std::move(smp));
  }
  return out;
}

void export_samples(std::ostream& out, std::span<const TrainingSample> samples) {
  for (const auto& smp : samples) {
    nlohmann::ordered_json j;
    j["query_id"] = smp.query_id;
    j["state"] = smp.state.bits();
    j["exploration"] = to_string(smp.exploration);
    j["cardinality"] = smp.cardinality ? nlohmann::ordered_json(*smp.cardinality) : nullptr;
    j["min_cost"] = smp.min_cost ? nlohmann::ordered_json(*smp.min_cost) : nullptr;
    auto arr = nlohmann::ordered_json::array();
    for (auto [from, cost] : smp.in_transitions) {
      nlohmann::ordered_json t;
      t["from"] = from.bits();
      t["cost"] = cost;
      arr.push_back(std::move(t));
    }
    j["in_transitions"] = std::move(arr);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing training samples");
}

std::string export_samples(std::span<const TrainingSample> samples) {
  std::ostringstream out;
  export_samples(out, samples);
  return out.str();
}

std::vector<TrainingSample> import_samples(std::istream& in) {
  std::vector<TrainingSample> out;
  std::string line;
  std::size_t lineno = 0;
  auto optional_u64 = [](const nlohmann::json& v) -> std::optional<std::uint64_t> {
    if (v.is_null()) return std::nullopt;
    return v.get<std::uint64_t>();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TrainingSample smp;
      smp.query_id = j.at("query_id").get<std::string>();
      smp.state = VertexSet(j.at("state").get<std::uint64_t>());
      const auto ex = j.at("exploration").get<std::string>();
      if (ex == "Full") smp.exploration = Exploration::Full;
      else if (ex == "Partial") smp.exploration = Exploration::Partial;
      else throw std::runtime_error("exploration must be Full or Partial");
      smp.cardinality = optional_u64(j.at("cardinality"));
      smp.min_cost = optional_u64(j.at("min_cost"));
      for (const auto& t : j.at("in_transitions"))
        smp.in_transitions.emplace_back(VertexSet(t.at("from").get<std::uint64_t>()), t.at("cost").get<std::uint64_t>());
      out.push_back(std::move(smp));
    } catch (const std::exception& e) {
      throw std::runtime_error("samples line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace neuso
