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

#include "bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace neuso {

std::vector<TrainingSample> collect_query(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                                          const std::string& query_id, const ExecutionBudget& budget,
                                          std::size_t state_limit) {
  bool full = true;
  try {
    connected_states(q, state_limit);
  } catch (const StateLimitExceeded&) {
    full = false;
  }
  if (full) return samples_from_ccg(exact_min_costs(build_full_ccg(g, q, ctx, budget, state_limit)), query_id);
  return collect_partial(g, q, ctx, plan_gcbo(q, ctx).order, budget, query_id);
}

std::vector<TrainingSample> collect_workload(const LabeledGraph& g, std::span<const WorkloadQuery> workload,
                                             const ExecutionBudget& budget, std::size_t state_limit,
                                             std::span<const Split> splits) {
  std::vector<TrainingSample> out;
  for (const auto& wq : workload) {
    if (std::find(splits.begin(), splits.end(), wq.split) == splits.end()) continue;
    const auto ctx = build_candidates(g, wq.graph);
    auto s = collect_query(g, wq.graph, ctx, wq.id, budget, state_limit);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

std::vector<TrainingQuery> training_queries(const LabeledGraph& g, std::span<const WorkloadQuery> workload,
                                            std::span<const TrainingSample> samples, Split split) {
  std::map<std::string, std::vector<TrainingSample>> by_id;
  for (const auto& s : samples) by_id[s.query_id].push_back(s);
  std::vector<TrainingQuery> out;
  for (const auto& wq : workload) {
    if (wq.split != split) continue;
    auto it = by_id.find(wq.id);
    if (it == by_id.end()) continue;
    TrainingQuery tq;
    tq.id = wq.id;
    tq.graph = wq.graph;
    tq.ctx = build_candidates(g, wq.graph);
    tq.samples = std::move(it->second);
    out.push_back(std::move(tq));
  }
  return out;
}

PlanTrace plan_by_name(const std::string& planner, const LabeledGraph& g, const LabeledGraph& q,
                       const CandidateContext& ctx, const Model* model, const ExecutionBudget& budget) {
  if (planner == "neuso") {
    if (!model) throw std::invalid_argument("planner neuso needs a model");
    return plan_neuso(q, ctx, *model);
  }
  if (planner == "gcbo") return plan_gcbo(q, ctx);
  if (planner == "candidate_size") return plan_baseline(q, ctx, BaselineKind::CandidateSize);
  if (planner == "backward_edges") return plan_baseline(q, ctx, BaselineKind::BackwardEdges);
  if (planner == "exact") return plan_exact(g, q, ctx, budget);
  throw std::invalid_argument("unknown planner '" + planner + "'");
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<QuantileRow> qerror_report(std::span<const QErrorPoint> points) {
  if (points.empty()) throw std::invalid_argument("q-error report needs at least one point");
  std::map<std::size_t, std::vector<double>> by_size;
  for (const auto& p : points) {
    if (!(p.predicted >= 0) || !(p.truth >= 0)) throw std::invalid_argument("cardinalities must be non-negative");
    by_size[p.size].push_back(std::log10((1 + p.predicted) / (1 + p.truth)));
  }
  std::vector<QuantileRow> out;
  for (const auto& [size, v] : by_size) {
    QuantileRow r;
    r.size = size;
    r.count = v.size();
    r.min = *std::min_element(v.begin(), v.end());
    r.max = *std::max_element(v.begin(), v.end());
    r.p25 = quantile(v, 0.25);
    r.p50 = quantile(v, 0.50);
    r.p75 = quantile(v, 0.75);
    out.push_back(r);
  }
  return out;
}

void BenchConfig::validate() const {
  if (planners.empty()) throw std::invalid_argument("bench needs at least one planner");
  for (const auto& p : planners)
    if (std::find(kPlanners.begin(), kPlanners.end(), p) == kPlanners.end())
      throw std::invalid_argument("unknown planner '" + p + "'");
  if (std::find(planners.begin(), planners.end(), baseline) == planners.end())
    throw std::invalid_argument("baseline '" + baseline + "' is not among the planners");
  run_budget.validate();
  plan_budget.validate();
}

std::map<std::string, double> BenchReport::geomean_speedups() const {
  std::map<std::string, std::map<std::string, const BenchRow*>> by_query;
  for (const auto& r : rows) by_query[r.query_id][r.planner] = &r;
  std::map<std::string, double> out;
  for (const auto& p : config.planners) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& [id, m] : by_query) {
      auto b = m.find(config.baseline), x = m.find(p);
      if (b == m.end() || x == m.end() || b->second->plan_json.empty() || x->second->plan_json.empty()) continue;
      const double base = static_cast<double>(std::max<std::uint64_t>(b->second->probe_count, 1));
      const double mine = static_cast<double>(std::max<std::uint64_t>(x->second->probe_count, 1));
      sum += std::log(base / mine);
      ++n;
    }
    out[p] = n ? std::exp(sum / static_cast<double>(n)) : std::nan("");
  }
  return out;
}

std::map<std::string, std::size_t> BenchReport::unsolved() const {
  std::map<std::string, std::size_t> out;
  for (const auto& p : config.planners) out[p] = 0;
  for (const auto& r : rows)
    if (r.truncated) ++out[r.planner];
  return out;
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

nlohmann::ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string BenchReport::csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "query_id,size,planner,probe_count,";
  if (config.timing) out << "elapsed,";
  out << "match_count,truncated,plan_json\n";
  for (const auto& r : rows) {
    out << r.query_id << ',' << r.size << ',' << r.planner << ',' << r.probe_count << ',';
    if (config.timing) out << r.elapsed << ',';
    out << r.match_count << ',' << (r.truncated ? "true" : "false") << ',' << csv_quote(r.plan_json) << '\n';
  }
  return out.str();
}

nlohmann::ordered_json BenchReport::summary() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["baseline"] = config.baseline;
  j["planners"] = config.planners;
  j["run_probe_budget"] = config.run_budget.max_probes ? nlohmann::ordered_json(*config.run_budget.max_probes) : nullptr;
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.query_id);
  j["query_count"] = ids.size();
  nlohmann::ordered_json sp, un;
  const auto speed = geomean_speedups();
  const auto uns = unsolved();
  for (const auto& p : config.planners) {
    sp[p] = finite_or_null(speed.at(p));
    un[p] = uns.at(p);
  }
  j["geomean_speedup"] = std::move(sp);
  j["unsolved"] = std::move(un);
  auto q = nlohmann::ordered_json::array();
  for (const auto& r : qerror)
    q.push_back({{"size", r.size}, {"count", r.count}, {"min", r.min}, {"p25", r.p25}, {"p50", r.p50},
                 {"p75", r.p75}, {"max", r.max}});
  j["card_log10_ratio"] = std::move(q);
  return j;
}

BenchReport run_bench(const LabeledGraph& g, std::span<const WorkloadQuery> workload, const Model* model,
                      const BenchConfig& cfg, std::span<const TrainingSample> test_samples) {
  cfg.validate();
  BenchReport report;
  report.config = cfg;
  std::vector<const WorkloadQuery*> tests;
  for (const auto& wq : workload)
    if (wq.split == Split::Test) tests.push_back(&wq);
  std::sort(tests.begin(), tests.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::map<std::string, std::vector<const TrainingSample*>> full_samples;
  for (const auto& s : test_samples)
    if (s.exploration == Exploration::Full && s.cardinality && !s.state.empty()) full_samples[s.query_id].push_back(&s);
  std::vector<QErrorPoint> points;

  for (const auto* wq : tests) {
    const auto ctx = build_candidates(g, wq->graph);
    for (const auto& planner : cfg.planners) {
      BenchRow row;
      row.query_id = wq->id;
      row.size = wq->size();
      row.planner = planner;
      try {
        const PlanTrace plan = plan_by_name(planner, g, wq->graph, ctx, model, cfg.plan_budget);
        row.plan_json = plan.to_json().dump();
        const ExecutionStats st = enumerate(g, wq->graph, ctx, plan.order, cfg.run_budget);
        row.probe_count = st.probe_count;
        row.match_count = st.match_count;
        row.truncated = st.truncated;
        row.elapsed = st.elapsed.count();
      } catch (const std::runtime_error&) {
        // Only the exact planner can fail here: its CCG had no complete path.
        if (planner != "exact") throw;
        row.truncated = true;
      } catch (const ContractError&) {
        if (planner != "exact") throw;
        row.truncated = true;
      }
      report.rows.push_back(std::move(row));
    }
    auto it = full_samples.find(wq->id);
    if (model && it != full_samples.end()) {
      Predictor pred(*model, wq->graph, ctx);
      std::vector<VertexSet> states;
      for (const auto* s : it->second) states.push_back(s->state);
      const auto est = pred.card(states);
      for (std::size_t i = 0; i < states.size(); ++i)
        points.push_back({wq->size(), est[i], static_cast<double>(*it->second[i]->cardinality)});
    }
  }
  if (!points.empty()) report.qerror = qerror_report(points);
  return report;
}

}  // namespace neuso
