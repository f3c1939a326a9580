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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "datagen.hpp"
#include "json.hpp"
#include "planner.hpp"

namespace neuso {

/// Collection for one query: Full CCG when its state count fits under
/// `state_limit`, otherwise the Partial neighborhood of the gCBO order.
std::vector<TrainingSample> collect_query(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                                          const std::string& query_id, const ExecutionBudget& budget,
                                          std::size_t state_limit = kDefaultStateLimit);

/// Samples for every query of `workload` whose split is in `splits`, in
/// workload order.
std::vector<TrainingSample> collect_workload(const LabeledGraph& g, std::span<const WorkloadQuery> workload,
                                             const ExecutionBudget& budget, std::size_t state_limit,
                                             std::span<const Split> splits);

/// Pairs workload queries with their samples; queries without samples are
/// skipped.
std::vector<TrainingQuery> training_queries(const LabeledGraph& g, std::span<const WorkloadQuery> workload,
                                            std::span<const TrainingSample> samples, Split split);

inline const std::vector<std::string> kPlanners{"neuso", "gcbo", "candidate_size", "backward_edges", "exact"};

/// Dispatch by planner name. "neuso" requires a model. "exact" builds the
/// Full CCG under `budget`.
PlanTrace plan_by_name(const std::string& planner, const LabeledGraph& g, const LabeledGraph& q,
                       const CandidateContext& ctx, const Model* model, const ExecutionBudget& budget);

struct BenchRow {
  std::string query_id;
  std::size_t size = 0;
  std::string planner;
  std::uint64_t probe_count = 0;
  double elapsed = 0;
  std::uint64_t match_count = 0;
  bool truncated = false;
  std::string plan_json;  // empty when planning failed
};

struct QErrorPoint {
  std::size_t size = 0;
  double predicted = 0;
  double truth = 0;
};

struct QuantileRow {
  std::size_t size = 0;
  std::size_t count = 0;
  double min = 0, p25 = 0, p50 = 0, p75 = 0, max = 0;
};

/// Per query size, quantiles of log10((1 + predicted) / (1 + truth)) with
/// linear interpolation between order statistics. Throws
/// std::invalid_argument on empty input.
std::vector<QuantileRow> qerror_report(std::span<const QErrorPoint> points);
/// Linear-interpolation quantile of an unsorted sample, 0 <= p <= 1.
double quantile(std::vector<double> values, double p);

struct BenchConfig {
  std::vector<std::string> planners{"neuso", "gcbo", "candidate_size", "backward_edges"};
  std::string baseline = "candidate_size";
  ExecutionBudget run_budget{.max_probes = 100000000ull, .max_matches = {}, .max_elapsed = {}};
  ExecutionBudget plan_budget{.max_probes = 1000000ull, .max_matches = {}, .max_elapsed = {}};
  bool timing = false;

  void validate() const;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // ordered by query_id, then planner position in the config
  std::vector<QuantileRow> qerror;
  BenchConfig config;

  /// exp(mean ln(baseline probes / planner probes)) over queries both ran,
  /// with probe counts floored at 1.
  std::map<std::string, double> geomean_speedups() const;
  std::map<std::string, std::size_t> unsolved() const;
  std::string csv() const;
  nlohmann::ordered_json summary() const;
};

/// Runs every configured planner on the Test queries of `workload`. With a
/// model and Full samples of those queries, also reports cardinality
/// q-errors.
BenchReport run_bench(const LabeledGraph& g, std::span<const WorkloadQuery> workload, const Model* model,
                      const BenchConfig& cfg, std::span<const TrainingSample> test_samples = {});

}  // namespace neuso
