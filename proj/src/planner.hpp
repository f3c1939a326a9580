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

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ccg.hpp"
#include "estimator.hpp"
#include "json.hpp"

namespace neuso {

/// One order position: `added` extends `predecessor` into `state`.
struct PlanStep {
  VertexSet state;
  VertexSet predecessor;
  VertexId added = 0;
  double step_cost = 0;  // planner's estimate for the transition
  double min_cost = 0;   // planner's estimate for the predecessor, when it has one
};

struct PlanTrace {
  std::string planner;
  MatchingOrder order;
  std::vector<PlanStep> steps;  // steps[i] adds order[i]
  std::size_t model_invocations = 0;

  nlohmann::ordered_json to_json() const;
};

/// Step-cost and min-cost estimates consumed by the top-down planner.
class PlanOracle {
 public:
  virtual ~PlanOracle() = default;
  virtual std::vector<double> step_costs(std::span<const std::pair<VertexSet, VertexSet>> transitions) = 0;
  /// Must report 0 for the empty state.
  virtual std::vector<double> min_costs(std::span<const VertexSet> states) = 0;
  virtual std::size_t invocations() const = 0;
};

/// Trained heads as the oracle.
class ModelOracle : public PlanOracle {
 public:
  ModelOracle(const Model& model, const LabeledGraph& q, const CandidateContext& ctx) : predictor_(model, q, ctx) {}
  std::vector<double> step_costs(std::span<const std::pair<VertexSet, VertexSet>> transitions) override;
  std::vector<double> min_costs(std::span<const VertexSet> states) override;
  std::size_t invocations() const override { return predictor_.invocations(); }

 private:
  Predictor predictor_;
};

/// Measured costs from a Full CCG; unknown or truncated entries are infinite.
class CcgOracle : public PlanOracle {
 public:
  /// `ccg` must already carry min costs (see exact_min_costs).
  explicit CcgOracle(const Ccg& ccg) : ccg_(ccg) {}
  std::vector<double> step_costs(std::span<const std::pair<VertexSet, VertexSet>> transitions) override;
  std::vector<double> min_costs(std::span<const VertexSet> states) override;
  std::size_t invocations() const override { return calls_; }

 private:
  const Ccg& ccg_;
  std::size_t calls_ = 0;
};

/// States reachable from `s` by deleting one vertex without disconnecting
/// the remainder, as (removed vertex, predecessor) in ascending vertex order.
std::vector<std::pair<VertexId, VertexSet>> in_neighbors(std::span<const VertexSet> masks, VertexSet s);

/// Top-down greedy: from the full query, repeatedly step to the in-neighbor
/// minimizing step cost + min cost, prepending the removed vertex. Ties go
/// to the smallest removed id.
PlanTrace plan_top_down(const LabeledGraph& q, PlanOracle& oracle, const std::string& name = "neuso");
PlanTrace plan_neuso(const LabeledGraph& q, const CandidateContext& ctx, const Model& model);

/// Bottom-up greedy on the gCBO estimate with a running cardinality.
PlanTrace plan_gcbo(const LabeledGraph& q, const CandidateContext& ctx);

enum class BaselineKind { CandidateSize, BackwardEdges };
PlanTrace plan_baseline(const LabeledGraph& q, const CandidateContext& ctx, BaselineKind kind);

/// Lexicographically smallest order among the shortest paths of `ccg`.
/// Throws std::runtime_error when no complete untruncated path exists.
PlanTrace plan_from_ccg(const Ccg& ccg, std::size_t query_size);
/// Builds the Full CCG under `budget` and plans on it.
PlanTrace plan_exact(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                     const ExecutionBudget& budget, std::size_t state_limit = kDefaultStateLimit);

/// Sum of measured transition costs along `order`; nullopt if any step is
/// missing or truncated.
std::optional<std::uint64_t> path_cost(const Ccg& ccg, const MatchingOrder& order);

inline constexpr double kUnknownCost = std::numeric_limits<double>::infinity();

}  // namespace neuso
