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
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"
#include "matcher.hpp"

namespace neuso {

enum class Exploration { Full, Partial, Unvisited };

const char* to_string(Exploration e);

struct StateRecord {
  std::optional<std::uint64_t> cardinality;
  std::optional<std::uint64_t> min_cost;
  Exploration explored = Exploration::Unvisited;
};

struct TransitionRecord {
  std::uint64_t cost = 0;
  bool truncated = false;
};

using TransitionKey = std::pair<VertexSet, VertexId>;  // (from state, added vertex)

/// Cardinality-cost graph of one query: connected subqueries linked by
/// single-vertex extensions.
struct Ccg {
  VertexSet goal;
  std::map<VertexSet, StateRecord> states;
  std::map<TransitionKey, TransitionRecord> transitions;

  /// Untruncated transitions ending at `s`, as (predecessor, cost).
  std::vector<std::pair<VertexSet, std::uint64_t>> in_transitions(VertexSet s) const;
};

class StateLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultStateLimit = 5000;

/// Every connected vertex set of `q` plus the empty set, in (size, bits)
/// order. Throws StateLimitExceeded once more than `limit` states exist.
std::vector<VertexSet> connected_states(const LabeledGraph& q, std::size_t limit = kDefaultStateLimit);

/// Materializes every state and transition with measured cardinalities and
/// costs. Refuses queries whose state count exceeds `limit`; use
/// collect_partial for those.
Ccg build_full_ccg(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                   const ExecutionBudget& budget, std::size_t limit = kDefaultStateLimit);

/// Shortest-path distance from the empty state, by DP in size order. States
/// whose in-transitions are all truncated keep min_cost empty.
Ccg exact_min_costs(Ccg ccg);

struct TrainingSample {
  std::string query_id;
  VertexSet state;
  Exploration exploration = Exploration::Full;
  std::optional<std::uint64_t> cardinality;
  std::optional<std::uint64_t> min_cost;
  std::vector<std::pair<VertexSet, std::uint64_t>> in_transitions;

  friend bool operator==(const TrainingSample&, const TrainingSample&) = default;
};

/// Seed-path states and their out-neighbors, labeled Partial.
std::vector<TrainingSample> collect_partial(const LabeledGraph& g, const LabeledGraph& q,
                                            const CandidateContext& ctx, const MatchingOrder& seed_order,
                                            const ExecutionBudget& budget, const std::string& query_id = "");

/// One Full sample per state, ascending by state bits.
std::vector<TrainingSample> samples_from_ccg(const Ccg& ccg, const std::string& query_id);

void export_samples(std::ostream& out, std::span<const TrainingSample> samples);
std::string export_samples(std::span<const TrainingSample> samples);
/// Throws std::runtime_error naming the line on schema violations.
std::vector<TrainingSample> import_samples(std::istream& in);

}  // namespace neuso
