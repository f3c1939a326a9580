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

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "graph.hpp"

namespace neuso {

inline constexpr VertexId kUnmapped = ~VertexId{0};

/// Filter output for one (data, query) pair.
///
/// `edge_count(u1, u2)` counts ordered data-vertex pairs (a, b) with a in
/// C(u1), b in C(u2) and (a, b) an edge, so an edge whose endpoints both sit
/// in both sets counts once per orientation. For distinct labels this is
/// the plain number of data edges between the two sets.
class CandidateContext {
 public:
  CandidateContext() = default;
  /// Takes ownership of per-vertex candidate lists (sorted here) and derives
  /// membership bitmaps and candidate edge counts.
  CandidateContext(const LabeledGraph& g, const LabeledGraph& q,
                   std::vector<std::vector<VertexId>> candidates);

  std::size_t query_vertex_count() const noexcept { return candidates_.size(); }
  std::span<const VertexId> candidates(VertexId u) const { return candidates_[u]; }
  std::size_t candidate_count(VertexId u) const { return candidates_[u].size(); }
  bool contains(VertexId u, VertexId v) const {
    return (bits_[u][v >> 6] >> (v & 63)) & 1u;
  }
  std::uint64_t edge_count(VertexId u1, VertexId u2) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<VertexId>> candidates_;
  std::vector<std::vector<std::uint64_t>> bits_;
  std::vector<std::uint64_t> edge_counts_;  // n x n, zero for non-edges
};

/// Candidate generation strategy. Implementations must be complete: every
/// data vertex that some isomorphism maps u onto stays in C(u).
class CandidateFilter {
 public:
  virtual ~CandidateFilter() = default;
  virtual std::vector<VertexId> filter(const LabeledGraph& g, const LabeledGraph& q, VertexId u) const = 0;
};

/// Label equality and degree dominance.
class LabelDegreeFilter : public CandidateFilter {
 public:
  std::vector<VertexId> filter(const LabeledGraph& g, const LabeledGraph& q, VertexId u) const override;
};

/// LabelDegreeFilter plus neighbor-label-frequency pruning.
class NeighborLabelFilter : public CandidateFilter {
 public:
  std::vector<VertexId> filter(const LabeledGraph& g, const LabeledGraph& q, VertexId u) const override;
};

CandidateContext build_candidates(const LabeledGraph& g, const LabeledGraph& q);
CandidateContext build_candidates(const LabeledGraph& g, const LabeledGraph& q, const CandidateFilter& filter);

struct ExecutionBudget {
  std::optional<std::uint64_t> max_probes;
  std::optional<std::uint64_t> max_matches;
  std::optional<std::chrono::duration<double>> max_elapsed;

  /// Throws std::invalid_argument on non-positive limits.
  void validate() const;
  static ExecutionBudget unlimited() { return {}; }
};

struct ExecutionStats {
  std::uint64_t match_count = 0;
  std::uint64_t probe_count = 0;
  bool truncated = false;
  std::chrono::duration<double> elapsed{0};
};

struct LocalCandidates {
  std::vector<VertexId> vertices;
  std::uint64_t probes = 0;
};

/// Intersection of C(u) with the neighborhoods of the images of u's mapped
/// query neighbors. `partial[w]` is kUnmapped for unmapped query vertices.
///
/// Probe metering: with no mapped neighbor the result is C(u) and every
/// candidate costs one probe. Otherwise the image adjacency lists are
/// ordered by (length, query id); each element of the shortest list costs
/// one probe (checked against C(u)), and each survivor costs one probe per
/// further list it is checked against.
LocalCandidates local_candidates(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                                 VertexId u, std::span<const VertexId> partial);

/// Backtracking enumeration of all subgraph isomorphisms along `o`.
/// Throws ContractError when `o` is not a valid matching order.
ExecutionStats enumerate(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                         const MatchingOrder& o, const ExecutionBudget& budget = {});

/// Matches of the subquery induced on `s` (restricted to candidates).
ExecutionStats count_subquery(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                              VertexSet s, const ExecutionBudget& budget = {});

struct TransitionMeasurement {
  std::uint64_t cost = 0;              // probes spent extending every match of `from`
  std::uint64_t extended_matches = 0;  // matches of from + {add}
  bool truncated = false;
};

/// Cost of joining `add` onto all matches of the subquery on `from`.
/// With `from` empty the cost is |C(add)|.
TransitionMeasurement measure_transition(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                                         VertexSet from, VertexId add, const ExecutionBudget& budget = {});

/// All out-transitions of `from` in one enumeration pass. Entry i
/// corresponds to the i-th member of frontier(from). A transition is
/// truncated once the enumeration probes of `from` plus its own extension
/// probes exceed max_probes, or when `from` itself cannot be enumerated
/// within budget.
struct ExtensionMeasurement {
  std::vector<VertexId> added;
  std::vector<TransitionMeasurement> transitions;
  std::uint64_t from_matches = 0;
  bool from_truncated = false;
};
ExtensionMeasurement measure_extensions(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                                        VertexSet from, const ExecutionBudget& budget = {});

/// Deterministic prefix-connected order over `s`: start at the smallest
/// candidate set, then repeatedly the smallest connected one; ties by id.
std::vector<VertexId> subquery_order(const LabeledGraph& q, const CandidateContext& ctx, VertexSet s);

}  // namespace neuso
