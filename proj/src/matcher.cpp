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

#include "matcher.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>

namespace neuso {

CandidateContext::CandidateContext(const LabeledGraph& g, const LabeledGraph& q,
                                   std::vector<std::vector<VertexId>> candidates)
    : n_(q.vertex_count()), candidates_(std::move(candidates)) {
  if (candidates_.size() != n_) throw std::invalid_argument("one candidate list per query vertex required");
  const std::size_t words = (g.vertex_count() + 63) / 64;
  bits_.assign(n_, std::vector<std::uint64_t>(words, 0));
  for (VertexId u = 0; u < n_; ++u) {
    auto& c = candidates_[u];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (VertexId v : c) {
      if (v >= g.vertex_count()) throw std::invalid_argument("candidate outside data graph");
      bits_[u][v >> 6] |= std::uint64_t{1} << (v & 63);
    }
  }
  edge_counts_.assign(n_ * n_, 0);
  for (auto [u1, u2] : q.edges()) {
    // Scan the smaller side, probe the other through its bitmap.
    VertexId a = u1, b = u2;
    if (candidates_[a].size() > candidates_[b].size()) std::swap(a, b);
    std::uint64_t count = 0;
    for (VertexId v : candidates_[a])
      for (VertexId w : g.neighbors(v))
        if (contains(b, w)) ++count;
    edge_counts_[u1 * n_ + u2] = count;
    edge_counts_[u2 * n_ + u1] = count;
  }
}

std::uint64_t CandidateContext::edge_count(VertexId u1, VertexId u2) const {
  if (u1 >= n_ || u2 >= n_) throw std::out_of_range("query vertex out of range");
  return edge_counts_[u1 * n_ + u2];
}

std::vector<VertexId> LabelDegreeFilter::filter(const LabeledGraph& g, const LabeledGraph& q, VertexId u) const {
  std::vector<VertexId> out;
  const std::size_t need = q.degree(u);
  for (VertexId v : g.vertices_with_label(q.label(u)))
    if (g.degree(v) >= need) out.push_back(v);
  return out;
}

std::vector<VertexId> NeighborLabelFilter::filter(const LabeledGraph& g, const LabeledGraph& q, VertexId u) const {
  std::map<Label, std::size_t> required;
  for (VertexId w : q.neighbors(u)) ++required[q.label(w)];

  std::vector<VertexId> out;
  std::map<Label, std::size_t> have;
  for (VertexId v : LabelDegreeFilter{}.filter(g, q, u)) {
    for (auto& [l, c] : required) have[l] = 0;
    for (VertexId w : g.neighbors(v)) {
      auto it = have.find(g.label(w));
      if (it != have.end()) ++it->second;
    }
    bool keep = true;
    for (auto& [l, c] : required) {
      if (have[l] < c) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(v);
  }
  return out;
}

CandidateContext build_candidates(const LabeledGraph& g, const LabeledGraph& q, const CandidateFilter& filter) {
  if (q.vertex_count() == 0) throw ContractError("query graph has no vertices");
  std::vector<std::vector<VertexId>> lists(q.vertex_count());
  for (VertexId u = 0; u < q.vertex_count(); ++u) lists[u] = filter.filter(g, q, u);
  return CandidateContext(g, q, std::move(lists));
}

CandidateContext build_candidates(const LabeledGraph& g, const LabeledGraph& q) {
  return build_candidates(g, q, NeighborLabelFilter{});
}

void ExecutionBudget::validate() const {
  if (max_probes && *max_probes == 0) throw std::invalid_argument("max_probes must be positive");
  if (max_matches && *max_matches == 0) throw std::invalid_argument("max_matches must be positive");
  if (max_elapsed && max_elapsed->count() <= 0) throw std::invalid_argument("max_elapsed must be positive");
}

namespace {

struct BackwardImage {
  std::size_t degree;
  VertexId query;
  VertexId image;
};

// Shared kernel for local candidate computation; appends into `out`.
std::uint64_t intersect(const LabeledGraph& g, const CandidateContext& ctx, VertexId u,
                        std::span<BackwardImage> images, std::vector<VertexId>& out) {
  out.clear();
  if (images.empty()) {
    auto c = ctx.candidates(u);
    out.assign(c.begin(), c.end());
    return c.size();
  }
  std::sort(images.begin(), images.end(), [](const BackwardImage& a, const BackwardImage& b) {
    return a.degree != b.degree ? a.degree < b.degree : a.query < b.query;
  });
  std::uint64_t probes = 0;
  for (VertexId w : g.neighbors(images[0].image)) {
    ++probes;
    if (ctx.contains(u, w)) out.push_back(w);
  }
  for (std::size_t j = 1; j < images.size() && !out.empty(); ++j) {
    auto adj = g.neighbors(images[j].image);
    probes += out.size();
    std::size_t keep = 0;
    auto cursor = adj.begin();
    for (VertexId s : out) {
      cursor = std::lower_bound(cursor, adj.end(), s);
      if (cursor != adj.end() && *cursor == s) out[keep++] = s;
    }
    out.resize(keep);
  }
  return probes;
}

using Clock = std::chrono::steady_clock;

// Backtracking over a prefix-connected vertex sequence (a full order or the
// order of a subquery).
class Enumerator {
 public:
  using Visitor = std::function<bool(std::span<const VertexId>)>;

  Enumerator(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
             std::span<const VertexId> seq, const ExecutionBudget& budget)
      : g_(g), ctx_(ctx), seq_(seq.begin(), seq.end()), budget_(budget),
        mapping_(q.vertex_count(), kUnmapped), used_(g.vertex_count(), 0), buffers_(seq.size()),
        backward_(seq.size()) {
    VertexSet placed;
    auto masks = neighbor_masks(q);
    for (std::size_t i = 0; i < seq_.size(); ++i) {
      (masks[seq_[i]] & placed).for_each([&](VertexId w) { backward_[i].push_back(w); });
      placed = placed.with(seq_[i]);
    }
  }

  ExecutionStats run(const Visitor* visitor) {
    visitor_ = visitor;
    start_ = Clock::now();
    if (!seq_.empty()) descend(0);
    stats_.elapsed = Clock::now() - start_;
    return stats_;
  }

 private:
  bool over_budget() {
    if (budget_.max_probes && stats_.probe_count > *budget_.max_probes) return true;
    if (budget_.max_matches && stats_.match_count > *budget_.max_matches) return true;
    if (budget_.max_elapsed && (++clock_checks_ & 255) == 0 && Clock::now() - start_ > *budget_.max_elapsed)
      return true;
    return false;
  }

  void descend(std::size_t depth) {
    const VertexId u = seq_[depth];
    std::array<BackwardImage, kMaxQueryVertices> images;
    std::size_t k = 0;
    for (VertexId w : backward_[depth]) images[k++] = {g_.degree(mapping_[w]), w, mapping_[w]};
    auto& local = buffers_[depth];
    stats_.probe_count += intersect(g_, ctx_, u, std::span(images.data(), k), local);
    if (over_budget()) {
      stop_ = stats_.truncated = true;
      return;
    }
    const bool last = depth + 1 == seq_.size();
    for (VertexId v : local) {
      if (used_[v]) continue;
      if (last) {
        ++stats_.match_count;
        if (visitor_) {
          mapping_[u] = v;
          bool go_on = (*visitor_)(mapping_);
          mapping_[u] = kUnmapped;
          if (!go_on) {
            stop_ = true;
            return;
          }
        }
        if (budget_.max_matches && stats_.match_count > *budget_.max_matches) {
          stop_ = stats_.truncated = true;
          return;
        }
        continue;
      }
      mapping_[u] = v;
      used_[v] = 1;
      descend(depth + 1);
      used_[v] = 0;
      mapping_[u] = kUnmapped;
      if (stop_) return;
    }
  }

  const LabeledGraph& g_;
  const CandidateContext& ctx_;
  std::vector<VertexId> seq_;
  ExecutionBudget budget_;
  std::vector<VertexId> mapping_;
  std::vector<std::uint8_t> used_;
  std::vector<std::vector<VertexId>> buffers_;
  std::vector<std::vector<VertexId>> backward_;
  const Visitor* visitor_ = nullptr;
  ExecutionStats stats_;
  Clock::time_point start_;
  std::uint64_t clock_checks_ = 0;
  bool stop_ = false;
};

void require_context(const LabeledGraph& q, const CandidateContext& ctx) {
  if (ctx.query_vertex_count() != q.vertex_count())
    throw ContractError("candidate context was built for a different query");
}

}  // namespace

LocalCandidates local_candidates(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                                 VertexId u, std::span<const VertexId> partial) {
  require_context(q, ctx);
  if (partial.size() != q.vertex_count()) throw ContractError("partial map must cover every query vertex");
  if (u >= q.vertex_count()) throw ContractError("query vertex out of range");
  std::vector<BackwardImage> images;
  for (VertexId w : q.neighbors(u))
    if (partial[w] != kUnmapped) images.push_back({g.degree(partial[w]), w, partial[w]});
  LocalCandidates out;
  out.probes = intersect(g, ctx, u, images, out.vertices);
  return out;
}

ExecutionStats enumerate(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                         const MatchingOrder& o, const ExecutionBudget& budget) {
  require_context(q, ctx);
  budget.validate();
  if (!validate_order(q, o)) throw ContractError("invalid matching order");
  return Enumerator(g, q, ctx, o.order, budget).run(nullptr);
}

std::vector<VertexId> subquery_order(const LabeledGraph& q, const CandidateContext& ctx, VertexSet s) {
  auto masks = neighbor_masks(q);
  std::vector<VertexId> seq;
  VertexSet placed;
  while (placed != s) {
    VertexSet pool = placed.empty() ? s : (frontier(masks, placed) & s);
    if (pool.empty()) throw ContractError("vertex set is not connected");
    VertexId best = kUnmapped;
    pool.for_each([&](VertexId v) {
      if (best == kUnmapped || ctx.candidate_count(v) < ctx.candidate_count(best)) best = v;
    });
    seq.push_back(best);
    placed = placed.with(best);
  }
  return seq;
}

ExecutionStats count_subquery(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                              VertexSet s, const ExecutionBudget& budget) {
  require_context(q, ctx);
  budget.validate();
  if ((s - VertexSet::full(q.vertex_count())).bits() != 0) throw ContractError("vertex set exceeds query");
  if (!connected(neighbor_masks(q), s)) throw ContractError("subquery is not connected");
  if (s.empty()) return ExecutionStats{.match_count = 1};
  auto seq = subquery_order(q, ctx, s);
  return Enumerator(g, q, ctx, seq, budget).run(nullptr);
}

ExtensionMeasurement measure_extensions(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                                        VertexSet from, const ExecutionBudget& budget) {
  require_context(q, ctx);
  budget.validate();
  auto masks = neighbor_masks(q);
  if ((from - VertexSet::full(q.vertex_count())).bits() != 0) throw ContractError("vertex set exceeds query");
  if (!connected(masks, from)) throw ContractError("subquery is not connected");

  ExtensionMeasurement out;
  out.added = frontier(masks, from).members();
  out.transitions.resize(out.added.size());
  if (from.empty()) {
    out.from_matches = 1;
    for (std::size_t i = 0; i < out.added.size(); ++i) {
      const auto c = ctx.candidate_count(out.added[i]);
      out.transitions[i].cost = c;
      out.transitions[i].extended_matches = c;
      out.transitions[i].truncated = budget.max_probes && c > *budget.max_probes;
    }
    return out;
  }

  const std::size_t k = out.added.size();
  std::vector<std::vector<BackwardImage>> images(k);
  std::vector<VertexId> scratch;
  std::vector<bool> alive(k, true);
  std::size_t alive_count = k;
  std::vector<std::uint8_t> used(g.vertex_count(), 0);
  const auto members = from.members();

  // Extension probes are checked per match; the enumeration's own probes
  // are added once it finishes.
  Enumerator::Visitor visit = [&](std::span<const VertexId> mapping) {
    for (VertexId w : members) used[mapping[w]] = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if (!alive[i]) continue;
      const VertexId u = out.added[i];
      auto& im = images[i];
      im.clear();
      for (VertexId w : q.neighbors(u))
        if (from.contains(w)) im.push_back({g.degree(mapping[w]), w, mapping[w]});
      auto& t = out.transitions[i];
      t.cost += intersect(g, ctx, u, im, scratch);
      for (VertexId v : scratch)
        if (!used[v]) ++t.extended_matches;
      if (budget.max_probes && t.cost > *budget.max_probes) {
        alive[i] = false;
        t.truncated = true;
        --alive_count;
      }
    }
    for (VertexId w : members) used[mapping[w]] = 0;
    return alive_count > 0;
  };

  auto seq = subquery_order(q, ctx, from);
  ExecutionStats stats = Enumerator(g, q, ctx, seq, budget).run(k ? &visit : nullptr);
  const std::uint64_t enum_probes = stats.probe_count;
  out.from_matches = stats.match_count;
  // Stopping once every transition died leaves the count incomplete.
  out.from_truncated = stats.truncated || (k && alive_count == 0);
  for (std::size_t i = 0; i < k; ++i) {
    auto& t = out.transitions[i];
    if (stats.truncated || alive_count == 0) t.truncated = true;
    if (budget.max_probes && enum_probes + t.cost > *budget.max_probes) t.truncated = true;
  }
  return out;
}

TransitionMeasurement measure_transition(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                                         VertexSet from, VertexId add, const ExecutionBudget& budget) {
  require_context(q, ctx);
  if (add >= q.vertex_count() || from.contains(add)) throw ContractError("added vertex must be outside the state");
  auto masks = neighbor_masks(q);
  if (!from.empty() && (masks[add] & from).empty()) throw ContractError("added vertex is not adjacent to the state");
  auto all = measure_extensions(g, q, ctx, from, budget);
  for (std::size_t i = 0; i < all.added.size(); ++i)
    if (all.added[i] == add) return all.transitions[i];
  throw ContractError("added vertex is not on the frontier");
}

}  // namespace neuso
