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

#include "doctest.h"
#include "matcher.hpp"
#include "oracles.hpp"

using namespace neuso;

namespace {

// Random prefix-connected order of a connected query.
MatchingOrder random_order(const LabeledGraph& q, std::mt19937_64& rng) {
  const auto masks = neighbor_masks(q);
  MatchingOrder o;
  VertexSet done;
  while (o.order.size() < q.vertex_count()) {
    const auto pool = (done.empty() ? VertexSet::full(q.vertex_count()) : frontier(masks, done)).members();
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const VertexId v = pool[pick(rng)];
    o.order.push_back(v);
    done = done.with(v);
  }
  return o;
}

// Induced subquery on `members` (in that order) with candidates copied.
struct Induced {
  LabeledGraph sub;
  CandidateContext ctx;
  std::vector<VertexId> order;
};

// Subquery on `seq`, renumbered in increasing original id so that query-id
// tie breaks keep their relative order; `order` is `seq` in the new ids.
Induced induced(const LabeledGraph& g, const LabeledGraph& q, const CandidateContext& ctx,
                const std::vector<VertexId>& seq) {
  std::vector<VertexId> members(seq);
  std::sort(members.begin(), members.end());
  std::vector<Label> labels;
  std::vector<std::vector<VertexId>> cands;
  std::vector<std::pair<VertexId, VertexId>> es;
  for (std::size_t i = 0; i < members.size(); ++i) {
    labels.push_back(q.label(members[i]));
    auto c = ctx.candidates(members[i]);
    cands.emplace_back(c.begin(), c.end());
    for (std::size_t j = i + 1; j < members.size(); ++j)
      if (q.has_edge(members[i], members[j])) es.emplace_back(static_cast<VertexId>(i), static_cast<VertexId>(j));
  }
  auto sub = LabeledGraph::from_edges(labels, es, q.label_alphabet_size());
  CandidateContext sub_ctx(g, sub, std::move(cands));
  std::vector<VertexId> order;
  for (VertexId u : seq)
    order.push_back(static_cast<VertexId>(std::lower_bound(members.begin(), members.end(), u) - members.begin()));
  return {std::move(sub), std::move(sub_ctx), std::move(order)};
}

}  // namespace

TEST_CASE("label filter on a triangle") {
  const auto g = oracle::graph({0, 0, 1}, {{0, 1}, {1, 2}, {0, 2}});
  const auto q = oracle::graph({0}, {});
  const auto ctx = build_candidates(g, q);
  CHECK(std::vector<VertexId>(ctx.candidates(0).begin(), ctx.candidates(0).end()) == std::vector<VertexId>{0, 1});
}

TEST_CASE("star data graph and an edge query") {
  const auto g = oracle::graph({1, 0, 0, 0, 0}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const auto q = oracle::graph({0, 1}, {{0, 1}});
  const auto ctx = build_candidates(g, q);
  CHECK(ctx.candidate_count(0) == 4);
  CHECK(std::vector<VertexId>(ctx.candidates(1).begin(), ctx.candidates(1).end()) == std::vector<VertexId>{0});
  CHECK(ctx.edge_count(0, 1) == 4);
}

TEST_CASE("candidate sets are complete") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = oracle::random_graph(rng, 4 + trial % 9, 0.4, 3);
    const auto q = oracle::random_connected(rng, 1 + trial % 4, 0.3, 3);
    const LabelDegreeFilter basic;
    const NeighborLabelFilter nlf;
    for (const CandidateFilter* f : {static_cast<const CandidateFilter*>(&basic), static_cast<const CandidateFilter*>(&nlf)}) {
      const auto ctx = build_candidates(g, q, *f);
      for (const auto& m : oracle::brute_force_embeddings(g, q))
        for (VertexId u = 0; u < q.vertex_count(); ++u) CHECK(ctx.contains(u, m[u]));
    }
  }
}

TEST_CASE("local candidates without mapped neighbors are C(u)") {
  const auto g = oracle::graph(std::vector<Label>(10, 0), {{0, 1}});
  const auto q = oracle::graph({0, 0}, {{0, 1}});
  const CandidateContext ctx(g, q, {{3, 7}, {1, 2}});
  const std::vector<VertexId> partial{kUnmapped, kUnmapped};
  const auto lc = local_candidates(g, q, ctx, 0, partial);
  CHECK(lc.vertices == std::vector<VertexId>{3, 7});
  CHECK(lc.probes == 2);
}

TEST_CASE("local candidates intersect with the image adjacency") {
  // v = 0 with adjacency {2, 3, 9}.
  const auto g = oracle::graph(std::vector<Label>(10, 0), {{0, 2}, {0, 3}, {0, 9}, {1, 4}});
  const auto q = oracle::graph({0, 0}, {{0, 1}});
  const CandidateContext ctx(g, q, {{0}, {1, 2, 3}});
  const std::vector<VertexId> partial{0, kUnmapped};
  const auto lc = local_candidates(g, q, ctx, 1, partial);
  CHECK(lc.vertices == std::vector<VertexId>{2, 3});
  CHECK(lc.probes == 3);
}

TEST_CASE("local candidates match the definitional filter") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = oracle::random_graph(rng, 12, 0.35, 2);
    const auto q = oracle::random_connected(rng, 4, 0.5, 2);
    const auto ctx = build_candidates(g, q);
    std::vector<VertexId> partial(q.vertex_count(), kUnmapped);
    std::uniform_int_distribution<VertexId> data(0, 11);
    std::bernoulli_distribution mapped(0.5);
    for (VertexId w = 1; w < q.vertex_count(); ++w)
      if (mapped(rng)) partial[w] = data(rng);
    const auto lc = local_candidates(g, q, ctx, 0, partial);
    std::vector<VertexId> expect;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      bool ok = ctx.contains(0, v);
      for (VertexId w : q.neighbors(0))
        if (partial[w] != kUnmapped) ok = ok && g.has_edge(partial[w], v);
      if (ok) expect.push_back(v);
    }
    CHECK(lc.vertices == expect);
  }
}

TEST_CASE("triangle match counts") {
  const auto g = oracle::graph({0, 1, 2}, {{0, 1}, {1, 2}, {0, 2}});
  const auto q = oracle::graph({0, 1, 2}, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(enumerate(g, q, build_candidates(g, q), {{0, 1, 2}}).match_count == 1);
  const auto k3 = oracle::graph({0, 0, 0}, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(enumerate(k3, k3, build_candidates(k3, k3), {{2, 0, 1}}).match_count == 6);
}

TEST_CASE("enumerate equals the brute-force count under every order") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_graph(rng, 6 + trial % 7, 0.45, 2);
    const auto q = oracle::random_connected(rng, 1 + trial % 5, 0.4, 2);
    const auto ctx = build_candidates(g, q);
    const auto truth = oracle::brute_force_matches(g, q);
    for (int k = 0; k < 3; ++k) CHECK(enumerate(g, q, ctx, random_order(q, rng)).match_count == truth);
  }
}

TEST_CASE("enumerate rejects invalid orders and budgets") {
  const auto g = oracle::graph({0, 0, 0}, {{0, 1}, {1, 2}});
  const auto ctx = build_candidates(g, g);
  CHECK_THROWS_AS(enumerate(g, g, ctx, {{0, 2, 1}}), ContractError);
  CHECK_THROWS_AS(enumerate(g, g, ctx, {{0, 1, 2}}, {.max_probes = 0, .max_matches = {}, .max_elapsed = {}}),
                  std::invalid_argument);
}

TEST_CASE("probe budget truncates") {
  const auto g = oracle::graph(std::vector<Label>(6, 0), {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
  const auto q = oracle::graph({0, 0, 0}, {{0, 1}, {1, 2}});
  const auto ctx = build_candidates(g, q);
  const auto full = enumerate(g, q, ctx, {{1, 0, 2}});
  CHECK_FALSE(full.truncated);
  const auto cut = enumerate(g, q, ctx, {{1, 0, 2}}, {.max_probes = full.probe_count - 1, .max_matches = {}, .max_elapsed = {}});
  CHECK(cut.truncated);
  CHECK(cut.match_count < full.match_count);
}

TEST_CASE("count_subquery") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = oracle::random_graph(rng, 10, 0.4, 2);
    const auto q = oracle::random_connected(rng, 5, 0.3, 2);
    const auto ctx = build_candidates(g, q);
    for (VertexId u = 0; u < 5; ++u) CHECK(count_subquery(g, q, ctx, VertexSet::single(u)).match_count == ctx.candidate_count(u));
    CHECK(count_subquery(g, q, ctx, VertexSet::full(5)).match_count ==
          enumerate(g, q, ctx, {subquery_order(q, ctx, VertexSet::full(5))}).match_count);
    for (std::uint64_t s = 1; s < 32; ++s)
      if (oracle::uf_connected(q, s))
        CHECK(count_subquery(g, q, ctx, VertexSet(s)).match_count ==
              oracle::brute_force_matches(g, q, s, [&](VertexId u, VertexId v) { return ctx.contains(u, v); }));
  }
}

TEST_CASE("transition from the empty state costs |C(u)|") {
  const auto g = oracle::graph(std::vector<Label>(5, 0), {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  const auto q = oracle::graph({0, 0}, {{0, 1}});
  const CandidateContext ctx(g, q, {{0, 1, 2, 3, 4}, {0, 1}});
  CHECK(measure_transition(g, q, ctx, VertexSet{}, 0).cost == 5);
}

TEST_CASE("transition from an unmatched state costs nothing") {
  const auto g = oracle::graph({0, 0, 1}, {{0, 1}});
  const auto q = oracle::graph({0, 1, 0}, {{0, 1}, {1, 2}});
  const auto ctx = build_candidates(g, q);
  const auto t = measure_transition(g, q, ctx, VertexSet(0b011), 2);
  CHECK(t.cost == 0);
  CHECK(t.extended_matches == 0);
}

TEST_CASE("transition cost equals the instrumented re-execution difference") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 80; ++trial) {
    const auto g = oracle::random_graph(rng, 12, 0.4, 2);
    const auto q = oracle::random_connected(rng, 5, 0.35, 2);
    const auto ctx = build_candidates(g, q);
    const auto masks = neighbor_masks(q);
    for (std::uint64_t s = 1; s < 32; ++s) {
      const VertexSet from(s);
      if (!connected(masks, from)) continue;
      const auto seq = subquery_order(q, ctx, from);
      const auto before = induced(g, q, ctx, seq);
      const auto base = enumerate(g, before.sub, before.ctx, {before.order});
      const auto ext = measure_extensions(g, q, ctx, from);
      for (std::size_t i = 0; i < ext.added.size(); ++i) {
        auto seq2 = seq;
        seq2.push_back(ext.added[i]);
        const auto after = induced(g, q, ctx, seq2);
        const auto full = enumerate(g, after.sub, after.ctx, {after.order});
        CHECK(ext.transitions[i].cost == full.probe_count - base.probe_count);
        CHECK(ext.transitions[i].extended_matches == full.match_count);
        const auto single = measure_transition(g, q, ctx, from, ext.added[i]);
        CHECK(single.cost == ext.transitions[i].cost);
      }
      CHECK(ext.from_matches == base.match_count);
    }
  }
}

TEST_CASE("probe count of an order is the sum of its transition costs") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = oracle::random_graph(rng, 12, 0.4, 2);
    const auto q = oracle::random_connected(rng, 5, 0.35, 2);
    const auto ctx = build_candidates(g, q);
    const auto o = random_order(q, rng);
    std::uint64_t sum = 0;
    VertexSet s;
    for (VertexId u : o.order) {
      sum += measure_transition(g, q, ctx, s, u).cost;
      s = s.with(u);
    }
    CHECK(enumerate(g, q, ctx, o).probe_count == sum);
  }
}
