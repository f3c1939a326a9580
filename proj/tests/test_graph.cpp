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
#include "graph.hpp"
#include "oracles.hpp"

using namespace neuso;

TEST_CASE("parse a labeled triangle") {
  const auto g = load_graph(std::string("t 3 3\nv 0 0 2\nv 1 0 2\nv 2 1 2\ne 0 1\ne 1 2\ne 0 2\n"));
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 3);
  CHECK(std::vector<Label>(g.labels().begin(), g.labels().end()) == std::vector<Label>{0, 0, 1});
  CHECK(g.has_edge(2, 0));
  CHECK(g.vertices_with_label(0).size() == 2);
}

TEST_CASE("single isolated vertex") {
  const auto g = load_graph(std::string("t 1 0\nv 0 5 0\n"));
  CHECK(g.vertex_count() == 1);
  CHECK(g.edge_count() == 0);
  CHECK(g.label(0) == 5);
  CHECK(g.vertices_with_label(3).empty());
}

TEST_CASE("header counts of a Yeast-sized graph survive a round trip") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<VertexId> pick(0, 3111);
  std::set<std::pair<VertexId, VertexId>> es;
  while (es.size() < 12519) {
    VertexId a = pick(rng), b = pick(rng);
    if (a == b) continue;
    es.emplace(std::min(a, b), std::max(a, b));
  }
  std::vector<std::pair<VertexId, VertexId>> ev(es.begin(), es.end());
  std::vector<Label> labels(3112);
  for (VertexId v = 0; v < 3112; ++v) labels[v] = v % 71;
  const auto text = serialize_graph(LabeledGraph::from_edges(labels, ev));
  CHECK(text.rfind("t 3112 12519\n", 0) == 0);
  const auto g = load_graph(text);
  CHECK(g.vertex_count() == 3112);
  CHECK(g.edge_count() == 12519);
  CHECK(serialize_graph(g) == text);
}

TEST_CASE("malformed input names the offending line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      load_graph(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("t 2 1\nv 0 0 1\nv 1 0 1\ne 0 0\n") == 4);
  CHECK(line_of("t 2 2\nv 0 0 1\nv 1 0 1\ne 0 1\ne 1 0\n") == 5);
  CHECK(line_of("t 2 1\nv 0 0 1\nv 3 0 1\ne 0 1\n") == 3);
  CHECK(line_of("t 2 1\nv 0 0 2\nv 1 0 1\ne 0 1\n") == 2);
  CHECK(line_of("t 2 0\nv 0 0 0\nx\n") == 3);
  CHECK_THROWS_AS(load_graph(std::string("v 0 0 0\n")), ParseError);
  CHECK_THROWS_AS(load_graph(std::string("t 2 0\nv 0 0 0\n")), ParseError);
}

TEST_CASE("from_edges rejects bad edge lists") {
  const std::vector<std::pair<VertexId, VertexId>> loop{{0, 0}}, dup{{0, 1}, {1, 0}}, range{{0, 2}};
  CHECK_THROWS_AS(LabeledGraph::from_edges({0, 0}, loop), std::invalid_argument);
  CHECK_THROWS_AS(LabeledGraph::from_edges({0, 0}, dup), std::invalid_argument);
  CHECK_THROWS_AS(LabeledGraph::from_edges({0, 0}, range), std::invalid_argument);
}

TEST_CASE("connected on a path") {
  const auto q = oracle::graph({0, 0, 0}, {{0, 1}, {1, 2}});
  CHECK_FALSE(connected(q, VertexSet(0b101)));
  CHECK(connected(q, VertexSet(0b111)));
  CHECK(frontier(neighbor_masks(q), VertexSet(0b001)) == VertexSet(0b010));
  CHECK(frontier(neighbor_masks(q), VertexSet{}) == VertexSet(0b111));
}

TEST_CASE("connected agrees with union-find on every subset") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto q = oracle::random_graph(rng, 6, 0.35, 2);
    const auto masks = neighbor_masks(q);
    for (std::uint64_t s = 1; s < 64; ++s) CHECK(connected(masks, VertexSet(s)) == oracle::uf_connected(q, s));
  }
}

TEST_CASE("matching order validation") {
  const auto path = oracle::graph({0, 0, 0}, {{0, 1}, {1, 2}});
  CHECK(validate_order(path, {{0, 1, 2}}));
  CHECK_FALSE(validate_order(path, {{0, 2, 1}}));
  CHECK_FALSE(validate_order(path, {{0, 1}}));
  CHECK_FALSE(validate_order(path, {{0, 1, 1}}));

  const auto star = oracle::graph({0, 1, 1, 1, 1}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const std::vector<VertexId> order{1, 0, 2, 3, 4};
  bool prefixes_connected = true;
  VertexSet prefix;
  for (VertexId u : order) prefixes_connected &= connected(star, prefix = prefix.with(u));
  CHECK(prefixes_connected);
  CHECK(validate_order(star, {order}));
}

TEST_CASE("vertex set operations") {
  const VertexSet s = VertexSet::single(3).with(5);
  CHECK(s.size() == 2);
  CHECK(s.lowest() == 3);
  CHECK(s.members() == std::vector<VertexId>{3, 5});
  CHECK(s.without(3) == VertexSet::single(5));
  CHECK(VertexSet::full(64).size() == 64);
  CHECK((VertexSet::full(6) - s).size() == 4);
}

TEST_CASE("queries above 64 vertices are refused") {
  std::vector<Label> labels(65, 0);
  std::vector<std::pair<VertexId, VertexId>> es;
  for (VertexId v = 1; v < 65; ++v) es.emplace_back(v - 1, v);
  CHECK_THROWS_AS(require_query_size(LabeledGraph::from_edges(labels, es)), ContractError);
}
