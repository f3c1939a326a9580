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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "datagen.hpp"
#include "doctest.h"
#include "matcher.hpp"
#include "oracles.hpp"

using namespace neuso;

namespace {

std::string golden_path() { return std::string(NEUSO_TEST_DATA) + "/golden/datagen_n10_seed1.graph"; }

}  // namespace

TEST_CASE("small generated graph matches the golden file") {
  const auto text = serialize_graph(gen_data_graph(10, 2, 3, 1.0, 1));
  if (std::getenv("NEUSO_WRITE_GOLDEN")) std::ofstream(golden_path()) << text;
  std::ifstream in(golden_path());
  REQUIRE(in);
  std::stringstream expect;
  expect << in.rdbuf();
  CHECK(text == expect.str());
}

TEST_CASE("one label means every vertex is labeled 0") {
  const auto g = gen_data_graph(200, 6, 1, 1.0, 3);
  for (VertexId v = 0; v < g.vertex_count(); ++v) CHECK(g.label(v) == 0);
}

TEST_CASE("generation is deterministic and connected") {
  const auto a = gen_data_graph(500, 8, 10, 1.0, 11), b = gen_data_graph(500, 8, 10, 1.0, 11);
  CHECK(serialize_graph(a) == serialize_graph(b));
  CHECK(serialize_graph(a) != serialize_graph(gen_data_graph(500, 8, 10, 1.0, 12)));
  CHECK(a.vertex_count() == 500);
  // Breadth-first reachability from vertex 0.
  std::vector<bool> seen(a.vertex_count(), false);
  std::vector<VertexId> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (VertexId w : a.neighbors(v))
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        stack.push_back(w);
      }
  }
  CHECK(reached == a.vertex_count());
  const double avg = 2.0 * static_cast<double>(a.edge_count()) / static_cast<double>(a.vertex_count());
  CHECK(avg > 6.0);
  CHECK(avg < 10.0);
}

TEST_CASE("label frequencies are skewed toward low labels") {
  const auto g = gen_data_graph(5000, 8, 20, 1.0, 7);
  std::vector<std::size_t> freq(20, 0);
  for (VertexId v = 0; v < g.vertex_count(); ++v) ++freq[g.label(v)];
  CHECK(freq[0] > 3 * freq[19]);
}

TEST_CASE("infeasible parameters are rejected") {
  CHECK_THROWS_AS(gen_data_graph(1, 2, 3, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_data_graph(10, 0, 3, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_data_graph(10, 2, 0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_data_graph(10, 20, 3, 1.0, 1), std::invalid_argument);
}

TEST_CASE("generated queries are matched induced subgraphs") {
  const auto g = gen_data_graph(2000, 8, 8, 1.0, 5);
  WorkloadSpec spec;
  spec.sizes = {1, 4, 8, 12};
  spec.queries_per_size = 10;
  const auto qs = gen_queries(g, spec);
  CHECK(qs.size() == 40);
  std::set<std::string> ids;
  std::set<std::vector<VertexId>> vertex_sets;
  std::size_t test_count = 0;
  for (const auto& wq : qs) {
    ids.insert(wq.id);
    auto sorted = wq.source;
    std::sort(sorted.begin(), sorted.end());
    vertex_sets.insert(sorted);
    test_count += wq.split == Split::Test;
    const auto& q = wq.graph;
    CHECK(oracle::uf_connected(q, q.vertex_count() == 64 ? ~0ull : (1ull << q.vertex_count()) - 1));
    CHECK(wq.dense == (2.0 * static_cast<double>(q.edge_count()) / static_cast<double>(q.vertex_count()) > 3.0));
    for (VertexId u = 0; u < q.vertex_count(); ++u) {
      CHECK(q.label(u) == g.label(wq.source[u]));
      for (VertexId v = u + 1; v < q.vertex_count(); ++v)
        CHECK(q.has_edge(u, v) == g.has_edge(wq.source[u], wq.source[v]));
    }
    const auto ctx = build_candidates(g, q);
    if (q.vertex_count() == 1) CHECK(ctx.candidate_count(0) >= 1);
    ExecutionBudget first;
    first.max_matches = 1;
    const auto stats = enumerate(g, q, ctx, {subquery_order(q, ctx, VertexSet::full(q.vertex_count()))}, first);
    CHECK(stats.match_count >= 1);
  }
  CHECK(ids.size() == qs.size());
  CHECK(vertex_sets.size() == qs.size());
  CHECK(test_count == 8);
}

TEST_CASE("workload generation is deterministic and round-trips") {
  const auto g = gen_data_graph(1000, 6, 5, 1.0, 9);
  WorkloadSpec spec;
  spec.sizes = {4, 6};
  spec.queries_per_size = 5;
  const auto a = gen_queries(g, spec), b = gen_queries(g, spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(serialize_graph(a[i].graph) == serialize_graph(b[i].graph));
    CHECK(a[i].split == b[i].split);
  }
  const auto dir = std::filesystem::temp_directory_path() / "neuso_test_workload";
  std::filesystem::remove_all(dir);
  save_workload(dir.string(), a, spec);
  const auto loaded = load_workload(dir.string());
  REQUIRE(loaded.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(loaded[i].id == a[i].id);
    CHECK(serialize_graph(loaded[i].graph) == serialize_graph(a[i].graph));
    CHECK(loaded[i].dense == a[i].dense);
    CHECK(loaded[i].split == a[i].split);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("dense classification") {
  CHECK_FALSE(is_dense(oracle::graph({0, 0, 0, 0}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}})));
  std::vector<std::pair<VertexId, VertexId>> k5;
  for (VertexId u = 0; u < 5; ++u)
    for (VertexId v = u + 1; v < 5; ++v) k5.emplace_back(u, v);
  CHECK(is_dense(oracle::graph({0, 0, 0, 0, 0}, k5)));
  CHECK_FALSE(is_dense(oracle::graph({0, 0, 0, 0}, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}, {1, 3}})));
}
