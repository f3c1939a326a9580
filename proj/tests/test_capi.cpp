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

// Exercises the shared library through its C header only.

#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "neuso/neuso.h"

namespace {

const char* kConfig = R"({"schema_version": 1, "seed": 3,
  "graph": {"vertices": 300, "avg_degree": 6, "labels": 4},
  "workload": {"sizes": [4, 5], "queries_per_size": 5},
  "model": {"d_label": 4, "layer_widths": [8, 8], "heads": 2, "hidden": 8},
  "train": {"epochs": 2}})";

std::string take(char* s) {
  std::string out = s ? s : "";
  neuso_string_free(s);
  return out;
}

struct Fixture {
  neuso_graph* g = nullptr;
  neuso_workload* w = nullptr;
  neuso_model* m = nullptr;
  std::string samples;

  Fixture() {
    REQUIRE(neuso_generate_graph(kConfig, &g) == NEUSO_OK);
    REQUIRE(neuso_generate_workload(g, kConfig, &w) == NEUSO_OK);
    char* s = nullptr;
    REQUIRE(neuso_collect(g, w, "train", kConfig, &s) == NEUSO_OK);
    samples = take(s);
    REQUIRE(neuso_train(g, w, samples.c_str(), nullptr, kConfig, &m, nullptr) == NEUSO_OK);
  }
  ~Fixture() {
    neuso_model_free(m);
    neuso_workload_free(w);
    neuso_graph_free(g);
  }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(neuso_version()) > 0);
  CHECK(std::string(neuso_status_name(NEUSO_ERR_PARSE)) == "parse error");
  CHECK(std::string(neuso_status_name(NEUSO_OK)) == "ok");
}

TEST_CASE("graph parsing and errors") {
  neuso_graph* g = nullptr;
  REQUIRE(neuso_graph_parse("t 3 2\nv 0 0 1\nv 1 0 2\nv 2 1 1\ne 0 1\ne 1 2\n", &g) == NEUSO_OK);
  CHECK(neuso_graph_vertex_count(g) == 3);
  CHECK(neuso_graph_edge_count(g) == 2);
  neuso_graph_free(g);

  g = nullptr;
  CHECK(neuso_graph_parse("t 2 1\nv 0 0 1\nv 1 0 1\ne 0 0\n", &g) == NEUSO_ERR_PARSE);
  CHECK(g == nullptr);
  CHECK(std::string(neuso_last_error()).find("4") != std::string::npos);
  CHECK(neuso_graph_parse(nullptr, &g) == NEUSO_ERR_INVALID_ARGUMENT);
  CHECK(neuso_graph_load("/nonexistent/neuso.graph", &g) == NEUSO_ERR_IO);
  CHECK(neuso_generate_graph(R"({"schema_version": 9})", &g) == NEUSO_ERR_SCHEMA);
  CHECK(neuso_generate_graph(R"({"schema_version": 1, "bogus": 1})", &g) == NEUSO_ERR_INVALID_ARGUMENT);
  CHECK(neuso_generate_graph("{", &g) == NEUSO_ERR_INVALID_ARGUMENT);
  neuso_graph_free(nullptr);
}

TEST_CASE("end-to-end pipeline through the C interface") {
  Fixture f;
  const std::size_t n = neuso_workload_size(f.w);
  REQUIRE(n == 10);
  CHECK(neuso_workload_query(f.w, n) == nullptr);
  const neuso_graph* q = nullptr;
  for (std::size_t i = 0; i < n; ++i)
    if (std::string(neuso_workload_split(f.w, i)) == "test") q = neuso_workload_query(f.w, i);
  REQUIRE(q != nullptr);

  char* out = nullptr;
  REQUIRE(neuso_plan(f.g, q, f.m, "neuso", kConfig, &out) == NEUSO_OK);
  const auto plan = nlohmann::json::parse(take(out));
  CHECK(plan["order"].size() == neuso_graph_vertex_count(q));

  REQUIRE(neuso_run(f.g, q, f.m, "neuso", kConfig, &out) == NEUSO_OK);
  const auto a = nlohmann::json::parse(take(out));
  REQUIRE(neuso_run(f.g, q, nullptr, "exact", kConfig, &out) == NEUSO_OK);
  const auto b = nlohmann::json::parse(take(out));
  CHECK(a["match_count"] == b["match_count"]);
  CHECK(a["match_count"].get<std::uint64_t>() >= 1);
  CHECK(b["probe_count"].get<std::uint64_t>() <= a["probe_count"].get<std::uint64_t>());

  CHECK(neuso_plan(f.g, q, nullptr, "neuso", kConfig, &out) == NEUSO_ERR_INVALID_ARGUMENT);
  CHECK(neuso_plan(f.g, q, f.m, "nope", kConfig, &out) == NEUSO_ERR_INVALID_ARGUMENT);

  REQUIRE(neuso_estimate(f.g, q, f.m, 0, &out) == NEUSO_OK);
  const auto est = nlohmann::json::parse(take(out));
  CHECK(est["cardinality"].get<double>() >= 0);
  CHECK(est["min_cost"].get<double>() >= 0);

  char* csv = nullptr;
  char* summary = nullptr;
  REQUIRE(neuso_bench(f.g, f.w, f.m, nullptr, kConfig, &csv, &summary) == NEUSO_OK);
  const std::string csv_text = take(csv);
  const auto sum = nlohmann::json::parse(take(summary));
  CHECK(csv_text.rfind("query_id,size,planner", 0) == 0);
  CHECK(sum["schema_version"] == 1);
  CHECK(sum["baseline"] == "candidate_size");
}

TEST_CASE("artifacts round-trip through files") {
  Fixture f;
  const auto dir = std::filesystem::temp_directory_path() / "neuso_capi_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto graph_path = (dir / "g.graph").string(), model_path = (dir / "m.json").string();
  REQUIRE(neuso_graph_save(f.g, graph_path.c_str()) == NEUSO_OK);
  REQUIRE(neuso_workload_save(f.w, (dir / "wl").string().c_str()) == NEUSO_OK);
  REQUIRE(neuso_model_save(f.m, model_path.c_str()) == NEUSO_OK);

  neuso_graph* g = nullptr;
  neuso_workload* w = nullptr;
  neuso_model* m = nullptr;
  REQUIRE(neuso_graph_load(graph_path.c_str(), &g) == NEUSO_OK);
  REQUIRE(neuso_workload_load((dir / "wl").string().c_str(), &w) == NEUSO_OK);
  REQUIRE(neuso_model_load(model_path.c_str(), &m) == NEUSO_OK);
  CHECK(neuso_graph_edge_count(g) == neuso_graph_edge_count(f.g));
  CHECK(std::string(neuso_workload_query_id(w, 3)) == neuso_workload_query_id(f.w, 3));

  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(neuso_plan(f.g, neuso_workload_query(f.w, 3), f.m, "neuso", kConfig, &a) == NEUSO_OK);
  REQUIRE(neuso_plan(g, neuso_workload_query(w, 3), m, "neuso", kConfig, &b) == NEUSO_OK);
  CHECK(take(a) == take(b));

  CHECK(neuso_collect(g, w, "sideways", kConfig, &a) == NEUSO_ERR_INVALID_ARGUMENT);
  CHECK(neuso_model_load((dir / "missing.json").string().c_str(), &m) == NEUSO_ERR_IO);
  neuso_model_free(m);
  neuso_workload_free(w);
  neuso_graph_free(g);
  std::filesystem::remove_all(dir);
}
