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

#include <cmath>

#include "bench.hpp"
#include "config.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace neuso;

namespace {

BenchRow row(std::string id, std::string planner, std::uint64_t probes, bool truncated = false) {
  BenchRow r;
  r.query_id = std::move(id);
  r.size = 4;
  r.planner = std::move(planner);
  r.probe_count = probes;
  r.truncated = truncated;
  r.plan_json = "{\"order\":[0,1]}";
  return r;
}

}  // namespace

TEST_CASE("quantiles match numpy linear interpolation") {
  // Expected values from numpy.quantile with its default method.
  const std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6};
  CHECK(quantile(v, 0) == 1.0);
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(quantile(v, 0.5) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(quantile(v, 0.75) == doctest::Approx(5.25).epsilon(1e-15));
  CHECK(quantile(v, 1) == 9.0);
  CHECK(quantile(v, 0.1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(quantile(v, 0.9) == doctest::Approx(6.9).epsilon(1e-12));
  CHECK(quantile({42}, 0.3) == 42.0);
}

TEST_CASE("q-error report per query size") {
  const std::vector<QErrorPoint> pts{{4, 9, 99}, {4, 0, 0}, {4, 99, 9}, {8, 1, 1}, {8, 999, 0}, {8, 4, 4}, {8, 0, 3}};
  const auto rows = qerror_report(pts);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size == 4);
  CHECK(rows[0].count == 3);
  CHECK(rows[0].min == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rows[0].p25 == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(rows[0].p50 == doctest::Approx(0.0));
  CHECK(rows[0].p75 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rows[0].max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rows[1].min == doctest::Approx(-0.6020599913279624).epsilon(1e-12));
  CHECK(rows[1].p25 == doctest::Approx(-0.1505149978319906).epsilon(1e-12));
  CHECK(rows[1].p50 == doctest::Approx(0.0));
  CHECK(rows[1].p75 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rows[1].max == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(qerror_report({}), std::invalid_argument);
}

TEST_CASE("perfect predictions give zero log q-error") {
  std::vector<QErrorPoint> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({static_cast<std::size_t>(4 + 4 * (i % 3)), i * 7.0, i * 7.0});
  for (const auto& r : qerror_report(pts)) {
    CHECK(r.min == 0.0);
    CHECK(r.max == 0.0);
  }
}

TEST_CASE("geometric-mean speedups and unsolved counts") {
  BenchReport rep;
  rep.config.planners = {"neuso", "candidate_size"};
  rep.rows = {row("q1", "neuso", 50), row("q1", "candidate_size", 100), row("q2", "neuso", 20),
              row("q2", "candidate_size", 10),  row("q3", "neuso", 0),    row("q3", "candidate_size", 4, true)};
  const auto sp = rep.geomean_speedups();
  CHECK(sp.at("candidate_size") == doctest::Approx(1.0));
  CHECK(sp.at("neuso") == doctest::Approx(std::cbrt(2.0 * 0.5 * 4.0)).epsilon(1e-12));
  CHECK(rep.unsolved().at("candidate_size") == 1);
  CHECK(rep.unsolved().at("neuso") == 0);
}

TEST_CASE("csv quoting") {
  BenchReport rep;
  rep.config.planners = {"gcbo"};
  rep.rows = {row("q1", "gcbo", 7)};
  const auto csv = rep.csv();
  CHECK(csv.rfind("query_id,size,planner,probe_count,match_count,truncated,plan_json\n", 0) == 0);
  CHECK(csv.find("q1,4,gcbo,7,0,false,\"{\"\"order\"\":[0,1]}\"\n") != std::string::npos);
  rep.config.timing = true;
  CHECK(rep.csv().rfind("query_id,size,planner,probe_count,elapsed,match_count,truncated,plan_json\n", 0) == 0);
}

TEST_CASE("bench over a small workload") {
  const auto g = gen_data_graph(400, 6, 4, 1.0, 3);
  WorkloadSpec spec;
  spec.sizes = {4, 6};
  spec.queries_per_size = 5;
  const auto wl = gen_queries(g, spec);
  BenchConfig cfg;
  cfg.planners = {"gcbo", "candidate_size", "backward_edges", "exact"};
  const auto rep = run_bench(g, wl, nullptr, cfg);
  std::size_t tests = 0;
  for (const auto& q : wl) tests += q.split == Split::Test;
  REQUIRE(rep.rows.size() == tests * 4);
  for (std::size_t i = 0; i < rep.rows.size(); i += 4) {
    for (std::size_t k = 1; k < 4; ++k) {
      CHECK(rep.rows[i + k].query_id == rep.rows[i].query_id);
      if (!rep.rows[i].truncated && !rep.rows[i + k].truncated)
        CHECK(rep.rows[i + k].match_count == rep.rows[i].match_count);
    }
    // The exact planner is never beaten on a solvable query.
    if (!rep.rows[i + 3].truncated)
      for (std::size_t k = 0; k < 3; ++k) CHECK(rep.rows[i + 3].probe_count <= rep.rows[i + k].probe_count);
  }
  const auto s = rep.summary();
  CHECK(s["schema_version"] == 1);
  CHECK(s["query_count"] == tests);
  CHECK_THROWS(run_bench(g, wl, nullptr, BenchConfig{.planners = {"neuso"}}));
}

TEST_CASE("config defaults and overrides") {
  const auto d = parse_config_text(R"({"schema_version": 1})");
  CHECK(d.graph.vertices == 10000);
  CHECK(d.train.epochs == 100);
  CHECK(d.bench.run_budget.max_probes == 100000000ull);
  const auto c = parse_config_text(R"({"schema_version": 1, "seed": 3, "graph": {"seed": 5},
      "collect": {"max_probes": null, "max_matches": 10},
      "train": {"epochs": 2, "loss_weights": {"constraint": 0.5}}})");
  CHECK(c.graph.seed == 5);
  CHECK(c.workload.seed == 3);
  CHECK(c.train.seed == 3);
  CHECK_FALSE(c.collect.budget.max_probes);
  CHECK(c.collect.budget.max_matches == 10u);
  CHECK(c.train.epochs == 2);
  CHECK(c.train.weights.constraint == 0.5);
  CHECK(c.train.weights.card == 0.4);
}

TEST_CASE("config rejects bad documents") {
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "train": {"epoch": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "train": {"loss_weights": {"q": 1}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "collect": {"max_probes": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "graph": {"vertices": "many"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"graph": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 2})"), SchemaError);
  CHECK_THROWS_AS(parse_config_text("{"), ConfigError);
}
