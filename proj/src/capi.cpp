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

#include "neuso/neuso.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>

#include "bench.hpp"
#include "config.hpp"
#include "datagen.hpp"

struct neuso_graph {
  neuso::LabeledGraph graph;
};

struct neuso_workload {
  std::vector<neuso::WorkloadQuery> queries;
  std::vector<neuso_graph> graphs;
  neuso::WorkloadSpec spec;
};

struct neuso_model {
  neuso::Model model;
};

namespace {

using namespace neuso;

thread_local std::string g_last_error;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

neuso_status fail(neuso_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
neuso_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return NEUSO_OK;
  } catch (const SchemaError& e) {
    return fail(NEUSO_ERR_SCHEMA, e.what());
  } catch (const IoError& e) {
    return fail(NEUSO_ERR_IO, e.what());
  } catch (const ParseError& e) {
    return fail(NEUSO_ERR_PARSE, e.what());
  } catch (const nlohmann::json::parse_error& e) {
    return fail(NEUSO_ERR_PARSE, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(NEUSO_ERR_PARSE, e.what());
  } catch (const ConfigError& e) {
    return fail(NEUSO_ERR_INVALID_ARGUMENT, e.what());
  } catch (const ContractError& e) {
    return fail(NEUSO_ERR_CONTRACT, e.what());
  } catch (const NumericError& e) {
    return fail(NEUSO_ERR_NUMERIC, e.what());
  } catch (const StateLimitExceeded& e) {
    return fail(NEUSO_ERR_NOT_FOUND, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(NEUSO_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::runtime_error& e) {
    return fail(NEUSO_ERR_NOT_FOUND, e.what());
  } catch (const std::exception& e) {
    return fail(NEUSO_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(NEUSO_ERR_INTERNAL, "unknown exception");
  }
}

void require(const void* p, const char* name) {
  if (!p) throw InvalidArgument(std::string(name) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

RunConfig config_of(const char* config_json) {
  if (!config_json) return RunConfig{};
  return parse_config_text(config_json);
}

std::vector<TrainingSample> parse_samples(const char* jsonl) {
  std::istringstream in(jsonl);
  return import_samples(in);
}

nlohmann::ordered_json embeddings_to_json(const LabelEmbeddings& e) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["labels"] = e.label_count();
  j["dim"] = e.dim();
  j["values"] = e.table.values();
  return j;
}

LabelEmbeddings embeddings_from_json(const char* text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("schema_version").get<int>() != 1) throw SchemaError("unsupported embedding schema version");
  return LabelEmbeddings{Tensor(j.at("labels").get<std::size_t>(), j.at("dim").get<std::size_t>(),
                                j.at("values").get<std::vector<double>>())};
}

std::vector<Split> splits_named(const char* split) {
  const std::string s = split ? split : "all";
  if (s == "train") return {Split::Train};
  if (s == "test") return {Split::Test};
  if (s == "all") return {Split::Train, Split::Test};
  throw InvalidArgument("split must be train, test or all, not '" + s + "'");
}

}  // namespace

extern "C" {

const char* neuso_version(void) { return "0.1.0"; }

const char* neuso_last_error(void) { return g_last_error.c_str(); }

const char* neuso_status_name(neuso_status s) {
  switch (s) {
    case NEUSO_OK: return "ok";
    case NEUSO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NEUSO_ERR_IO: return "i/o error";
    case NEUSO_ERR_PARSE: return "parse error";
    case NEUSO_ERR_SCHEMA: return "schema mismatch";
    case NEUSO_ERR_CONTRACT: return "contract violation";
    case NEUSO_ERR_NUMERIC: return "numeric error";
    case NEUSO_ERR_NOT_FOUND: return "not found";
    case NEUSO_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void neuso_string_free(char* s) { std::free(s); }

neuso_status neuso_graph_load(const char* path, neuso_graph** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new neuso_graph{load_graph_file(path)};
  });
}

neuso_status neuso_graph_parse(const char* text, neuso_graph** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new neuso_graph{load_graph(std::string(text))};
  });
}

neuso_status neuso_graph_save(const neuso_graph* g, const char* path) {
  return guarded([&] {
    require(g, "graph");
    require(path, "path");
    save_graph_file(path, g->graph);
  });
}

size_t neuso_graph_vertex_count(const neuso_graph* g) { return g ? g->graph.vertex_count() : 0; }

size_t neuso_graph_edge_count(const neuso_graph* g) { return g ? g->graph.edge_count() : 0; }

void neuso_graph_free(neuso_graph* g) { delete g; }

neuso_status neuso_generate_graph(const char* config_json, neuso_graph** out) {
  return guarded([&] {
    require(out, "out");
    const auto c = config_of(config_json).graph;
    *out = new neuso_graph{gen_data_graph(c.vertices, c.avg_degree, c.labels, c.skew, c.seed, c.triad_probability)};
  });
}

neuso_status neuso_generate_workload(const neuso_graph* g, const char* config_json, neuso_workload** out) {
  return guarded([&] {
    require(g, "graph");
    require(out, "out");
    auto w = std::make_unique<neuso_workload>();
    w->spec = config_of(config_json).workload;
    w->queries = gen_queries(g->graph, w->spec);
    for (const auto& q : w->queries) w->graphs.push_back({q.graph});
    *out = w.release();
  });
}

neuso_status neuso_workload_save(const neuso_workload* w, const char* dir) {
  return guarded([&] {
    require(w, "workload");
    require(dir, "dir");
    save_workload(dir, w->queries, w->spec);
  });
}

neuso_status neuso_workload_load(const char* dir, neuso_workload** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    auto w = std::make_unique<neuso_workload>();
    w->queries = load_workload(dir);
    for (const auto& q : w->queries) w->graphs.push_back({q.graph});
    *out = w.release();
  });
}

size_t neuso_workload_size(const neuso_workload* w) { return w ? w->queries.size() : 0; }

const char* neuso_workload_query_id(const neuso_workload* w, size_t i) {
  return w && i < w->queries.size() ? w->queries[i].id.c_str() : nullptr;
}

const neuso_graph* neuso_workload_query(const neuso_workload* w, size_t i) {
  return w && i < w->graphs.size() ? &w->graphs[i] : nullptr;
}

const char* neuso_workload_split(const neuso_workload* w, size_t i) {
  return w && i < w->queries.size() ? to_string(w->queries[i].split) : nullptr;
}

void neuso_workload_free(neuso_workload* w) { delete w; }

neuso_status neuso_embed(const neuso_graph* g, const char* config_json, char** embeddings_json) {
  return guarded([&] {
    require(g, "graph");
    require(embeddings_json, "embeddings_json");
    const auto c = config_of(config_json);
    *embeddings_json = dup_string(embeddings_to_json(build_label_embeddings(g->graph, c.model.encoder.d_label)).dump());
  });
}

neuso_status neuso_collect(const neuso_graph* g, const neuso_workload* w, const char* split, const char* config_json,
                           char** samples_jsonl) {
  return guarded([&] {
    require(g, "graph");
    require(w, "workload");
    require(samples_jsonl, "samples_jsonl");
    const auto c = config_of(config_json);
    const auto splits = splits_named(split);
    const auto samples = collect_workload(g->graph, w->queries, c.collect.budget, c.collect.state_limit, splits);
    *samples_jsonl = dup_string(export_samples(samples));
  });
}

neuso_status neuso_train(const neuso_graph* g, const neuso_workload* w, const char* samples_jsonl,
                         const char* embeddings_json, const char* config_json, neuso_model** out, char** loss_csv) {
  return guarded([&] {
    require(g, "graph");
    require(w, "workload");
    require(samples_jsonl, "samples_jsonl");
    require(out, "out");
    const auto c = config_of(config_json);
    const auto samples = parse_samples(samples_jsonl);
    const auto queries = training_queries(g->graph, w->queries, samples, Split::Train);
    LabelEmbeddings emb = embeddings_json ? embeddings_from_json(embeddings_json)
                                          : build_label_embeddings(g->graph, c.model.encoder.d_label);
    auto m = std::make_unique<neuso_model>(neuso_model{Model::create(c.model, std::move(emb))});
    const auto log = train(m->model, queries, c.train);
    if (loss_csv) *loss_csv = dup_string(loss_log_csv(log));
    *out = m.release();
  });
}

neuso_status neuso_model_save(const neuso_model* m, const char* path) {
  return guarded([&] {
    require(m, "model");
    require(path, "path");
    m->model.save(path);
  });
}

neuso_status neuso_model_load(const char* path, neuso_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new neuso_model{Model::load(path)};
  });
}

void neuso_model_free(neuso_model* m) { delete m; }

neuso_status neuso_plan(const neuso_graph* g, const neuso_graph* q, const neuso_model* model, const char* planner,
                        const char* config_json, char** plan_json) {
  return guarded([&] {
    require(g, "graph");
    require(q, "query");
    require(planner, "planner");
    require(plan_json, "plan_json");
    const auto c = config_of(config_json);
    const auto ctx = build_candidates(g->graph, q->graph);
    const PlanTrace t =
        plan_by_name(planner, g->graph, q->graph, ctx, model ? &model->model : nullptr, c.bench.plan_budget);
    *plan_json = dup_string(t.to_json().dump());
  });
}

neuso_status neuso_run(const neuso_graph* g, const neuso_graph* q, const neuso_model* model, const char* planner,
                       const char* config_json, char** stats_json) {
  return guarded([&] {
    require(g, "graph");
    require(q, "query");
    require(planner, "planner");
    require(stats_json, "stats_json");
    const auto c = config_of(config_json);
    const auto ctx = build_candidates(g->graph, q->graph);
    const PlanTrace t =
        plan_by_name(planner, g->graph, q->graph, ctx, model ? &model->model : nullptr, c.bench.plan_budget);
    const ExecutionStats st = enumerate(g->graph, q->graph, ctx, t.order, c.bench.run_budget);
    nlohmann::ordered_json j;
    j["planner"] = planner;
    j["order"] = t.order.order;
    j["match_count"] = st.match_count;
    j["probe_count"] = st.probe_count;
    j["truncated"] = st.truncated;
    if (c.bench.timing) j["elapsed"] = st.elapsed.count();
    *stats_json = dup_string(j.dump());
  });
}

neuso_status neuso_estimate(const neuso_graph* g, const neuso_graph* q, const neuso_model* m, uint64_t state,
                            char** estimate_json) {
  return guarded([&] {
    require(g, "graph");
    require(q, "query");
    require(m, "model");
    require(estimate_json, "estimate_json");
    require_query_size(q->graph);
    const std::size_t n = q->graph.vertex_count();
    const VertexSet full = VertexSet::full(n);
    const VertexSet s = state == 0 ? full : VertexSet(state);
    if ((s - full).bits() != 0) throw InvalidArgument("state selects vertices outside the query");
    const auto masks = neighbor_masks(q->graph);
    if (!connected(masks, s)) throw ContractError("state is not a connected subquery");

    const auto ctx = build_candidates(g->graph, q->graph);
    Predictor pred(m->model, q->graph, ctx);
    const VertexSet one[] = {s};
    nlohmann::ordered_json j;
    j["state"] = s.bits();
    j["cardinality"] = pred.card(one)[0];
    j["min_cost"] = pred.min_cost(one)[0];
    std::vector<std::pair<VertexSet, VertexSet>> trans;
    if (s.size() == 1) {
      trans.emplace_back(VertexSet{}, s);
    } else {
      for (auto [u, rest] : in_neighbors(masks, s)) trans.emplace_back(rest, s);
    }
    const auto costs = pred.cost(trans);
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < trans.size(); ++i)
      arr.push_back({{"from", trans[i].first.bits()}, {"added", (s - trans[i].first).lowest()}, {"cost", costs[i]}});
    j["transitions"] = std::move(arr);
    *estimate_json = dup_string(j.dump());
  });
}

neuso_status neuso_bench(const neuso_graph* g, const neuso_workload* w, const neuso_model* model,
                         const char* test_samples_jsonl, const char* config_json, char** report_csv,
                         char** summary_json) {
  return guarded([&] {
    require(g, "graph");
    require(w, "workload");
    require(report_csv, "report_csv");
    require(summary_json, "summary_json");
    const auto c = config_of(config_json);
    std::vector<TrainingSample> samples;
    if (test_samples_jsonl) samples = parse_samples(test_samples_jsonl);
    const BenchReport r = run_bench(g->graph, w->queries, model ? &model->model : nullptr, c.bench, samples);
    std::string csv = r.csv();
    std::string summary = r.summary().dump(2) + "\n";
    *report_csv = dup_string(csv);
    *summary_json = dup_string(summary);
  });
}

}  // extern "C"
