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

/*
 * neuso: subgraph matching with a learned join-order optimizer.
 *
 * Every function returns a neuso_status. On failure, neuso_last_error()
 * describes the most recent error of the calling thread. Strings returned
 * through char** out-parameters are owned by the caller and released with
 * neuso_string_free(). Handles are released with their *_free function;
 * passing NULL to any *_free function is a no-op.
 *
 * `config_json` arguments take a configuration document (JSON object with
 * "schema_version": 1 and optional sections graph, workload, collect,
 * model, train, bench). NULL selects every default.
 */

#ifndef NEUSO_NEUSO_H_
#define NEUSO_NEUSO_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NEUSO_API __declspec(dllexport)
#else
#define NEUSO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum neuso_status {
  NEUSO_OK = 0,
  NEUSO_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad flag or config value */
  NEUSO_ERR_IO = 2,               /* file missing or unwritable */
  NEUSO_ERR_PARSE = 3,            /* malformed graph, JSON or JSONL input */
  NEUSO_ERR_SCHEMA = 4,           /* schema_version mismatch */
  NEUSO_ERR_CONTRACT = 5,         /* precondition violated, e.g. disconnected query */
  NEUSO_ERR_NUMERIC = 6,          /* non-finite value during training or inference */
  NEUSO_ERR_NOT_FOUND = 7,        /* no solution, e.g. no complete path in a CCG */
  NEUSO_ERR_INTERNAL = 99
} neuso_status;

typedef struct neuso_graph neuso_graph;
typedef struct neuso_workload neuso_workload;
typedef struct neuso_model neuso_model;

NEUSO_API const char* neuso_version(void);
/* Message of the calling thread's last failure; "" after a success. */
NEUSO_API const char* neuso_last_error(void);
NEUSO_API const char* neuso_status_name(neuso_status s);
NEUSO_API void neuso_string_free(char* s);

/* Graphs in the text format: "t <n> <m>", then "v <id> <label> <degree>" and "e <u> <v>" lines. */
NEUSO_API neuso_status neuso_graph_load(const char* path, neuso_graph** out);
NEUSO_API neuso_status neuso_graph_parse(const char* text, neuso_graph** out);
NEUSO_API neuso_status neuso_graph_save(const neuso_graph* g, const char* path);
NEUSO_API size_t neuso_graph_vertex_count(const neuso_graph* g);
NEUSO_API size_t neuso_graph_edge_count(const neuso_graph* g);
NEUSO_API void neuso_graph_free(neuso_graph* g);

/* gen: data graph from the "graph" section, workload from "workload". */
NEUSO_API neuso_status neuso_generate_graph(const char* config_json, neuso_graph** out);
NEUSO_API neuso_status neuso_generate_workload(const neuso_graph* g, const char* config_json,
                                               neuso_workload** out);
/* Directory with manifest.json and queries/<id>.graph. */
NEUSO_API neuso_status neuso_workload_save(const neuso_workload* w, const char* dir);
NEUSO_API neuso_status neuso_workload_load(const char* dir, neuso_workload** out);
NEUSO_API size_t neuso_workload_size(const neuso_workload* w);
/* Borrowed pointers, valid until the workload is freed. NULL when out of range. */
NEUSO_API const char* neuso_workload_query_id(const neuso_workload* w, size_t i);
NEUSO_API const neuso_graph* neuso_workload_query(const neuso_workload* w, size_t i);
/* "train" or "test". */
NEUSO_API const char* neuso_workload_split(const neuso_workload* w, size_t i);
NEUSO_API void neuso_workload_free(neuso_workload* w);

/* embed: label-embedding table as JSON, width model.d_label. */
NEUSO_API neuso_status neuso_embed(const neuso_graph* g, const char* config_json, char** embeddings_json);

/* collect: training samples as JSONL for the queries of `split`
 * ("train", "test" or "all"). */
NEUSO_API neuso_status neuso_collect(const neuso_graph* g, const neuso_workload* w, const char* split,
                                     const char* config_json, char** samples_jsonl);

/* train: fits a model on the training split. `embeddings_json` may be NULL
 * to compute the table from `g`. `loss_csv` may be NULL. */
NEUSO_API neuso_status neuso_train(const neuso_graph* g, const neuso_workload* w, const char* samples_jsonl,
                                   const char* embeddings_json, const char* config_json, neuso_model** out,
                                   char** loss_csv);
NEUSO_API neuso_status neuso_model_save(const neuso_model* m, const char* path);
NEUSO_API neuso_status neuso_model_load(const char* path, neuso_model** out);
NEUSO_API void neuso_model_free(neuso_model* m);

/* plan: PlanTrace JSON. `planner` is one of neuso, gcbo, candidate_size,
 * backward_edges, exact; `model` is required only for neuso. The exact
 * planner uses the bench plan_budget. */
NEUSO_API neuso_status neuso_plan(const neuso_graph* g, const neuso_graph* q, const neuso_model* model,
                                  const char* planner, const char* config_json, char** plan_json);

/* run: plan, then enumerate under the bench run_budget. Writes one JSON
 * object with the order, match_count, probe_count and truncated. */
NEUSO_API neuso_status neuso_run(const neuso_graph* g, const neuso_graph* q, const neuso_model* model,
                                 const char* planner, const char* config_json, char** stats_json);

/* estimate: predicted cardinality and min cost of the subquery induced on
 * `state` (bit i selects query vertex i; 0 selects every vertex), plus the
 * predicted cost of each in-transition. */
NEUSO_API neuso_status neuso_estimate(const neuso_graph* g, const neuso_graph* q, const neuso_model* m,
                                      uint64_t state, char** estimate_json);

/* bench: planners x test split. `test_samples_jsonl` may be NULL; with it,
 * the summary includes cardinality log-ratio quantiles. */
NEUSO_API neuso_status neuso_bench(const neuso_graph* g, const neuso_workload* w, const neuso_model* model,
                                   const char* test_samples_jsonl, const char* config_json, char** report_csv,
                                   char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* NEUSO_NEUSO_H_ */
