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
#include <string>
#include <vector>

#include "graph.hpp"

namespace neuso {

/// Connected preferential-attachment graph with Zipf(skew) labels.
/// Each new vertex attaches to about avg_degree/2 distinct earlier vertices
/// chosen proportionally to degree; after the first pick, each further pick
/// is a neighbor of the previous one with `triad_probability`, which creates
/// triangles. Throws std::invalid_argument for infeasible parameters.
LabeledGraph gen_data_graph(std::size_t n, double avg_degree, std::uint32_t label_count, double skew,
                            std::uint64_t seed, double triad_probability = 0.5);

enum class Split { Train, Test };
const char* to_string(Split s);

struct WorkloadSpec {
  std::vector<std::size_t> sizes{4, 8, 12, 16};
  std::size_t queries_per_size = 40;
  double dense_fraction = 0.5;  // target share of dense queries for sizes above 4
  double train_fraction = 0.8;
  std::uint64_t seed = 7;

  void validate() const;
};

struct WorkloadQuery {
  std::string id;
  LabeledGraph graph;
  std::vector<VertexId> source;  // data vertex behind each query vertex
  bool dense = false;
  Split split = Split::Train;

  std::size_t size() const { return graph.vertex_count(); }
};

/// A query is dense when its average degree exceeds 3.
bool is_dense(const LabeledGraph& q);

/// Induced connected subgraphs of `g` grown by seeded random walks, so each
/// has at least one match. Vertex sets are never reused. Ids are
/// "q<size>_<index>" with zero padding; splits are assigned per size with a
/// seeded shuffle. Throws std::runtime_error when extraction keeps failing.
std::vector<WorkloadQuery> gen_queries(const LabeledGraph& g, const WorkloadSpec& spec);

/// Directory layout: manifest.json plus queries/<id>.graph.
void save_workload(const std::string& dir, const std::vector<WorkloadQuery>& queries, const WorkloadSpec& spec);
std::vector<WorkloadQuery> load_workload(const std::string& dir);

}  // namespace neuso
