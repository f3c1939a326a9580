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

#include "datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace neuso {

LabeledGraph gen_data_graph(std::size_t n, double avg_degree, std::uint32_t label_count, double skew,
                            std::uint64_t seed, double triad_probability) {
  if (n < 2) throw std::invalid_argument("data graph needs at least 2 vertices");
  if (!(avg_degree > 0) || avg_degree > static_cast<double>(n - 1))
    throw std::invalid_argument("average degree must lie in (0, n-1]");
  if (label_count == 0) throw std::invalid_argument("label count must be positive");
  if (!(skew >= 0)) throw std::invalid_argument("skew must be non-negative");
  if (!(triad_probability >= 0 && triad_probability <= 1)) throw std::invalid_argument("triad probability must lie in [0, 1]");

  std::mt19937_64 rng(seed);
  const double per_vertex = avg_degree / 2.0;
  const std::size_t whole = static_cast<std::size_t>(std::floor(per_vertex));
  const double frac = per_vertex - static_cast<double>(whole);
  std::bernoulli_distribution extra(frac);
  std::bernoulli_distribution triad(triad_probability);

  // Seed clique keeps early attachments well defined.
  const std::size_t core = std::min(n, std::max<std::size_t>(2, whole + 1));
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<VertexId> endpoints;  // each vertex appears once per incident edge
  std::vector<std::vector<VertexId>> adjacency(n);
  for (VertexId u = 0; u < core; ++u)
    for (VertexId v = u + 1; v < core; ++v) {
      edges.emplace_back(u, v);
      adjacency[u].push_back(v);
      adjacency[v].push_back(u);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }

  std::vector<VertexId> picked;
  for (VertexId v = static_cast<VertexId>(core); v < n; ++v) {
    std::size_t m = whole + (extra(rng) ? 1 : 0);
    m = std::clamp<std::size_t>(m, 1, v);
    picked.clear();
    std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
    std::size_t attempts = 0;
    while (picked.size() < m) {
      VertexId t;
      if (++attempts > 64 * m) {
        t = std::uniform_int_distribution<VertexId>(0, v - 1)(rng);
      } else if (!picked.empty() && triad(rng)) {
        // Close a triangle through the previous attachment.
        const auto& nb = adjacency[picked.back()];
        t = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
      } else {
        t = endpoints[pick(rng)];
      }
      if (std::find(picked.begin(), picked.end(), t) == picked.end()) picked.push_back(t);
    }
    std::sort(picked.begin(), picked.end());
    for (VertexId t : picked) {
      edges.emplace_back(t, v);
      adjacency[t].push_back(v);
      adjacency[v].push_back(t);
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }

  std::vector<double> weights(label_count);
  for (std::uint32_t l = 0; l < label_count; ++l) weights[l] = 1.0 / std::pow(static_cast<double>(l + 1), skew);
  std::discrete_distribution<std::uint32_t> label_dist(weights.begin(), weights.end());
  std::vector<Label> labels(n);
  for (auto& l : labels) l = label_count == 1 ? 0 : label_dist(rng);
  return LabeledGraph::from_edges(std::move(labels), edges, label_count);
}

const char* to_string(Split s) { return s == Split::Train ? "train" : "test"; }

void WorkloadSpec::validate() const {
  if (sizes.empty()) throw std::invalid_argument("workload needs at least one query size");
  for (auto s : sizes)
    if (s == 0 || s > kMaxQueryVertices) throw std::invalid_argument("query sizes must lie in [1, 64]");
  if (queries_per_size == 0) throw std::invalid_argument("queries per size must be positive");
  if (dense_fraction < 0 || dense_fraction > 1) throw std::invalid_argument("dense fraction must lie in [0, 1]");
  if (train_fraction < 0 || train_fraction > 1) throw std::invalid_argument("train fraction must lie in [0, 1]");
}

bool is_dense(const LabeledGraph& q) {
  if (q.vertex_count() == 0) return false;
  return 2.0 * static_cast<double>(q.edge_count()) / static_cast<double>(q.vertex_count()) > 3.0;
}

namespace {

// Random walk until `size` distinct vertices are visited; restarts from a
// visited vertex when stuck. Empty result on failure.
std::vector<VertexId> walk(const LabeledGraph& g, std::size_t size, std::mt19937_64& rng) {
  std::uniform_int_distribution<VertexId> start_dist(0, static_cast<VertexId>(g.vertex_count() - 1));
  std::vector<VertexId> seen{start_dist(rng)};
  VertexId cur = seen[0];
  const std::size_t max_steps = 50 * size + 100;
  for (std::size_t step = 0; step < max_steps && seen.size() < size; ++step) {
    auto nb = g.neighbors(cur);
    if (nb.empty()) return {};
    cur = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
    if (std::find(seen.begin(), seen.end(), cur) == seen.end()) seen.push_back(cur);
  }
  if (seen.size() < size) return {};
  return seen;
}

// Grows a set by repeatedly adding the outside neighbor with the most
// links into it, breaking ties at random.
std::vector<VertexId> grow_dense(const LabeledGraph& g, std::size_t size, std::mt19937_64& rng) {
  std::uniform_int_distribution<VertexId> start_dist(0, static_cast<VertexId>(g.vertex_count() - 1));
  std::vector<VertexId> seen{start_dist(rng)};
  std::map<VertexId, std::size_t> links;
  while (seen.size() < size) {
    links.clear();
    for (VertexId u : seen)
      for (VertexId w : g.neighbors(u))
        if (std::find(seen.begin(), seen.end(), w) == seen.end()) ++links[w];
    if (links.empty()) return {};
    std::size_t top = 0;
    std::vector<VertexId> best;
    for (auto [w, c] : links) {
      if (c > top) {
        top = c;
        best.clear();
      }
      if (c == top) best.push_back(w);
    }
    seen.push_back(best[std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng)]);
  }
  return seen;
}

LabeledGraph induced(const LabeledGraph& g, const std::vector<VertexId>& vs) {
  std::vector<Label> labels;
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId i = 0; i < vs.size(); ++i) {
    labels.push_back(g.label(vs[i]));
    for (VertexId j = i + 1; j < vs.size(); ++j)
      if (g.has_edge(vs[i], vs[j])) edges.emplace_back(i, j);
  }
  return LabeledGraph::from_edges(std::move(labels), edges, g.label_alphabet_size());
}

std::string query_id(std::size_t size, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "q%02zu_%03zu", size, index);
  return buf;
}

}  // namespace

std::vector<WorkloadQuery> gen_queries(const LabeledGraph& g, const WorkloadSpec& spec) {
  spec.validate();
  if (g.vertex_count() == 0) throw std::invalid_argument("empty data graph");
  std::mt19937_64 rng(spec.seed);
  std::set<std::vector<VertexId>> used;
  std::vector<WorkloadQuery> out;

  for (std::size_t size : spec.sizes) {
    const bool split_by_density = size > 4;
    const std::size_t want_dense =
        split_by_density ? static_cast<std::size_t>(std::llround(spec.dense_fraction * static_cast<double>(spec.queries_per_size))) : 0;
    std::size_t have_dense = 0, have_sparse = 0, index = 0, failures = 0;
    const std::size_t max_failures = 2000 * spec.queries_per_size;
    std::vector<WorkloadQuery> group;
    std::bernoulli_distribution coin(0.5);
    while (group.size() < spec.queries_per_size) {
      const bool dense_open = split_by_density && have_dense < want_dense;
      const bool sparse_open = have_sparse < spec.queries_per_size - want_dense;
      const bool try_dense = dense_open && (!sparse_open || coin(rng));
      auto vs = try_dense ? grow_dense(g, size, rng) : walk(g, size, rng);
      if (vs.empty()) {
        if (++failures > max_failures) throw std::runtime_error("query extraction failed for size " + std::to_string(size));
        continue;
      }
      auto key = vs;
      std::sort(key.begin(), key.end());
      if (used.count(key)) {
        if (++failures > max_failures) throw std::runtime_error("query extraction failed for size " + std::to_string(size));
        continue;
      }
      LabeledGraph q = induced(g, vs);
      const bool dense = is_dense(q);
      if (split_by_density && failures < max_failures / 2) {
        // Honor the dense/sparse quota while extraction is still cheap.
        if (dense && have_dense >= want_dense) { ++failures; continue; }
        if (!dense && have_sparse >= spec.queries_per_size - want_dense) { ++failures; continue; }
      }
      used.insert(key);
      (dense ? have_dense : have_sparse)++;
      WorkloadQuery wq;
      wq.id = query_id(size, index++);
      wq.graph = std::move(q);
      wq.source = std::move(vs);
      wq.dense = dense;
      group.push_back(std::move(wq));
    }
    std::vector<std::size_t> perm(group.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(group.size())));
    for (std::size_t i = 0; i < perm.size(); ++i) group[perm[i]].split = i < n_train ? Split::Train : Split::Test;
    for (auto& wq : group) out.push_back(std::move(wq));
  }
  return out;
}

void save_workload(const std::string& dir, const std::vector<WorkloadQuery>& queries, const WorkloadSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "queries");
  nlohmann::ordered_json manifest;
  manifest["schema_version"] = 1;
  manifest["seed"] = spec.seed;
  manifest["sizes"] = spec.sizes;
  manifest["queries_per_size"] = spec.queries_per_size;
  manifest["dense_fraction"] = spec.dense_fraction;
  manifest["train_fraction"] = spec.train_fraction;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& wq : queries) {
    const std::string rel = "queries/" + wq.id + ".graph";
    save_graph_file((fs::path(dir) / rel).string(), wq.graph);
    nlohmann::ordered_json e;
    e["id"] = wq.id;
    e["file"] = rel;
    e["size"] = wq.size();
    e["edges"] = wq.graph.edge_count();
    e["dense"] = wq.dense;
    e["split"] = to_string(wq.split);
    e["source_vertices"] = wq.source;
    arr.push_back(std::move(e));
  }
  manifest["queries"] = std::move(arr);
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir);
  out << manifest.dump(2) << '\n';
}

std::vector<WorkloadQuery> load_workload(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw IoError("cannot open manifest in " + dir);
  auto manifest = nlohmann::json::parse(in);
  if (manifest.at("schema_version").get<int>() != 1) throw SchemaError("unsupported manifest schema version");
  std::vector<WorkloadQuery> out;
  for (const auto& e : manifest.at("queries")) {
    WorkloadQuery wq;
    wq.id = e.at("id").get<std::string>();
    wq.graph = load_graph_file((fs::path(dir) / e.at("file").get<std::string>()).string());
    wq.dense = e.at("dense").get<bool>();
    const auto split = e.at("split").get<std::string>();
    if (split != "train" && split != "test") throw std::runtime_error("bad split for query " + wq.id);
    wq.split = split == "train" ? Split::Train : Split::Test;
    if (e.contains("source_vertices")) wq.source = e.at("source_vertices").get<std::vector<VertexId>>();
    out.push_back(std::move(wq));
  }
  return out;
}

}  // namespace neuso
