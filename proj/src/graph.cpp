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

#include "graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace neuso {

LabeledGraph LabeledGraph::from_edges(std::vector<Label> labels,
                                      std::span<const std::pair<VertexId, VertexId>> edges,
                                      std::uint32_t alphabet) {
  LabeledGraph g;
  const std::size_t n = labels.size();
  std::uint32_t max_label = 0;
  for (Label l : labels) max_label = std::max(max_label, l);
  if (alphabet == 0) alphabet = n == 0 ? 1 : max_label + 1;
  if (n > 0 && max_label >= alphabet) throw std::invalid_argument("label outside alphabet");

  std::vector<std::size_t> degree(n, 0);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loop on vertex " + std::to_string(u));
    ++degree[u];
    ++degree[v];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
  g.adjacency_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : edges) {
    g.adjacency_[cursor[u]++] = v;
    g.adjacency_[cursor[v]++] = u;
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto first = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
    auto last = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last)
      throw std::invalid_argument("duplicate edge at vertex " + std::to_string(v));
  }

  g.labels_ = std::move(labels);
  g.alphabet_ = alphabet;
  g.label_offsets_.assign(alphabet + 1, 0);
  for (Label l : g.labels_) ++g.label_offsets_[l + 1];
  for (std::uint32_t l = 0; l < alphabet; ++l) g.label_offsets_[l + 1] += g.label_offsets_[l];
  g.label_vertices_.resize(n);
  std::vector<std::size_t> lcursor(g.label_offsets_.begin(), g.label_offsets_.end() - 1);
  for (VertexId v = 0; v < n; ++v) g.label_vertices_[lcursor[g.labels_[v]]++] = v;
  return g;
}

bool LabeledGraph::has_edge(VertexId u, VertexId v) const {
  if (degree(u) > degree(v)) std::swap(u, v);
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::span<const VertexId> LabeledGraph::vertices_with_label(Label l) const {
  if (l >= alphabet_) return {};
  return {label_vertices_.data() + label_offsets_[l], label_vertices_.data() + label_offsets_[l + 1]};
}

std::vector<std::pair<VertexId, VertexId>> LabeledGraph::edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(edge_count());
  for (VertexId u = 0; u < vertex_count(); ++u)
    for (VertexId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

namespace {

constexpr std::uint64_t kMaxLabel = std::uint64_t{1} << 24;

// Splits a record into unsigned fields; nullopt on any non-numeric token.
std::optional<std::vector<std::uint64_t>> numeric_fields(std::string_view rest) {
  std::vector<std::uint64_t> out;
  std::size_t i = 0;
  while (i < rest.size()) {
    while (i < rest.size() && (rest[i] == ' ' || rest[i] == '\t' || rest[i] == '\r')) ++i;
    if (i == rest.size()) break;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(rest.data() + i, rest.data() + rest.size(), value);
    if (ec != std::errc()) return std::nullopt;
    std::size_t end = static_cast<std::size_t>(ptr - rest.data());
    if (end < rest.size() && rest[end] != ' ' && rest[end] != '\t' && rest[end] != '\r')
      return std::nullopt;
    out.push_back(value);
    i = end;
  }
  return out;
}

}  // namespace

LabeledGraph load_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> header;
  std::vector<Label> labels;
  std::vector<std::uint64_t> declared_degree;
  std::vector<std::size_t> vertex_line;
  std::vector<bool> seen;
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<std::size_t> edge_line;
  std::size_t vertices_seen = 0;

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    while (!view.empty() && (view.back() == '\r' || view.back() == ' ')) view.remove_suffix(1);
    if (view.empty()) continue;
    const char kind = view.front();
    if (view.size() > 1 && view[1] != ' ' && view[1] != '\t')
      throw ParseError(lineno, "unknown record '" + std::string(view) + "'");
    auto fields = numeric_fields(view.substr(1));
    if (!fields) throw ParseError(lineno, "non-numeric field");

    switch (kind) {
      case 't': {
        if (header) throw ParseError(lineno, "duplicate header");
        if (fields->size() != 2) throw ParseError(lineno, "header needs |V| and |E|");
        if ((*fields)[0] > UINT32_MAX) throw ParseError(lineno, "vertex count out of range");
        header = std::make_pair((*fields)[0], (*fields)[1]);
        const std::size_t n = static_cast<std::size_t>(header->first);
        labels.assign(n, 0);
        declared_degree.assign(n, 0);
        vertex_line.assign(n, 0);
        seen.assign(n, false);
        edges.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(header->second, 1u << 24)));
        break;
      }
      case 'v': {
        if (!header) throw ParseError(lineno, "vertex before header");
        if (fields->size() != 3) throw ParseError(lineno, "vertex needs id, label, degree");
        const std::uint64_t id = (*fields)[0];
        if (id >= header->first) throw ParseError(lineno, "vertex id out of range");
        if (seen[id]) throw ParseError(lineno, "duplicate vertex id");
        if ((*fields)[1] >= kMaxLabel) throw ParseError(lineno, "label out of range");
        seen[id] = true;
        labels[id] = static_cast<Label>((*fields)[1]);
        declared_degree[id] = (*fields)[2];
        vertex_line[id] = lineno;
        ++vertices_seen;
        break;
      }
      case 'e': {
        if (!header) throw ParseError(lineno, "edge before header");
        if (fields->size() != 2) throw ParseError(lineno, "edge needs two endpoints");
        const std::uint64_t u = (*fields)[0], v = (*fields)[1];
        if (u >= header->first || v >= header->first) throw ParseError(lineno, "edge endpoint out of range");
        if (u == v) throw ParseError(lineno, "self-loop");
        edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
        edge_line.push_back(lineno);
        break;
      }
      default:
        throw ParseError(lineno, std::string("unknown record type '") + kind + "'");
    }
  }
  if (!header) throw ParseError(lineno, "missing header");
  if (vertices_seen != header->first)
    throw ParseError(lineno, "declared " + std::to_string(header->first) + " vertices, found " +
                                 std::to_string(vertices_seen));
  if (edges.size() != header->second)
    throw ParseError(lineno, "declared " + std::to_string(header->second) + " edges, found " +
                                 std::to_string(edges.size()));

  // Duplicate detection with line attribution.
  std::vector<std::size_t> idx(edges.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto key = [&](std::size_t i) {
    auto [a, b] = edges[i];
    return std::make_pair(std::min(a, b), std::max(a, b));
  };
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return key(a) != key(b) ? key(a) < key(b) : a < b;
  });
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (key(idx[i]) == key(idx[i - 1])) throw ParseError(edge_line[idx[i]], "duplicate edge");

  std::vector<std::uint64_t> degree(labels.size(), 0);
  for (auto [u, v] : edges) {
    ++degree[u];
    ++degree[v];
  }
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (degree[v] != declared_degree[v])
      throw ParseError(vertex_line[v], "declared degree " + std::to_string(declared_degree[v]) +
                                           " but vertex has " + std::to_string(degree[v]) + " edges");
  return LabeledGraph::from_edges(std::move(labels), edges);
}

LabeledGraph load_graph(const std::string& text) {
  std::istringstream in(text);
  return load_graph(in);
}

LabeledGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file " + path);
  return load_graph(in);
}

void write_graph(std::ostream& out, const LabeledGraph& g) {
  out << "t " << g.vertex_count() << ' ' << g.edge_count() << '\n';
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    out << "v " << v << ' ' << g.label(v) << ' ' << g.degree(v) << '\n';
  for (auto [u, v] : g.edges()) out << "e " << u << ' ' << v << '\n';
}

std::string serialize_graph(const LabeledGraph& g) {
  std::ostringstream out;
  write_graph(out, g);
  return out.str();
}

void save_graph_file(const std::string& path, const LabeledGraph& g) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write graph file " + path);
  write_graph(out, g);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<VertexId> VertexSet::members() const {
  std::vector<VertexId> out;
  out.reserve(size());
  for_each([&](VertexId v) { out.push_back(v); });
  return out;
}

void require_query_size(const LabeledGraph& q) {
  if (q.vertex_count() > kMaxQueryVertices)
    throw ContractError("query has " + std::to_string(q.vertex_count()) + " vertices; limit is 64");
}

std::vector<VertexSet> neighbor_masks(const LabeledGraph& q) {
  require_query_size(q);
  std::vector<VertexSet> masks(q.vertex_count());
  for (VertexId u = 0; u < q.vertex_count(); ++u)
    for (VertexId v : q.neighbors(u)) masks[u] = masks[u].with(v);
  return masks;
}

bool connected(std::span<const VertexSet> masks, VertexSet s) {
  if (s.empty()) return true;
  VertexSet reached = VertexSet::single(s.lowest());
  VertexSet fresh = reached;
  while (!fresh.empty()) {
    VertexSet next;
    fresh.for_each([&](VertexId v) { next = next | masks[v]; });
    fresh = (next & s) - reached;
    reached = reached | fresh;
  }
  return reached == s;
}

bool connected(const LabeledGraph& q, VertexSet s) {
  auto masks = neighbor_masks(q);
  if ((s - VertexSet::full(q.vertex_count())).bits() != 0)
    throw ContractError("vertex set exceeds query size");
  return connected(masks, s);
}

VertexSet frontier(std::span<const VertexSet> masks, VertexSet s) {
  if (s.empty()) return VertexSet::full(masks.size());
  VertexSet out;
  s.for_each([&](VertexId v) { out = out | masks[v]; });
  return out - s;
}

bool validate_order(const LabeledGraph& q, const MatchingOrder& o) {
  if (q.vertex_count() > kMaxQueryVertices) return false;
  if (o.order.size() != q.vertex_count()) return false;
  auto masks = neighbor_masks(q);
  VertexSet placed;
  for (std::size_t i = 0; i < o.order.size(); ++i) {
    VertexId u = o.order[i];
    if (u >= q.vertex_count() || placed.contains(u)) return false;
    if (i > 0 && (masks[u] & placed).empty()) return false;
    placed = placed.with(u);
  }
  return true;
}

}  // namespace neuso
