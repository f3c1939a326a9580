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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace neuso {

using VertexId = std::uint32_t;
using Label = std::uint32_t;

inline constexpr std::size_t kMaxQueryVertices = 64;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Raised when a file cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for files written under an unsupported schema_version.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a caller breaks an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Undirected vertex-labeled graph in CSR form. Immutable once built.
class LabeledGraph {
 public:
  LabeledGraph() = default;

  /// Builds from a label vector and an undirected edge list. Throws
  /// std::invalid_argument on self-loops, duplicates or out-of-range ids.
  /// `alphabet` of 0 means max(label)+1.
  static LabeledGraph from_edges(std::vector<Label> labels,
                                 std::span<const std::pair<VertexId, VertexId>> edges,
                                 std::uint32_t alphabet = 0);

  std::size_t vertex_count() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return adjacency_.size() / 2; }
  std::uint32_t label_alphabet_size() const noexcept { return alphabet_; }

  Label label(VertexId v) const { return labels_[v]; }
  std::span<const Label> labels() const noexcept { return labels_; }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(VertexId u, VertexId v) const;

  /// Vertices carrying `l`, ascending. Empty for unused labels.
  std::span<const VertexId> vertices_with_label(Label l) const;

  /// Each undirected edge once, as (u, v) with u < v, ascending.
  std::vector<std::pair<VertexId, VertexId>> edges() const;

  friend bool operator==(const LabeledGraph& a, const LabeledGraph& b) {
    return a.alphabet_ == b.alphabet_ && a.labels_ == b.labels_ && a.offsets_ == b.offsets_ &&
           a.adjacency_ == b.adjacency_;
  }

 private:
  std::vector<Label> labels_;
  std::vector<std::size_t> offsets_{0};
  std::vector<VertexId> adjacency_;
  std::uint32_t alphabet_ = 1;
  std::vector<std::size_t> label_offsets_{0, 0};
  std::vector<VertexId> label_vertices_;
};

LabeledGraph load_graph(std::istream& in);
LabeledGraph load_graph(const std::string& text);
LabeledGraph load_graph_file(const std::string& path);
void write_graph(std::ostream& out, const LabeledGraph& g);
std::string serialize_graph(const LabeledGraph& g);
void save_graph_file(const std::string& path, const LabeledGraph& g);

/// Set of query vertices packed into one word.
class VertexSet {
 public:
  constexpr VertexSet() = default;
  constexpr explicit VertexSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr VertexSet single(VertexId v) { return VertexSet(std::uint64_t{1} << v); }
  static constexpr VertexSet full(std::size_t n) {
    return VertexSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool contains(VertexId v) const { return (bits_ >> v) & 1u; }
  constexpr VertexSet with(VertexId v) const { return VertexSet(bits_ | (std::uint64_t{1} << v)); }
  constexpr VertexSet without(VertexId v) const { return VertexSet(bits_ & ~(std::uint64_t{1} << v)); }
  constexpr VertexId lowest() const { return static_cast<VertexId>(std::countr_zero(bits_)); }

  constexpr VertexSet operator|(VertexSet o) const { return VertexSet(bits_ | o.bits_); }
  constexpr VertexSet operator&(VertexSet o) const { return VertexSet(bits_ & o.bits_); }
  constexpr VertexSet operator-(VertexSet o) const { return VertexSet(bits_ & ~o.bits_); }
  constexpr auto operator<=>(const VertexSet&) const = default;

  std::vector<VertexId> members() const;

  template <class F>
  void for_each(F&& f) const {
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) f(static_cast<VertexId>(std::countr_zero(b)));
  }

 private:
  std::uint64_t bits_ = 0;
};

/// Per-vertex neighbor masks of a query graph (at most 64 vertices).
std::vector<VertexSet> neighbor_masks(const LabeledGraph& q);

/// Throws ContractError when `q` cannot be addressed by VertexSet.
void require_query_size(const LabeledGraph& q);

bool connected(std::span<const VertexSet> masks, VertexSet s);
bool connected(const LabeledGraph& q, VertexSet s);

/// Vertices adjacent to `s` but outside it; all vertices when `s` is empty.
VertexSet frontier(std::span<const VertexSet> masks, VertexSet s);

struct MatchingOrder {
  std::vector<VertexId> order;
  friend bool operator==(const MatchingOrder&, const MatchingOrder&) = default;
};

/// Permutation check plus prefix connectivity.
bool validate_order(const LabeledGraph& q, const MatchingOrder& o);

}  // namespace neuso
