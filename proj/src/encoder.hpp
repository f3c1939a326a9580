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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "graph.hpp"
#include "matcher.hpp"
#include "tape.hpp"
#include "tensor.hpp"

namespace neuso {

/// One row per label of the data graph.
struct LabelEmbeddings {
  Tensor table;

  std::size_t label_count() const { return table.rows(); }
  std::size_t dim() const { return table.cols(); }
};

/// Row l holds the closed-walk return weights (A^k)_{ll}, k = 1..d_label, of
/// the symmetric-normalized adjacency A of the label-augmented graph (data
/// graph plus one vertex per label joined to the vertices carrying it). Each
/// column is scaled to unit max magnitude. The construction is invariant
/// under graph automorphisms, so symmetric labels get identical rows.
LabelEmbeddings build_label_embeddings(const LabeledGraph& g, std::size_t d_label);

struct EncoderConfig {
  std::size_t d_label = 127;
  std::vector<std::size_t> layer_widths{64, 64};
  std::size_t heads = 4;
  double leaky_slope = 0.2;
  bool triangles = true;       // false degrades TriAT to a plain attention MPNN
  bool pool_softmax = false;   // normalize pooling coefficients per subquery

  void validate() const;
  std::size_t vertex_input_width() const { return d_label + 1; }
  std::size_t edge_input_width() const { return 2 * vertex_input_width() + 1; }
  std::size_t output_width() const { return layer_widths.back(); }
};

struct HeadWeights {
  std::size_t theta, psi, w1, w2, a_vertex, a_edge, b_vertex, b_edge, w_self;
};

struct LayerWeights {
  std::vector<HeadWeights> heads;
  std::size_t we_src = 0, we_dst = 0;  // edge refresh, split by endpoint
};

/// Parameter indices inside a ParamStore.
struct EncoderParams {
  std::vector<LayerWeights> layers;
  std::size_t k1 = 0, k2 = 0;
};

/// Registers Xavier-initialized encoder parameters named "enc.*" and
/// "pool.*".
EncoderParams register_encoder(ParamStore& store, const EncoderConfig& cfg, std::mt19937_64& rng);

/// Arc-level view of a query: each undirected edge appears as two arcs.
struct QueryTopology {
  std::size_t vertex_count = 0;
  std::vector<std::size_t> arc_src, arc_dst;
  /// One entry per (vertex u, edge {v1, v2} between neighbors of u).
  std::vector<std::size_t> tri_vertex, tri_arc_fwd, tri_arc_bwd;

  std::size_t edge_count() const { return arc_src.size() / 2; }
  std::size_t triangle_count() const { return tri_vertex.size() / 3; }
  /// E_N(u) as neighbor pairs (v1 < v2).
  std::vector<std::pair<VertexId, VertexId>> neighbor_edges(VertexId u) const;
};

QueryTopology build_topology(const LabeledGraph& q);

struct InitialFeatures {
  Tensor vertices;  // |V| x (d_label + 1)
  Tensor arcs;      // 2|E| x (2 d_label + 3), ordered as QueryTopology arcs
};

/// x_u = label row ++ log(1 + |C(u)|); arc u->v = x_u ++ x_v ++ log(1 + |C(u,v)|).
/// Labels outside the table map to a zero row.
InitialFeatures init_features(const LabeledGraph& q, const QueryTopology& topo, const CandidateContext& ctx,
                              const LabelEmbeddings& emb);

struct EncodedQuery {
  Var x;  // |V| x output width
  /// Attention scores evaluated, indexed [layer][head].
  std::vector<std::vector<std::size_t>> attention_scores;
};

EncodedQuery triat_forward(Tape& tape, const QueryTopology& topo, const InitialFeatures& features,
                           const EncoderConfig& cfg, const EncoderParams& params);

/// Pooled rows for each state, in order. The empty state pools to zeros.
Var pool_states(Tape& tape, Var x, std::span<const VertexSet> states, const EncoderConfig& cfg,
                const EncoderParams& params);

}  // namespace neuso
