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

#include "encoder.hpp"

#include <algorithm>
#include <cmath>

namespace neuso {

LabelEmbeddings build_label_embeddings(const LabeledGraph& g, std::size_t d_label) {
  if (d_label == 0) throw std::invalid_argument("label embedding width must be positive");
  const std::size_t n = g.vertex_count();
  const std::size_t labels = std::max<std::size_t>(g.label_alphabet_size(), 1);
  const std::size_t total = n + labels;

  std::vector<double> inv_sqrt_deg(total, 0.0);
  std::vector<std::size_t> label_freq(labels, 0);
  for (VertexId v = 0; v < n; ++v) {
    inv_sqrt_deg[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
    ++label_freq[g.label(v)];
  }
  for (std::size_t l = 0; l < labels; ++l)
    if (label_freq[l]) inv_sqrt_deg[n + l] = 1.0 / std::sqrt(static_cast<double>(label_freq[l]));

  // y = A x over the augmented graph without materializing it.
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (VertexId v = 0; v < n; ++v) {
      const double sv = inv_sqrt_deg[v];
      double acc = 0.0;
      for (VertexId w : g.neighbors(v)) acc += inv_sqrt_deg[w] * x[w];
      const std::size_t lv = n + g.label(v);
      acc += inv_sqrt_deg[lv] * x[lv];
      y[v] = sv * acc;
      y[lv] += inv_sqrt_deg[lv] * sv * x[v];
    }
  };

  Tensor table(labels, d_label);
  std::vector<double> x(total), y(total);
  for (std::size_t l = 0; l < labels; ++l) {
    if (!label_freq[l]) continue;
    std::fill(x.begin(), x.end(), 0.0);
    x[n + l] = 1.0;
    for (std::size_t k = 0; k < d_label; ++k) {
      apply(x, y);
      std::swap(x, y);
      table(l, k) = x[n + l];
    }
  }
  for (std::size_t k = 0; k < d_label; ++k) {
    double peak = 0.0;
    for (std::size_t l = 0; l < labels; ++l) peak = std::max(peak, std::abs(table(l, k)));
    if (peak > 0)
      for (std::size_t l = 0; l < labels; ++l) table(l, k) /= peak;
  }
  return LabelEmbeddings{std::move(table)};
}

void EncoderConfig::validate() const {
  if (d_label == 0) throw std::invalid_argument("d_label must be positive");
  if (layer_widths.empty()) throw std::invalid_argument("encoder needs at least one layer");
  if (heads == 0) throw std::invalid_argument("head count must be positive");
  for (auto w : layer_widths)
    if (w == 0 || w % heads != 0) throw std::invalid_argument("layer widths must be positive multiples of the head count");
}

EncoderParams register_encoder(ParamStore& store, const EncoderConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  EncoderParams p;
  std::size_t in_v = cfg.vertex_input_width();
  std::size_t in_e = cfg.edge_input_width();
  for (std::size_t k = 0; k < cfg.layer_widths.size(); ++k) {
    const std::size_t out = cfg.layer_widths[k];
    const std::size_t dh = out / cfg.heads;
    LayerWeights layer;
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      const std::string pre = "enc.L" + std::to_string(k) + ".H" + std::to_string(h) + ".";
      HeadWeights w{};
      w.theta = store.add_xavier(pre + "theta", in_v, dh, rng);
      w.psi = store.add_xavier(pre + "psi", in_e, dh, rng);
      w.w1 = store.add_xavier(pre + "w1", in_v, dh, rng);
      w.w2 = store.add_xavier(pre + "w2", in_e, dh, rng);
      w.a_vertex = store.add_xavier(pre + "a_vertex", dh, 1, rng);
      w.a_edge = store.add_xavier(pre + "a_edge", dh, 1, rng);
      w.b_vertex = store.add_xavier(pre + "b_vertex", dh, 1, rng);
      w.b_edge = store.add_xavier(pre + "b_edge", dh, 1, rng);
      w.w_self = store.add_xavier(pre + "w_self", in_v, dh, rng);
      layer.heads.push_back(w);
    }
    const std::string pre = "enc.L" + std::to_string(k) + ".";
    layer.we_src = store.add_xavier(pre + "we_src", out, out, rng);
    layer.we_dst = store.add_xavier(pre + "we_dst", out, out, rng);
    p.layers.push_back(std::move(layer));
    in_v = out;
    in_e = out;
  }
  p.k1 = store.add_xavier("pool.k1", in_v, in_v, rng);
  p.k2 = store.add_xavier("pool.k2", in_v, in_v, rng);
  return p;
}

QueryTopology build_topology(const LabeledGraph& q) {
  QueryTopology t;
  t.vertex_count = q.vertex_count();
  std::vector<std::vector<std::size_t>> arc_of(q.vertex_count());
  for (VertexId u = 0; u < q.vertex_count(); ++u) {
    arc_of[u].assign(q.vertex_count(), 0);
    for (VertexId v : q.neighbors(u)) {
      arc_of[u][v] = t.arc_src.size();
      t.arc_src.push_back(u);
      t.arc_dst.push_back(v);
    }
  }
  for (VertexId u = 0; u < q.vertex_count(); ++u) {
    auto nb = q.neighbors(u);
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (q.has_edge(nb[i], nb[j])) {
          t.tri_vertex.push_back(u);
          t.tri_arc_fwd.push_back(arc_of[nb[i]][nb[j]]);
          t.tri_arc_bwd.push_back(arc_of[nb[j]][nb[i]]);
        }
  }
  return t;
}

std::vector<std::pair<VertexId, VertexId>> QueryTopology::neighbor_edges(VertexId u) const {
  std::vector<std::pair<VertexId, VertexId>> out;
  for (std::size_t i = 0; i < tri_vertex.size(); ++i)
    if (tri_vertex[i] == u) {
      const auto a = static_cast<VertexId>(arc_src[tri_arc_fwd[i]]);
      const auto b = static_cast<VertexId>(arc_dst[tri_arc_fwd[i]]);
      out.emplace_back(std::min(a, b), std::max(a, b));
    }
  return out;
}

InitialFeatures init_features(const LabeledGraph& q, const QueryTopology& topo, const CandidateContext& ctx,
                              const LabelEmbeddings& emb) {
  if (ctx.query_vertex_count() != q.vertex_count()) throw ShapeError("candidate context does not match the query");
  const std::size_t d = emb.dim();
  InitialFeatures f;
  f.vertices = Tensor(q.vertex_count(), d + 1);
  for (VertexId u = 0; u < q.vertex_count(); ++u) {
    const Label l = q.label(u);
    if (l < emb.label_count()) std::copy(emb.table.row_ptr(l), emb.table.row_ptr(l) + d, f.vertices.row_ptr(u));
    f.vertices(u, d) = std::log1p(static_cast<double>(ctx.candidate_count(u)));
  }
  f.arcs = Tensor(topo.arc_src.size(), 2 * (d + 1) + 1);
  for (std::size_t a = 0; a < topo.arc_src.size(); ++a) {
    const auto u = topo.arc_src[a], v = topo.arc_dst[a];
    double* row = f.arcs.row_ptr(a);
    std::copy(f.vertices.row_ptr(u), f.vertices.row_ptr(u) + d + 1, row);
    std::copy(f.vertices.row_ptr(v), f.vertices.row_ptr(v) + d + 1, row + d + 1);
    row[2 * (d + 1)] = std::log1p(static_cast<double>(ctx.edge_count(static_cast<VertexId>(u), static_cast<VertexId>(v))));
  }
  return f;
}

EncodedQuery triat_forward(Tape& tape, const QueryTopology& topo, const InitialFeatures& features,
                           const EncoderConfig& cfg, const EncoderParams& params) {
  cfg.validate();
  if (features.vertices.cols() != cfg.vertex_input_width() || features.arcs.cols() != cfg.edge_input_width())
    throw ShapeError("initial feature widths do not match the encoder configuration");
  if (features.vertices.rows() != topo.vertex_count || features.arcs.rows() != topo.arc_src.size())
    throw ShapeError("initial features do not match the query topology");

  const std::size_t n = topo.vertex_count;
  const bool has_arcs = !topo.arc_src.empty();
  const bool has_tris = cfg.triangles && !topo.tri_vertex.empty();
  EncodedQuery enc;
  Var x = tape.constant(features.vertices);
  Var e = tape.constant(features.arcs);

  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& layer = params.layers[k];
    std::vector<Var> head_out;
    std::vector<std::size_t> counts;
    for (const auto& w : layer.heads) {
      std::size_t count = 0;
      Var xw1 = tape.matmul(x, tape.param(w.w1));
      Var self = tape.matmul(x, tape.param(w.w_self));
      Var acc = self;
      if (has_arcs) {
        Var ew2 = tape.matmul(e, tape.param(w.w2));
        // alpha over arcs leaving u
        Var su = tape.gather_rows(tape.matmul(xw1, tape.param(w.a_vertex)), topo.arc_src);
        Var se = tape.matmul(ew2, tape.param(w.a_edge));
        Var alpha = tape.softmax_groups(tape.leaky_relu(tape.add(su, se), cfg.leaky_slope), topo.arc_src, n);
        count += topo.arc_src.size();
        Var msg = tape.gather_rows(tape.matmul(x, tape.param(w.theta)), topo.arc_dst);
        acc = tape.add(acc, tape.segment_sum(tape.scale_rows(msg, alpha), topo.arc_src, n));

        if (has_tris) {
          // An undirected neighbor edge takes the mean of its two arcs.
          auto mean_arcs = [&](Var per_arc) {
            return tape.scale(tape.add(tape.gather_rows(per_arc, topo.tri_arc_fwd), tape.gather_rows(per_arc, topo.tri_arc_bwd)), 0.5);
          };
          Var tu = tape.gather_rows(tape.matmul(xw1, tape.param(w.b_vertex)), topo.tri_vertex);
          Var te = mean_arcs(tape.matmul(ew2, tape.param(w.b_edge)));
          Var beta = tape.softmax_groups(tape.leaky_relu(tape.add(tu, te), cfg.leaky_slope), topo.tri_vertex, n);
          count += topo.tri_vertex.size();
          Var tmsg = mean_arcs(tape.matmul(e, tape.param(w.psi)));
          acc = tape.add(acc, tape.segment_sum(tape.scale_rows(tmsg, beta), topo.tri_vertex, n));
        }
      }
      head_out.push_back(tape.relu(acc));
      counts.push_back(count);
    }
    x = head_out.size() == 1 ? head_out[0] : tape.concat_cols(head_out);
    enc.attention_scores.push_back(std::move(counts));
    if (has_arcs && k + 1 < params.layers.size()) {
      Var from_src = tape.gather_rows(tape.matmul(x, tape.param(layer.we_src)), topo.arc_src);
      Var from_dst = tape.gather_rows(tape.matmul(x, tape.param(layer.we_dst)), topo.arc_dst);
      e = tape.add(from_src, from_dst);
    } else if (k + 1 < params.layers.size()) {
      e = tape.constant(Tensor(0, cfg.layer_widths[k]));
    }
  }
  enc.x = x;
  return enc;
}

Var pool_states(Tape& tape, Var x, std::span<const VertexSet> states, const EncoderConfig& cfg,
                const EncoderParams& params) {
  const std::size_t n = tape.value(x).rows();
  for (VertexSet s : states)
    if (n < 64 && (s.bits() >> n) != 0) throw ContractError("state references vertices outside the query");
  Var alpha = tape.rowdot(tape.matmul(x, tape.param(params.k1)), tape.matmul(x, tape.param(params.k2)));
  if (!cfg.pool_softmax) {
    Tensor mask(states.size(), n);
    for (std::size_t i = 0; i < states.size(); ++i) states[i].for_each([&](VertexId u) { mask(i, u) = 1.0; });
    return tape.matmul(tape.constant(std::move(mask)), tape.scale_rows(x, alpha));
  }
  std::vector<std::size_t> seg, member;
  for (std::size_t i = 0; i < states.size(); ++i)
    states[i].for_each([&](VertexId u) {
      seg.push_back(i);
      member.push_back(u);
    });
  if (member.empty()) return tape.constant(Tensor(states.size(), tape.value(x).cols()));
  Var w = tape.softmax_groups(tape.gather_rows(alpha, member), seg, states.size());
  return tape.segment_sum(tape.scale_rows(tape.gather_rows(x, member), w), seg, states.size());
}

}  // namespace neuso
