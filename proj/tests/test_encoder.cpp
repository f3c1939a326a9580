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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "encoder.hpp"
#include "oracles.hpp"

using namespace neuso;

namespace {

struct Encoder {
  EncoderConfig cfg;
  ParamStore store;
  EncoderParams params;

  explicit Encoder(EncoderConfig c, std::uint64_t seed = 3) : cfg(std::move(c)) {
    std::mt19937_64 rng(seed);
    params = register_encoder(store, cfg, rng);
  }

  Tensor encode(const LabeledGraph& g, const LabeledGraph& q, const LabelEmbeddings& emb,
                std::vector<std::size_t>* counts = nullptr) const {
    const auto topo = build_topology(q);
    const auto feats = init_features(q, topo, build_candidates(g, q), emb);
    Tape tape(&store);
    const auto enc = triat_forward(tape, topo, feats, cfg, params);
    if (counts)
      for (const auto& layer : enc.attention_scores) counts->insert(counts->end(), layer.begin(), layer.end());
    return tape.value(enc.x);
  }
};

EncoderConfig small_config(std::size_t d_label, bool triangles = true) {
  EncoderConfig c;
  c.d_label = d_label;
  c.layer_widths = {8, 8};
  c.heads = 2;
  c.triangles = triangles;
  return c;
}

LabeledGraph cycle(std::size_t n, std::size_t offset = 0, std::vector<std::pair<VertexId, VertexId>>* into = nullptr) {
  std::vector<std::pair<VertexId, VertexId>> es;
  for (std::size_t i = 0; i < n; ++i)
    es.emplace_back(static_cast<VertexId>(offset + i), static_cast<VertexId>(offset + (i + 1) % n));
  if (into) into->insert(into->end(), es.begin(), es.end());
  return oracle::graph(std::vector<Label>(offset + n, 0), es);
}

LabeledGraph cycles(std::size_t count, std::size_t len) {
  std::vector<std::pair<VertexId, VertexId>> es;
  for (std::size_t c = 0; c < count; ++c) cycle(len, c * len, &es);
  return oracle::graph(std::vector<Label>(count * len, 0), es);
}

LabeledGraph clique(std::size_t n) {
  std::vector<std::pair<VertexId, VertexId>> es;
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v = u + 1; v < n; ++v) es.emplace_back(u, v);
  return oracle::graph(std::vector<Label>(n, 0), es);
}

std::vector<std::vector<double>> sorted_rows(const Tensor& t) {
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < t.rows(); ++r) rows.emplace_back(t.row_ptr(r), t.row_ptr(r) + t.cols());
  std::sort(rows.begin(), rows.end());
  return rows;
}

double multiset_distance(const Tensor& a, const Tensor& b) {
  const auto ra = sorted_rows(a), rb = sorted_rows(b);
  double worst = 0;
  for (std::size_t i = 0; i < ra.size(); ++i)
    for (std::size_t k = 0; k < ra[i].size(); ++k) worst = std::max(worst, std::abs(ra[i][k] - rb[i][k]));
  return worst;
}

}  // namespace

TEST_CASE("symmetric labels get identical embedding rows") {
  const auto g = oracle::graph({0, 1, 2, 0, 1, 2}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
  const auto emb = build_label_embeddings(g, 16);
  double d = 0;
  for (std::size_t k = 0; k < 16; ++k) d = std::max(d, std::abs(emb.table(0, k) - emb.table(1, k)));
  CHECK(d < 1e-9);
}

TEST_CASE("single-label graph has one embedding row") {
  CHECK(build_label_embeddings(cycle(5), 8).label_count() == 1);
}

TEST_CASE("structurally distinct labels get distinct rows") {
  std::mt19937_64 rng(42);
  auto g = oracle::random_graph(rng, 60, 0.08, 1);
  std::vector<Label> labels(60);
  for (VertexId v = 0; v < 60; ++v) labels[v] = g.degree(v) > 4 ? 1 : 0;
  const auto relabeled = LabeledGraph::from_edges(labels, g.edges(), 2);
  const auto emb = build_label_embeddings(relabeled, 16);
  double d = 0;
  for (std::size_t k = 0; k < 16; ++k) d = std::max(d, std::abs(emb.table(0, k) - emb.table(1, k)));
  CHECK(d > 1e-6);
}

TEST_CASE("initial features") {
  const auto g = oracle::graph({0, 0, 1}, {{0, 1}, {1, 2}});
  const auto q = oracle::graph({0, 2, 0}, {{0, 1}, {1, 2}});
  const auto emb = build_label_embeddings(g, 4);
  const auto topo = build_topology(q);
  const auto f = init_features(q, topo, build_candidates(g, q), emb);
  CHECK(f.vertices(1, 4) == 0.0);
  for (std::size_t k = 0; k < 4; ++k) CHECK(f.vertices(1, k) == 0.0);
  CHECK(f.arcs.cols() == 2 * (4 + 1) + 1);
  CHECK(f.arcs.rows() == 4);
  for (std::size_t k = 0; k < f.vertices.cols(); ++k) CHECK(f.vertices(0, k) == f.vertices(2, k));
}

TEST_CASE("an isolated query vertex sees only its self projection") {
  const auto g = cycle(4);
  const auto q = oracle::graph({0}, {});
  const auto emb = build_label_embeddings(g, 4);
  Encoder enc(small_config(4));
  const auto topo = build_topology(q);
  Tensor x = init_features(q, topo, build_candidates(g, q), emb).vertices;
  for (const auto& layer : enc.params.layers) {
    std::vector<double> next;
    for (const auto& h : layer.heads) {
      Tensor y = matmul(x, enc.store.at(h.w_self).value);
      for (double v : y.values()) next.push_back(std::max(0.0, v));
    }
    x = Tensor(1, next.size(), next);
  }
  CHECK(enc.encode(g, q, emb) == x);
}

TEST_CASE("TriAT separates a 1-WL-equivalent pair that differs in triangles") {
  const auto g = clique(5);
  const auto c6 = cycle(6), two_c3 = cycles(2, 3);
  REQUIRE(oracle::wl_equivalent(c6, two_c3));
  REQUIRE(oracle::triangles(two_c3) == 2);
  REQUIRE(oracle::triangles(c6) == 0);
  const auto emb = build_label_embeddings(g, 4);
  Encoder tri(small_config(4));
  CHECK(multiset_distance(tri.encode(g, c6, emb), tri.encode(g, two_c3, emb)) > 1e-6);

  Encoder plain(small_config(4, false));
  CHECK(multiset_distance(plain.encode(g, c6, emb), plain.encode(g, two_c3, emb)) < 1e-12);
}

TEST_CASE("2xC4 and C8 are indistinguishable") {
  const auto g = clique(5);
  const auto emb = build_label_embeddings(g, 4);
  Encoder enc(small_config(4));
  CHECK(multiset_distance(enc.encode(g, cycles(2, 4), emb), enc.encode(g, cycle(8), emb)) < 1e-9);
}

TEST_CASE("attention score count per head") {
  std::mt19937_64 rng(31);
  const auto g = oracle::random_graph(rng, 30, 0.2, 2);
  const auto emb = build_label_embeddings(g, 4);
  Encoder enc(small_config(4));
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = oracle::random_connected(rng, 7, 0.3, 2);
    std::vector<std::size_t> counts;
    enc.encode(g, q, emb, &counts);
    const std::size_t e = q.edge_count(), t = oracle::triangles(q);
    REQUIRE(counts.size() == 4);
    for (auto c : counts) {
      CHECK(c == 2 * e + 3 * t);
      CHECK(c <= 2 * e + 6 * t);
    }
  }
}

TEST_CASE("pooling of a single vertex") {
  std::mt19937_64 rng(6);
  Encoder enc(small_config(4));
  const Tensor x = [&] {
    Tensor t(3, 8);
    for (auto& v : t.values()) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    return t;
  }();
  Tape tape(&enc.store);
  const VertexSet states[] = {VertexSet::single(1), VertexSet{}};
  const Tensor pooled = tape.value(pool_states(tape, tape.constant(x), states, enc.cfg, enc.params));
  const Tensor xu(1, 8, std::vector<double>(x.row_ptr(1), x.row_ptr(1) + 8));
  const Tensor a = matmul(xu, enc.store.at(enc.params.k1).value), b = matmul(xu, enc.store.at(enc.params.k2).value);
  double alpha = 0;
  for (std::size_t k = 0; k < a.size(); ++k) alpha += a.values()[k] * b.values()[k];
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(pooled(0, k) == doctest::Approx(alpha * xu(0, k)).epsilon(1e-12));
    CHECK(pooled(1, k) == 0.0);
  }
}

TEST_CASE("zero pooling projections give zero") {
  Encoder enc(small_config(4));
  enc.store.at(enc.params.k1).value.fill(0);
  enc.store.at(enc.params.k2).value.fill(0);
  Tape tape(&enc.store);
  const VertexSet states[] = {VertexSet(0b11), VertexSet(0b101)};
  const Tensor pooled = tape.value(pool_states(tape, tape.constant(Tensor(3, 8, 0.7)), states, enc.cfg, enc.params));
  CHECK(pooled == Tensor(2, 8, 0.0));
}

TEST_CASE("encoder is permutation equivariant and pooling invariant") {
  std::mt19937_64 rng(13);
  const auto g = oracle::random_graph(rng, 40, 0.15, 3);
  const auto emb = build_label_embeddings(g, 4);
  Encoder enc(small_config(4));
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = oracle::random_connected(rng, 6, 0.35, 3);
    std::vector<VertexId> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Label> labels(6);
    for (VertexId u = 0; u < 6; ++u) labels[perm[u]] = q.label(u);
    std::vector<std::pair<VertexId, VertexId>> es;
    for (auto [u, v] : q.edges()) es.emplace_back(perm[u], perm[v]);
    const auto p = LabeledGraph::from_edges(labels, es, q.label_alphabet_size());

    const Tensor xq = enc.encode(g, q, emb), xp = enc.encode(g, p, emb);
    for (VertexId u = 0; u < 6; ++u)
      for (std::size_t k = 0; k < xq.cols(); ++k) CHECK(xq(u, k) == doctest::Approx(xp(perm[u], k)).epsilon(1e-12));

    const VertexSet s(0b010011);
    VertexSet ps;
    s.for_each([&](VertexId u) { ps = ps.with(perm[u]); });
    Tape t1(&enc.store), t2(&enc.store);
    const Tensor a = t1.value(pool_states(t1, t1.constant(xq), std::span(&s, 1), enc.cfg, enc.params));
    const Tensor b = t2.value(pool_states(t2, t2.constant(xp), std::span(&ps, 1), enc.cfg, enc.params));
    for (std::size_t k = 0; k < a.cols(); ++k) CHECK(a(0, k) == doctest::Approx(b(0, k)).epsilon(1e-12));
  }
}

TEST_CASE("encoder gradients match central differences") {
  std::mt19937_64 rng(23);
  const auto g = oracle::random_graph(rng, 30, 0.2, 2);
  const auto emb = build_label_embeddings(g, 4);
  const auto q = oracle::graph({0, 1, 0, 1}, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
  Encoder enc(small_config(4));
  const auto topo = build_topology(q);
  const auto feats = init_features(q, topo, build_candidates(g, q), emb);
  const VertexSet states[] = {VertexSet(0b0111), VertexSet(0b1100), VertexSet(0b1111)};
  Tensor weights(3, 8);
  for (auto& w : weights.values()) w = std::uniform_real_distribution<double>(-1, 1)(rng);
  auto loss_of = [&](bool backward) {
    Tape tape(&enc.store);
    const auto x = triat_forward(tape, topo, feats, enc.cfg, enc.params).x;
    const Var pooled = pool_states(tape, x, states, enc.cfg, enc.params);
    const Var loss = tape.sum(tape.mul(pooled, tape.constant(weights)));
    if (backward) tape.backward(loss);
    return tape.value(loss).item();
  };
  enc.store.zero_grad();
  loss_of(true);
  double worst = 0;
  std::size_t checked = 0;
  const double h = 1e-5;
  for (auto& p : enc.store) {
    for (std::size_t k = 0; k < p.value.size(); k += 7) {
      const double keep = p.value.values()[k];
      p.value.values()[k] = keep + h;
      const double up = loss_of(false);
      p.value.values()[k] = keep - h;
      const double down = loss_of(false);
      p.value.values()[k] = keep;
      const double fd = (up - down) / (2 * h);
      // Below this magnitude central differences are dominated by rounding.
      if (std::abs(fd) < 1e-6 && std::abs(p.grad.values()[k]) < 1e-6) continue;
      worst = std::max(worst, oracle::rel_err(p.grad.values()[k], fd));
      ++checked;
    }
  }
  CHECK(checked > 50);
  CHECK(worst < 1e-4);
}
