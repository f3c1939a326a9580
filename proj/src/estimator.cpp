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

#include "estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace neuso {

namespace {

constexpr int kCheckpointSchema = 1;

MlpWeights register_mlp(ParamStore& store, const std::string& name, std::size_t in, std::size_t hidden,
                        bool paired, std::mt19937_64& rng) {
  MlpWeights w;
  if (paired) {
    // Split one 2*in x hidden Xavier matrix so the halves share its scale.
    ParamStore scratch;
    const auto& full = scratch.at(scratch.add_xavier("w0", 2 * in, hidden, rng)).value;
    Tensor top(in, hidden), bottom(in, hidden);
    std::copy(full.data(), full.data() + in * hidden, top.data());
    std::copy(full.data() + in * hidden, full.data() + 2 * in * hidden, bottom.data());
    w.w0 = store.add(name + ".w0", std::move(top));
    w.w0_second = store.add(name + ".w0_second", std::move(bottom));
  } else {
    w.w0 = store.add_xavier(name + ".w0", in, hidden, rng);
  }
  w.b0 = store.add(name + ".b0", Tensor(1, hidden));
  w.w1 = store.add_xavier(name + ".w1", hidden, hidden, rng);
  w.b1 = store.add(name + ".b1", Tensor(1, hidden));
  w.w2 = store.add_xavier(name + ".w2", hidden, 1, rng);
  w.b2 = store.add(name + ".b2", Tensor(1, 1));
  return w;
}

Var mlp_tail(Tape& t, const MlpWeights& w, Var pre) {
  Var h = t.relu(pre);
  h = t.relu(t.add_row(t.matmul(h, t.param(w.w1)), t.param(w.b1)));
  return t.add_row(t.matmul(h, t.param(w.w2)), t.param(w.b2));
}

Var mlp_single(Tape& t, const MlpWeights& w, Var in) {
  return mlp_tail(t, w, t.add_row(t.matmul(in, t.param(w.w0)), t.param(w.b0)));
}

Var mlp_pair(Tape& t, const MlpWeights& w, Var states, const std::vector<std::size_t>& from,
             const std::vector<std::size_t>& to) {
  Var a = t.gather_rows(t.matmul(states, t.param(w.w0)), from);
  Var b = t.gather_rows(t.matmul(states, t.param(w.w0_second)), to);
  return mlp_tail(t, w, t.add_row(t.add(a, b), t.param(w.b0)));
}

nlohmann::ordered_json tensor_json(const Tensor& t) {
  nlohmann::ordered_json j;
  j["shape"] = {t.rows(), t.cols()};
  j["values"] = t.values();
  return j;
}

Tensor tensor_from_json(const nlohmann::json& j) {
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 2) throw ShapeError("tensor shape must have two dimensions");
  Tensor t(shape[0], shape[1], j.at("values").get<std::vector<double>>());
  if (!t.all_finite()) throw NumericError("non-finite tensor in checkpoint");
  return t;
}

}  // namespace

void ModelConfig::validate() const {
  encoder.validate();
  if (hidden == 0) throw std::invalid_argument("hidden width must be positive");
}

Model Model::create(const ModelConfig& cfg, LabelEmbeddings labels) {
  cfg.validate();
  if (labels.dim() != cfg.encoder.d_label)
    throw ShapeError("label embeddings have width " + std::to_string(labels.dim()) + ", expected " +
                     std::to_string(cfg.encoder.d_label));
  Model m;
  m.config_ = cfg;
  m.labels_ = std::move(labels);
  std::mt19937_64 rng(cfg.seed);
  m.encoder_ = register_encoder(m.params_, cfg.encoder, rng);
  const std::size_t width = cfg.encoder.output_width();
  m.heads_.card = register_mlp(m.params_, "head.card", width, cfg.hidden, false, rng);
  m.heads_.cost = register_mlp(m.params_, "head.cost", width, cfg.hidden, true, rng);
  m.heads_.mc = register_mlp(m.params_, "head.mc", width, cfg.hidden, false, rng);
  return m;
}

nlohmann::ordered_json Model::to_json(const nlohmann::ordered_json& extra) const {
  nlohmann::ordered_json j;
  j["schema_version"] = kCheckpointSchema;
  j["seed"] = config_.seed;
  nlohmann::ordered_json h;
  h["d_label"] = config_.encoder.d_label;
  h["layer_widths"] = config_.encoder.layer_widths;
  h["heads"] = config_.encoder.heads;
  h["leaky_slope"] = config_.encoder.leaky_slope;
  h["triangles"] = config_.encoder.triangles;
  h["pool_softmax"] = config_.encoder.pool_softmax;
  h["hidden"] = config_.hidden;
  j["hyperparameters"] = std::move(h);
  j["label_embeddings"] = tensor_json(labels_.table);
  j["parameters"] = params_to_json(params_);
  if (!extra.is_null()) j["metadata"] = extra;
  return j;
}

Model Model::from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kCheckpointSchema)
    throw SchemaError("unsupported checkpoint schema version");
  ModelConfig cfg;
  cfg.seed = j.at("seed").get<std::uint64_t>();
  const auto& h = j.at("hyperparameters");
  cfg.encoder.d_label = h.at("d_label").get<std::size_t>();
  cfg.encoder.layer_widths = h.at("layer_widths").get<std::vector<std::size_t>>();
  cfg.encoder.heads = h.at("heads").get<std::size_t>();
  cfg.encoder.leaky_slope = h.at("leaky_slope").get<double>();
  cfg.encoder.triangles = h.at("triangles").get<bool>();
  cfg.encoder.pool_softmax = h.at("pool_softmax").get<bool>();
  cfg.hidden = h.at("hidden").get<std::size_t>();
  Model m = create(cfg, LabelEmbeddings{tensor_from_json(j.at("label_embeddings"))});
  params_from_json(j.at("parameters"), m.params_);
  return m;
}

void Model::save(const std::string& path, const nlohmann::ordered_json& extra) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out << to_json(extra).dump() << '\n';
  if (!out) throw IoError("failed writing checkpoint " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path);
  return from_json(nlohmann::json::parse(in));
}

PreparedQuery prepare_query(const Model& model, const LabeledGraph& q, const CandidateContext& ctx) {
  PreparedQuery pq;
  pq.topology = build_topology(q);
  pq.features = init_features(q, pq.topology, ctx, model.labels());
  return pq;
}

HeadVars forward_heads(Tape& tape, const Model& model, const PreparedQuery& pq, const HeadBatch& batch) {
  HeadVars out;
  out.encoded = triat_forward(tape, pq.topology, pq.features, model.config().encoder, model.encoder());
  out.pooled = pool_states(tape, out.encoded.x, batch.states, model.config().encoder, model.encoder());
  out.card = mlp_single(tape, model.heads().card, out.pooled);
  out.mc = mlp_single(tape, model.heads().mc, out.pooled);
  if (!batch.transitions.empty()) {
    std::vector<std::size_t> from, to;
    for (auto [a, b] : batch.transitions) {
      if (a >= batch.states.size() || b >= batch.states.size()) throw std::out_of_range("transition references unknown state");
      from.push_back(a);
      to.push_back(b);
    }
    out.cost = mlp_pair(tape, model.heads().cost, out.pooled, from, to);
  }
  return out;
}

double from_log_space(double z) {
  if (!std::isfinite(z)) throw NumericError("non-finite head output");
  return std::max(std::expm1(z), 0.0);
}

Predictor::Predictor(const Model& model, const LabeledGraph& q, const CandidateContext& ctx)
    : model_(model), n_(q.vertex_count()) {
  auto pq = prepare_query(model, q, ctx);
  Tape tape(&model.params());
  x_ = tape.value(triat_forward(tape, pq.topology, pq.features, model.config().encoder, model.encoder()).x);
}

std::vector<double> Predictor::log_card(std::span<const VertexSet> states) {
  if (states.empty()) return {};
  Tape tape(&model_.params());
  Var p = pool_states(tape, tape.constant(x_), states, model_.config().encoder, model_.encoder());
  invocations_ += states.size();
  return tape.value(mlp_single(tape, model_.heads().card, p)).values();
}

std::vector<double> Predictor::log_min_cost(std::span<const VertexSet> states) {
  std::vector<double> out(states.size(), 0.0);
  std::vector<VertexSet> nonempty;
  for (VertexSet s : states)
    if (!s.empty()) nonempty.push_back(s);
  if (nonempty.empty()) return out;
  Tape tape(&model_.params());
  Var p = pool_states(tape, tape.constant(x_), nonempty, model_.config().encoder, model_.encoder());
  invocations_ += nonempty.size();
  const auto& z = tape.value(mlp_single(tape, model_.heads().mc, p));
  std::size_t k = 0;
  for (std::size_t i = 0; i < states.size(); ++i)
    if (!states[i].empty()) out[i] = z(k++, 0);
  return out;
}

std::vector<double> Predictor::log_cost(std::span<const std::pair<VertexSet, VertexSet>> transitions) {
  if (transitions.empty()) return {};
  std::vector<VertexSet> states;
  std::map<VertexSet, std::size_t> index;
  std::vector<std::size_t> from, to;
  auto slot = [&](VertexSet s) {
    auto [it, fresh] = index.emplace(s, states.size());
    if (fresh) states.push_back(s);
    return it->second;
  };
  for (auto [a, b] : transitions) {
    if (!(a <= b) || b.size() != a.size() + 1) throw ContractError("transition must add exactly one vertex");
    from.push_back(slot(a));
    to.push_back(slot(b));
  }
  Tape tape(&model_.params());
  Var p = pool_states(tape, tape.constant(x_), states, model_.config().encoder, model_.encoder());
  invocations_ += transitions.size();
  return tape.value(mlp_pair(tape, model_.heads().cost, p, from, to)).values();
}

std::vector<double> Predictor::card(std::span<const VertexSet> states) {
  auto z = log_card(states);
  for (auto& v : z) v = from_log_space(v);
  return z;
}

std::vector<double> Predictor::min_cost(std::span<const VertexSet> states) {
  auto z = log_min_cost(states);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = states[i].empty() ? 0.0 : from_log_space(z[i]);
  return z;
}

std::vector<double> Predictor::cost(std::span<const std::pair<VertexSet, VertexSet>> transitions) {
  auto z = log_cost(transitions);
  for (auto& v : z) v = from_log_space(v);
  return z;
}

double gcbo_cost(double card_q1, const LabeledGraph& q, const CandidateContext& ctx, VertexSet from, VertexId add) {
  if (add >= q.vertex_count() || from.contains(add)) throw ContractError("added vertex must be new and inside the query");
  if (card_q1 == 0.0) return 0.0;
  std::optional<double> best;
  from.for_each([&](VertexId u) {
    if (!q.has_edge(u, add)) return;
    const auto cu = ctx.candidate_count(u);
    const double ratio = cu == 0 ? 0.0 : static_cast<double>(ctx.edge_count(u, add)) / static_cast<double>(cu);
    if (!best || ratio < *best) best = ratio;
  });
  if (!best) throw ContractError("added vertex has no neighbor in the matched subquery");
  return card_q1 * *best;
}

double q_loss(double pred, double truth) {
  if (pred < 0 || truth < 0) throw std::invalid_argument("q_loss takes non-negative inputs");
  const double d = std::log1p(pred) - std::log1p(truth);
  return d * d;
}

double constraint_loss(std::span<const double> step_logs, double mc_log) {
  if (step_logs.empty()) return 0.0;
  const double gap = std::max(0.0, *std::min_element(step_logs.begin(), step_logs.end()) - mc_log);
  return gap * gap;
}

double q_error(double pred, double truth) {
  if (pred < 0 || truth < 0) throw std::invalid_argument("q_error takes non-negative inputs");
  const double r = (1.0 + pred) / (1.0 + truth);
  return std::max(r, 1.0 / r);
}

void TrainConfig::validate() const {
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
  if (!(lr_factor > 0)) throw std::invalid_argument("learning rate factor must be positive");
  for (double w : {weights.card, weights.cost, weights.mc})
    if (w < 0 || w > 1) throw std::invalid_argument("loss weights must lie in [0, 1]");
  if (weights.constraint < 0) throw std::invalid_argument("constraint weight must be non-negative");
  if (!(grad_clip >= 0)) throw std::invalid_argument("gradient clip must be non-negative");
}

bool TrainingQuery::full() const {
  return std::any_of(samples.begin(), samples.end(), [](const TrainingSample& s) { return s.exploration == Exploration::Full; });
}

QueryLoss query_loss(Tape& tape, const Model& model, const PreparedQuery& pq, std::span<const TrainingSample> samples,
                     bool full, const LossWeights& w) {
  HeadBatch batch;
  std::map<VertexSet, std::size_t> index;
  auto slot = [&](VertexSet s) {
    auto [it, fresh] = index.emplace(s, batch.states.size());
    if (fresh) batch.states.push_back(s);
    return it->second;
  };
  std::vector<std::size_t> card_rows, mc_rows, con_rows, con_seg;
  std::vector<double> card_t, mc_t, cost_t;
  for (const auto& smp : samples) {
    const std::size_t row = slot(smp.state);
    if (smp.state.empty()) continue;
    if (smp.cardinality) {
      card_rows.push_back(row);
      card_t.push_back(std::log1p(static_cast<double>(*smp.cardinality)));
    }
    if (full && smp.min_cost) {
      mc_rows.push_back(row);
      mc_t.push_back(std::log1p(static_cast<double>(*smp.min_cost)));
    }
    if (!smp.in_transitions.empty()) con_rows.push_back(row);
    for (auto [pred, cost] : smp.in_transitions) {
      batch.transitions.emplace_back(slot(pred), row);
      cost_t.push_back(std::log1p(static_cast<double>(cost)));
      con_seg.push_back(con_rows.size() - 1);
    }
  }

  HeadVars hv = forward_heads(tape, model, pq, batch);
  QueryLoss out;
  std::vector<Var> terms;
  auto mse = [&](Var z, const std::vector<std::size_t>& rows, std::vector<double> targets) {
    Var pred = tape.gather_rows(z, rows);
    return tape.mean(tape.square(tape.sub(pred, tape.constant(Tensor::column(std::move(targets))))));
  };
  if (!card_rows.empty()) {
    Var l = mse(hv.card, card_rows, card_t);
    out.card = tape.value(l).item();
    terms.push_back(tape.scale(l, w.card));
  }
  if (!mc_rows.empty()) {
    Var l = mse(hv.mc, mc_rows, mc_t);
    out.mc = tape.value(l).item();
    terms.push_back(tape.scale(l, w.mc));
  }
  if (hv.cost) {
    std::vector<std::size_t> all(batch.transitions.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Var l = mse(*hv.cost, all, cost_t);
    out.cost = tape.value(l).item();
    terms.push_back(tape.scale(l, w.cost));

    Var step_min = tape.segment_min(*hv.cost, con_seg, con_rows.size());
    Var gap = tape.relu(tape.sub(step_min, tape.gather_rows(hv.mc, con_rows)));
    Var c = tape.mean(tape.square(gap));
    out.constraint = tape.value(c).item();
    terms.push_back(tape.scale(c, w.constraint));
  }
  if (terms.empty()) {
    out.total = tape.constant(Tensor::scalar(0.0));
    return out;
  }
  out.total = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) out.total = tape.add(out.total, terms[i]);
  return out;
}

namespace {

void clip_gradients(ParamStore& params, double max_norm) {
  double sq = 0;
  for (const auto& p : params)
    for (double g : p.grad.values()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double f = max_norm / norm;
  for (auto& p : params)
    for (double& g : p.grad.values()) g *= f;
}

}  // namespace

std::vector<EpochLoss> train(Model& model, std::span<const TrainingQuery> queries, const TrainConfig& cfg,
                             const EpochCallback& on_epoch) {
  cfg.validate();
  if (queries.empty()) throw std::invalid_argument("training needs at least one query");
  std::vector<PreparedQuery> prepared;
  std::vector<bool> full;
  for (const auto& tq : queries) {
    if (tq.samples.empty()) throw std::invalid_argument("query " + tq.id + " has no samples");
    prepared.push_back(prepare_query(model, tq.graph, tq.ctx));
    full.push_back(tq.full());
  }

  std::mt19937_64 rng(cfg.seed);
  AdamW opt(cfg.adamw);
  std::vector<EpochLoss> log;
  std::vector<std::size_t> order(queries.size());
  std::vector<TrainingSample> subset;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochLoss e;
    e.epoch = epoch;
    e.lr = scheduled_learning_rate(cfg.learning_rate, cfg.lr_factor, cfg.lr_period, epoch);
    opt.set_learning_rate(e.lr);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t qi : order) {
      std::span<const TrainingSample> samples = queries[qi].samples;
      if (cfg.batch_size && samples.size() > cfg.batch_size) {
        std::vector<std::size_t> pick(samples.size());
        for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
        std::shuffle(pick.begin(), pick.end(), rng);
        pick.resize(cfg.batch_size);
        std::sort(pick.begin(), pick.end());
        subset.clear();
        for (auto i : pick) subset.push_back(samples[i]);
        samples = subset;
      }
      model.params().zero_grad();
      Tape tape(&model.params());
      QueryLoss l = query_loss(tape, model, prepared[qi], samples, full[qi], cfg.weights);
      tape.backward(l.total);
      if (cfg.grad_clip > 0) clip_gradients(model.params(), cfg.grad_clip);
      opt.step(model.params());
      e.card += l.card;
      e.cost += l.cost;
      e.mc += l.mc;
      e.constraint += l.constraint;
    }
    const double nq = static_cast<double>(queries.size());
    e.card /= nq;
    e.cost /= nq;
    e.mc /= nq;
    e.constraint /= nq;
    log.push_back(e);
    if (on_epoch) on_epoch(e);
  }
  return log;
}

std::string loss_log_csv(std::span<const EpochLoss> log) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,card_loss,cost_loss,mc_loss,constraint_loss,lr\n";
  for (const auto& e : log)
    out << e.epoch << ',' << e.card << ',' << e.cost << ',' << e.mc << ',' << e.constraint << ',' << e.lr << '\n';
  return out.str();
}

}  // namespace neuso
