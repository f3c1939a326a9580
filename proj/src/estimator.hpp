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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccg.hpp"
#include "encoder.hpp"
#include "json.hpp"
#include "optim.hpp"

namespace neuso {

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t hidden = 64;
  std::uint64_t seed = 7;

  void validate() const;
};

/// in -> hidden -> hidden -> 1 with ReLU. The cost head splits its first
/// layer by input half so it can be applied per transition cheaply.
struct MlpWeights {
  std::size_t w0 = 0, w0_second = 0, b0 = 0, w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};

struct HeadParams {
  MlpWeights card, cost, mc;
};

/// Encoder, label table and heads, all parameters in one store.
class Model {
 public:
  static Model create(const ModelConfig& cfg, LabelEmbeddings labels);

  const ModelConfig& config() const { return config_; }
  const LabelEmbeddings& labels() const { return labels_; }
  const EncoderParams& encoder() const { return encoder_; }
  const HeadParams& heads() const { return heads_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  /// Checkpoint: schema_version, seed, hyperparameters, label table and
  /// parameters. `extra` entries are stored under "metadata".
  nlohmann::ordered_json to_json(const nlohmann::ordered_json& extra = nullptr) const;
  static Model from_json(const nlohmann::json& j);
  void save(const std::string& path, const nlohmann::ordered_json& extra = nullptr) const;
  static Model load(const std::string& path);

 private:
  ModelConfig config_;
  LabelEmbeddings labels_;
  ParamStore params_;
  EncoderParams encoder_;
  HeadParams heads_;
};

/// Query-specific inputs shared by every forward pass on that query.
struct PreparedQuery {
  QueryTopology topology;
  InitialFeatures features;
};

PreparedQuery prepare_query(const Model& model, const LabeledGraph& q, const CandidateContext& ctx);

/// Log-space head outputs of one forward pass. Transitions index into states.
struct HeadBatch {
  std::vector<VertexSet> states;
  std::vector<std::pair<std::size_t, std::size_t>> transitions;
};

struct HeadVars {
  EncodedQuery encoded;
  Var pooled;
  Var card;  // states x 1
  Var mc;    // states x 1
  std::optional<Var> cost;  // transitions x 1, absent without transitions
};

HeadVars forward_heads(Tape& tape, const Model& model, const PreparedQuery& pq, const HeadBatch& batch);

/// exp(z) - 1 floored at 0.
double from_log_space(double z);

/// Inference over one query: a single encoder pass, then heads on demand.
/// Every state or transition row scored by a head counts as one invocation;
/// the empty state's min cost is 0 without a head call.
class Predictor {
 public:
  Predictor(const Model& model, const LabeledGraph& q, const CandidateContext& ctx);

  std::vector<double> card(std::span<const VertexSet> states);
  std::vector<double> min_cost(std::span<const VertexSet> states);
  std::vector<double> cost(std::span<const std::pair<VertexSet, VertexSet>> transitions);
  /// Same as above but in log space.
  std::vector<double> log_card(std::span<const VertexSet> states);
  std::vector<double> log_min_cost(std::span<const VertexSet> states);
  std::vector<double> log_cost(std::span<const std::pair<VertexSet, VertexSet>> transitions);

  std::size_t invocations() const { return invocations_; }
  std::size_t query_size() const { return n_; }

 private:
  Tensor pooled(std::span<const VertexSet> states);
  Tensor mlp(const MlpWeights& w, const Tensor& input_a, const Tensor* input_b);

  const Model& model_;
  std::size_t n_;
  Tensor x_;
  std::size_t invocations_ = 0;
};

/// card(q1) * min over already-matched neighbors u of |C(u, add)| / |C(u)|.
double gcbo_cost(double card_q1, const LabeledGraph& q, const CandidateContext& ctx, VertexSet from, VertexId add);

/// (ln(1 + pred) - ln(1 + truth))^2
double q_loss(double pred, double truth);
/// max(0, min(step_logs) - mc_log)^2; 0 for an empty list.
double constraint_loss(std::span<const double> step_logs, double mc_log);
/// max over both directions of (1 + pred) / (1 + truth).
double q_error(double pred, double truth);

struct LossWeights {
  double card = 0.4;
  double cost = 0.3;
  double mc = 0.3;
  double constraint = 1.0;
};

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.002;
  double lr_factor = 0.8;
  std::size_t lr_period = 20;
  /// States sampled per query and optimizer step; 0 keeps every state.
  std::size_t batch_size = 0;
  /// Global gradient-norm ceiling per step; 0 disables clipping.
  double grad_clip = 0;
  std::uint64_t seed = 7;
  LossWeights weights;
  AdamWConfig adamw;

  void validate() const;
};

struct TrainingQuery {
  std::string id;
  LabeledGraph graph;
  CandidateContext ctx;
  std::vector<TrainingSample> samples;

  bool full() const;
};

struct QueryLoss {
  Var total;
  double card = 0, cost = 0, mc = 0, constraint = 0;
};

/// Builds the weighted loss of one query on `tape`. Q-losses are means over
/// their targets; min-cost targets only count for Full queries; the
/// constraint term is the mean over nonempty states with known
/// in-transitions.
QueryLoss query_loss(Tape& tape, const Model& model, const PreparedQuery& pq, std::span<const TrainingSample> samples,
                     bool full, const LossWeights& w);

struct EpochLoss {
  std::size_t epoch = 0;
  double card = 0, cost = 0, mc = 0, constraint = 0, lr = 0;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

/// One query per optimizer step, queries shuffled per epoch with the config
/// seed. Returns per-epoch mean component losses.
std::vector<EpochLoss> train(Model& model, std::span<const TrainingQuery> queries, const TrainConfig& cfg,
                             const EpochCallback& on_epoch = nullptr);

std::string loss_log_csv(std::span<const EpochLoss> log);

}  // namespace neuso
