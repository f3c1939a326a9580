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

#include "config.hpp"

#include <initializer_list>
#include <set>

namespace neuso {

namespace {

using nlohmann::json;

// Reads the keys of one section, remembering which ones were consumed.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("section '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("'" + name_ + "." + key + "' has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + name_ + "." + it.key() + "'");
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_budget(Section& s, ExecutionBudget& b) {
  // A zero or negative limit is rejected by validate(); null removes a limit.
  auto limit = [&](const char* key, std::optional<std::uint64_t>& out) {
    json v;
    s.get(key, v);
    if (!s.has(key)) return;
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number_integer() && v.get<std::int64_t>() > 0) {
      out = v.get<std::uint64_t>();
    } else {
      throw ConfigError(std::string("budget limit '") + key + "' must be a positive integer or null");
    }
  };
  limit("max_probes", b.max_probes);
  limit("max_matches", b.max_matches);
  json secs;
  s.get("max_seconds", secs);
  if (s.has("max_seconds")) {
    if (secs.is_null()) {
      b.max_elapsed.reset();
    } else if (secs.is_number() && secs.get<double>() > 0) {
      b.max_elapsed = std::chrono::duration<double>(secs.get<double>());
    } else {
      throw ConfigError("budget limit 'max_seconds' must be positive or null");
    }
  }
}

template <class F>
void section(const json& doc, const char* name, F&& f) {
  auto it = doc.find(name);
  if (it == doc.end()) return;
  Section s(*it, name);
  f(s);
  s.finish();
}

}  // namespace

nlohmann::ordered_json budget_json(const ExecutionBudget& b) {
  nlohmann::ordered_json j;
  j["max_probes"] = b.max_probes ? nlohmann::ordered_json(*b.max_probes) : nullptr;
  j["max_matches"] = b.max_matches ? nlohmann::ordered_json(*b.max_matches) : nullptr;
  j["max_seconds"] = b.max_elapsed ? nlohmann::ordered_json(b.max_elapsed->count()) : nullptr;
  return j;
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.graph.seed = seed;
  cfg.workload.seed = seed;
  cfg.model.seed = seed;
  cfg.train.seed = seed;
}

RunConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  auto ver = doc.find("schema_version");
  if (ver == doc.end()) throw ConfigError("config lacks schema_version");
  if (!ver->is_number_integer() || ver->get<int>() != kConfigSchema)
    throw SchemaError("unsupported config schema_version " + ver->dump());

  RunConfig cfg;
  Section top(doc, "config");
  int schema = 0;
  top.get("schema_version", schema);
  if (doc.contains("seed")) {
    std::uint64_t seed = 0;
    top.get("seed", seed);
    override_seed(cfg, seed);
  }
  for (const char* name : {"graph", "workload", "collect", "model", "train", "bench"}) {
    json ignored;
    top.get(name, ignored);
  }
  top.finish();

  try {
    section(doc, "graph", [&](Section& s) {
      s.get("vertices", cfg.graph.vertices);
      s.get("avg_degree", cfg.graph.avg_degree);
      s.get("labels", cfg.graph.labels);
      s.get("skew", cfg.graph.skew);
      s.get("triad_probability", cfg.graph.triad_probability);
      s.get("seed", cfg.graph.seed);
    });
    section(doc, "workload", [&](Section& s) {
      s.get("sizes", cfg.workload.sizes);
      s.get("queries_per_size", cfg.workload.queries_per_size);
      s.get("dense_fraction", cfg.workload.dense_fraction);
      s.get("train_fraction", cfg.workload.train_fraction);
      s.get("seed", cfg.workload.seed);
    });
    cfg.workload.validate();
    section(doc, "collect", [&](Section& s) {
      read_budget(s, cfg.collect.budget);
      s.get("state_limit", cfg.collect.state_limit);
    });
    cfg.collect.budget.validate();
    if (cfg.collect.state_limit == 0) throw ConfigError("collect.state_limit must be positive");
    section(doc, "model", [&](Section& s) {
      s.get("d_label", cfg.model.encoder.d_label);
      s.get("layer_widths", cfg.model.encoder.layer_widths);
      s.get("heads", cfg.model.encoder.heads);
      s.get("leaky_slope", cfg.model.encoder.leaky_slope);
      s.get("triangles", cfg.model.encoder.triangles);
      s.get("pool_softmax", cfg.model.encoder.pool_softmax);
      s.get("hidden", cfg.model.hidden);
      s.get("seed", cfg.model.seed);
    });
    cfg.model.validate();
    section(doc, "train", [&](Section& s) {
      s.get("epochs", cfg.train.epochs);
      s.get("learning_rate", cfg.train.learning_rate);
      s.get("lr_factor", cfg.train.lr_factor);
      s.get("lr_period", cfg.train.lr_period);
      s.get("batch_size", cfg.train.batch_size);
      s.get("grad_clip", cfg.train.grad_clip);
      s.get("weight_decay", cfg.train.adamw.weight_decay);
      s.get("seed", cfg.train.seed);
      if (s.has("loss_weights")) {
        json w;
        s.get("loss_weights", w);
        Section ws(w, "train.loss_weights");
        ws.get("card", cfg.train.weights.card);
        ws.get("cost", cfg.train.weights.cost);
        ws.get("mc", cfg.train.weights.mc);
        ws.get("constraint", cfg.train.weights.constraint);
        ws.finish();
      }
    });
    cfg.train.validate();
    section(doc, "bench", [&](Section& s) {
      s.get("planners", cfg.bench.planners);
      s.get("baseline", cfg.bench.baseline);
      s.get("timing", cfg.bench.timing);
      if (s.has("run_budget")) {
        json b;
        s.get("run_budget", b);
        Section bs(b, "bench.run_budget");
        read_budget(bs, cfg.bench.run_budget);
        bs.finish();
      }
      if (s.has("plan_budget")) {
        json b;
        s.get("plan_budget", b);
        Section bs(b, "bench.plan_budget");
        read_budget(bs, cfg.bench.plan_budget);
        bs.finish();
      }
    });
    cfg.bench.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace neuso
