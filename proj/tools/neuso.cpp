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

// neuso command-line front end. Everything goes through the C API.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "neuso/neuso.h"

namespace {

class Failure : public std::runtime_error {
 public:
  Failure(neuso_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  neuso_status status;
};

void check(neuso_status s) {
  if (s != NEUSO_OK) throw Failure(s, std::string(neuso_status_name(s)) + ": " + neuso_last_error());
}

struct StringDeleter {
  void operator()(char* s) const { neuso_string_free(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct GraphDeleter {
  void operator()(neuso_graph* g) const { neuso_graph_free(g); }
};
struct WorkloadDeleter {
  void operator()(neuso_workload* w) const { neuso_workload_free(w); }
};
struct ModelDeleter {
  void operator()(neuso_model* m) const { neuso_model_free(m); }
};
using Graph = std::unique_ptr<neuso_graph, GraphDeleter>;
using Workload = std::unique_ptr<neuso_workload, WorkloadDeleter>;
using ModelPtr = std::unique_ptr<neuso_model, ModelDeleter>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure(NEUSO_ERR_IO, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure(NEUSO_ERR_IO, "cannot write " + path);
  out << text;
  if (!out) throw Failure(NEUSO_ERR_IO, "failed writing " + path);
}

Graph load_graph(const std::string& path) {
  neuso_graph* g = nullptr;
  check(neuso_graph_load(path.c_str(), &g));
  return Graph(g);
}

Workload load_workload(const std::string& dir) {
  neuso_workload* w = nullptr;
  check(neuso_workload_load(dir.c_str(), &w));
  return Workload(w);
}

ModelPtr load_model(const std::string& path) {
  neuso_model* m = nullptr;
  check(neuso_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

// Flags shared by every subcommand that reads a configuration document.
struct ConfigFlags {
  std::string path;
  std::optional<std::int64_t> max_probes;
  bool timing = false;

  void add(CLI::App* app, bool budget) {
    app->add_option("--config", path, "JSON configuration with schema_version");
    if (budget) app->add_option("--max-probes", max_probes, "probe budget override");
  }

  // Document text handed to the C API: the file (or defaults) with the
  // NEUSO_SEED and flag overrides applied.
  std::string text(const char* budget_section) const {
    nlohmann::json doc = {{"schema_version", 1}};
    if (!path.empty()) {
      try {
        doc = nlohmann::json::parse(read_file(path));
      } catch (const nlohmann::json::parse_error& e) {
        throw Failure(NEUSO_ERR_PARSE, path + ": " + e.what());
      }
    }
    if (!doc.is_object()) throw Failure(NEUSO_ERR_PARSE, "configuration must be a JSON object");
    if (const char* env = std::getenv("NEUSO_SEED")) {
      char* end = nullptr;
      const unsigned long long seed = std::strtoull(env, &end, 10);
      if (*env == '\0' || *end != '\0') throw Failure(NEUSO_ERR_INVALID_ARGUMENT, "NEUSO_SEED must be an integer");
      doc["seed"] = seed;
      for (const char* s : {"graph", "workload", "model", "train"})
        if (doc.contains(s) && doc[s].is_object()) doc[s].erase("seed");
    }
    if (max_probes) {
      if (*max_probes <= 0) throw Failure(NEUSO_ERR_INVALID_ARGUMENT, "--max-probes must be positive");
      if (std::string(budget_section) == "collect")
        doc["collect"]["max_probes"] = *max_probes;
      else
        doc["bench"]["run_budget"]["max_probes"] = *max_probes;
    }
    if (timing) doc["bench"]["timing"] = true;
    return doc.dump();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuso: subgraph matching with a learned join-order optimizer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", neuso_version());

  // gen
  ConfigFlags gen_cfg;
  std::string gen_graph, gen_workload;
  auto* gen = app.add_subcommand("gen", "generate a data graph and a query workload");
  gen_cfg.add(gen, false);
  gen->add_option("--graph-out", gen_graph, "data graph file")->required();
  gen->add_option("--workload-out", gen_workload, "workload directory (created if missing)")->required();

  // embed
  ConfigFlags emb_cfg;
  std::string emb_graph, emb_out;
  auto* embed = app.add_subcommand("embed", "compute the label-embedding table");
  emb_cfg.add(embed, false);
  embed->add_option("--graph", emb_graph)->required()->check(CLI::ExistingFile);
  embed->add_option("--out", emb_out, "output file, - for stdout")->default_val("-");

  // collect
  ConfigFlags col_cfg;
  std::string col_graph, col_workload, col_split = "all", col_out;
  auto* collect = app.add_subcommand("collect", "measure CCG samples for workload queries");
  col_cfg.add(collect, true);
  collect->add_option("--graph", col_graph)->required()->check(CLI::ExistingFile);
  collect->add_option("--workload", col_workload)->required()->check(CLI::ExistingDirectory);
  collect->add_option("--split", col_split)->check(CLI::IsMember({"train", "test", "all"}));
  collect->add_option("--out", col_out, "JSONL output, - for stdout")->default_val("-");

  // train
  ConfigFlags tr_cfg;
  std::string tr_graph, tr_workload, tr_samples, tr_emb, tr_out, tr_loss;
  auto* trn = app.add_subcommand("train", "fit the estimator on the training split");
  tr_cfg.add(trn, false);
  trn->add_option("--graph", tr_graph)->required()->check(CLI::ExistingFile);
  trn->add_option("--workload", tr_workload)->required()->check(CLI::ExistingDirectory);
  trn->add_option("--samples", tr_samples)->required()->check(CLI::ExistingFile);
  trn->add_option("--embeddings", tr_emb)->check(CLI::ExistingFile);
  trn->add_option("--out", tr_out, "checkpoint path")->required();
  trn->add_option("--loss-log", tr_loss, "per-epoch loss CSV");

  // plan and run share their flags
  struct PlanFlags {
    ConfigFlags cfg;
    std::string graph, query, model, planner = "neuso", out = "-";
  };
  PlanFlags pl, rn;
  auto plan_like = [&](CLI::App* cmd, PlanFlags& f) {
    f.cfg.add(cmd, cmd->get_name() == "run");
    cmd->add_option("--graph", f.graph)->required()->check(CLI::ExistingFile);
    cmd->add_option("--query", f.query)->required()->check(CLI::ExistingFile);
    cmd->add_option("--model", f.model)->check(CLI::ExistingFile);
    cmd->add_option("--planner", f.planner)
        ->check(CLI::IsMember({"neuso", "gcbo", "candidate_size", "backward_edges", "exact"}));
    cmd->add_option("--out", f.out)->default_val("-");
  };
  auto* plan = app.add_subcommand("plan", "print the PlanTrace JSON of one query");
  plan_like(plan, pl);
  auto* run = app.add_subcommand("run", "plan and enumerate one query");
  plan_like(run, rn);
  run->add_flag("--timing", rn.cfg.timing, "include wall time");

  // estimate
  std::string es_graph, es_query, es_model;
  std::uint64_t es_state = 0;
  auto* est = app.add_subcommand("estimate", "predicted cardinality, transition costs and min cost");
  est->add_option("--graph", es_graph)->required()->check(CLI::ExistingFile);
  est->add_option("--query", es_query)->required()->check(CLI::ExistingFile);
  est->add_option("--model", es_model)->required()->check(CLI::ExistingFile);
  est->add_option("--state", es_state, "subquery bitmask, 0 for the whole query");

  // bench
  ConfigFlags b_cfg;
  std::string b_graph, b_workload, b_model, b_samples, b_csv, b_summary;
  auto* bench = app.add_subcommand("bench", "planners x held-out workload report");
  b_cfg.add(bench, true);
  bench->add_option("--graph", b_graph)->required()->check(CLI::ExistingFile);
  bench->add_option("--workload", b_workload)->required()->check(CLI::ExistingDirectory);
  bench->add_option("--model", b_model)->check(CLI::ExistingFile);
  bench->add_option("--test-samples", b_samples, "JSONL of test-split samples for q-errors")
      ->check(CLI::ExistingFile);
  bench->add_option("--csv", b_csv, "per-query report")->required();
  bench->add_option("--summary", b_summary, "aggregate JSON, - for stdout")->default_val("-");
  bench->add_flag("--timing", b_cfg.timing, "include wall time");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const std::string cfg = gen_cfg.text("collect");
      neuso_graph* g = nullptr;
      check(neuso_generate_graph(cfg.c_str(), &g));
      Graph graph(g);
      neuso_workload* w = nullptr;
      check(neuso_generate_workload(graph.get(), cfg.c_str(), &w));
      Workload wl(w);
      check(neuso_graph_save(graph.get(), gen_graph.c_str()));
      std::filesystem::create_directories(gen_workload);
      check(neuso_workload_save(wl.get(), gen_workload.c_str()));
    } else if (*embed) {
      Graph g = load_graph(emb_graph);
      char* out = nullptr;
      check(neuso_embed(g.get(), emb_cfg.text("collect").c_str(), &out));
      CString s(out);
      write_output(emb_out, std::string(s.get()) + "\n");
    } else if (*collect) {
      Graph g = load_graph(col_graph);
      Workload w = load_workload(col_workload);
      char* out = nullptr;
      check(neuso_collect(g.get(), w.get(), col_split.c_str(), col_cfg.text("collect").c_str(), &out));
      CString s(out);
      write_output(col_out, s.get());
    } else if (*trn) {
      Graph g = load_graph(tr_graph);
      Workload w = load_workload(tr_workload);
      const std::string samples = read_file(tr_samples);
      const std::string emb = tr_emb.empty() ? std::string() : read_file(tr_emb);
      neuso_model* m = nullptr;
      char* loss = nullptr;
      check(neuso_train(g.get(), w.get(), samples.c_str(), tr_emb.empty() ? nullptr : emb.c_str(),
                        tr_cfg.text("collect").c_str(), &m, &loss));
      ModelPtr model(m);
      CString loss_csv(loss);
      check(neuso_model_save(model.get(), tr_out.c_str()));
      if (!tr_loss.empty()) write_output(tr_loss, loss_csv.get());
    } else if (*plan || *run) {
      PlanFlags& f = *plan ? pl : rn;
      Graph g = load_graph(f.graph);
      Graph q = load_graph(f.query);
      ModelPtr model = f.model.empty() ? nullptr : load_model(f.model);
      char* out = nullptr;
      const std::string cfg = f.cfg.text("bench");
      if (*plan)
        check(neuso_plan(g.get(), q.get(), model.get(), f.planner.c_str(), cfg.c_str(), &out));
      else
        check(neuso_run(g.get(), q.get(), model.get(), f.planner.c_str(), cfg.c_str(), &out));
      CString s(out);
      write_output(f.out, std::string(s.get()) + "\n");
    } else if (*est) {
      Graph g = load_graph(es_graph);
      Graph q = load_graph(es_query);
      ModelPtr model = load_model(es_model);
      char* out = nullptr;
      check(neuso_estimate(g.get(), q.get(), model.get(), es_state, &out));
      CString s(out);
      std::cout << s.get() << '\n';
    } else if (*bench) {
      Graph g = load_graph(b_graph);
      Workload w = load_workload(b_workload);
      ModelPtr model = b_model.empty() ? nullptr : load_model(b_model);
      const std::string samples = b_samples.empty() ? std::string() : read_file(b_samples);
      char* csv = nullptr;
      char* summary = nullptr;
      check(neuso_bench(g.get(), w.get(), model.get(), b_samples.empty() ? nullptr : samples.c_str(),
                        b_cfg.text("bench").c_str(), &csv, &summary));
      CString c(csv), s(summary);
      write_output(b_csv, c.get());
      write_output(b_summary, s.get());
    }
  } catch (const Failure& e) {
    std::cerr << "neuso: " << e.what() << '\n';
    return 2 + static_cast<int>(e.status);
  } catch (const std::exception& e) {
    std::cerr << "neuso: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
