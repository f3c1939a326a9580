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

#include <optional>
#include <stdexcept>
#include <string>

#include "bench.hpp"
#include "json.hpp"

namespace neuso {

inline constexpr int kConfigSchema = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphConfig {
  std::size_t vertices = 10000;
  double avg_degree = 8;
  std::uint32_t labels = 20;
  double skew = 1.0;
  double triad_probability = 0.5;
  std::uint64_t seed = 7;
};

struct CollectConfig {
  ExecutionBudget budget{.max_probes = 1000000ull, .max_matches = 1000000ull, .max_elapsed = {}};
  std::size_t state_limit = kDefaultStateLimit;
};

/// Every tunable of a run. Sections absent from the document keep their
/// defaults; unknown keys are rejected. A top-level "seed" applies to every
/// seeded section that does not set its own.
struct RunConfig {
  GraphConfig graph;
  WorkloadSpec workload;
  CollectConfig collect;
  ModelConfig model;
  TrainConfig train;
  BenchConfig bench;
};

/// Throws ConfigError on a schema_version other than kConfigSchema, unknown
/// keys, mistyped values or failed validation.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
/// `seed` replaces every seed in `cfg`.
void override_seed(RunConfig& cfg, std::uint64_t seed);

nlohmann::ordered_json budget_json(const ExecutionBudget& b);

}  // namespace neuso
