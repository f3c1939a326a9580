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
#include <string>
#include <vector>

#include "json.hpp"
#include "tape.hpp"

namespace neuso {

struct AdamWConfig {
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

/// Decoupled weight decay Adam. Moments are allocated lazily to match the
/// store's parameters.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

  void set_learning_rate(double lr) { cfg_.learning_rate = lr; }
  const AdamWConfig& config() const { return cfg_; }
  std::uint64_t step_count() const { return step_; }

  /// Applies one update from the gradients held in `params`.
  void step(ParamStore& params);

 private:
  AdamWConfig cfg_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// lr * factor^floor(epoch / period)
double scheduled_learning_rate(double base, double factor, std::size_t period, std::size_t epoch);

/// {"shape": [r, c], "values": [...]} per parameter, in store order.
nlohmann::ordered_json params_to_json(const ParamStore& params);
/// Overwrites values of matching names; throws on missing names or shape
/// mismatch.
void params_from_json(const nlohmann::json& j, ParamStore& params);

}  // namespace neuso
