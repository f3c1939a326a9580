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

#include "optim.hpp"

#include <cmath>

namespace neuso {

void AdamW::step(ParamStore& params) {
  if (m_.size() != params.size()) {
    m_.resize(params.size());
    v_.resize(params.size());
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
  const double lr = cfg_.learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.at(i);
    if (!p.grad.all_finite()) throw NumericError("non-finite gradient for parameter " + p.name);
    if (!m_[i].same_shape(p.value)) {
      m_[i] = Tensor(p.value.rows(), p.value.cols());
      v_[i] = Tensor(p.value.rows(), p.value.cols());
    }
    double* w = p.value.data();
    const double* g = p.grad.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      w[k] *= 1.0 - lr * cfg_.weight_decay;
      w[k] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }
}

double scheduled_learning_rate(double base, double factor, std::size_t period, std::size_t epoch) {
  if (period == 0) return base;
  return base * std::pow(factor, static_cast<double>(epoch / period));
}

nlohmann::ordered_json params_to_json(const ParamStore& params) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& p : params) {
    nlohmann::ordered_json e;
    e["shape"] = {p.value.rows(), p.value.cols()};
    e["values"] = p.value.values();
    out[p.name] = std::move(e);
  }
  return out;
}

void params_from_json(const nlohmann::json& j, ParamStore& params) {
  for (auto& p : params) {
    if (!j.contains(p.name)) throw std::runtime_error("checkpoint lacks parameter " + p.name);
    const auto& e = j.at(p.name);
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[0] != p.value.rows() || shape[1] != p.value.cols())
      throw ShapeError("checkpoint shape mismatch for parameter " + p.name);
    Tensor t(shape[0], shape[1], e.at("values").get<std::vector<double>>());
    if (!t.all_finite()) throw NumericError("non-finite checkpoint value for parameter " + p.name);
    p.value = std::move(t);
  }
}

}  // namespace neuso
