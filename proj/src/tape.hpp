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
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace neuso {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Named trainable tensors. Indices are stable for the store's lifetime.
class ParamStore {
 public:
  std::size_t add(const std::string& name, Tensor init);
  /// Uniform on +-sqrt(6 / (rows + cols)).
  std::size_t add_xavier(const std::string& name, std::size_t rows, std::size_t cols, std::mt19937_64& rng);

  std::size_t size() const { return params_.size(); }
  Parameter& at(std::size_t i) { return params_.at(i); }
  const Parameter& at(std::size_t i) const { return params_.at(i); }
  /// Throws std::out_of_range for unknown names.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  void zero_grad();
  std::size_t scalar_count() const;

  std::vector<Parameter>::iterator begin() { return params_.begin(); }
  std::vector<Parameter>::iterator end() { return params_.end(); }
  std::vector<Parameter>::const_iterator begin() const { return params_.begin(); }
  std::vector<Parameter>::const_iterator end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape over Tensor values. Every op checks shapes and rejects
/// non-finite results with NumericError.
class Tape {
 public:
  explicit Tape(ParamStore* params = nullptr) : params_(params), mutable_params_(params) {}
  /// Inference-only tape: backward() into parameters throws.
  explicit Tape(const ParamStore* params) : params_(params) {}

  /// Constant input; receives no gradient.
  Var constant(Tensor value);
  /// Differentiable leaf whose gradient is readable through grad().
  Var leaf(Tensor value);
  /// Parameter from the bound store; backward() adds into its grad.
  Var param(std::size_t index);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  /// Zero tensor if no gradient reached `v`.
  Tensor grad(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  /// a (m x n) plus row vector b (1 x n) on every row.
  Var add_row(Var a, Var b);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var concat_cols(std::span<const Var> parts);
  Var gather_rows(Var a, std::vector<std::size_t> index);
  /// Rows of `a` summed into `segments` output rows by `segment[i]`.
  Var segment_sum(Var a, std::vector<std::size_t> segment, std::size_t segments);
  /// Softmax of a column vector within each segment.
  Var softmax_groups(Var scores, std::vector<std::size_t> segment, std::size_t segments);
  /// Per-segment minimum of a column vector; empty segments yield 0 with no
  /// gradient. Ties route the gradient to the first row.
  Var segment_min(Var scores, std::vector<std::size_t> segment, std::size_t segments);
  Var relu(Var a);
  Var leaky_relu(Var a, double slope);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  /// Row-wise dot products of equal-shape a and b, as a column.
  Var rowdot(Var a, Var b);
  /// Row i of a (m x n) multiplied by w(i, 0).
  Var scale_rows(Var a, Var w);
  Var sum(Var a);
  Var mean(Var a);

  /// Seeds d(loss)=1 and propagates; loss must be 1 x 1.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    std::int64_t param = -1;
    std::function<void(Tape&, std::size_t)> back;
  };

  Var push(Tensor value, bool needs_grad, std::function<void(Tape&, std::size_t)> back);
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }
  Tensor& grad_ref(std::size_t id);
  const Tensor& out_grad(std::size_t id) const { return nodes_[id].grad; }
  void check_var(Var v) const;

  const ParamStore* params_;
  ParamStore* mutable_params_ = nullptr;
  std::vector<Node> nodes_;
};

}  // namespace neuso
