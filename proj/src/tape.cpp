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

#include "tape.hpp"

#include <cmath>
#include <limits>

namespace neuso {

std::size_t ParamStore::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  if (!init.all_finite()) throw NumericError("non-finite initial value for parameter " + name);
  Tensor grad(init.rows(), init.cols());
  params_.push_back(Parameter{name, std::move(init), std::move(grad)});
  index_[name] = params_.size() - 1;
  return params_.size() - 1;
}

std::size_t ParamStore::add_xavier(const std::string& name, std::size_t rows, std::size_t cols,
                                   std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(rows, cols);
  for (auto& v : t.values()) v = dist(rng);
  return add(name, std::move(t));
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void Tape::check_var(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("variable does not belong to this tape");
}

Var Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&, std::size_t)> back) {
  if (!value.all_finite()) throw NumericError("non-finite value produced at tape node " + std::to_string(nodes_.size()));
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Tensor& Tape::grad_ref(std::size_t id) {
  auto& n = nodes_[id];
  if (!n.grad.same_shape(n.value)) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  check_var(v);
  const auto& n = nodes_[v.id];
  if (n.grad.same_shape(n.value)) return n.grad;
  return Tensor(n.value.rows(), n.value.cols());
}

Var Tape::constant(Tensor value) { return push(std::move(value), false, nullptr); }

Var Tape::leaf(Tensor value) { return push(std::move(value), true, nullptr); }

Var Tape::param(std::size_t index) {
  if (!params_) throw std::logic_error("tape has no parameter store");
  Var v = push(params_->at(index).value, true, nullptr);
  nodes_[v.id].param = static_cast<std::int64_t>(index);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  check_var(a), check_var(b);
  Tensor out(value(a).rows(), value(b).cols());
  gemm_nn(value(a), value(b), out);
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    if (t.needs(a)) gemm_nt(g, t.value(b), t.grad_ref(a.id));
    if (t.needs(b)) gemm_tn(t.value(a), g, t.grad_ref(b.id));
  });
}

Var Tape::add(Var a, Var b) {
  check_var(a), check_var(b);
  if (!value(a).same_shape(value(b))) throw ShapeError("add of " + value(a).shape_string() + " and " + value(b).shape_string());
  Tensor out = value(a);
  out += value(b);
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    if (t.needs(a)) t.grad_ref(a.id) += g;
    if (t.needs(b)) t.grad_ref(b.id) += g;
  });
}

Var Tape::sub(Var a, Var b) {
  check_var(a), check_var(b);
  if (!value(a).same_shape(value(b))) throw ShapeError("sub of " + value(a).shape_string() + " and " + value(b).shape_string());
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= value(b).data()[i];
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    if (t.needs(a)) t.grad_ref(a.id) += g;
    if (t.needs(b)) {
      Tensor& gb = t.grad_ref(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] -= g.data()[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  check_var(a), check_var(b);
  if (!value(a).same_shape(value(b))) throw ShapeError("mul of " + value(a).shape_string() + " and " + value(b).shape_string());
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= value(b).data()[i];
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    if (t.needs(a)) {
      Tensor& ga = t.grad_ref(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * t.value(b).data()[i];
    }
    if (t.needs(b)) {
      Tensor& gb = t.grad_ref(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i] * t.value(a).data()[i];
    }
  });
}

Var Tape::add_row(Var a, Var b) {
  check_var(a), check_var(b);
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (vb.rows() != 1 || vb.cols() != va.cols())
    throw ShapeError("row broadcast of " + vb.shape_string() + " onto " + va.shape_string());
  Tensor out = va;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += vb(0, j);
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    if (t.needs(a)) t.grad_ref(a.id) += g;
    if (t.needs(b)) {
      Tensor& gb = t.grad_ref(b.id);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
    }
  });
}

Var Tape::scale(Var a, double s) {
  check_var(a);
  Tensor out = value(a);
  for (auto& v : out.values()) v *= s;
  return push(std::move(out), needs(a), [a, s](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    Tensor& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += s * g.data()[i];
  });
}

Var Tape::add_scalar(Var a, double s) {
  check_var(a);
  Tensor out = value(a);
  for (auto& v : out.values()) v += s;
  return push(std::move(out), needs(a), [a](Tape& t, std::size_t self) { t.grad_ref(a.id) += t.out_grad(self); });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const std::size_t rows = value(parts[0]).rows();
  std::size_t cols = 0;
  bool any = false;
  for (Var p : parts) {
    check_var(p);
    if (value(p).rows() != rows) throw ShapeError("concat of tensors with different row counts");
    cols += value(p).cols();
    any = any || needs(p);
  }
  Tensor out(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& v = value(p);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < v.cols(); ++j) out(i, off + j) = v(i, j);
    off += v.cols();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(out), any, [ps](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    std::size_t off = 0;
    for (Var p : ps) {
      const std::size_t c = t.value(p).cols();
      if (t.needs(p)) {
        Tensor& gp = t.grad_ref(p.id);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < c; ++j) gp(i, j) += g(i, off + j);
      }
      off += c;
    }
  });
}

Var Tape::gather_rows(Var a, std::vector<std::size_t> index) {
  check_var(a);
  const Tensor& va = value(a);
  Tensor out(index.size(), va.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= va.rows()) throw ShapeError("gather index out of range");
    std::copy(va.row_ptr(index[i]), va.row_ptr(index[i]) + va.cols(), out.row_ptr(i));
  }
  return push(std::move(out), needs(a), [a, index = std::move(index)](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    Tensor& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < index.size(); ++i) {
      double* dst = ga.row_ptr(index[i]);
      const double* src = g.row_ptr(i);
      for (std::size_t j = 0; j < g.cols(); ++j) dst[j] += src[j];
    }
  });
}

Var Tape::segment_sum(Var a, std::vector<std::size_t> segment, std::size_t segments) {
  check_var(a);
  const Tensor& va = value(a);
  if (segment.size() != va.rows()) throw ShapeError("segment ids do not match row count");
  Tensor out(segments, va.cols());
  for (std::size_t i = 0; i < segment.size(); ++i) {
    if (segment[i] >= segments) throw ShapeError("segment id out of range");
    double* dst = out.row_ptr(segment[i]);
    const double* src = va.row_ptr(i);
    for (std::size_t j = 0; j < va.cols(); ++j) dst[j] += src[j];
  }
  return push(std::move(out), needs(a), [a, segment = std::move(segment)](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    Tensor& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < segment.size(); ++i) {
      const double* src = g.row_ptr(segment[i]);
      double* dst = ga.row_ptr(i);
      for (std::size_t j = 0; j < g.cols(); ++j) dst[j] += src[j];
    }
  });
}

Var Tape::softmax_groups(Var scores, std::vector<std::size_t> segment, std::size_t segments) {
  check_var(scores);
  const Tensor& s = value(scores);
  if (s.cols() != 1 || segment.size() != s.rows()) throw ShapeError("grouped softmax expects a column matching the segment ids");
  std::vector<double> peak(segments, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < segment.size(); ++i) {
    if (segment[i] >= segments) throw ShapeError("segment id out of range");
    peak[segment[i]] = std::max(peak[segment[i]], s(i, 0));
  }
  std::vector<double> total(segments, 0.0);
  Tensor out(s.rows(), 1);
  for (std::size_t i = 0; i < segment.size(); ++i) {
    out(i, 0) = std::exp(s(i, 0) - peak[segment[i]]);
    total[segment[i]] += out(i, 0);
  }
  for (std::size_t i = 0; i < segment.size(); ++i) out(i, 0) /= total[segment[i]];
  return push(std::move(out), needs(scores), [scores, segment = std::move(segment), segments](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    const Tensor& y = t.nodes_[self].value;
    std::vector<double> inner(segments, 0.0);
    for (std::size_t i = 0; i < segment.size(); ++i) inner[segment[i]] += g(i, 0) * y(i, 0);
    Tensor& gs = t.grad_ref(scores.id);
    for (std::size_t i = 0; i < segment.size(); ++i) gs(i, 0) += y(i, 0) * (g(i, 0) - inner[segment[i]]);
  });
}

Var Tape::segment_min(Var scores, std::vector<std::size_t> segment, std::size_t segments) {
  check_var(scores);
  const Tensor& s = value(scores);
  if (s.cols() != 1 || segment.size() != s.rows()) throw ShapeError("segment min expects a column matching the segment ids");
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> arg(segments, kNone);
  for (std::size_t i = 0; i < segment.size(); ++i) {
    if (segment[i] >= segments) throw ShapeError("segment id out of range");
    auto& a = arg[segment[i]];
    if (a == kNone || s(i, 0) < s(a, 0)) a = i;
  }
  Tensor out(segments, 1);
  for (std::size_t k = 0; k < segments; ++k)
    if (arg[k] != kNone) out(k, 0) = s(arg[k], 0);
  return push(std::move(out), needs(scores), [scores, arg = std::move(arg)](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    Tensor& gs = t.grad_ref(scores.id);
    for (std::size_t k = 0; k < arg.size(); ++k)
      if (arg[k] != kNone) gs(arg[k], 0) += g(k, 0);
  });
}

Var Tape::relu(Var a) {
  check_var(a);
  Tensor out = value(a);
  for (auto& v : out.values()) v = v > 0 ? v : 0.0;
  return push(std::move(out), needs(a), [a](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x.data()[i] > 0) ga.data()[i] += g.data()[i];
  });
}

Var Tape::leaky_relu(Var a, double slope) {
  check_var(a);
  Tensor out = value(a);
  for (auto& v : out.values()) v = v > 0 ? v : slope * v;
  return push(std::move(out), needs(a), [a, slope](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += (x.data()[i] > 0 ? 1.0 : slope) * g.data()[i];
  });
}

Var Tape::exp(Var a) {
  check_var(a);
  Tensor out = value(a);
  for (auto& v : out.values()) v = std::exp(v);
  return push(std::move(out), needs(a), [a](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    const Tensor& y = t.nodes_[self].value;
    Tensor& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += y.data()[i] * g.data()[i];
  });
}

Var Tape::log(Var a) {
  check_var(a);
  Tensor out = value(a);
  for (auto& v : out.values()) {
    if (!(v > 0)) throw NumericError("log of non-positive value");
    v = std::log(v);
  }
  return push(std::move(out), needs(a), [a](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] / x.data()[i];
  });
}

Var Tape::square(Var a) {
  check_var(a);
  Tensor out = value(a);
  for (auto& v : out.values()) v = v * v;
  return push(std::move(out), needs(a), [a](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += 2.0 * x.data()[i] * g.data()[i];
  });
}

Var Tape::rowdot(Var a, Var b) {
  check_var(a), check_var(b);
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) throw ShapeError("rowdot of " + va.shape_string() + " and " + vb.shape_string());
  Tensor out(va.rows(), 1);
  for (std::size_t i = 0; i < va.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < va.cols(); ++j) acc += va(i, j) * vb(i, j);
    out(i, 0) = acc;
  }
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    if (t.needs(a)) {
      Tensor& ga = t.grad_ref(a.id);
      for (std::size_t i = 0; i < va.rows(); ++i)
        for (std::size_t j = 0; j < va.cols(); ++j) ga(i, j) += g(i, 0) * vb(i, j);
    }
    if (t.needs(b)) {
      Tensor& gb = t.grad_ref(b.id);
      for (std::size_t i = 0; i < va.rows(); ++i)
        for (std::size_t j = 0; j < va.cols(); ++j) gb(i, j) += g(i, 0) * va(i, j);
    }
  });
}

Var Tape::scale_rows(Var a, Var w) {
  check_var(a), check_var(w);
  const Tensor& va = value(a);
  const Tensor& vw = value(w);
  if (vw.cols() != 1 || vw.rows() != va.rows())
    throw ShapeError("row scaling of " + va.shape_string() + " by " + vw.shape_string());
  Tensor out = va;
  for (std::size_t i = 0; i < va.rows(); ++i)
    for (std::size_t j = 0; j < va.cols(); ++j) out(i, j) *= vw(i, 0);
  return push(std::move(out), needs(a) || needs(w), [a, w](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    const Tensor& va = t.value(a);
    const Tensor& vw = t.value(w);
    if (t.needs(a)) {
      Tensor& ga = t.grad_ref(a.id);
      for (std::size_t i = 0; i < va.rows(); ++i)
        for (std::size_t j = 0; j < va.cols(); ++j) ga(i, j) += g(i, j) * vw(i, 0);
    }
    if (t.needs(w)) {
      Tensor& gw = t.grad_ref(w.id);
      for (std::size_t i = 0; i < va.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < va.cols(); ++j) acc += g(i, j) * va(i, j);
        gw(i, 0) += acc;
      }
    }
  });
}

Var Tape::sum(Var a) {
  check_var(a);
  double acc = 0.0;
  for (double v : value(a).values()) acc += v;
  return push(Tensor::scalar(acc), needs(a), [a](Tape& t, std::size_t self) {
    const double g = t.out_grad(self).item();
    Tensor& ga = t.grad_ref(a.id);
    for (auto& v : ga.values()) v += g;
  });
}

Var Tape::mean(Var a) {
  check_var(a);
  const auto n = value(a).size();
  if (n == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

void Tape::backward(Var loss) {
  check_var(loss);
  if (value(loss).size() != 1) throw ShapeError("backward needs a scalar loss, got " + value(loss).shape_string());
  grad_ref(loss.id).fill(1.0);
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    auto& n = nodes_[id];
    if (!n.needs_grad || !n.grad.same_shape(n.value)) continue;
    if (n.back) n.back(*this, id);
    if (n.param >= 0) {
      if (!mutable_params_) throw std::logic_error("backward through parameters of a read-only tape");
      mutable_params_->at(static_cast<std::size_t>(n.param)).grad += n.grad;
    }
  }
}

}  // namespace neuso
