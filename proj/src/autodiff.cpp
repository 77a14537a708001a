/**
 * Copyright 2026 The dvfi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "dvfi/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "dvfi/blend.hpp"
#include "dvfi/error.hpp"
#include "dvfi/kernels.hpp"

namespace dvfi::ad {
namespace {

using Node = Tensor::Node;

std::size_t product(const Tensor::Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

std::shared_ptr<Node> make_node(Tensor::Shape shape, std::vector<double> values,
                                bool requires_grad) {
  if (values.size() != product(shape)) throw DimensionError("tensor values do not match shape");
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->values = std::move(values);
  n->requires_grad = requires_grad;
  if (requires_grad) n->grad.assign(n->values.size(), 0.0);
  return n;
}

// Result node of an op: tracks gradients iff any parent does.
std::shared_ptr<Node> make_result(Tensor::Shape shape, std::vector<double> values,
                                  std::initializer_list<const Tensor*> parents) {
  bool any = false;
  for (const auto* p : parents) any = any || p->requires_grad();
  auto n = make_node(std::move(shape), std::move(values), any);
  if (any) {
    for (const auto* p : parents) n->parents.push_back(p->node_ptr());
  }
  return n;
}

void topo_visit(Node* n, std::unordered_set<Node*>& seen, std::vector<Node*>& order) {
  if (!n->requires_grad || !seen.insert(n).second) return;
  for (const auto& p : n->parents) topo_visit(p.get(), seen, order);
  order.push_back(n);
}

constexpr double kSigmoidLow = std::numeric_limits<double>::denorm_min();
const double kSigmoidHigh = std::nextafter(1.0, 0.0);

}  // namespace

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  return Tensor(make_node(std::move(shape), std::move(values), false));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  return Tensor(make_node(std::move(shape), std::move(values), true));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = product(shape);
  return Tensor(make_node(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

const Tensor::Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::numel() const { return node_->values.size(); }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
std::span<const double> Tensor::values() const { return node_->values; }
std::span<double> Tensor::mutable_values() { return node_->values; }
std::span<const double> Tensor::grad() const { return node_->grad; }
std::span<double> Tensor::mutable_grad() { return node_->grad; }

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on a tensor with more than one element");
  return node_->values[0];
}

void Tensor::backward() const {
  if (numel() != 1) throw DimensionError("backward() needs a scalar tensor");
  if (!node_->requires_grad) return;
  std::unordered_set<Node*> seen;
  std::vector<Node*> order;
  topo_visit(node_.get(), seen, order);
  // Intermediate gradients start from zero on every call; leaves keep
  // accumulating.
  for (Node* n : order) {
    if (n->backward_fn) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
  node_->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

Tensor conv3x3(const Tensor& x, const Tensor& w, const Tensor& b) {
  const auto& xs = x.shape();
  const auto& ws = w.shape();
  if (xs.size() != 3 || ws.size() != 4 || ws[1] != xs[0] || ws[2] != 3 || ws[3] != 3 ||
      b.numel() != ws[0]) {
    throw DimensionError("conv3x3: incompatible shapes");
  }
  const kernels::ConvShape cs{xs[0], ws[0], xs[1], xs[2]};
  std::vector<double> out(cs.output_size());
  kernels::conv3x3_forward(cs, x.values(), w.values(), b.values(), out);
  auto n = make_result({cs.out_channels, cs.height, cs.width}, std::move(out), {&x, &w, &b});
  if (n->requires_grad) {
    n->backward_fn = [cs](Node& self) {
      Node& xn = *self.parents[0];
      Node& wn = *self.parents[1];
      Node& bn = *self.parents[2];
      if (xn.requires_grad) kernels::conv3x3_backward_input(cs, self.grad, wn.values, xn.grad);
      if (wn.requires_grad || bn.requires_grad) {
        std::vector<double> gw, gb;
        std::span<double> gws = wn.grad, gbs = bn.grad;
        if (!wn.requires_grad) {
          gw.assign(cs.weight_size(), 0.0);
          gws = gw;
        }
        if (!bn.requires_grad) {
          gb.assign(cs.out_channels, 0.0);
          gbs = gb;
        }
        kernels::conv3x3_backward_params(cs, xn.values, self.grad, gws, gbs);
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor leaky_relu(const Tensor& x, double slope) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v = v > 0.0 ? v : slope * v;
  auto n = make_result(x.shape(), std::move(out), {&x});
  if (n->requires_grad) {
    n->backward_fn = [slope](Node& self) {
      Node& xn = *self.parents[0];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        xn.grad[i] += self.grad[i] * (xn.values[i] > 0.0 ? 1.0 : slope);
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.numel());
  const auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-xv[i]));
    out[i] = std::clamp(s, kSigmoidLow, kSigmoidHigh);
  }
  auto n = make_result(x.shape(), std::move(out), {&x});
  if (n->requires_grad) {
    n->backward_fn = [](Node& self) {
      Node& xn = *self.parents[0];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        const double s = self.values[i];
        xn.grad[i] += self.grad[i] * s * (1.0 - s);
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor blend(const Tensor& continuous, const Tensor& previous, const Tensor& d) {
  const auto& cs = continuous.shape();
  if (cs.size() != 3 || previous.shape() != cs || d.shape().size() != 3 || d.shape()[0] != 1 ||
      d.shape()[1] != cs[1] || d.shape()[2] != cs[2]) {
    throw DimensionError("blend: incompatible shapes");
  }
  const std::size_t plane = cs[1] * cs[2];
  const auto c = continuous.values();
  const auto p = previous.values();
  const auto w = d.values();
  std::vector<double> out(c.size());
  for (std::size_t ch = 0; ch < cs[0]; ++ch) {
    for (std::size_t i = 0; i < plane; ++i) {
      const std::size_t k = ch * plane + i;
      const double v = c[k] * (1.0 - w[i]) + p[k] * w[i];
      out[k] = std::clamp(v, std::min(c[k], p[k]), std::max(c[k], p[k]));
    }
  }
  auto n = make_result(cs, std::move(out), {&continuous, &previous, &d});
  if (n->requires_grad) {
    n->backward_fn = [plane, channels = cs[0]](Node& self) {
      Node& cn = *self.parents[0];
      Node& pn = *self.parents[1];
      Node& dn = *self.parents[2];
      for (std::size_t ch = 0; ch < channels; ++ch) {
        for (std::size_t i = 0; i < plane; ++i) {
          const std::size_t k = ch * plane + i;
          const double g = self.grad[k];
          const double w = dn.values[i];
          if (cn.requires_grad) cn.grad[k] += g * (1.0 - w);
          if (pn.requires_grad) pn.grad[k] += g * w;
          if (dn.requires_grad) dn.grad[i] += g * (pn.values[k] - cn.values[k]);
        }
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor charbonnier_mean(const Tensor& a, const Tensor& b, double eps) {
  if (a.shape() != b.shape()) throw DimensionError("charbonnier_mean: shapes differ");
  const double v = dvfi::charbonnier_mean(a.values(), b.values(), eps);
  auto n = make_result({1}, {v}, {&a});
  if (n->requires_grad) {
    n->parents.push_back(b.node_ptr());
    n->backward_fn = [eps](Node& self) {
      Node& an = *self.parents[0];
      const Node& bn = *self.parents[1];
      dvfi::charbonnier_mean_backward(an.values, bn.values, eps, self.grad[0], an.grad);
    };
  }
  return Tensor(std::move(n));
}

Tensor weighted_sum(const Tensor& a, double wa, const Tensor& b, double wb) {
  if (a.numel() != 1 || b.numel() != 1) throw DimensionError("weighted_sum needs scalars");
  auto n = make_result({1}, {wa * a.item() + wb * b.item()}, {&a, &b});
  if (n->requires_grad) {
    n->backward_fn = [wa, wb](Node& self) {
      Node& an = *self.parents[0];
      Node& bn = *self.parents[1];
      if (an.requires_grad) an.grad[0] += wa * self.grad[0];
      if (bn.requires_grad) bn.grad[0] += wb * self.grad[0];
    };
  }
  return Tensor(std::move(n));
}

}  // namespace dvfi::ad
