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
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace dvfi::ad {

/// Minimal reverse-mode differentiation. A Tensor is a shared handle to a
/// graph node; operations on tensors that require gradients record a
/// backward closure, and Tensor::backward() runs them in reverse
/// topological order. Gradients accumulate until zero_grad().
class Tensor {
 public:
  using Shape = std::vector<std::size_t>;

  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor parameter(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const;
  bool requires_grad() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  /// Empty when the tensor does not require gradients.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Value of a single-element tensor.
  double item() const;

  /// Seeds d(this)/d(this) = 1 and back-propagates. Scalar tensors only.
  void backward() const;

  struct Node;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

struct Tensor::Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
};

/// 3x3 "same" convolution: x [C,H,W], w [O,C,3,3], b [O] -> [O,H,W].
Tensor conv3x3(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor leaky_relu(const Tensor& x, double slope);

/// Logistic function. Outputs are kept strictly inside (0,1): where the
/// exact value rounds to 0 or 1 it is nudged to the nearest representable
/// interior value.
Tensor sigmoid(const Tensor& x);

/// continuous [3,H,W], previous [3,H,W], d [1,H,W] ->
/// continuous * (1 - d) + previous * d, with d broadcast over channels.
Tensor blend(const Tensor& continuous, const Tensor& previous, const Tensor& d);

/// Scalar mean of sqrt((a - b)^2 + eps^2). Gradient flows to `a` only.
Tensor charbonnier_mean(const Tensor& a, const Tensor& b, double eps);

/// Scalar wa * a + wb * b for scalar a, b.
Tensor weighted_sum(const Tensor& a, double wa, const Tensor& b, double wb);

}  // namespace dvfi::ad
