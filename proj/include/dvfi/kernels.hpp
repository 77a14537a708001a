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
#include <span>

namespace dvfi::kernels {

// Dense per-pixel kernels shared by the D-map estimator and the metrics.
// Tensors are channel-major (C x H x W). The default implementations are
// OpenMP-parallel over independent output rows; each output element is
// computed by a single thread in a fixed order, so results do not depend on
// the thread count. `serial::` holds straightforward reference versions used
// by the tests and the benchmark.

struct ConvShape {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t input_size() const { return in_channels * height * width; }
  std::size_t output_size() const { return out_channels * height * width; }
  std::size_t weight_size() const { return out_channels * in_channels * 9; }
};

/// 3x3 convolution, stride 1, zero padding ("same" output size).
/// weights: out x in x 3 x 3, bias: out. Overwrites `out`.
void conv3x3_forward(const ConvShape& s, std::span<const double> in,
                     std::span<const double> weights, std::span<const double> bias,
                     std::span<double> out);

/// Accumulates dL/dinput into grad_in.
void conv3x3_backward_input(const ConvShape& s, std::span<const double> grad_out,
                            std::span<const double> weights, std::span<double> grad_in);

/// Accumulates dL/dweights and dL/dbias.
void conv3x3_backward_params(const ConvShape& s, std::span<const double> in,
                             std::span<const double> grad_out, std::span<double> grad_weights,
                             std::span<double> grad_bias);

/// Valid-region 2-D filtering of one H x W plane with the separable kernel
/// k (x) k. Output is (H-n+1) x (W-n+1) for a kernel of length n.
void separable_filter_valid(std::span<const double> in, std::size_t height, std::size_t width,
                            std::span<const double> kernel, std::span<double> out);

void set_num_threads(int n);
int num_threads();

namespace serial {

void conv3x3_forward(const ConvShape& s, std::span<const double> in,
                     std::span<const double> weights, std::span<const double> bias,
                     std::span<double> out);
void conv3x3_backward_input(const ConvShape& s, std::span<const double> grad_out,
                            std::span<const double> weights, std::span<double> grad_in);
void conv3x3_backward_params(const ConvShape& s, std::span<const double> in,
                             std::span<const double> grad_out, std::span<double> grad_weights,
                             std::span<double> grad_bias);
/// Direct n x n window sum (no separation).
void separable_filter_valid(std::span<const double> in, std::size_t height, std::size_t width,
                            std::span<const double> kernel, std::span<double> out);

}  // namespace serial
}  // namespace dvfi::kernels
