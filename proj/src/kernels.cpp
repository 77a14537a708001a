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
#include "dvfi/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dvfi::kernels {
namespace {

using std::ptrdiff_t;

inline ptrdiff_t sz(std::size_t v) { return static_cast<ptrdiff_t>(v); }

}  // namespace

void set_num_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void conv3x3_forward(const ConvShape& s, std::span<const double> in,
                     std::span<const double> weights, std::span<const double> bias,
                     std::span<double> out) {
  const ptrdiff_t H = sz(s.height), W = sz(s.width);
  const ptrdiff_t C = sz(s.in_channels), O = sz(s.out_channels);
  const double* x = in.data();
  const double* w = weights.data();
  double* y = out.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (ptrdiff_t o = 0; o < O; ++o) {
    for (ptrdiff_t r = 0; r < H; ++r) {
      double* yrow = y + (o * H + r) * W;
      std::fill(yrow, yrow + W, bias[static_cast<std::size_t>(o)]);
      for (ptrdiff_t c = 0; c < C; ++c) {
        const double* wk = w + (o * C + c) * 9;
        for (ptrdiff_t ky = 0; ky < 3; ++ky) {
          const ptrdiff_t sr = r + ky - 1;
          if (sr < 0 || sr >= H) continue;
          const double* xrow = x + (c * H + sr) * W;
          for (ptrdiff_t kx = 0; kx < 3; ++kx) {
            const double wv = wk[ky * 3 + kx];
            const ptrdiff_t dx = kx - 1;
            const ptrdiff_t c0 = std::max<ptrdiff_t>(0, -dx);
            const ptrdiff_t c1 = std::min<ptrdiff_t>(W, W - dx);
#pragma omp simd
            for (ptrdiff_t q = c0; q < c1; ++q) yrow[q] += wv * xrow[q + dx];
          }
        }
      }
    }
  }
}

void conv3x3_backward_input(const ConvShape& s, std::span<const double> grad_out,
                            std::span<const double> weights, std::span<double> grad_in) {
  const ptrdiff_t H = sz(s.height), W = sz(s.width);
  const ptrdiff_t C = sz(s.in_channels), O = sz(s.out_channels);
  const double* g = grad_out.data();
  const double* w = weights.data();
  double* gi = grad_in.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (ptrdiff_t c = 0; c < C; ++c) {
    for (ptrdiff_t r = 0; r < H; ++r) {
      double* girow = gi + (c * H + r) * W;
      for (ptrdiff_t o = 0; o < O; ++o) {
        const double* wk = w + (o * C + c) * 9;
        for (ptrdiff_t ky = 0; ky < 3; ++ky) {
          // input row r feeds output row r - (ky - 1)
          const ptrdiff_t orow = r - ky + 1;
          if (orow < 0 || orow >= H) continue;
          const double* grow = g + (o * H + orow) * W;
          for (ptrdiff_t kx = 0; kx < 3; ++kx) {
            const double wv = wk[ky * 3 + kx];
            const ptrdiff_t dx = 1 - kx;
            const ptrdiff_t c0 = std::max<ptrdiff_t>(0, -dx);
            const ptrdiff_t c1 = std::min<ptrdiff_t>(W, W - dx);
#pragma omp simd
            for (ptrdiff_t q = c0; q < c1; ++q) girow[q] += wv * grow[q + dx];
          }
        }
      }
    }
  }
}

void conv3x3_backward_params(const ConvShape& s, std::span<const double> in,
                             std::span<const double> grad_out, std::span<double> grad_weights,
                             std::span<double> grad_bias) {
  const ptrdiff_t H = sz(s.height), W = sz(s.width);
  const ptrdiff_t C = sz(s.in_channels), O = sz(s.out_channels);
  const double* x = in.data();
  const double* g = grad_out.data();
  double* gw = grad_weights.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (ptrdiff_t o = 0; o < O; ++o) {
    for (ptrdiff_t c = 0; c < C; ++c) {
      double acc[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
      for (ptrdiff_t r = 0; r < H; ++r) {
        const double* grow = g + (o * H + r) * W;
        for (ptrdiff_t ky = 0; ky < 3; ++ky) {
          const ptrdiff_t sr = r + ky - 1;
          if (sr < 0 || sr >= H) continue;
          const double* xrow = x + (c * H + sr) * W;
          for (ptrdiff_t kx = 0; kx < 3; ++kx) {
            const ptrdiff_t dx = kx - 1;
            const ptrdiff_t c0 = std::max<ptrdiff_t>(0, -dx);
            const ptrdiff_t c1 = std::min<ptrdiff_t>(W, W - dx);
            double sum = 0.0;
#pragma omp simd reduction(+ : sum)
            for (ptrdiff_t q = c0; q < c1; ++q) sum += grow[q] * xrow[q + dx];
            acc[ky * 3 + kx] += sum;
          }
        }
      }
      double* gk = gw + (o * C + c) * 9;
      for (int k = 0; k < 9; ++k) gk[k] += acc[k];
    }
  }
  for (ptrdiff_t o = 0; o < O; ++o) {
    const double* gplane = g + o * H * W;
    double sum = 0.0;
    for (ptrdiff_t i = 0; i < H * W; ++i) sum += gplane[i];
    grad_bias[static_cast<std::size_t>(o)] += sum;
  }
}

void separable_filter_valid(std::span<const double> in, std::size_t height, std::size_t width,
                            std::span<const double> kernel, std::span<double> out) {
  const ptrdiff_t n = sz(kernel.size());
  const ptrdiff_t H = sz(height), W = sz(width);
  const ptrdiff_t OH = H - n + 1, OW = W - n + 1;
  if (OH <= 0 || OW <= 0) return;
  std::vector<double> tmp(static_cast<std::size_t>(H * OW));
  const double* k = kernel.data();
  const double* x = in.data();
#pragma omp parallel for schedule(static)
  for (ptrdiff_t r = 0; r < H; ++r) {
    const double* xrow = x + r * W;
    double* trow = tmp.data() + r * OW;
    for (ptrdiff_t q = 0; q < OW; ++q) {
      double sum = 0.0;
      for (ptrdiff_t i = 0; i < n; ++i) sum += k[i] * xrow[q + i];
      trow[q] = sum;
    }
  }
  double* y = out.data();
#pragma omp parallel for schedule(static)
  for (ptrdiff_t r = 0; r < OH; ++r) {
    double* yrow = y + r * OW;
    std::fill(yrow, yrow + OW, 0.0);
    for (ptrdiff_t i = 0; i < n; ++i) {
      const double* trow = tmp.data() + (r + i) * OW;
      const double ki = k[i];
#pragma omp simd
      for (ptrdiff_t q = 0; q < OW; ++q) yrow[q] += ki * trow[q];
    }
  }
}

namespace serial {

void conv3x3_forward(const ConvShape& s, std::span<const double> in,
                     std::span<const double> weights, std::span<const double> bias,
                     std::span<double> out) {
  const ptrdiff_t H = sz(s.height), W = sz(s.width);
  const ptrdiff_t C = sz(s.in_channels), O = sz(s.out_channels);
  for (ptrdiff_t o = 0; o < O; ++o) {
    for (ptrdiff_t r = 0; r < H; ++r) {
      for (ptrdiff_t q = 0; q < W; ++q) {
        double sum = bias[static_cast<std::size_t>(o)];
        for (ptrdiff_t c = 0; c < C; ++c) {
          for (ptrdiff_t ky = 0; ky < 3; ++ky) {
            for (ptrdiff_t kx = 0; kx < 3; ++kx) {
              const ptrdiff_t sr = r + ky - 1, sc = q + kx - 1;
              if (sr < 0 || sr >= H || sc < 0 || sc >= W) continue;
              sum += weights[static_cast<std::size_t>(((o * C + c) * 3 + ky) * 3 + kx)] *
                     in[static_cast<std::size_t>((c * H + sr) * W + sc)];
            }
          }
        }
        out[static_cast<std::size_t>((o * H + r) * W + q)] = sum;
      }
    }
  }
}

void conv3x3_backward_input(const ConvShape& s, std::span<const double> grad_out,
                            std::span<const double> weights, std::span<double> grad_in) {
  const ptrdiff_t H = sz(s.height), W = sz(s.width);
  const ptrdiff_t C = sz(s.in_channels), O = sz(s.out_channels);
  for (ptrdiff_t o = 0; o < O; ++o) {
    for (ptrdiff_t r = 0; r < H; ++r) {
      for (ptrdiff_t q = 0; q < W; ++q) {
        const double g = grad_out[static_cast<std::size_t>((o * H + r) * W + q)];
        for (ptrdiff_t c = 0; c < C; ++c) {
          for (ptrdiff_t ky = 0; ky < 3; ++ky) {
            for (ptrdiff_t kx = 0; kx < 3; ++kx) {
              const ptrdiff_t sr = r + ky - 1, sc = q + kx - 1;
              if (sr < 0 || sr >= H || sc < 0 || sc >= W) continue;
              grad_in[static_cast<std::size_t>((c * H + sr) * W + sc)] +=
                  g * weights[static_cast<std::size_t>(((o * C + c) * 3 + ky) * 3 + kx)];
            }
          }
        }
      }
    }
  }
}

void conv3x3_backward_params(const ConvShape& s, std::span<const double> in,
                             std::span<const double> grad_out, std::span<double> grad_weights,
                             std::span<double> grad_bias) {
  const ptrdiff_t H = sz(s.height), W = sz(s.width);
  const ptrdiff_t C = sz(s.in_channels), O = sz(s.out_channels);
  for (ptrdiff_t o = 0; o < O; ++o) {
    for (ptrdiff_t r = 0; r < H; ++r) {
      for (ptrdiff_t q = 0; q < W; ++q) {
        const double g = grad_out[static_cast<std::size_t>((o * H + r) * W + q)];
        grad_bias[static_cast<std::size_t>(o)] += g;
        for (ptrdiff_t c = 0; c < C; ++c) {
          for (ptrdiff_t ky = 0; ky < 3; ++ky) {
            for (ptrdiff_t kx = 0; kx < 3; ++kx) {
              const ptrdiff_t sr = r + ky - 1, sc = q + kx - 1;
              if (sr < 0 || sr >= H || sc < 0 || sc >= W) continue;
              grad_weights[static_cast<std::size_t>(((o * C + c) * 3 + ky) * 3 + kx)] +=
                  g * in[static_cast<std::size_t>((c * H + sr) * W + sc)];
            }
          }
        }
      }
    }
  }
}

void separable_filter_valid(std::span<const double> in, std::size_t height, std::size_t width,
                            std::span<const double> kernel, std::span<double> out) {
  const std::size_t n = kernel.size();
  if (height < n || width < n) return;
  const std::size_t OH = height - n + 1, OW = width - n + 1;
  for (std::size_t r = 0; r < OH; ++r) {
    for (std::size_t q = 0; q < OW; ++q) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) sum += kernel[i] * kernel[j] * in[(r + i) * width + q + j];
      }
      out[r * OW + q] = sum;
    }
  }
}

}  // namespace serial
}  // namespace dvfi::kernels
