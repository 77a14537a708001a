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

#include <cmath>
#include <span>

#include "json.hpp"

#include "dvfi/image.hpp"

namespace dvfi {

struct LossConfig {
  double epsilon = 0.001;  // Charbonnier constant
  double lambda_d = 1.0;   // weight of the D-map term

  void validate() const;
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

struct LossReport {
  double l1 = 0.0;
  double l_d = 0.0;
  double total = 0.0;
};

/// Charbonnier penalty sqrt(x^2 + eps^2), a smooth stand-in for |x|.
inline double charbonnier(double x, double eps) { return std::sqrt(x * x + eps * eps); }
inline double charbonnier_derivative(double x, double eps) { return x / charbonnier(x, eps); }

/// Soft selection between the continuously interpolated frame and the
/// previous input frame:  out = continuous * (1 - d) + previous * d.
Frame blend(const Frame& continuous, const Frame& previous, const Mask& d);

/// Mean Charbonnier penalty over all elements of (a - b).
double charbonnier_mean(std::span<const double> a, std::span<const double> b, double eps);

/// d/da of charbonnier_mean scaled by `upstream`, accumulated into `grad_a`.
void charbonnier_mean_backward(std::span<const double> a, std::span<const double> b, double eps,
                               double upstream, std::span<double> grad_a);

/// Reconstruction term: mean Charbonnier over every sample of pred - gt.
double charbonnier_loss(const Frame& pred, const Frame& gt, const LossConfig& cfg = {});

/// D-map supervision: mean Charbonnier over pixels of d - dgt (same eps).
double dmap_loss(const Mask& d, const Mask& dgt, const LossConfig& cfg = {});

/// total = l1 + lambda_d * l_d. Throws InvalidArgument on non-finite input.
LossReport total_loss(double l1, double l_d, const LossConfig& cfg = {});

void to_json(nlohmann::json& j, const LossConfig& c);
void from_json(const nlohmann::json& j, LossConfig& c);
void to_json(nlohmann::json& j, const LossReport& r);

}  // namespace dvfi
