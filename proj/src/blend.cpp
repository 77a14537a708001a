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
#include "dvfi/blend.hpp"

#include <algorithm>

#include "dvfi/error.hpp"

namespace dvfi {

void LossConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("Charbonnier epsilon must be positive");
  }
  if (!(lambda_d >= 0.0) || !std::isfinite(lambda_d)) {
    throw InvalidArgument("lambda_d must be non-negative");
  }
}

Frame blend(const Frame& continuous, const Frame& previous, const Mask& d) {
  if (!continuous.same_dims(previous) || !d.same_dims(continuous)) {
    throw DimensionError("blend: continuous, previous and D-map dims differ");
  }
  Frame out = continuous;
  auto o = out.data();
  const auto p = previous.data();
  const auto m = d.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double w = m[i];
    for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) {
      const std::size_t k = i * Frame::kChannels + ch;
      // Endpoints are exact: w = 0 gives o[k], w = 1 gives p[k].
      const double v = o[k] * (1.0 - w) + p[k] * w;
      o[k] = std::clamp(v, std::min(o[k], p[k]), std::max(o[k], p[k]));
    }
  }
  return out;
}

double charbonnier_mean(std::span<const double> a, std::span<const double> b, double eps) {
  if (a.size() != b.size() || a.empty()) throw DimensionError("charbonnier_mean: size mismatch");
  // Accumulate the excess over eps, x^2 / (phi + eps), so that equal inputs
  // give exactly eps and small differences keep their precision.
  double excess = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    excess += x * x / (charbonnier(x, eps) + eps);
  }
  return eps + excess / static_cast<double>(a.size());
}

void charbonnier_mean_backward(std::span<const double> a, std::span<const double> b, double eps,
                               double upstream, std::span<double> grad_a) {
  const double scale = upstream / static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    grad_a[i] += scale * charbonnier_derivative(a[i] - b[i], eps);
  }
}

double charbonnier_loss(const Frame& pred, const Frame& gt, const LossConfig& cfg) {
  cfg.validate();
  if (!pred.same_dims(gt)) throw DimensionError("charbonnier_loss: dims differ");
  return charbonnier_mean(pred.data(), gt.data(), cfg.epsilon);
}

double dmap_loss(const Mask& d, const Mask& dgt, const LossConfig& cfg) {
  cfg.validate();
  if (!d.same_dims(dgt)) throw DimensionError("dmap_loss: dims differ");
  return charbonnier_mean(d.data(), dgt.data(), cfg.epsilon);
}

LossReport total_loss(double l1, double l_d, const LossConfig& cfg) {
  if (!std::isfinite(l1) || !std::isfinite(l_d)) {
    throw InvalidArgument("total_loss: non-finite loss term");
  }
  return {l1, l_d, l1 + cfg.lambda_d * l_d};
}

void to_json(nlohmann::json& j, const LossConfig& c) {
  j = {{"epsilon", c.epsilon}, {"lambda_d", c.lambda_d}};
}

void from_json(const nlohmann::json& j, LossConfig& c) {
  c.epsilon = j.value("epsilon", c.epsilon);
  c.lambda_d = j.value("lambda_d", c.lambda_d);
}

void to_json(nlohmann::json& j, const LossReport& r) {
  j = {{"l1", r.l1}, {"l_d", r.l_d}, {"total", r.total}};
}

}  // namespace dvfi
