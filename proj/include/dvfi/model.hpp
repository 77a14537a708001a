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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dvfi/autodiff.hpp"
#include "dvfi/blend.hpp"
#include "dvfi/image.hpp"

namespace dvfi {

/// The four interpolator inputs in temporal order; the target lies between
/// inputs[1] and inputs[2].
using InputFrames = std::array<Frame, 4>;

/// Index into InputFrames of the nearest preceding frame, the one that
/// discontinuous regions are copied from.
inline constexpr std::size_t kPreviousInput = 1;

/// Lightweight D-map estimator: three 3x3 convolutions
/// (12 -> 16 -> 16 -> 1) with leaky ReLU in between and a logistic output.
/// Its input is the channel-wise concatenation of the four input frames.
class DMapEstimator {
 public:
  static constexpr std::size_t kInputChannels = 12;
  static constexpr std::size_t kHiddenChannels = 16;
  static constexpr double kLeakySlope = 0.1;
  static constexpr std::size_t kLayers = 3;

  /// All parameters zero.
  DMapEstimator();
  /// He-normal weights, zero biases, drawn from `seed`.
  static DMapEstimator initialized(std::uint64_t seed);

  /// 12*16*9+16 + 16*16*9+16 + 16*1*9+1 = 4209.
  static constexpr std::size_t parameter_count() {
    return kInputChannels * kHiddenChannels * 9 + kHiddenChannels +
           kHiddenChannels * kHiddenChannels * 9 + kHiddenChannels + kHiddenChannels * 9 + 1;
  }

  ad::Tensor& weight(std::size_t layer) { return weights_.at(layer); }
  ad::Tensor& bias(std::size_t layer) { return biases_.at(layer); }
  const ad::Tensor& weight(std::size_t layer) const { return weights_.at(layer); }
  const ad::Tensor& bias(std::size_t layer) const { return biases_.at(layer); }

  /// Parameters in a fixed order: w0, b0, w1, b1, w2, b2.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  std::vector<double> flatten_grad() const;
  void zero_grad();

  /// Shapes in flatten() order.
  static std::vector<std::vector<std::size_t>> parameter_shapes();

  /// Deep copy (tensors are shared handles).
  DMapEstimator clone() const;

 private:
  std::array<ad::Tensor, kLayers> weights_;
  std::array<ad::Tensor, kLayers> biases_;
};

struct ForwardResult {
  Mask d;
  Frame i_c;
  Frame i_hat;
};

/// Fixed continuous interpolator: the pixelwise mean of the two inputs that
/// bracket the target.
Frame continuous_branch(const InputFrames& inputs);

/// Estimator forward pass and blending, without gradient tracking.
ForwardResult forward(const InputFrames& inputs, const DMapEstimator& params);

/// Test-time entry point; identical to forward().
ForwardResult infer(const InputFrames& inputs, const DMapEstimator& params);

struct TrainingSample {
  std::string id;
  InputFrames inputs;
  Frame target;
  Mask dgt;
};

/// Builds a sample from a septuplet (inputs 1,3,5,7; target 4) and the
/// target's ground-truth D-map.
TrainingSample make_training_sample(const Sequence& septuplet, const Mask& dgt,
                                    std::string id = {});

/// Graph for one sample: the loss and its parts, with gradients flowing to
/// the estimator parameters.
struct LossGraph {
  ad::Tensor d;
  ad::Tensor i_hat;
  ad::Tensor l1;
  ad::Tensor l_d;
  ad::Tensor total;
};
LossGraph build_loss_graph(const TrainingSample& sample, DMapEstimator& params,
                           const LossConfig& cfg);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  /// Parameters re-drawn because a leaky-ReLU input changed sign between
  /// the two finite-difference evaluations (non-differentiable point).
  std::size_t skipped_at_kinks = 0;
};

/// Compares reverse-mode gradients with central differences on
/// `n_params` randomly chosen parameters. Relative error is
/// |a - n| / max(|a|, |n|, 1e-8).
GradientCheckResult gradient_check(const DMapEstimator& params, const TrainingSample& sample,
                                   const LossConfig& cfg, std::size_t n_params = 200,
                                   std::uint64_t seed = 0, double step = 1e-5);

/// Loss evaluated by a direct forward pass (no graph). When `pattern` is
/// given it receives the sign of every leaky-ReLU input.
LossReport evaluate_loss(const DMapEstimator& params, const TrainingSample& sample,
                         const LossConfig& cfg, std::vector<std::uint8_t>* pattern = nullptr);

struct TrainConfig {
  double learning_rate = 1e-2;
  long steps = 1000;
  std::size_t batch_size = 4;
  std::uint64_t seed = 0;
  LossConfig loss;
  /// Random horizontal/vertical flips of each drawn sample.
  bool flip_augment = false;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct StepLog {
  long step = 0;
  LossReport loss;  // batch mean
};

struct TrainResult {
  DMapEstimator params;
  std::vector<StepLog> curve;
};

/// Where training (re)starts: parameters and the number of steps already
/// taken. Batches for step s are drawn from a generator seeded by
/// (seed, s), so resuming at s reproduces an uninterrupted run exactly.
struct TrainState {
  DMapEstimator params;
  long step = 0;
};

/// Plain SGD with a fixed learning rate. Throws TrainingDiverged on a
/// non-finite loss.
TrainResult train(const std::vector<TrainingSample>& dataset, const TrainConfig& cfg,
                  std::optional<TrainState> resume = std::nullopt,
                  const std::function<void(const StepLog&)>& on_step = {});

struct CheckpointMeta {
  std::uint64_t seed = 0;
  long step = 0;
};

/// `<prefix>.bin` holds the flattened parameters as little-endian float64;
/// `<prefix>.json` holds shapes, seed and step.
void save_checkpoint(const std::filesystem::path& prefix, const DMapEstimator& params,
                     const CheckpointMeta& meta);
std::pair<DMapEstimator, CheckpointMeta> load_checkpoint(const std::filesystem::path& prefix);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace dvfi
