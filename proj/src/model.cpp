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
#include "dvfi/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "dvfi/error.hpp"
#include "dvfi/image_io.hpp"
#include "dvfi/kernels.hpp"
#include "dvfi/rng.hpp"

namespace dvfi {
namespace {

constexpr std::uint64_t kInitSalt = 0x696e6974;  // "init"
constexpr std::uint64_t kFlipSalt = 0x666c6970;  // "flip"

std::vector<double> to_chw(const Frame& f) {
  const std::size_t plane = f.height() * f.width();
  std::vector<double> out(plane * Frame::kChannels);
  const auto px = f.data();
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) {
      out[ch * plane + i] = px[i * Frame::kChannels + ch];
    }
  }
  return out;
}

Frame from_chw(std::span<const double> v, std::size_t height, std::size_t width) {
  const std::size_t plane = height * width;
  std::vector<double> out(plane * Frame::kChannels);
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) {
      out[i * Frame::kChannels + ch] = v[ch * plane + i];
    }
  }
  return Frame(height, width, std::move(out));
}

void check_inputs(const InputFrames& inputs) {
  for (const auto& f : inputs) {
    if (!f.same_dims(inputs[0])) throw DimensionError("input frames differ in dims");
  }
}

// Network input: the four frames channel-stacked and centered on mid-gray.
std::vector<double> stacked_inputs(const InputFrames& inputs) {
  std::vector<double> x;
  x.reserve(inputs[0].size() * inputs.size());
  for (const auto& f : inputs) {
    for (double v : to_chw(f)) x.push_back(v - 0.5);
  }
  return x;
}

ad::Tensor frame_tensor(const Frame& f) {
  return ad::Tensor::constant({Frame::kChannels, f.height(), f.width()}, to_chw(f));
}

ad::Tensor as_constant(const ad::Tensor& t) {
  return ad::Tensor::constant(t.shape(), std::vector<double>(t.values().begin(), t.values().end()));
}

struct Outputs {
  ad::Tensor d;
  ad::Tensor i_c;
  ad::Tensor i_hat;
};

Outputs run(const InputFrames& inputs, const DMapEstimator& params, bool track) {
  check_inputs(inputs);
  const std::size_t H = inputs[0].height(), W = inputs[0].width();
  auto p = [&](const ad::Tensor& t) { return track ? t : as_constant(t); };
  const auto x = ad::Tensor::constant({DMapEstimator::kInputChannels, H, W}, stacked_inputs(inputs));
  const auto h1 = ad::leaky_relu(ad::conv3x3(x, p(params.weight(0)), p(params.bias(0))),
                                 DMapEstimator::kLeakySlope);
  const auto h2 = ad::leaky_relu(ad::conv3x3(h1, p(params.weight(1)), p(params.bias(1))),
                                 DMapEstimator::kLeakySlope);
  const auto d = ad::sigmoid(ad::conv3x3(h2, p(params.weight(2)), p(params.bias(2))));
  const auto i_c = frame_tensor(continuous_branch(inputs));
  const auto prev = frame_tensor(inputs[kPreviousInput]);
  return {d, i_c, ad::blend(i_c, prev, d)};
}

InputFrames flip_inputs(const InputFrames& in, FlipAxis axis) {
  InputFrames out;
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = flip(in[i], axis);
  return out;
}

TrainingSample flipped(const TrainingSample& s, FlipAxis axis) {
  return {s.id, flip_inputs(s.inputs, axis), flip(s.target, axis), flip(s.dgt, axis)};
}

void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

DMapEstimator::DMapEstimator() {
  const std::size_t in[kLayers] = {kInputChannels, kHiddenChannels, kHiddenChannels};
  const std::size_t out[kLayers] = {kHiddenChannels, kHiddenChannels, 1};
  for (std::size_t l = 0; l < kLayers; ++l) {
    weights_[l] = ad::Tensor::zeros({out[l], in[l], 3, 3}, true);
    biases_[l] = ad::Tensor::zeros({out[l]}, true);
  }
}

DMapEstimator DMapEstimator::initialized(std::uint64_t seed) {
  DMapEstimator m;
  Rng rng(derive_seed(seed, kInitSalt));
  for (std::size_t l = 0; l < kLayers; ++l) {
    const double fan_in = static_cast<double>(m.weights_[l].shape()[1] * 9);
    const double stddev = std::sqrt(2.0 / fan_in);
    for (double& w : m.weights_[l].mutable_values()) w = stddev * rng.normal();
  }
  return m;
}

std::vector<std::vector<std::size_t>> DMapEstimator::parameter_shapes() {
  DMapEstimator m;
  std::vector<std::vector<std::size_t>> shapes;
  for (std::size_t l = 0; l < kLayers; ++l) {
    shapes.push_back(m.weights_[l].shape());
    shapes.push_back(m.biases_[l].shape());
  }
  return shapes;
}

std::vector<double> DMapEstimator::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t l = 0; l < kLayers; ++l) {
    out.insert(out.end(), weights_[l].values().begin(), weights_[l].values().end());
    out.insert(out.end(), biases_[l].values().begin(), biases_[l].values().end());
  }
  return out;
}

std::vector<double> DMapEstimator::flatten_grad() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t l = 0; l < kLayers; ++l) {
    out.insert(out.end(), weights_[l].grad().begin(), weights_[l].grad().end());
    out.insert(out.end(), biases_[l].grad().begin(), biases_[l].grad().end());
  }
  return out;
}

void DMapEstimator::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw DimensionError("parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                         std::to_string(parameter_count()));
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l < kLayers; ++l) {
    for (ad::Tensor* t : {&weights_[l], &biases_[l]}) {
      auto v = t->mutable_values();
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), v.size(), v.begin());
      off += v.size();
    }
  }
}

void DMapEstimator::zero_grad() {
  for (std::size_t l = 0; l < kLayers; ++l) {
    weights_[l].zero_grad();
    biases_[l].zero_grad();
  }
}

DMapEstimator DMapEstimator::clone() const {
  DMapEstimator m;
  m.assign(flatten());
  return m;
}

Frame continuous_branch(const InputFrames& inputs) {
  check_inputs(inputs);
  const auto a = inputs[1].data();
  const auto b = inputs[2].data();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (a[i] + b[i]);
  return Frame(inputs[1].height(), inputs[1].width(), std::move(out));
}

ForwardResult forward(const InputFrames& inputs, const DMapEstimator& params) {
  const auto o = run(inputs, params, false);
  const std::size_t H = inputs[0].height(), W = inputs[0].width();
  return {Mask(H, W, std::vector<double>(o.d.values().begin(), o.d.values().end())),
          from_chw(o.i_c.values(), H, W), from_chw(o.i_hat.values(), H, W)};
}

ForwardResult infer(const InputFrames& inputs, const DMapEstimator& params) {
  return forward(inputs, params);
}

TrainingSample make_training_sample(const Sequence& septuplet, const Mask& dgt, std::string id) {
  const Sequence s = split_roles(septuplet, 4);
  if (!dgt.same_dims(s.target())) throw DimensionError("D-map dims differ from frames");
  const auto& in = s.roles().inputs;
  return {std::move(id),
          {s.frame(in[0]), s.frame(in[1]), s.frame(in[2]), s.frame(in[3])},
          s.target(),
          dgt};
}

LossGraph build_loss_graph(const TrainingSample& sample, DMapEstimator& params,
                           const LossConfig& cfg) {
  if (!sample.target.same_dims(sample.inputs[0]) || !sample.dgt.same_dims(sample.target)) {
    throw DimensionError("training sample dims differ");
  }
  const auto o = run(sample.inputs, params, true);
  const std::size_t H = sample.target.height(), W = sample.target.width();
  const auto gt = frame_tensor(sample.target);
  const auto dgt = ad::Tensor::constant(
      {1, H, W}, std::vector<double>(sample.dgt.data().begin(), sample.dgt.data().end()));
  auto l1 = ad::charbonnier_mean(o.i_hat, gt, cfg.epsilon);
  auto l_d = ad::charbonnier_mean(o.d, dgt, cfg.epsilon);
  auto total = ad::weighted_sum(l1, 1.0, l_d, cfg.lambda_d);
  return {o.d, o.i_hat, l1, l_d, total};
}

LossReport evaluate_loss(const DMapEstimator& params, const TrainingSample& sample,
                         const LossConfig& cfg, std::vector<std::uint8_t>* pattern) {
  const std::size_t H = sample.target.height(), W = sample.target.width();
  const std::size_t C = DMapEstimator::kHiddenChannels;
  const auto x = stacked_inputs(sample.inputs);
  std::vector<double> h1(C * H * W), h2(C * H * W), z(H * W);
  if (pattern) pattern->clear();
  auto act = [&](std::vector<double>& v) {
    for (double& a : v) {
      if (pattern) pattern->push_back(a > 0.0 ? 1 : 0);
      a = a > 0.0 ? a : DMapEstimator::kLeakySlope * a;
    }
  };
  kernels::conv3x3_forward({DMapEstimator::kInputChannels, C, H, W}, x, params.weight(0).values(),
                           params.bias(0).values(), h1);
  act(h1);
  kernels::conv3x3_forward({C, C, H, W}, h1, params.weight(1).values(), params.bias(1).values(), h2);
  act(h2);
  kernels::conv3x3_forward({C, 1, H, W}, h2, params.weight(2).values(), params.bias(2).values(), z);
  std::vector<double> d(H * W);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = std::clamp(1.0 / (1.0 + std::exp(-z[i])), std::numeric_limits<double>::denorm_min(),
                      std::nextafter(1.0, 0.0));
  }
  const Frame i_c = continuous_branch(sample.inputs);
  const Frame i_hat = blend(i_c, sample.inputs[kPreviousInput], Mask(H, W, d));
  const double l1 = charbonnier_mean(i_hat.data(), sample.target.data(), cfg.epsilon);
  const double l_d = charbonnier_mean(d, sample.dgt.data(), cfg.epsilon);
  return total_loss(l1, l_d, cfg);
}

GradientCheckResult gradient_check(const DMapEstimator& params, const TrainingSample& sample,
                                   const LossConfig& cfg, std::size_t n_params, std::uint64_t seed,
                                   double step) {
  DMapEstimator work = params.clone();
  work.zero_grad();
  const auto graph = build_loss_graph(sample, work, cfg);
  if (!std::isfinite(graph.total.item())) throw Error("gradient_check: non-finite loss");
  graph.total.backward();
  const auto analytic = work.flatten_grad();
  const auto theta = work.flatten();

  GradientCheckResult result;
  Rng rng(seed);
  std::vector<std::uint8_t> pattern_plus, pattern_minus;
  std::vector<double> perturbed = theta;
  const std::size_t max_draws = 50 * n_params + 100;
  for (std::size_t draws = 0; result.checked < n_params && draws < max_draws; ++draws) {
    const auto k = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(theta.size()) - 1));
    perturbed[k] = theta[k] + step;
    work.assign(perturbed);
    const double plus = evaluate_loss(work, sample, cfg, &pattern_plus).total;
    perturbed[k] = theta[k] - step;
    work.assign(perturbed);
    const double minus = evaluate_loss(work, sample, cfg, &pattern_minus).total;
    perturbed[k] = theta[k];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw Error("gradient_check: non-finite loss");
    }
    if (pattern_plus != pattern_minus) {
      ++result.skipped_at_kinks;
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-8});
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(analytic[k] - numeric) / denom);
    ++result.checked;
  }
  return result;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning rate must be positive");
  }
  if (steps < 1) throw InvalidArgument("steps must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  loss.validate();
}

TrainResult train(const std::vector<TrainingSample>& dataset, const TrainConfig& cfg,
                  std::optional<TrainState> resume,
                  const std::function<void(const StepLog&)>& on_step) {
  cfg.validate();
  if (dataset.empty()) throw InvalidArgument("training dataset is empty");
  for (const auto& s : dataset) {
    if (!s.target.same_dims(dataset[0].target)) throw DimensionError("training samples differ in dims");
  }
  DMapEstimator params =
      resume ? resume->params.clone() : DMapEstimator::initialized(cfg.seed);
  const long start = resume ? resume->step : 0;
  const auto n = static_cast<std::int64_t>(dataset.size());
  const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);

  TrainResult result{DMapEstimator(), {}};
  for (long step = start; step < cfg.steps; ++step) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(step) + 1));
    params.zero_grad();
    LossReport mean;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const auto idx = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
      const TrainingSample* sample = &dataset[idx];
      TrainingSample aug;
      if (cfg.flip_augment) {
        Rng frng(derive_seed(rng.next_u64(), kFlipSalt));
        const bool h = frng.bernoulli(0.5), v = frng.bernoulli(0.5);
        if (h || v) {
          aug = *sample;
          if (h) aug = flipped(aug, FlipAxis::kHorizontal);
          if (v) aug = flipped(aug, FlipAxis::kVertical);
          sample = &aug;
        }
      }
      const auto g = build_loss_graph(*sample, params, cfg.loss);
      g.total.backward();
      mean.l1 += g.l1.item() * inv_batch;
      mean.l_d += g.l_d.item() * inv_batch;
      mean.total += g.total.item() * inv_batch;
    }
    if (!std::isfinite(mean.total)) {
      throw TrainingDiverged("training diverged at step " + std::to_string(step) +
                                 " (non-finite loss)",
                             step - 1);
    }
    const double scale = cfg.learning_rate * inv_batch;
    for (std::size_t l = 0; l < DMapEstimator::kLayers; ++l) {
      for (ad::Tensor* t : {&params.weight(l), &params.bias(l)}) {
        auto v = t->mutable_values();
        const auto g = t->grad();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= scale * g[i];
      }
    }
    StepLog log{step, mean};
    result.curve.push_back(log);
    if (on_step) on_step(log);
  }
  params.zero_grad();
  result.params = std::move(params);
  return result;
}

void save_checkpoint(const std::filesystem::path& prefix, const DMapEstimator& params,
                     const CheckpointMeta& meta) {
  std::vector<std::uint8_t> bin;
  const auto flat = params.flatten();
  bin.reserve(flat.size() * 8);
  for (double v : flat) put_u64_le(bin, std::bit_cast<std::uint64_t>(v));
  nlohmann::json side = {{"format", "float64-le"},
                         {"parameter_count", flat.size()},
                         {"shapes", DMapEstimator::parameter_shapes()},
                         {"seed", meta.seed},
                         {"step", meta.step}};
  auto bin_path = prefix;
  bin_path += ".bin";
  auto json_path = prefix;
  json_path += ".json";
  write_file_atomic(bin_path, bin);
  write_file_atomic(json_path, side.dump(2) + "\n");
}

std::pair<DMapEstimator, CheckpointMeta> load_checkpoint(const std::filesystem::path& prefix) {
  auto bin_path = prefix;
  bin_path += ".bin";
  auto json_path = prefix;
  json_path += ".json";
  const auto side = nlohmann::json::parse(read_file_text(json_path));
  if (side.at("shapes").get<std::vector<std::vector<std::size_t>>>() !=
      DMapEstimator::parameter_shapes()) {
    throw UnsupportedFormat(json_path.string() + ": parameter shapes do not match the estimator");
  }
  const auto bytes = read_file_bytes(bin_path);
  if (bytes.size() != DMapEstimator::parameter_count() * 8) {
    throw TruncatedData(bin_path.string() + ": expected " +
                        std::to_string(DMapEstimator::parameter_count() * 8) + " bytes");
  }
  std::vector<double> flat(DMapEstimator::parameter_count());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    flat[i] = std::bit_cast<double>(u);
  }
  DMapEstimator m;
  m.assign(flat);
  return {std::move(m), {side.at("seed").get<std::uint64_t>(), side.at("step").get<long>()}};
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"steps", c.steps},   {"batch_size", c.batch_size},
       {"seed", c.seed},                   {"loss", c.loss},     {"flip_augment", c.flip_augment}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  if (j.contains("loss")) c.loss = j.at("loss").get<LossConfig>();
  c.flip_augment = j.value("flip_augment", c.flip_augment);
}

}  // namespace dvfi
