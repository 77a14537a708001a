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
#include "dvfi/image.hpp"

#include <algorithm>
#include <string>

#include "dvfi/error.hpp"

namespace dvfi {
namespace {

void check_dims(std::size_t h, std::size_t w) {
  if (h == 0 || w == 0) {
    throw InvalidArgument("image dims must be >= 1, got " + std::to_string(h) + "x" +
                          std::to_string(w));
  }
}

void check_range(std::span<const double> v) {
  for (double x : v) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvalidArgument("pixel value outside [0,1]: " + std::to_string(x));
    }
  }
}

}  // namespace

Frame::Frame(std::size_t height, std::size_t width)
    : height_(height), width_(width), data_(height * width * kChannels, 0.0) {
  check_dims(height, width);
}

Frame::Frame(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  check_dims(height, width);
  if (data_.size() != height * width * kChannels) {
    throw DimensionError("frame data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(height) + "x" +
                         std::to_string(width) + "x3");
  }
  check_range(data_);
}

Frame Frame::filled(std::size_t height, std::size_t width, double value) {
  return Frame(height, width, std::vector<double>(height * width * kChannels, value));
}

Mask::Mask(std::size_t height, std::size_t width)
    : height_(height), width_(width), data_(height * width, 0.0) {
  check_dims(height, width);
}

Mask::Mask(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  check_dims(height, width);
  if (data_.size() != height * width) {
    throw DimensionError("mask data length does not match dims");
  }
  check_range(data_);
}

Mask Mask::filled(std::size_t height, std::size_t width, double value) {
  return Mask(height, width, std::vector<double>(height * width, value));
}

bool Mask::is_binary() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

std::size_t Mask::popcount() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](double v) { return v == 1.0; }));
}

Sequence::Sequence(std::vector<Frame> frames, Roles roles)
    : frames_(std::move(frames)), roles_(std::move(roles)) {
  if (frames_.empty()) throw InvalidArgument("sequence has no frames");
  for (const auto& f : frames_) {
    if (!f.same_dims(frames_[0])) throw DimensionError("sequence frames differ in dims");
  }
  if (roles_.target >= frames_.size()) throw InvalidArgument("target index out of range");
  for (std::size_t i = 0; i < roles_.inputs.size(); ++i) {
    const std::size_t idx = roles_.inputs[i];
    if (idx >= frames_.size()) throw InvalidArgument("input index out of range");
    if (idx == roles_.target) throw InvalidArgument("target index listed among inputs");
    if (i > 0 && idx <= roles_.inputs[i - 1]) {
      throw InvalidArgument("input indices must be strictly increasing");
    }
  }
}

Frame crop(const Frame& f, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
  if (h == 0 || w == 0 || top + h > f.height() || left + w > f.width()) {
    throw InvalidArgument("crop rectangle out of bounds");
  }
  std::vector<double> out;
  out.reserve(h * w * Frame::kChannels);
  for (std::size_t r = 0; r < h; ++r) {
    const auto row = f.data().subspan(((top + r) * f.width() + left) * Frame::kChannels,
                                      w * Frame::kChannels);
    out.insert(out.end(), row.begin(), row.end());
  }
  return Frame(h, w, std::move(out));
}

Mask crop(const Mask& m, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
  if (h == 0 || w == 0 || top + h > m.height() || left + w > m.width()) {
    throw InvalidArgument("crop rectangle out of bounds");
  }
  std::vector<double> out;
  out.reserve(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    const auto row = m.data().subspan((top + r) * m.width() + left, w);
    out.insert(out.end(), row.begin(), row.end());
  }
  return Mask(h, w, std::move(out));
}

Sequence crop(const Sequence& seq, std::size_t top, std::size_t left, std::size_t h,
              std::size_t w) {
  std::vector<Frame> frames;
  frames.reserve(seq.length());
  for (const auto& f : seq.frames()) frames.push_back(crop(f, top, left, h, w));
  return Sequence(std::move(frames), seq.roles());
}

Frame flip(const Frame& f, FlipAxis axis) {
  if (axis == FlipAxis::kTemporal) return f;
  Frame out = f;
  const std::size_t H = f.height(), W = f.width();
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      const std::size_t sr = axis == FlipAxis::kVertical ? H - 1 - r : r;
      const std::size_t sc = axis == FlipAxis::kHorizontal ? W - 1 - c : c;
      for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) out.at(r, c, ch) = f.at(sr, sc, ch);
    }
  }
  return out;
}

Mask flip(const Mask& m, FlipAxis axis) {
  if (axis == FlipAxis::kTemporal) return m;
  Mask out = m;
  const std::size_t H = m.height(), W = m.width();
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      const std::size_t sr = axis == FlipAxis::kVertical ? H - 1 - r : r;
      const std::size_t sc = axis == FlipAxis::kHorizontal ? W - 1 - c : c;
      out.at(r, c) = m.at(sr, sc);
    }
  }
  return out;
}

Sequence flip(const Sequence& seq, FlipAxis axis) {
  if (axis != FlipAxis::kTemporal) {
    std::vector<Frame> frames;
    frames.reserve(seq.length());
    for (const auto& f : seq.frames()) frames.push_back(flip(f, axis));
    return Sequence(std::move(frames), seq.roles());
  }
  const std::size_t n = seq.length();
  std::vector<Frame> frames(seq.frames().rbegin(), seq.frames().rend());
  Roles roles;
  roles.target = n - 1 - seq.roles().target;
  for (auto it = seq.roles().inputs.rbegin(); it != seq.roles().inputs.rend(); ++it) {
    roles.inputs.push_back(n - 1 - *it);
  }
  return Sequence(std::move(frames), std::move(roles));
}

Roles septuplet_roles(int n_inputs) {
  switch (n_inputs) {
    case 4:
      return Roles{{0, 2, 4, 6}, kSeptupletTarget};
    case 2:
      return Roles{{2, 4}, kSeptupletTarget};
    default:
      throw InvalidArgument("n_inputs must be 2 or 4, got " + std::to_string(n_inputs));
  }
}

Sequence split_roles(const Sequence& seq, int n_inputs) {
  if (seq.length() != kSeptupletLength) {
    throw InvalidArgument("split_roles needs a septuplet, got " + std::to_string(seq.length()) +
                          " frames");
  }
  return Sequence(seq.frames(), septuplet_roles(n_inputs));
}

}  // namespace dvfi
