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
#include <vector>

namespace dvfi {

/// RGB image with 64-bit samples in [0,1], row-major, channel-interleaved.
class Frame {
 public:
  static constexpr std::size_t kChannels = 3;

  Frame() = default;
  /// Zero-filled frame. Throws InvalidArgument when either side is zero.
  Frame(std::size_t height, std::size_t width);
  /// Takes ownership of `data`; validates size and value range.
  Frame(std::size_t height, std::size_t width, std::vector<double> data);
  /// Frame with every sample set to `value`.
  static Frame filled(std::size_t height, std::size_t width, double value);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data_[(row * width_ + col) * kChannels + ch];
  }
  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return data_[(row * width_ + col) * kChannels + ch];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool same_dims(const Frame& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Single-channel map in [0,1]; holds both predicted and ground-truth
/// discontinuity maps.
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t height, std::size_t width);
  Mask(std::size_t height, std::size_t width, std::vector<double> data);
  static Mask filled(std::size_t height, std::size_t width, double value);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  double at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
  double& at(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool same_dims(const Frame& f) const noexcept {
    return height_ == f.height() && width_ == f.width();
  }
  bool same_dims(const Mask& m) const noexcept {
    return height_ == m.height_ && width_ == m.width_;
  }

  /// True when every value is exactly 0 or 1.
  bool is_binary() const noexcept;
  /// Number of entries equal to 1 (for binary masks).
  std::size_t popcount() const noexcept;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Which frames of a sequence feed the interpolator and which one is the
/// target. Indices are 0-based.
struct Roles {
  std::vector<std::size_t> inputs;
  std::size_t target = 0;

  friend bool operator==(const Roles&, const Roles&) = default;
};

/// Ordered frames with shared dims plus their role assignment.
class Sequence {
 public:
  Sequence() = default;
  /// Validates equal dims, strictly increasing inputs, target not an input.
  Sequence(std::vector<Frame> frames, Roles roles);

  std::size_t length() const noexcept { return frames_.size(); }
  std::size_t height() const noexcept { return frames_.empty() ? 0 : frames_[0].height(); }
  std::size_t width() const noexcept { return frames_.empty() ? 0 : frames_[0].width(); }

  const Frame& frame(std::size_t i) const { return frames_.at(i); }
  const std::vector<Frame>& frames() const noexcept { return frames_; }
  const Roles& roles() const noexcept { return roles_; }
  const Frame& target() const { return frames_.at(roles_.target); }

  /// Mutable access for compositing; dims must not change.
  Frame& mutable_frame(std::size_t i) { return frames_.at(i); }

  friend bool operator==(const Sequence&, const Sequence&) = default;

 private:
  std::vector<Frame> frames_;
  Roles roles_;
};

enum class FlipAxis { kHorizontal, kVertical, kTemporal };

inline constexpr std::size_t kSeptupletLength = 7;
/// 0-based index of the middle frame of a septuplet.
inline constexpr std::size_t kSeptupletTarget = 3;

Frame crop(const Frame& f, std::size_t top, std::size_t left, std::size_t h, std::size_t w);
Mask crop(const Mask& m, std::size_t top, std::size_t left, std::size_t h, std::size_t w);
Sequence crop(const Sequence& seq, std::size_t top, std::size_t left, std::size_t h,
              std::size_t w);

Frame flip(const Frame& f, FlipAxis axis);
Mask flip(const Mask& m, FlipAxis axis);
/// Spatial axes mirror every frame; the temporal axis reverses frame order
/// and remaps role indices i -> n-1-i.
Sequence flip(const Sequence& seq, FlipAxis axis);

/// Assigns septuplet roles: 4 inputs -> {0,2,4,6}, 2 inputs -> {2,4};
/// target 3 in both cases.
Sequence split_roles(const Sequence& seq, int n_inputs);
Roles septuplet_roles(int n_inputs);

}  // namespace dvfi
