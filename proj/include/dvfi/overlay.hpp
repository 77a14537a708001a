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
#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

#include "dvfi/image.hpp"

namespace dvfi {

using Color = std::array<double, 3>;

/// Position in continuous pixel coordinates; pixel (r, c) covers
/// [r, r+1) x [c, c+1) and has its center at (r + 0.5, c + 0.5).
struct Anchor {
  double row = 0.0;
  double col = 0.0;
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct RectGeometry {
  long top = 0;
  long left = 0;
  long height = 0;
  long width = 0;
  friend bool operator==(const RectGeometry&, const RectGeometry&) = default;
};

struct CircleGeometry {
  Anchor center;
  double radius = 0.0;
  friend bool operator==(const CircleGeometry&, const CircleGeometry&) = default;
};

struct LineGeometry {
  Anchor start;
  Anchor end;
  double thickness = 1.0;
  friend bool operator==(const LineGeometry&, const LineGeometry&) = default;
};

struct TextGeometry {
  std::string text;
  int scale = 1;  // 1..4, nearest-neighbour scaling of the 5x7 font
  long top = 0;
  long left = 0;
  friend bool operator==(const TextGeometry&, const TextGeometry&) = default;
};

using Geometry = std::variant<RectGeometry, CircleGeometry, LineGeometry, TextGeometry>;

enum class OverlayKind { kRectangle, kCircle, kLine, kText };

/// Temporal behaviour of an overlay inside a septuplet, relative to the
/// target frame:
///   kStatic    every frame, same place
///   kAppear    only frames after the target
///   kDisappear frames up to and including the target
///   kJump      up to the target at the primary anchor, after it at
///              jump_position
enum class TemporalMode { kStatic, kAppear, kDisappear, kJump };

struct OverlaySpec {
  Geometry geometry;
  Color color{0.0, 0.0, 0.0};
  TemporalMode mode = TemporalMode::kStatic;
  std::optional<Anchor> jump_position;

  OverlayKind kind() const noexcept { return static_cast<OverlayKind>(geometry.index()); }
  bool is_figure() const noexcept { return kind() != OverlayKind::kText; }

  friend bool operator==(const OverlaySpec&, const OverlaySpec&) = default;
};

/// Reference point of a geometry: rect/text top-left, circle center, line
/// start.
Anchor anchor_of(const Geometry& g);

/// Pixel extent of rendered text: {height, width}.
std::pair<long, long> text_extent(const TextGeometry& t);

/// Throws InvalidArgument unless the spec satisfies its invariants for a
/// frame of the given dims (charset, scale, mode/jump pairing, and that the
/// geometry touches at least one pixel).
void validate(const OverlaySpec& spec, std::size_t height, std::size_t width);

struct RasterizedOverlay {
  Mask support;       // binary
  Frame color_layer;  // spec color on the support, 0 elsewhere
};

/// Renders the overlay with its geometry translated so that its anchor sits
/// at `at` (defaults to the geometry's own anchor). Text and rectangle
/// anchors are rounded to whole pixels. Throws InvalidArgument when nothing
/// lands inside the frame.
RasterizedOverlay rasterize_overlay(const OverlaySpec& spec, std::size_t height, std::size_t width,
                                    std::optional<Anchor> at = std::nullopt);

/// Opaque paint of `color` onto `frame` wherever `support` is 1.
void composite(Frame& frame, const Mask& support, const Color& color);

const char* to_string(TemporalMode m);
const char* to_string(OverlayKind k);

void to_json(nlohmann::json& j, const Anchor& a);
void from_json(const nlohmann::json& j, Anchor& a);
void to_json(nlohmann::json& j, const OverlaySpec& s);
void from_json(const nlohmann::json& j, OverlaySpec& s);

}  // namespace dvfi
