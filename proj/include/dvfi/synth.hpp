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
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dvfi/dataset.hpp"
#include "dvfi/image.hpp"
#include "dvfi/overlay.hpp"

namespace dvfi {

// Synthetic stand-in for game-style footage: a smooth background that
// translates by an integer velocity per frame (toroidal wrap) under UI
// elements that do not move continuously. Because the background is
// periodic and the motion is integer, the true middle frame is known
// exactly.

/// One periodic cosine component: `cycles_y` / `cycles_x` whole periods
/// across the frame height / width.
struct Wave {
  int cycles_y = 0;
  int cycles_x = 0;
  double phase = 0.0;
  Color amplitude{0.0, 0.0, 0.0};
  friend bool operator==(const Wave&, const Wave&) = default;
};

struct Texture {
  Color base{0.5, 0.5, 0.5};
  std::vector<Wave> waves;
  friend bool operator==(const Texture&, const Texture&) = default;
};

/// Fixed HUD panel: same place and color on every frame.
struct HudRect {
  RectGeometry rect;
  Color color{};
  friend bool operator==(const HudRect&, const HudRect&) = default;
};

/// Zero-padded counter whose value increases by one per frame. The target
/// frame shows the previous frame's value.
struct DigitCounter {
  long top = 0;
  long left = 0;
  int scale = 2;
  int digits = 3;
  long start_value = 0;
  Color color{};
  friend bool operator==(const DigitCounter&, const DigitCounter&) = default;
};

/// Text drawn at an independent position on each frame; the target frame
/// repeats the previous frame's position. positions[t] is the top-left on
/// frame t.
struct JumpingText {
  std::string text;
  int scale = 2;
  std::vector<Anchor> positions;
  Color color{};
  friend bool operator==(const JumpingText&, const JumpingText&) = default;
};

using SynthOverlay = std::variant<HudRect, DigitCounter, JumpingText>;

struct SceneSpec {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t frame_count = kSeptupletLength;
  /// Background displacement per frame, pixels.
  int velocity_x = 2;
  int velocity_y = 0;
  Texture texture;
  std::vector<SynthOverlay> overlays;  // painted in order
  std::uint64_t seed = 0;

  /// Throws InvalidArgument if |velocity| > 8, the frame count is not 7, or
  /// an overlay leaves the frame on any frame.
  void validate() const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct SynthSample {
  Sequence sequence;        // septuplet, inputs {0,2,4,6}, target 3
  std::vector<Mask> masks;  // overlay support per frame
  SceneSpec spec;

  const Mask& target_mask() const { return masks.at(sequence.roles().target); }
};

/// Background alone for frame t: the base texture translated by
/// t * velocity with wrap-around.
Frame render_background(const SceneSpec& spec, std::size_t t);

/// Digits shown by a counter on frame t of a sequence with the given target.
std::string counter_text(const DigitCounter& c, std::size_t t, std::size_t target);

SynthSample generate_sequence(const SceneSpec& spec);

struct SynthParams {
  std::size_t height = 64;
  std::size_t width = 64;
  /// Per-axis velocities are drawn from this list; (0,0) is redrawn.
  std::vector<int> velocities{-4, -2, 2, 4, 0};
  int waves = 4;
  /// Sum of wave amplitudes per channel; the background stays inside
  /// base +- this.
  double texture_amplitude = 0.3;
  /// Probability that a scene carries any overlays at all.
  double p_overlays = 1.0;
  int min_huds = 1, max_huds = 1;
  int min_counters = 1, max_counters = 1;
  int min_texts = 1, max_texts = 2;
  int glyph_scale = 2;
  /// Minimum fraction of target pixels covered by overlays when a scene
  /// has overlays; overlays are redrawn until it holds.
  double min_coverage = 0.05;

  void validate() const;
  friend bool operator==(const SynthParams&, const SynthParams&) = default;
};

/// Draws a random scene. Overlay colors have every channel at 0 or 1.
SceneSpec sample_scene(std::uint64_t seed, const SynthParams& params);

/// Writes n samples as `<root>/<id>/frame_{1..7}.png`, `dgt.png`,
/// `spec.json` and `<root>/manifest.json`. Sample i uses seed
/// derive_seed(seed, i).
Manifest generate_dataset(std::size_t n, std::uint64_t seed, const SynthParams& params,
                          const std::filesystem::path& root);

std::string sample_id(std::size_t index);

void to_json(nlohmann::json& j, const SceneSpec& s);
void from_json(const nlohmann::json& j, SceneSpec& s);
void to_json(nlohmann::json& j, const SynthParams& p);
void from_json(const nlohmann::json& j, SynthParams& p);

}  // namespace dvfi
