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

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dvfi/image.hpp"
#include "dvfi/overlay.hpp"
#include "dvfi/rng.hpp"

namespace dvfi {

/// Sampling ranges for Figure-Text Mixing. All ranges are inclusive.
struct FtmParams {
  double p_fm = 0.5;  // per-sequence probability of figure mixing
  double p_tm = 0.5;  // per-sequence probability of text mixing
  int min_figures = 1;
  int max_figures = 4;
  int min_figure_size = 8;
  int max_figure_size = 64;
  int min_texts = 1;
  int max_texts = 3;
  int min_text_length = 3;
  int max_text_length = 12;
  int min_glyph_scale = 1;
  int max_glyph_scale = 4;

  /// Throws InvalidArgument on empty ranges or probabilities outside [0,1].
  void validate() const;
  friend bool operator==(const FtmParams&, const FtmParams&) = default;
};

/// Everything needed to replay an augmentation bit-exactly.
struct AugmentationRecord {
  std::uint64_t seed = 0;
  std::vector<OverlaySpec> overlays;  // z-order: later entries paint over earlier
  bool fm_applied = false;
  bool tm_applied = false;
  friend bool operator==(const AugmentationRecord&, const AugmentationRecord&) = default;
};

struct AugmentedSample {
  Sequence original;
  Sequence augmented;
  AugmentationRecord record;
  Mask dgt;  // binary, for the target frame
};

/// Where (if anywhere) `spec` is drawn on frame `frame_index`, given the
/// target index. Frames up to and including the target follow the past
/// state; frames after it follow the future state.
std::optional<Anchor> placement_on_frame(const OverlaySpec& spec, std::size_t frame_index,
                                         std::size_t target_index);

/// Paints `overlays` in order onto a copy of `seq`.
Sequence render_overlays(const Sequence& seq, const std::vector<OverlaySpec>& overlays);

/// Figures are always static and identical on all frames.
std::pair<Sequence, std::vector<OverlaySpec>> apply_figure_mixing(const Sequence& seq, Rng& rng,
                                                                  const FtmParams& params);

/// One temporal mode per text, uniformly from the four modes. Requires a
/// septuplet whose target is the middle frame.
std::pair<Sequence, std::vector<OverlaySpec>> apply_text_mixing(const Sequence& seq, Rng& rng,
                                                                const FtmParams& params);

/// Ground-truth discontinuity map: union of the supports of every overlay
/// that is drawn on the target frame. Built from supports rather than pixel
/// differences, so overlay colors that happen to match the content leave no
/// holes.
Mask derive_dgt(const AugmentationRecord& record, std::size_t height, std::size_t width,
                std::size_t target_index = kSeptupletTarget);

AugmentedSample apply_ftm(const Sequence& seq, std::uint64_t seed, const FtmParams& params);

/// Re-applies a record to the original sequence.
Sequence replay(const Sequence& original, const AugmentationRecord& record);

void to_json(nlohmann::json& j, const FtmParams& p);
void from_json(const nlohmann::json& j, FtmParams& p);
void to_json(nlohmann::json& j, const AugmentationRecord& r);
void from_json(const nlohmann::json& j, AugmentationRecord& r);

}  // namespace dvfi
