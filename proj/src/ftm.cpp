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
#include "dvfi/ftm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string_view>

#include "dvfi/error.hpp"
#include "dvfi/font.hpp"

namespace dvfi {
namespace {

constexpr std::string_view kCharset =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

// Colors are drawn on the 8-bit grid so augmented frames survive a PNG
// round trip unchanged.
Color sample_color(Rng& rng) {
  Color c{};
  for (auto& v : c) v = static_cast<double>(rng.uniform_int(0, 255)) / 255.0;
  return c;
}

long as_long(std::size_t v) { return static_cast<long>(v); }

OverlaySpec sample_figure(Rng& rng, const FtmParams& p, std::size_t height, std::size_t width) {
  const long H = as_long(height), W = as_long(width);
  const long max_size = std::min<long>(p.max_figure_size, std::max(H, W));
  const long min_size = std::min<long>(p.min_figure_size, max_size);
  OverlaySpec spec;
  const auto kind = rng.uniform_int(0, 2);
  if (kind == 0) {
    const long h = std::min(rng.uniform_int(min_size, max_size), H);
    const long w = std::min(rng.uniform_int(min_size, max_size), W);
    const long top = rng.uniform_int(0, H - h);
    const long left = rng.uniform_int(0, W - w);
    spec.geometry = RectGeometry{top, left, h, w};
  } else if (kind == 1) {
    const double radius = 0.5 * static_cast<double>(rng.uniform_int(min_size, max_size));
    const double row = static_cast<double>(rng.uniform_int(0, H - 1)) + 0.5;
    const double col = static_cast<double>(rng.uniform_int(0, W - 1)) + 0.5;
    spec.geometry = CircleGeometry{{row, col}, radius};
  } else {
    const double length = static_cast<double>(rng.uniform_int(min_size, max_size));
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double row = static_cast<double>(rng.uniform_int(0, H - 1)) + 0.5;
    const double col = static_cast<double>(rng.uniform_int(0, W - 1)) + 0.5;
    const double thickness = static_cast<double>(rng.uniform_int(1, 4));
    spec.geometry = LineGeometry{
        {row, col}, {row + length * std::sin(angle), col + length * std::cos(angle)}, thickness};
  }
  spec.color = sample_color(rng);
  spec.mode = TemporalMode::kStatic;
  return spec;
}

// Returns nullopt when no text fits the frame even at scale 1.
std::optional<OverlaySpec> sample_text(Rng& rng, const FtmParams& p, std::size_t height,
                                       std::size_t width) {
  const long H = as_long(height), W = as_long(width);
  int scale = static_cast<int>(rng.uniform_int(p.min_glyph_scale, p.max_glyph_scale));
  long length = rng.uniform_int(p.min_text_length, p.max_text_length);
  std::string text;
  for (long i = 0; i < length; ++i) {
    text.push_back(kCharset[static_cast<std::size_t>(rng.uniform_int(0, kCharset.size() - 1))]);
  }
  // Shrink scale, then length, until the text fits inside the frame.
  auto fits = [&](int s, long n) {
    return font::kGlyphHeight * s <= H && (n * font::kAdvance - 1) * s <= W;
  };
  while (scale > 1 && !fits(scale, 1)) --scale;
  if (!fits(scale, 1)) return std::nullopt;
  while (length > 1 && !fits(scale, length)) --length;
  text.resize(static_cast<std::size_t>(length));

  TextGeometry g{text, scale, 0, 0};
  const auto [th, tw] = text_extent(g);
  g.top = rng.uniform_int(0, H - th);
  g.left = rng.uniform_int(0, W - tw);

  OverlaySpec spec;
  spec.color = sample_color(rng);
  spec.mode = static_cast<TemporalMode>(rng.uniform_int(0, 3));
  if (spec.mode == TemporalMode::kJump) {
    Anchor b{static_cast<double>(g.top), static_cast<double>(g.left)};
    // The jump must move the text; give up after a few draws on frames where
    // the text has no room to move.
    for (int attempt = 0; attempt < 16; ++attempt) {
      b = {static_cast<double>(rng.uniform_int(0, H - th)),
           static_cast<double>(rng.uniform_int(0, W - tw))};
      if (b.row != static_cast<double>(g.top) || b.col != static_cast<double>(g.left)) break;
    }
    if (b.row == static_cast<double>(g.top) && b.col == static_cast<double>(g.left)) {
      spec.mode = TemporalMode::kStatic;
    } else {
      spec.jump_position = b;
    }
  }
  spec.geometry = std::move(g);
  return spec;
}

void require_septuplet(const Sequence& seq) {
  if (seq.length() != kSeptupletLength || seq.roles().target != kSeptupletTarget) {
    throw InvalidArgument("FTM needs a septuplet whose target is the middle frame");
  }
}

}  // namespace

void FtmParams::validate() const {
  auto check_range = [](int lo, int hi, int floor, const char* what) {
    if (lo < floor || hi < lo) throw InvalidArgument(std::string("invalid FTM range for ") + what);
  };
  if (!(p_fm >= 0.0 && p_fm <= 1.0) || !(p_tm >= 0.0 && p_tm <= 1.0)) {
    throw InvalidArgument("FTM probabilities must be in [0,1]");
  }
  check_range(min_figures, max_figures, 0, "figure count");
  check_range(min_figure_size, max_figure_size, 1, "figure size");
  check_range(min_texts, max_texts, 0, "text count");
  check_range(min_text_length, max_text_length, 1, "text length");
  check_range(min_glyph_scale, max_glyph_scale, 1, "glyph scale");
  if (max_glyph_scale > 4) throw InvalidArgument("glyph scale must not exceed 4");
}

std::optional<Anchor> placement_on_frame(const OverlaySpec& spec, std::size_t frame_index,
                                         std::size_t target_index) {
  const bool past = frame_index <= target_index;
  const Anchor home = anchor_of(spec.geometry);
  switch (spec.mode) {
    case TemporalMode::kStatic:
      return home;
    case TemporalMode::kAppear:
      return past ? std::nullopt : std::optional<Anchor>(home);
    case TemporalMode::kDisappear:
      return past ? std::optional<Anchor>(home) : std::nullopt;
    case TemporalMode::kJump:
      return past ? home : spec.jump_position.value_or(home);
  }
  return std::nullopt;
}

Sequence render_overlays(const Sequence& seq, const std::vector<OverlaySpec>& overlays) {
  Sequence out = seq;
  const std::size_t H = seq.height(), W = seq.width();
  for (const auto& spec : overlays) {
    // Rasterize once per distinct placement.
    std::optional<Anchor> cached_at;
    std::optional<RasterizedOverlay> cached;
    for (std::size_t t = 0; t < seq.length(); ++t) {
      const auto at = placement_on_frame(spec, t, seq.roles().target);
      if (!at) continue;
      if (!cached || !(cached_at == at)) {
        cached = rasterize_overlay(spec, H, W, *at);
        cached_at = at;
      }
      composite(out.mutable_frame(t), cached->support, spec.color);
    }
  }
  return out;
}

std::pair<Sequence, std::vector<OverlaySpec>> apply_figure_mixing(const Sequence& seq, Rng& rng,
                                                                  const FtmParams& params) {
  require_septuplet(seq);
  std::vector<OverlaySpec> overlays;
  const auto count = rng.uniform_int(params.min_figures, params.max_figures);
  for (long i = 0; i < count; ++i) {
    overlays.push_back(sample_figure(rng, params, seq.height(), seq.width()));
  }
  return {render_overlays(seq, overlays), std::move(overlays)};
}

std::pair<Sequence, std::vector<OverlaySpec>> apply_text_mixing(const Sequence& seq, Rng& rng,
                                                                const FtmParams& params) {
  require_septuplet(seq);
  std::vector<OverlaySpec> overlays;
  const auto count = rng.uniform_int(params.min_texts, params.max_texts);
  for (long i = 0; i < count; ++i) {
    if (auto spec = sample_text(rng, params, seq.height(), seq.width())) {
      overlays.push_back(std::move(*spec));
    }
  }
  return {render_overlays(seq, overlays), std::move(overlays)};
}

Mask derive_dgt(const AugmentationRecord& record, std::size_t height, std::size_t width,
                std::size_t target_index) {
  Mask dgt(height, width);
  auto out = dgt.data();
  for (const auto& spec : record.overlays) {
    const auto at = placement_on_frame(spec, target_index, target_index);
    if (!at) continue;
    const auto raster = rasterize_overlay(spec, height, width, *at);
    const auto s = raster.support.data();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == 1.0) out[i] = 1.0;
    }
  }
  return dgt;
}

AugmentedSample apply_ftm(const Sequence& seq, std::uint64_t seed, const FtmParams& params) {
  require_septuplet(seq);
  params.validate();
  Rng rng(seed);
  AugmentationRecord record;
  record.seed = seed;
  // Both gates are always drawn so the stream layout does not depend on
  // their outcome.
  record.fm_applied = rng.bernoulli(params.p_fm);
  record.tm_applied = rng.bernoulli(params.p_tm);

  Sequence augmented = seq;
  if (record.fm_applied) {
    auto [out, figs] = apply_figure_mixing(augmented, rng, params);
    augmented = std::move(out);
    record.overlays.insert(record.overlays.end(), figs.begin(), figs.end());
  }
  if (record.tm_applied) {
    auto [out, texts] = apply_text_mixing(augmented, rng, params);
    augmented = std::move(out);
    record.overlays.insert(record.overlays.end(), texts.begin(), texts.end());
  }
  Mask dgt = derive_dgt(record, seq.height(), seq.width(), seq.roles().target);
  return {seq, std::move(augmented), std::move(record), std::move(dgt)};
}

Sequence replay(const Sequence& original, const AugmentationRecord& record) {
  return render_overlays(original, record.overlays);
}

void to_json(nlohmann::json& j, const FtmParams& p) {
  j = {{"p_fm", p.p_fm},
       {"p_tm", p.p_tm},
       {"figures", {p.min_figures, p.max_figures}},
       {"figure_size", {p.min_figure_size, p.max_figure_size}},
       {"texts", {p.min_texts, p.max_texts}},
       {"text_length", {p.min_text_length, p.max_text_length}},
       {"glyph_scale", {p.min_glyph_scale, p.max_glyph_scale}}};
}

void from_json(const nlohmann::json& j, FtmParams& p) {
  auto range = [&](const char* key, int& lo, int& hi) {
    if (j.contains(key)) {
      lo = j.at(key).at(0).get<int>();
      hi = j.at(key).at(1).get<int>();
    }
  };
  p.p_fm = j.value("p_fm", p.p_fm);
  p.p_tm = j.value("p_tm", p.p_tm);
  range("figures", p.min_figures, p.max_figures);
  range("figure_size", p.min_figure_size, p.max_figure_size);
  range("texts", p.min_texts, p.max_texts);
  range("text_length", p.min_text_length, p.max_text_length);
  range("glyph_scale", p.min_glyph_scale, p.max_glyph_scale);
}

void to_json(nlohmann::json& j, const AugmentationRecord& r) {
  j = {{"seed", r.seed},
       {"fm_applied", r.fm_applied},
       {"tm_applied", r.tm_applied},
       {"overlays", r.overlays}};
}

void from_json(const nlohmann::json& j, AugmentationRecord& r) {
  r.seed = j.at("seed").get<std::uint64_t>();
  r.fm_applied = j.at("fm_applied").get<bool>();
  r.tm_applied = j.at("tm_applied").get<bool>();
  r.overlays = j.at("overlays").get<std::vector<OverlaySpec>>();
}

}  // namespace dvfi
