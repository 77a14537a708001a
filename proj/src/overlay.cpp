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
#include "dvfi/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "dvfi/error.hpp"
#include "dvfi/font.hpp"

namespace dvfi {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Geometry translated(const Geometry& g, const Anchor& at) {
  const Anchor from = anchor_of(g);
  const double dr = at.row - from.row;
  const double dc = at.col - from.col;
  return std::visit(
      overloaded{
          [&](RectGeometry r) -> Geometry {
            r.top += std::lround(dr);
            r.left += std::lround(dc);
            return r;
          },
          [&](CircleGeometry c) -> Geometry {
            c.center = {c.center.row + dr, c.center.col + dc};
            return c;
          },
          [&](LineGeometry l) -> Geometry {
            l.start = {l.start.row + dr, l.start.col + dc};
            l.end = {l.end.row + dr, l.end.col + dc};
            return l;
          },
          [&](TextGeometry t) -> Geometry {
            t.top += std::lround(dr);
            t.left += std::lround(dc);
            return t;
          },
      },
      g);
}

double segment_distance_sq(double pr, double pc, const LineGeometry& l) {
  const double vr = l.end.row - l.start.row;
  const double vc = l.end.col - l.start.col;
  const double len_sq = vr * vr + vc * vc;
  double t = 0.0;
  if (len_sq > 0.0) {
    t = ((pr - l.start.row) * vr + (pc - l.start.col) * vc) / len_sq;
    t = std::clamp(t, 0.0, 1.0);
  }
  const double dr = pr - (l.start.row + t * vr);
  const double dc = pc - (l.start.col + t * vc);
  return dr * dr + dc * dc;
}

void fill_block(Mask& m, long top, long left, long h, long w) {
  const long H = static_cast<long>(m.height());
  const long W = static_cast<long>(m.width());
  const long r0 = std::max(top, 0L), r1 = std::min(top + h, H);
  const long c0 = std::max(left, 0L), c1 = std::min(left + w, W);
  for (long r = r0; r < r1; ++r) {
    for (long c = c0; c < c1; ++c) {
      m.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 1.0;
    }
  }
}

Mask render_support(const Geometry& g, std::size_t height, std::size_t width) {
  Mask m(height, width);
  std::visit(
      overloaded{
          [&](const RectGeometry& r) { fill_block(m, r.top, r.left, r.height, r.width); },
          [&](const CircleGeometry& c) {
            const double rr = c.radius * c.radius;
            for (std::size_t r = 0; r < height; ++r) {
              for (std::size_t col = 0; col < width; ++col) {
                const double dr = static_cast<double>(r) + 0.5 - c.center.row;
                const double dc = static_cast<double>(col) + 0.5 - c.center.col;
                if (dr * dr + dc * dc <= rr) m.at(r, col) = 1.0;
              }
            }
          },
          [&](const LineGeometry& l) {
            const double half = 0.5 * l.thickness;
            for (std::size_t r = 0; r < height; ++r) {
              for (std::size_t col = 0; col < width; ++col) {
                const double d = segment_distance_sq(static_cast<double>(r) + 0.5,
                                                     static_cast<double>(col) + 0.5, l);
                if (d <= half * half) m.at(r, col) = 1.0;
              }
            }
          },
          [&](const TextGeometry& t) {
            const long s = t.scale;
            for (std::size_t i = 0; i < t.text.size(); ++i) {
              const auto g = font::glyph(t.text[i]);
              if (!g) continue;
              const long x0 = t.left + static_cast<long>(i) * font::kAdvance * s;
              for (int gy = 0; gy < font::kGlyphHeight; ++gy) {
                for (int gx = 0; gx < font::kGlyphWidth; ++gx) {
                  if (font::glyph_bit(*g, gy, gx)) fill_block(m, t.top + gy * s, x0 + gx * s, s, s);
                }
              }
            }
          },
      },
      g);
  return m;
}

}  // namespace

Anchor anchor_of(const Geometry& g) {
  return std::visit(
      overloaded{
          [](const RectGeometry& r) {
            return Anchor{static_cast<double>(r.top), static_cast<double>(r.left)};
          },
          [](const CircleGeometry& c) { return c.center; },
          [](const LineGeometry& l) { return l.start; },
          [](const TextGeometry& t) {
            return Anchor{static_cast<double>(t.top), static_cast<double>(t.left)};
          },
      },
      g);
}

std::pair<long, long> text_extent(const TextGeometry& t) {
  const long n = static_cast<long>(t.text.size());
  if (n == 0) return {0, 0};
  return {static_cast<long>(font::kGlyphHeight) * t.scale,
          (n * font::kAdvance - 1) * t.scale};
}

void validate(const OverlaySpec& spec, std::size_t height, std::size_t width) {
  if (spec.is_figure() && spec.mode != TemporalMode::kStatic) {
    throw InvalidArgument("figures must use the STATIC temporal mode");
  }
  if ((spec.mode == TemporalMode::kJump) != spec.jump_position.has_value()) {
    throw InvalidArgument("jump_position must be present exactly when mode is JUMP");
  }
  for (double c : spec.color) {
    if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("overlay color outside [0,1]");
  }
  if (const auto* t = std::get_if<TextGeometry>(&spec.geometry)) {
    if (t->text.empty()) throw InvalidArgument("overlay text is empty");
    for (char c : t->text) {
      if (!font::glyph(c)) throw InvalidArgument(std::string("unsupported text character '") + c + "'");
    }
    if (t->scale < 1 || t->scale > 4) throw InvalidArgument("glyph scale must be in 1..4");
  }
  if (const auto* r = std::get_if<RectGeometry>(&spec.geometry)) {
    if (r->height <= 0 || r->width <= 0) throw InvalidArgument("rectangle must have positive size");
  }
  if (const auto* c = std::get_if<CircleGeometry>(&spec.geometry)) {
    if (!(c->radius > 0.0)) throw InvalidArgument("circle radius must be positive");
  }
  if (const auto* l = std::get_if<LineGeometry>(&spec.geometry)) {
    if (!(l->thickness > 0.0)) throw InvalidArgument("line thickness must be positive");
  }
  if (render_support(spec.geometry, height, width).popcount() == 0) {
    throw InvalidArgument("overlay lies entirely outside the frame");
  }
  if (spec.jump_position &&
      render_support(translated(spec.geometry, *spec.jump_position), height, width).popcount() == 0) {
    throw InvalidArgument("overlay jump position lies entirely outside the frame");
  }
}

RasterizedOverlay rasterize_overlay(const OverlaySpec& spec, std::size_t height, std::size_t width,
                                    std::optional<Anchor> at) {
  const Geometry g = at ? translated(spec.geometry, *at) : spec.geometry;
  Mask support = render_support(g, height, width);
  if (support.popcount() == 0) throw InvalidArgument("overlay lies entirely outside the frame");
  Frame layer(height, width);
  composite(layer, support, spec.color);
  return {std::move(support), std::move(layer)};
}

void composite(Frame& frame, const Mask& support, const Color& color) {
  if (!support.same_dims(frame)) throw DimensionError("support and frame dims differ");
  const auto m = support.data();
  auto px = frame.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 1.0) {
      for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) px[i * Frame::kChannels + ch] = color[ch];
    }
  }
}

const char* to_string(TemporalMode m) {
  switch (m) {
    case TemporalMode::kStatic: return "STATIC";
    case TemporalMode::kAppear: return "APPEAR";
    case TemporalMode::kDisappear: return "DISAPPEAR";
    case TemporalMode::kJump: return "JUMP";
  }
  return "?";
}

const char* to_string(OverlayKind k) {
  switch (k) {
    case OverlayKind::kRectangle: return "rectangle";
    case OverlayKind::kCircle: return "circle";
    case OverlayKind::kLine: return "line";
    case OverlayKind::kText: return "text";
  }
  return "?";
}

namespace {

TemporalMode mode_from_string(const std::string& s) {
  for (auto m : {TemporalMode::kStatic, TemporalMode::kAppear, TemporalMode::kDisappear,
                 TemporalMode::kJump}) {
    if (s == to_string(m)) return m;
  }
  throw InvalidArgument("unknown temporal mode '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const Anchor& a) { j = nlohmann::json::array({a.row, a.col}); }

void from_json(const nlohmann::json& j, Anchor& a) {
  a.row = j.at(0).get<double>();
  a.col = j.at(1).get<double>();
}

void to_json(nlohmann::json& j, const OverlaySpec& s) {
  j = nlohmann::json::object();
  j["kind"] = to_string(s.kind());
  j["color"] = s.color;
  j["temporal_mode"] = to_string(s.mode);
  std::visit(overloaded{
                 [&](const RectGeometry& r) {
                   j["geometry"] = {{"top", r.top}, {"left", r.left}, {"height", r.height},
                                    {"width", r.width}};
                 },
                 [&](const CircleGeometry& c) {
                   j["geometry"] = {{"center", c.center}, {"radius", c.radius}};
                 },
                 [&](const LineGeometry& l) {
                   j["geometry"] = {{"start", l.start}, {"end", l.end}, {"thickness", l.thickness}};
                 },
                 [&](const TextGeometry& t) {
                   j["geometry"] = {{"text", t.text}, {"scale", t.scale}, {"top", t.top},
                                    {"left", t.left}};
                 },
             },
             s.geometry);
  if (s.jump_position) j["jump_position"] = *s.jump_position;
}

void from_json(const nlohmann::json& j, OverlaySpec& s) {
  const auto kind = j.at("kind").get<std::string>();
  const auto& g = j.at("geometry");
  if (kind == "rectangle") {
    s.geometry = RectGeometry{g.at("top").get<long>(), g.at("left").get<long>(),
                              g.at("height").get<long>(), g.at("width").get<long>()};
  } else if (kind == "circle") {
    s.geometry = CircleGeometry{g.at("center").get<Anchor>(), g.at("radius").get<double>()};
  } else if (kind == "line") {
    s.geometry = LineGeometry{g.at("start").get<Anchor>(), g.at("end").get<Anchor>(),
                              g.at("thickness").get<double>()};
  } else if (kind == "text") {
    s.geometry = TextGeometry{g.at("text").get<std::string>(), g.at("scale").get<int>(),
                              g.at("top").get<long>(), g.at("left").get<long>()};
  } else {
    throw InvalidArgument("unknown overlay kind '" + kind + "'");
  }
  s.color = j.at("color").get<Color>();
  s.mode = mode_from_string(j.at("temporal_mode").get<std::string>());
  if (j.contains("jump_position")) {
    s.jump_position = j.at("jump_position").get<Anchor>();
  } else {
    s.jump_position.reset();
  }
}

}  // namespace dvfi
