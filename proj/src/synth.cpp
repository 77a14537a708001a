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
#include "dvfi/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "dvfi/error.hpp"
#include "dvfi/image_io.hpp"
#include "dvfi/rng.hpp"

namespace fs = std::filesystem;

namespace dvfi {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr int kMaxSpeed = 8;

long wrap(long v, long n) {
  const long r = v % n;
  return r < 0 ? r + n : r;
}

TextGeometry counter_geometry(const DigitCounter& c, std::size_t t, std::size_t target) {
  return TextGeometry{counter_text(c, t, target), c.scale, c.top, c.left};
}

TextGeometry text_geometry(const JumpingText& j, std::size_t t) {
  const Anchor& a = j.positions.at(t);
  return TextGeometry{j.text, j.scale, std::lround(a.row), std::lround(a.col)};
}

bool inside(long top, long left, long h, long w, std::size_t H, std::size_t W) {
  return top >= 0 && left >= 0 && top + h <= static_cast<long>(H) &&
         left + w <= static_cast<long>(W);
}

// Geometry and color of an overlay as drawn on frame t.
std::pair<Geometry, Color> overlay_on_frame(const SynthOverlay& o, std::size_t t,
                                            std::size_t target) {
  return std::visit(
      overloaded{
          [](const HudRect& h) { return std::pair<Geometry, Color>{h.rect, h.color}; },
          [&](const DigitCounter& c) {
            return std::pair<Geometry, Color>{counter_geometry(c, t, target), c.color};
          },
          [&](const JumpingText& j) {
            // Target repeats the previous frame's placement.
            const std::size_t src = t == target ? target - 1 : t;
            return std::pair<Geometry, Color>{text_geometry(j, src), j.color};
          },
      },
      o);
}

Mask overlay_support(const SceneSpec& spec, std::size_t t) {
  const std::size_t target = kSeptupletTarget;
  Mask m(spec.height, spec.width);
  for (const auto& o : spec.overlays) {
    auto [g, color] = overlay_on_frame(o, t, target);
    OverlaySpec os{std::move(g), color, TemporalMode::kStatic, std::nullopt};
    const auto r = rasterize_overlay(os, spec.height, spec.width);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (r.support.data()[i] == 1.0) m.data()[i] = 1.0;
    }
  }
  return m;
}

Color vivid_color(Rng& rng) {
  Color c{};
  for (auto& v : c) v = static_cast<double>(rng.uniform_int(0, 1));
  return c;
}

std::vector<SynthOverlay> sample_overlays(Rng& rng, const SynthParams& p) {
  const long H = static_cast<long>(p.height), W = static_cast<long>(p.width);
  const int s = p.glyph_scale;
  std::vector<SynthOverlay> out;

  const auto huds = rng.uniform_int(p.min_huds, p.max_huds);
  for (long i = 0; i < huds; ++i) {
    const long h = std::min<long>(rng.uniform_int(6, 14), H);
    const long w = std::min<long>(rng.uniform_int(10, 24), W);
    out.push_back(HudRect{{rng.uniform_int(0, H - h), rng.uniform_int(0, W - w), h, w},
                          vivid_color(rng)});
  }

  const auto counters = rng.uniform_int(p.min_counters, p.max_counters);
  for (long i = 0; i < counters; ++i) {
    DigitCounter c;
    c.scale = s;
    c.digits = static_cast<int>(rng.uniform_int(2, 3));
    while (c.digits > 1 && (c.digits * 6 - 1) * s > W) --c.digits;
    const auto [th, tw] = text_extent({std::string(static_cast<std::size_t>(c.digits), '0'), s, 0, 0});
    if (th > H || tw > W) continue;
    long limit = 1;
    for (int d = 0; d < c.digits; ++d) limit *= 10;
    c.start_value = rng.uniform_int(0, limit - 1);
    c.top = rng.uniform_int(0, H - th);
    c.left = rng.uniform_int(0, W - tw);
    c.color = vivid_color(rng);
    out.push_back(c);
  }

  static constexpr std::string_view kChars =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  const auto texts = rng.uniform_int(p.min_texts, p.max_texts);
  for (long i = 0; i < texts; ++i) {
    JumpingText j;
    j.scale = s;
    long len = rng.uniform_int(2, 4);
    while (len > 1 && (len * 6 - 1) * s > W) --len;
    for (long k = 0; k < len; ++k) {
      j.text.push_back(kChars[static_cast<std::size_t>(rng.uniform_int(0, kChars.size() - 1))]);
    }
    const auto [th, tw] = text_extent({j.text, s, 0, 0});
    if (th > H || tw > W) continue;
    j.positions.resize(kSeptupletLength);
    for (std::size_t t = 0; t < kSeptupletLength; ++t) {
      j.positions[t] = {static_cast<double>(rng.uniform_int(0, H - th)),
                        static_cast<double>(rng.uniform_int(0, W - tw))};
    }
    j.positions[kSeptupletTarget] = j.positions[kSeptupletTarget - 1];
    j.color = vivid_color(rng);
    out.push_back(std::move(j));
  }
  return out;
}

void check_color(const Color& c) {
  for (double v : c) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("overlay color outside [0,1]");
  }
}

}  // namespace

std::string counter_text(const DigitCounter& c, std::size_t t, std::size_t target) {
  const std::size_t shown = t == target && t > 0 ? t - 1 : t;
  long modulus = 1;
  for (int d = 0; d < c.digits; ++d) modulus *= 10;
  const long value = (c.start_value + static_cast<long>(shown)) % modulus;
  std::string s = std::to_string(value);
  return std::string(static_cast<std::size_t>(c.digits) - std::min(s.size(), static_cast<std::size_t>(c.digits)), '0') + s;
}

void SceneSpec::validate() const {
  if (height == 0 || width == 0) throw InvalidArgument("scene dims must be positive");
  if (frame_count != kSeptupletLength) throw InvalidArgument("scenes have exactly 7 frames");
  if (std::abs(velocity_x) > kMaxSpeed || std::abs(velocity_y) > kMaxSpeed) {
    throw InvalidArgument("background velocity components must be within +-8 px/frame");
  }
  for (const auto& o : overlays) {
    std::visit(overloaded{
                   [&](const HudRect& h) {
                     check_color(h.color);
                     if (h.rect.height <= 0 || h.rect.width <= 0 ||
                         !inside(h.rect.top, h.rect.left, h.rect.height, h.rect.width, height, width)) {
                       throw InvalidArgument("HUD rectangle out of bounds");
                     }
                   },
                   [&](const DigitCounter& c) {
                     check_color(c.color);
                     if (c.digits < 1 || c.scale < 1 || c.scale > 4) {
                       throw InvalidArgument("invalid digit counter");
                     }
                     const auto [th, tw] = text_extent(counter_geometry(c, 0, kSeptupletTarget));
                     if (!inside(c.top, c.left, th, tw, height, width)) {
                       throw InvalidArgument("digit counter out of bounds");
                     }
                   },
                   [&](const JumpingText& j) {
                     check_color(j.color);
                     if (j.positions.size() != frame_count || j.text.empty() || j.scale < 1 ||
                         j.scale > 4) {
                       throw InvalidArgument("invalid jumping text");
                     }
                     for (std::size_t t = 0; t < frame_count; ++t) {
                       const auto g = text_geometry(j, t);
                       const auto [th, tw] = text_extent(g);
                       if (!inside(g.top, g.left, th, tw, height, width)) {
                         throw InvalidArgument("jumping text out of bounds on frame " +
                                               std::to_string(t + 1));
                       }
                     }
                   },
               },
               o);
  }
}

Frame render_background(const SceneSpec& spec, std::size_t t) {
  const std::size_t H = spec.height, W = spec.width;
  // Base texture, quantized to 8 bits so written frames reproduce it exactly.
  std::vector<double> base(H * W * Frame::kChannels);
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) {
        double v = spec.texture.base[ch];
        for (const auto& w : spec.texture.waves) {
          const double arg = 2.0 * std::numbers::pi *
                                 (w.cycles_y * static_cast<double>(r) / static_cast<double>(H) +
                                  w.cycles_x * static_cast<double>(c) / static_cast<double>(W)) +
                             w.phase;
          v += w.amplitude[ch] * std::cos(arg);
        }
        base[(r * W + c) * Frame::kChannels + ch] = quantize(v) / 255.0;
      }
    }
  }
  const long dy = static_cast<long>(t) * spec.velocity_y;
  const long dx = static_cast<long>(t) * spec.velocity_x;
  std::vector<double> out(base.size());
  for (std::size_t r = 0; r < H; ++r) {
    const auto sr = static_cast<std::size_t>(wrap(static_cast<long>(r) - dy, static_cast<long>(H)));
    for (std::size_t c = 0; c < W; ++c) {
      const auto sc = static_cast<std::size_t>(wrap(static_cast<long>(c) - dx, static_cast<long>(W)));
      for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) {
        out[(r * W + c) * Frame::kChannels + ch] = base[(sr * W + sc) * Frame::kChannels + ch];
      }
    }
  }
  return Frame(H, W, std::move(out));
}

SynthSample generate_sequence(const SceneSpec& spec) {
  spec.validate();
  std::vector<Frame> frames;
  std::vector<Mask> masks;
  for (std::size_t t = 0; t < spec.frame_count; ++t) {
    Frame f = render_background(spec, t);
    Mask m(spec.height, spec.width);
    for (const auto& o : spec.overlays) {
      auto [g, color] = overlay_on_frame(o, t, kSeptupletTarget);
      OverlaySpec os{std::move(g), color, TemporalMode::kStatic, std::nullopt};
      const auto r = rasterize_overlay(os, spec.height, spec.width);
      composite(f, r.support, color);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (r.support.data()[i] == 1.0) m.data()[i] = 1.0;
      }
    }
    frames.push_back(std::move(f));
    masks.push_back(std::move(m));
  }
  return {Sequence(std::move(frames), septuplet_roles(4)), std::move(masks), spec};
}

void SynthParams::validate() const {
  if (height < 8 || width < 8) throw InvalidArgument("synthetic frames must be at least 8x8");
  if (velocities.empty()) throw InvalidArgument("velocity list is empty");
  for (int v : velocities) {
    if (std::abs(v) > kMaxSpeed) throw InvalidArgument("velocity out of range");
  }
  if (!(p_overlays >= 0.0 && p_overlays <= 1.0)) throw InvalidArgument("p_overlays outside [0,1]");
  if (!(min_coverage >= 0.0 && min_coverage < 1.0)) throw InvalidArgument("min_coverage outside [0,1)");
  if (glyph_scale < 1 || glyph_scale > 4) throw InvalidArgument("glyph scale must be in 1..4");
  if (waves < 0 || !(texture_amplitude >= 0.0 && texture_amplitude <= 0.5)) {
    throw InvalidArgument("invalid texture parameters");
  }
  if (min_huds < 0 || max_huds < min_huds || min_counters < 0 || max_counters < min_counters ||
      min_texts < 0 || max_texts < min_texts) {
    throw InvalidArgument("invalid overlay count range");
  }
}

SceneSpec sample_scene(std::uint64_t seed, const SynthParams& p) {
  p.validate();
  Rng rng(seed);
  SceneSpec spec;
  spec.seed = seed;
  spec.height = p.height;
  spec.width = p.width;
  const bool only_zero =
      std::all_of(p.velocities.begin(), p.velocities.end(), [](int v) { return v == 0; });
  do {
    spec.velocity_x = p.velocities[static_cast<std::size_t>(rng.uniform_int(0, p.velocities.size() - 1))];
    spec.velocity_y = p.velocities[static_cast<std::size_t>(rng.uniform_int(0, p.velocities.size() - 1))];
  } while (!only_zero && spec.velocity_x == 0 && spec.velocity_y == 0);

  for (int i = 0; i < p.waves; ++i) {
    Wave w;
    do {
      w.cycles_y = static_cast<int>(rng.uniform_int(-2, 2));
      w.cycles_x = static_cast<int>(rng.uniform_int(0, 2));
    } while (w.cycles_y == 0 && w.cycles_x == 0);
    w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (auto& a : w.amplitude) a = rng.uniform(0.0, p.texture_amplitude / p.waves);
    spec.texture.waves.push_back(w);
  }

  if (rng.bernoulli(p.p_overlays)) {
    const double pixels = static_cast<double>(p.height * p.width);
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) {
        throw InvalidArgument("could not reach the requested overlay coverage");
      }
      spec.overlays = sample_overlays(rng, p);
      const auto cover = overlay_support(spec, kSeptupletTarget).popcount();
      if (static_cast<double>(cover) >= p.min_coverage * pixels) break;
    }
  }
  return spec;
}

std::string sample_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06zu", index);
  return buf;
}

Manifest generate_dataset(std::size_t n, std::uint64_t seed, const SynthParams& params,
                          const fs::path& root) {
  if (n == 0) throw InvalidArgument("dataset size must be >= 1");
  params.validate();
  fs::create_directories(root);
  Manifest manifest{"synthetic", {}};
  for (std::size_t i = 0; i < n; ++i) {
    const SceneSpec spec = sample_scene(derive_seed(seed, i), params);
    const SynthSample sample = generate_sequence(spec);
    const std::string id = sample_id(i);
    write_sample_dir(root / id, sample.sequence, sample.target_mask());
    write_file_atomic(root / id / "spec.json", dump_json(spec));
    const double coverage = static_cast<double>(sample.target_mask().popcount()) /
                            static_cast<double>(spec.height * spec.width);
    manifest.samples.push_back(
        {id, id,
         {{"seed", spec.seed},
          {"velocity", {spec.velocity_x, spec.velocity_y}},
          {"coverage", coverage}}});
  }
  write_manifest(root, manifest);
  return manifest;
}

void to_json(nlohmann::json& j, const SceneSpec& s) {
  auto waves = nlohmann::json::array();
  for (const auto& w : s.texture.waves) {
    waves.push_back({{"cycles", {w.cycles_y, w.cycles_x}}, {"phase", w.phase}, {"amplitude", w.amplitude}});
  }
  auto overlays = nlohmann::json::array();
  for (const auto& o : s.overlays) {
    std::visit(overloaded{
                   [&](const HudRect& h) {
                     overlays.push_back({{"type", "hud_rect"},
                                         {"rect", {h.rect.top, h.rect.left, h.rect.height, h.rect.width}},
                                         {"color", h.color}});
                   },
                   [&](const DigitCounter& c) {
                     overlays.push_back({{"type", "digit_counter"},
                                         {"top", c.top},
                                         {"left", c.left},
                                         {"scale", c.scale},
                                         {"digits", c.digits},
                                         {"start_value", c.start_value},
                                         {"color", c.color}});
                   },
                   [&](const JumpingText& t) {
                     overlays.push_back({{"type", "jumping_text"},
                                         {"text", t.text},
                                         {"scale", t.scale},
                                         {"positions", t.positions},
                                         {"color", t.color}});
                   },
               },
               o);
  }
  j = {{"height", s.height},
       {"width", s.width},
       {"frame_count", s.frame_count},
       {"velocity", {s.velocity_x, s.velocity_y}},
       {"texture", {{"base", s.texture.base}, {"waves", waves}}},
       {"overlays", overlays},
       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SceneSpec& s) {
  s.height = j.at("height").get<std::size_t>();
  s.width = j.at("width").get<std::size_t>();
  s.frame_count = j.at("frame_count").get<std::size_t>();
  s.velocity_x = j.at("velocity").at(0).get<int>();
  s.velocity_y = j.at("velocity").at(1).get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.texture.base = j.at("texture").at("base").get<Color>();
  s.texture.waves.clear();
  for (const auto& w : j.at("texture").at("waves")) {
    s.texture.waves.push_back({w.at("cycles").at(0).get<int>(), w.at("cycles").at(1).get<int>(),
                               w.at("phase").get<double>(), w.at("amplitude").get<Color>()});
  }
  s.overlays.clear();
  for (const auto& o : j.at("overlays")) {
    const auto type = o.at("type").get<std::string>();
    if (type == "hud_rect") {
      const auto& r = o.at("rect");
      s.overlays.push_back(HudRect{{r.at(0).get<long>(), r.at(1).get<long>(), r.at(2).get<long>(),
                                    r.at(3).get<long>()},
                                   o.at("color").get<Color>()});
    } else if (type == "digit_counter") {
      s.overlays.push_back(DigitCounter{o.at("top").get<long>(), o.at("left").get<long>(),
                                        o.at("scale").get<int>(), o.at("digits").get<int>(),
                                        o.at("start_value").get<long>(), o.at("color").get<Color>()});
    } else if (type == "jumping_text") {
      s.overlays.push_back(JumpingText{o.at("text").get<std::string>(), o.at("scale").get<int>(),
                                       o.at("positions").get<std::vector<Anchor>>(),
                                       o.at("color").get<Color>()});
    } else {
      throw InvalidArgument("unknown synthetic overlay type '" + type + "'");
    }
  }
}

void to_json(nlohmann::json& j, const SynthParams& p) {
  j = {{"height", p.height},
       {"width", p.width},
       {"velocities", p.velocities},
       {"waves", p.waves},
       {"texture_amplitude", p.texture_amplitude},
       {"p_overlays", p.p_overlays},
       {"huds", {p.min_huds, p.max_huds}},
       {"counters", {p.min_counters, p.max_counters}},
       {"texts", {p.min_texts, p.max_texts}},
       {"glyph_scale", p.glyph_scale},
       {"min_coverage", p.min_coverage}};
}

void from_json(const nlohmann::json& j, SynthParams& p) {
  auto range = [&](const char* key, int& lo, int& hi) {
    if (j.contains(key)) {
      lo = j.at(key).at(0).get<int>();
      hi = j.at(key).at(1).get<int>();
    }
  };
  p.height = j.value("height", p.height);
  p.width = j.value("width", p.width);
  p.velocities = j.value("velocities", p.velocities);
  p.waves = j.value("waves", p.waves);
  p.texture_amplitude = j.value("texture_amplitude", p.texture_amplitude);
  p.p_overlays = j.value("p_overlays", p.p_overlays);
  range("huds", p.min_huds, p.max_huds);
  range("counters", p.min_counters, p.max_counters);
  range("texts", p.min_texts, p.max_texts);
  p.glyph_scale = j.value("glyph_scale", p.glyph_scale);
  p.min_coverage = j.value("min_coverage", p.min_coverage);
}

}  // namespace dvfi
