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
#include "doctest.h"

#include "dvfi/dataset.hpp"
#include "dvfi/error.hpp"
#include "dvfi/font.hpp"
#include "dvfi/image_io.hpp"
#include "dvfi/metrics.hpp"
#include "dvfi/synth.hpp"
#include "support.hpp"

using namespace dvfi;
using dvfi::testing::TempDir;

namespace {

SceneSpec textured(int vx, int vy) {
  SceneSpec s;
  s.height = 32;
  s.width = 40;
  s.velocity_x = vx;
  s.velocity_y = vy;
  s.texture.base = {0.5, 0.4, 0.6};
  s.texture.waves = {{1, 2, 0.3, {0.2, 0.1, 0.15}}, {-1, 1, 1.1, {0.1, 0.2, 0.05}}};
  return s;
}

// Frame shifted by (dx, dy) pixels with wrap-around: out(r, c) = in(r-dy, c-dx).
Frame shifted(const Frame& in, long dx, long dy) {
  const long H = static_cast<long>(in.height()), W = static_cast<long>(in.width());
  Frame out(in.height(), in.width());
  for (long r = 0; r < H; ++r) {
    for (long c = 0; c < W; ++c) {
      const long sr = ((r - dy) % H + H) % H, sc = ((c - dx) % W + W) % W;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) =
            in.at(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc), ch);
      }
    }
  }
  return out;
}

// Support of text drawn straight from the font bitmaps, one blank column
// (scaled) between glyphs.
Mask text_support(const std::string& text, int scale, long top, long left, std::size_t H, std::size_t W) {
  Mask m(H, W);
  for (std::size_t k = 0; k < text.size(); ++k) {
    const auto g = font::glyph(text[k]);
    REQUIRE(g.has_value());
    for (int gr = 0; gr < 7; ++gr) {
      for (int gc = 0; gc < 5; ++gc) {
        if (!font::glyph_bit(*g, gr, gc)) continue;
        for (int dy = 0; dy < scale; ++dy) {
          for (int dx = 0; dx < scale; ++dx) {
            const long r = top + gr * scale + dy;
            const long c = left + static_cast<long>(k) * 6 * scale + gc * scale + dx;
            m.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 1.0;
          }
        }
      }
    }
  }
  return m;
}

bool trees_equal(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::vector<std::filesystem::path> fa, fb;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) fa.push_back(std::filesystem::relative(e.path(), a));
  }
  for (const auto& e : std::filesystem::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) fb.push_back(std::filesystem::relative(e.path(), b));
  }
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb) return false;
  for (const auto& p : fa) {
    if (read_file_bytes(a / p) != read_file_bytes(b / p)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("background motion") {
  SUBCASE("static scene without overlays has identical frames") {
    const auto s = generate_sequence(textured(0, 0));
    for (std::size_t t = 1; t < 7; ++t) CHECK(s.sequence.frame(t) == s.sequence.frame(0));
    CHECK(s.target_mask().popcount() == 0);
  }

  SUBCASE("velocity (2,0)") {
    const auto s = generate_sequence(textured(2, 0));
    const Frame& f3 = s.sequence.frame(2);
    const Frame& f4 = s.sequence.frame(3);
    const Frame& f5 = s.sequence.frame(4);
    CHECK(f4 == shifted(f3, 2, 0));
    CHECK(f5 == shifted(f4, 2, 0));
    // Average motion between frames 3 and 5 is (4,0); half of it lands on frame 4.
    CHECK(f4 == shifted(f5, -2, 0));
    for (std::size_t t = 0; t < 7; ++t) {
      CHECK(s.sequence.frame(t) == shifted(s.sequence.frame(0), 2 * static_cast<long>(t), 0));
    }
  }

  SUBCASE("even velocities give an exact midpoint") {
    for (auto [vx, vy] : {std::pair{2, 0}, {0, -4}, {4, 2}, {-8, 8}, {-2, -6}}) {
      const SceneSpec spec = textured(vx, vy);
      const Frame prev = render_background(spec, 2);
      const Frame mid = shifted(prev, vx, vy);
      CHECK(psnr(mid, render_background(spec, 3)) == 100.0);
      CHECK(mid == render_background(spec, 3));
    }
  }

  SUBCASE("background values are 8-bit exact") {
    const Frame f = render_background(textured(2, 2), 1);
    for (double v : f.data()) CHECK(std::round(v * 255.0) / 255.0 == v);
  }
}

TEST_CASE("overlays") {
  SceneSpec spec = textured(2, 0);

  SUBCASE("static HUD is identical on every frame and fills the target mask") {
    spec.overlays = {HudRect{{3, 4, 6, 10}, {1.0, 0.0, 1.0}}};
    const auto s = generate_sequence(spec);
    Mask expect(32, 40);
    for (std::size_t r = 3; r < 9; ++r) {
      for (std::size_t c = 4; c < 14; ++c) expect.at(r, c) = 1.0;
    }
    for (std::size_t t = 0; t < 7; ++t) {
      CHECK(s.masks[t] == expect);
      for (std::size_t r = 3; r < 9; ++r) {
        for (std::size_t c = 4; c < 14; ++c) {
          CHECK(s.sequence.frame(t).at(r, c, 0) == 1.0);
          CHECK(s.sequence.frame(t).at(r, c, 1) == 0.0);
        }
      }
    }
    CHECK(s.target_mask() == expect);
  }

  SUBCASE("digit counter increments and the target repeats frame 3") {
    const DigitCounter c{2, 2, 1, 3, 98, {1.0, 1.0, 0.0}};
    CHECK(counter_text(c, 0, 3) == "098");
    CHECK(counter_text(c, 1, 3) == "099");
    CHECK(counter_text(c, 2, 3) == "100");
    CHECK(counter_text(c, 3, 3) == "100");
    CHECK(counter_text(c, 4, 3) == "102");
    CHECK(counter_text(DigitCounter{0, 0, 1, 2, 99, {}}, 1, 3) == "00");

    spec.overlays = {c};
    const auto s = generate_sequence(spec);
    CHECK(s.masks[3] == text_support("100", 1, 2, 2, 32, 40));
    CHECK(s.masks[3] == s.masks[2]);
    CHECK(s.masks[0] == text_support("098", 1, 2, 2, 32, 40));
  }

  SUBCASE("jumping text follows its positions; the target reuses frame 3's") {
    JumpingText j{"AB", 2, {}, {0.0, 1.0, 1.0}};
    for (int t = 0; t < 7; ++t) j.positions.push_back({static_cast<double>(1 + 2 * t), static_cast<double>(3 * t)});
    j.positions[3] = {9.0, 9.0};  // ignored: the target uses positions[2]
    spec.overlays = {j};
    const auto s = generate_sequence(spec);
    for (std::size_t t = 0; t < 7; ++t) {
      const std::size_t src = t == 3 ? 2 : t;
      CHECK(s.masks[t] == text_support("AB", 2, 1 + 2 * static_cast<long>(src), 3 * static_cast<long>(src), 32, 40));
    }
  }

  SUBCASE("invalid scenes") {
    spec.velocity_x = 9;
    CHECK_THROWS_AS(generate_sequence(spec), InvalidArgument);
    spec.velocity_x = 2;
    spec.frame_count = 5;
    CHECK_THROWS_AS(generate_sequence(spec), InvalidArgument);
    spec.frame_count = 7;
    spec.overlays = {HudRect{{30, 4, 6, 10}, {1.0, 0.0, 1.0}}};
    CHECK_THROWS_AS(generate_sequence(spec), InvalidArgument);
    spec.overlays = {DigitCounter{0, 30, 1, 3, 0, {1.0, 1.0, 1.0}}};
    CHECK_THROWS_AS(generate_sequence(spec), InvalidArgument);
    JumpingText j{"X", 1, std::vector<Anchor>(7, Anchor{0, 0}), {1, 1, 1}};
    j.positions[5] = {30.0, 0.0};
    spec.overlays = {j};
    CHECK_THROWS_AS(generate_sequence(spec), InvalidArgument);
    j.positions.pop_back();
    spec.overlays = {j};
    CHECK_THROWS_AS(generate_sequence(spec), InvalidArgument);
  }
}

TEST_CASE("sampled scenes") {
  const SynthParams p;
  std::size_t covered = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const SceneSpec spec = sample_scene(seed, p);
    CHECK(spec == sample_scene(seed, p));
    CHECK((spec.velocity_x != 0 || spec.velocity_y != 0));
    CHECK(spec.velocity_x % 2 == 0);
    CHECK(spec.velocity_y % 2 == 0);
    const auto s = generate_sequence(spec);
    const Mask& m = s.target_mask();
    const double coverage = static_cast<double>(m.popcount()) / static_cast<double>(m.size());
    CHECK(coverage >= p.min_coverage);
    covered += m.popcount();

    // Copy-consistency: on the mask the target equals frame 3.
    const Frame& target = s.sequence.target();
    const Frame& prev = s.sequence.frame(2);
    std::size_t violations = 0;
    for (std::size_t r = 0; r < m.height(); ++r) {
      for (std::size_t c = 0; c < m.width(); ++c) {
        if (m.at(r, c) != 1.0) continue;
        for (std::size_t ch = 0; ch < 3; ++ch) violations += target.at(r, c, ch) != prev.at(r, c, ch);
      }
    }
    CHECK(violations == 0);

    // Mask exactness: off the mask the target is pure background.
    const Frame bg = render_background(spec, 3);
    std::size_t off = 0;
    for (std::size_t r = 0; r < m.height(); ++r) {
      for (std::size_t c = 0; c < m.width(); ++c) {
        if (m.at(r, c) == 1.0) continue;
        for (std::size_t ch = 0; ch < 3; ++ch) off += target.at(r, c, ch) != bg.at(r, c, ch);
      }
    }
    CHECK(off == 0);
    for (std::size_t t = 0; t < 7; ++t) CHECK(s.masks[t].is_binary());
  }
  CHECK(covered > 0);

  SynthParams none = p;
  none.p_overlays = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = generate_sequence(sample_scene(seed, none));
    for (const auto& m : s.masks) CHECK(m.popcount() == 0);
  }
}

TEST_CASE("params validation and JSON") {
  SynthParams p;
  CHECK_NOTHROW(p.validate());
  auto bad = [](auto mutate) {
    SynthParams q;
    mutate(q);
    CHECK_THROWS_AS(q.validate(), InvalidArgument);
  };
  bad([](SynthParams& q) { q.velocities = {}; });
  bad([](SynthParams& q) { q.velocities = {10}; });
  bad([](SynthParams& q) { q.p_overlays = 1.5; });
  bad([](SynthParams& q) { q.glyph_scale = 0; });
  bad([](SynthParams& q) { q.min_texts = 3; });
  bad([](SynthParams& q) { q.height = 4; });

  p.p_overlays = 0.25;
  p.velocities = {2, -2};
  CHECK(nlohmann::json(p).get<SynthParams>() == p);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SceneSpec s = sample_scene(seed, SynthParams{});
    CHECK(nlohmann::json(s).get<SceneSpec>() == s);
  }
}

TEST_CASE("generate_dataset") {
  TempDir dir("synth");
  SynthParams p;
  p.height = p.width = 32;

  SUBCASE("same seed, same bytes") {
    generate_dataset(1, 7, p, dir.path() / "a");
    generate_dataset(1, 7, p, dir.path() / "b");
    CHECK(trees_equal(dir.path() / "a", dir.path() / "b"));
    generate_dataset(1, 8, p, dir.path() / "c");
    CHECK(!trees_equal(dir.path() / "a", dir.path() / "c"));
  }

  SUBCASE("100 samples") {
    const Manifest m = generate_dataset(100, 3, p, dir.path() / "d");
    CHECK(m.samples.size() == 100);
    const Manifest back = read_manifest(dir.path() / "d");
    CHECK(back == m);
    CHECK(back.kind == "synthetic");
    for (const auto& e : back.samples) {
      const auto sd = dir.path() / "d" / e.dir;
      for (std::size_t k = 1; k <= 7; ++k) CHECK(std::filesystem::exists(frame_path(sd, k)));
      CHECK(std::filesystem::exists(sd / "dgt.png"));
      CHECK(std::filesystem::exists(sd / "spec.json"));
    }
    // Stored spec regenerates the stored target exactly.
    const auto& e = back.samples[17];
    const auto spec = nlohmann::json::parse(read_file_text(dir.path() / "d" / e.dir / "spec.json")).get<SceneSpec>();
    const auto s = generate_sequence(spec);
    CHECK(read_frame(frame_path(dir.path() / "d" / e.dir, 4)) == s.sequence.target());
    CHECK(read_mask(dir.path() / "d" / e.dir / "dgt.png") == s.target_mask());
  }

  SUBCASE("no overlays, empty masks") {
    p.p_overlays = 0.0;
    generate_dataset(5, 1, p, dir.path() / "e");
    for (const auto& t : load_training_set(dir.path() / "e")) CHECK(t.dgt.popcount() == 0);
  }

  SUBCASE("n must be positive") {
    CHECK_THROWS_AS(generate_dataset(0, 1, p, dir.path() / "f"), InvalidArgument);
  }
}
