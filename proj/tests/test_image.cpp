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

#include "dvfi/error.hpp"
#include "dvfi/image.hpp"
#include "support.hpp"

using namespace dvfi;
using dvfi::testing::random_frame;
using dvfi::testing::random_septuplet;

TEST_CASE("frame construction validates range and size") {
  CHECK_THROWS_AS(Frame(0, 3), InvalidArgument);
  CHECK_THROWS_AS(Frame(1, 1, {0.0, 0.5}), DimensionError);
  CHECK_THROWS_AS(Frame(1, 1, {0.0, 1.5, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(Mask(1, 2, {0.0, -0.1}), InvalidArgument);
  const Frame f = Frame::filled(2, 3, 0.25);
  CHECK(f.size() == 18);
  CHECK(f.at(1, 2, 2) == 0.25);
}

TEST_CASE("sequence role validation") {
  Rng rng(1);
  std::vector<Frame> frames{random_frame(rng, 4, 4), random_frame(rng, 4, 4), random_frame(rng, 4, 4)};
  CHECK_NOTHROW(Sequence(frames, Roles{{0, 2}, 1}));
  CHECK_THROWS_AS(Sequence(frames, Roles{{2, 0}, 1}), InvalidArgument);
  CHECK_THROWS_AS(Sequence(frames, Roles{{0, 1}, 1}), InvalidArgument);
  CHECK_THROWS_AS(Sequence(frames, Roles{{0, 5}, 1}), InvalidArgument);
  frames[1] = random_frame(rng, 4, 5);
  CHECK_THROWS_AS(Sequence(frames, Roles{{0, 2}, 1}), DimensionError);
}

TEST_CASE("crop") {
  Rng rng(2);
  const Sequence s = random_septuplet(rng, 9, 11);

  SUBCASE("full rectangle is the identity") { CHECK(crop(s, 0, 0, 9, 11) == s); }

  SUBCASE("single pixel equals the source pixel") {
    const Sequence c = crop(s, 0, 0, 1, 1);
    for (std::size_t i = 0; i < s.length(); ++i) {
      for (std::size_t ch = 0; ch < 3; ++ch) CHECK(c.frame(i).at(0, 0, ch) == s.frame(i).at(0, 0, ch));
    }
    CHECK(c.roles() == s.roles());
  }

  SUBCASE("nested crops compose by adding offsets") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto t1 = static_cast<std::size_t>(rng.uniform_int(0, 4));
      const auto l1 = static_cast<std::size_t>(rng.uniform_int(0, 5));
      const auto h1 = static_cast<std::size_t>(rng.uniform_int(1, 9 - static_cast<long>(t1)));
      const auto w1 = static_cast<std::size_t>(rng.uniform_int(1, 11 - static_cast<long>(l1)));
      const auto t2 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(h1) - 1));
      const auto l2 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(w1) - 1));
      const auto h2 = static_cast<std::size_t>(rng.uniform_int(1, static_cast<long>(h1 - t2)));
      const auto w2 = static_cast<std::size_t>(rng.uniform_int(1, static_cast<long>(w1 - l2)));
      CHECK(crop(crop(s, t1, l1, h1, w1), t2, l2, h2, w2) == crop(s, t1 + t2, l1 + l2, h2, w2));
    }
  }

  SUBCASE("out of bounds") {
    CHECK_THROWS_AS(crop(s, 0, 0, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(crop(s, 5, 5, 5, 1), InvalidArgument);
    CHECK_THROWS_AS(crop(s, 0, 0, 0, 1), InvalidArgument);
  }
}

TEST_CASE("flip") {
  Rng rng(3);
  const Sequence s = random_septuplet(rng, 5, 6);
  for (FlipAxis ax : {FlipAxis::kHorizontal, FlipAxis::kVertical, FlipAxis::kTemporal}) {
    CHECK(flip(flip(s, ax), ax) == s);
  }

  const Frame row(1, 2, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  CHECK(flip(row, FlipAxis::kHorizontal) == Frame(1, 2, {0.4, 0.5, 0.6, 0.1, 0.2, 0.3}));
  CHECK(flip(row, FlipAxis::kVertical) == row);

  // Temporal remap against brute force: 1-based i -> 8 - i.
  const Sequence t = flip(s, FlipAxis::kTemporal);
  for (std::size_t i = 0; i < 7; ++i) CHECK(t.frame(i) == s.frame(6 - i));
  std::vector<std::size_t> expected;
  for (std::size_t one_based : {1, 3, 5, 7}) expected.push_back(8 - one_based - 1);
  std::sort(expected.begin(), expected.end());
  CHECK(t.roles().inputs == expected);
  CHECK(t.roles().target == 8 - 4 - 1);

  const Sequence two = flip(split_roles(s, 2), FlipAxis::kTemporal);
  CHECK(two.roles().inputs == std::vector<std::size_t>{2, 4});
  CHECK(two.roles().target == 3);
}

TEST_CASE("split_roles") {
  Rng rng(4);
  const Sequence s = random_septuplet(rng, 3, 3);
  CHECK(split_roles(s, 4).roles() == Roles{{0, 2, 4, 6}, 3});
  CHECK(split_roles(s, 2).roles() == Roles{{2, 4}, 3});
  CHECK_THROWS_AS(split_roles(s, 3), InvalidArgument);

  std::vector<Frame> six(s.frames().begin(), s.frames().begin() + 6);
  const Sequence short_seq(six, Roles{{0, 2, 4}, 3});
  CHECK_THROWS_AS(split_roles(short_seq, 4), InvalidArgument);
}

TEST_CASE("operations keep values in range and are deterministic") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Sequence s = random_septuplet(rng, 7, 8);
    for (FlipAxis ax : {FlipAxis::kHorizontal, FlipAxis::kVertical, FlipAxis::kTemporal}) {
      const Sequence a = flip(s, ax), b = flip(s, ax);
      CHECK(a == b);
      for (const auto& f : a.frames()) {
        for (double v : f.data()) CHECK((v >= 0.0 && v <= 1.0));
      }
    }
    const Sequence c = crop(s, 1, 2, 5, 5);
    for (const auto& f : c.frames()) {
      for (double v : f.data()) CHECK((v >= 0.0 && v <= 1.0));
    }
  }
}
