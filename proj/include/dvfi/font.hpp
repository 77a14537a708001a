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
#include <optional>

namespace dvfi::font {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
/// Horizontal advance per character (glyph plus one blank column).
inline constexpr int kAdvance = kGlyphWidth + 1;

/// Seven rows, bit 4 of each row is the leftmost column.
using Glyph = std::array<std::uint8_t, kGlyphHeight>;

/// Glyph for [A-Za-z0-9]; nullopt for anything else.
std::optional<Glyph> glyph(char c);

inline bool glyph_bit(const Glyph& g, int row, int col) {
  return ((g[static_cast<std::size_t>(row)] >> (kGlyphWidth - 1 - col)) & 1U) != 0;
}

int glyph_popcount(const Glyph& g);

}  // namespace dvfi::font
