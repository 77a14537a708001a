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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dvfi/image.hpp"

namespace dvfi {

/// Reads an 8-bit PNG (gray, gray+alpha, RGB, RGBA or palette; alpha is
/// dropped) or a binary P6 PPM with maxval 255. Sample v maps to v/255.
/// Throws FileNotFound, UnsupportedFormat or TruncatedData.
Frame read_frame(const std::filesystem::path& path);

/// Writes PNG unless the extension is .ppm. Samples are quantized with
/// round(255*v). Throws IoError when the path cannot be written.
void write_frame(const Frame& frame, const std::filesystem::path& path);

/// Masks are 8-bit grayscale PNG, value round(255*m).
Mask read_mask(const std::filesystem::path& path);
void write_mask(const Mask& mask, const std::filesystem::path& path);

std::uint8_t quantize(double v) noexcept;

std::vector<std::uint8_t> encode_png(const std::uint8_t* pixels, std::size_t height,
                                     std::size_t width, int channels);
std::vector<std::uint8_t> encode_ppm(const Frame& frame);

/// Writes to a sibling temp file and renames it into place, so readers never
/// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

}  // namespace dvfi
