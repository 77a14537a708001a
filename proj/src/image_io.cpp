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
#include "dvfi/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "dvfi/error.hpp"

namespace fs = std::filesystem;

namespace dvfi {
namespace {

struct DecodedImage {
  std::size_t height = 0;
  std::size_t width = 0;
  int channels = 0;  // 1 or 3
  std::vector<std::uint8_t> pixels;
};

bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

struct PngReadSource {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
  bool truncated;
};

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err != nullptr) *err = msg;
  png_longjmp(png, 1);
}

void png_silent_warning(png_structp, png_const_charp) {}

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->offset + count > src->bytes->size()) {
    src->truncated = true;
    png_error(png, "truncated PNG payload");
  }
  std::memcpy(out, src->bytes->data() + src->offset, count);
  src->offset += count;
}

// libpng reports through longjmp; everything that must be destroyed lives
// outside the setjmp scope, so only trivially destructible locals cross it.
DecodedImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& name,
                        bool want_gray) {
  std::string err;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_fail, png_silent_warning);
  if (png == nullptr) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  PngReadSource src{&bytes, 0, false};
  DecodedImage out;
  std::vector<png_bytep> rows;
  volatile int bit_depth = 0;
  volatile bool bad_depth = false;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    if (src.truncated) {
      throw TruncatedData(name + ": " + err);
    }
    throw UnsupportedFormat(name + ": " + err);
  }
  png_set_read_fn(png, &src, png_read_from_memory);
  png_read_info(png, info);
  bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) {
    bad_depth = true;
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    const bool is_gray = color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA;
    if (want_gray && !is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (!want_gray && is_gray) png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    out.height = png_get_image_height(png, info);
    out.width = png_get_image_width(png, info);
    out.channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.pixels.resize(stride * out.height);
    rows.resize(out.height);
    for (std::size_t r = 0; r < out.height; ++r) rows[r] = out.pixels.data() + r * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (bad_depth) {
    throw UnsupportedFormat(name + ": unsupported bit depth " + std::to_string(bit_depth) +
                            " (only 8-bit images are supported)");
  }
  return out;
}

// P6 header: magic, width, height, maxval separated by whitespace, with
// '#' comments allowed before the single whitespace byte that ends it.
DecodedImage decode_ppm(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size()) throw TruncatedData(name + ": truncated PPM header");
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000) throw UnsupportedFormat(name + ": PPM header value too large");
      ++pos;
      any = true;
    }
    if (!any) throw UnsupportedFormat(name + ": malformed PPM header");
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (pos >= bytes.size()) throw TruncatedData(name + ": truncated PPM header");
  ++pos;  // single whitespace byte
  if (w <= 0 || h <= 0) throw UnsupportedFormat(name + ": PPM dims must be positive");
  if (maxval != 255) {
    throw UnsupportedFormat(name + ": unsupported bit depth (PPM maxval " +
                            std::to_string(maxval) + ", only 255 is supported)");
  }
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (bytes.size() - pos < need) {
    throw TruncatedData(name + ": truncated PPM payload (" + std::to_string(bytes.size() - pos) +
                        " of " + std::to_string(need) + " bytes)");
  }
  DecodedImage out;
  out.height = static_cast<std::size_t>(h);
  out.width = static_cast<std::size_t>(w);
  out.channels = 3;
  out.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return out;
}

DecodedImage decode_any(const fs::path& path, bool want_gray) {
  const auto bytes = read_file_bytes(path);
  const std::string name = path.string();
  if (has_png_signature(bytes)) return decode_png(bytes, name, want_gray);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    if (want_gray) throw UnsupportedFormat(name + ": masks must be grayscale PNG");
    return decode_ppm(bytes, name);
  }
  if (bytes.size() < 8) throw TruncatedData(name + ": file too short to identify");
  throw UnsupportedFormat(name + ": not a PNG or P6 PPM file");
}

struct PngWriteSink {
  std::vector<std::uint8_t>* out;
};

void png_write_to_memory(png_structp png, png_bytep data, png_size_t len) {
  auto* sink = static_cast<PngWriteSink*>(png_get_io_ptr(png));
  sink->out->insert(sink->out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

std::string lowercase_ext(const fs::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

}  // namespace

std::uint8_t quantize(double v) noexcept {
  const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw FileNotFound("no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::string read_file_text(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) {
    throw IoError("cannot write " + path.string() + ": parent directory does not exist");
  }
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

void write_file_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
}

std::vector<std::uint8_t> encode_png(const std::uint8_t* pixels, std::size_t height,
                                     std::size_t width, int channels) {
  std::vector<std::uint8_t> out;
  std::string err;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_fail, png_silent_warning);
  if (png == nullptr) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  PngWriteSink sink{&out};
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed: " + err);
  }
  png_set_write_fn(png, &sink, png_write_to_memory, png_flush_noop);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = width * static_cast<std::size_t>(channels);
  for (std::size_t r = 0; r < height; ++r) {
    rows[r] = const_cast<png_bytep>(pixels + r * stride);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::vector<std::uint8_t> encode_ppm(const Frame& frame) {
  const std::string header =
      "P6\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double v : frame.data()) out.push_back(quantize(v));
  return out;
}

Frame read_frame(const fs::path& path) {
  const DecodedImage img = decode_any(path, false);
  std::vector<double> data(img.pixels.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = img.pixels[i] / 255.0;
  return Frame(img.height, img.width, std::move(data));
}

void write_frame(const Frame& frame, const fs::path& path) {
  if (lowercase_ext(path) == ".ppm") {
    write_file_atomic(path, encode_ppm(frame));
    return;
  }
  std::vector<std::uint8_t> px(frame.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize(frame.data()[i]);
  write_file_atomic(path, encode_png(px.data(), frame.height(), frame.width(), 3));
}

Mask read_mask(const fs::path& path) {
  const DecodedImage img = decode_any(path, true);
  std::vector<double> data(img.pixels.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = img.pixels[i] / 255.0;
  return Mask(img.height, img.width, std::move(data));
}

void write_mask(const Mask& mask, const fs::path& path) {
  std::vector<std::uint8_t> px(mask.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize(mask.data()[i]);
  write_file_atomic(path, encode_png(px.data(), mask.height(), mask.width(), 1));
}

}  // namespace dvfi
