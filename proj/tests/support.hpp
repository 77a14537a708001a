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

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>

#include "dvfi/image.hpp"
#include "dvfi/rng.hpp"

namespace dvfi::testing {

inline Frame random_frame(Rng& rng, std::size_t h, std::size_t w) {
  Frame f(h, w);
  for (double& v : f.data()) v = rng.uniform();
  return f;
}

inline Mask random_mask(Rng& rng, std::size_t h, std::size_t w) {
  Mask m(h, w);
  for (double& v : m.data()) v = rng.uniform();
  return m;
}

inline Sequence random_septuplet(Rng& rng, std::size_t h, std::size_t w) {
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < kSeptupletLength; ++i) frames.push_back(random_frame(rng, h, w));
  return Sequence(std::move(frames), septuplet_roles(4));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Fresh empty directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dvfi_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace dvfi::testing
