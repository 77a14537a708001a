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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dvfi/image.hpp"
#include "dvfi/model.hpp"

namespace dvfi {

// On-disk sample layout shared by augmented and synthetic datasets:
//   <root>/manifest.json
//   <root>/<id>/frame_1.png ... frame_7.png   (frame_4 is the target)
//   <root>/<id>/dgt.png                       (8-bit grayscale D-map)
//   <root>/<id>/record.json | spec.json       (how the sample was made)

struct ManifestEntry {
  std::string id;
  std::string dir;  // relative to the dataset root
  nlohmann::json info;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::string kind;  // "synthetic" or "ftm"
  std::vector<ManifestEntry> samples;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

void to_json(nlohmann::json& j, const ManifestEntry& e);
void from_json(const nlohmann::json& j, ManifestEntry& e);
void to_json(nlohmann::json& j, const Manifest& m);
void from_json(const nlohmann::json& j, Manifest& m);

void write_manifest(const std::filesystem::path& root, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& root);

/// Serialized JSON as written by every tool: two-space indent plus a
/// trailing newline.
std::string dump_json(const nlohmann::json& j);

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t one_based,
                                 const std::string& ext = ".png");

/// Reads frame_1..frame_7 (.png, falling back to .ppm) as a septuplet with
/// 4-input roles. Throws FileNotFound / InvalidArgument on malformed dirs.
Sequence load_septuplet_dir(const std::filesystem::path& dir);

/// Writes frame_1..frame_N.png and dgt.png into `dir` (created).
void write_sample_dir(const std::filesystem::path& dir, const Sequence& seq, const Mask& dgt);

/// Every manifest entry as a training sample (frames and dgt.png).
std::vector<TrainingSample> load_training_set(const std::filesystem::path& root);

}  // namespace dvfi
