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
#include "dvfi/dataset.hpp"

#include "dvfi/error.hpp"
#include "dvfi/image_io.hpp"

namespace fs = std::filesystem;

namespace dvfi {

void to_json(nlohmann::json& j, const ManifestEntry& e) {
  j = {{"id", e.id}, {"dir", e.dir}, {"info", e.info}};
}

void from_json(const nlohmann::json& j, ManifestEntry& e) {
  e.id = j.at("id").get<std::string>();
  e.dir = j.at("dir").get<std::string>();
  e.info = j.value("info", nlohmann::json::object());
}

void to_json(nlohmann::json& j, const Manifest& m) {
  j = {{"kind", m.kind}, {"count", m.samples.size()}, {"samples", m.samples}};
}

void from_json(const nlohmann::json& j, Manifest& m) {
  m.kind = j.at("kind").get<std::string>();
  m.samples = j.at("samples").get<std::vector<ManifestEntry>>();
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_manifest(const fs::path& root, const Manifest& m) {
  write_file_atomic(root / "manifest.json", dump_json(m));
}

Manifest read_manifest(const fs::path& root) {
  const auto text = read_file_text(root / "manifest.json");
  try {
    return nlohmann::json::parse(text).get<Manifest>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed manifest " + (root / "manifest.json").string() + ": " + e.what());
  }
}

fs::path frame_path(const fs::path& dir, std::size_t one_based, const std::string& ext) {
  return dir / ("frame_" + std::to_string(one_based) + ext);
}

Sequence load_septuplet_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw FileNotFound("no such sample directory: " + dir.string());
  std::vector<Frame> frames;
  for (std::size_t i = 1; i <= kSeptupletLength; ++i) {
    fs::path p = frame_path(dir, i, ".png");
    if (!fs::exists(p)) p = frame_path(dir, i, ".ppm");
    if (!fs::exists(p)) {
      throw FileNotFound("missing frame_" + std::to_string(i) + " in " + dir.string());
    }
    frames.push_back(read_frame(p));
  }
  for (const auto& f : frames) {
    if (!f.same_dims(frames.front())) {
      throw InvalidArgument("frames in " + dir.string() + " differ in size");
    }
  }
  return Sequence(std::move(frames), septuplet_roles(4));
}

void write_sample_dir(const fs::path& dir, const Sequence& seq, const Mask& dgt) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < seq.length(); ++i) write_frame(seq.frame(i), frame_path(dir, i + 1));
  write_mask(dgt, dir / "dgt.png");
}

std::vector<TrainingSample> load_training_set(const fs::path& root) {
  const Manifest m = read_manifest(root);
  std::vector<TrainingSample> out;
  out.reserve(m.samples.size());
  for (const auto& e : m.samples) {
    const fs::path dir = root / e.dir;
    Mask dgt = read_mask(dir / "dgt.png");
    for (double& v : dgt.data()) v = v >= 0.5 ? 1.0 : 0.0;
    out.push_back(make_training_sample(load_septuplet_dir(dir), dgt, e.id));
  }
  return out;
}

}  // namespace dvfi
