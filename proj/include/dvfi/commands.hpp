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
#include <optional>
#include <string>

#include "json.hpp"

#include "dvfi/ftm.hpp"
#include "dvfi/model.hpp"
#include "dvfi/synth.hpp"

namespace dvfi {

/// Environment variable holding the default OpenMP thread count.
inline constexpr const char* kThreadsEnv = "DVFI_NUM_THREADS";

struct SynthRun {
  std::size_t count = 100;
  SynthParams params;
  friend bool operator==(const SynthRun&, const SynthRun&) = default;
};

struct TrainRun {
  TrainConfig config;
  /// Checkpoint prefix (`<dir>/checkpoint`) to continue from.
  std::string resume;
  friend bool operator==(const TrainRun&, const TrainRun&) = default;
};

struct EvalRun {
  /// Checkpoint prefix; unused in sanity mode.
  std::string checkpoint;
  /// Score the ground truth against itself instead of running the model.
  bool sanity = false;
  friend bool operator==(const EvalRun&, const EvalRun&) = default;
};

struct InspectRun {
  /// D-map image to show; defaults to the sample's dgt.png.
  std::string dmap;
  friend bool operator==(const InspectRun&, const InspectRun&) = default;
};

/// Everything a command needs. Loaded from JSON, overridden by flags, and
/// written back as `<out>/config.json`. The output path itself is not
/// persisted so that a rerun into another directory is byte-identical.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  std::string input;
  std::string out;
  FtmParams ftm;
  SynthRun synth;
  TrainRun train;
  EvalRun eval;
  InspectRun inspect;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_run_config(const std::filesystem::path& path);

/// Thread count from DVFI_NUM_THREADS, if set to a positive integer.
std::optional<int> threads_from_env();

// Each command validates its config, writes its outputs plus config.json
// under `out`, and throws on failure.

/// Input: directory of septuplet directories (frame_1..frame_7). Output:
/// `<out>/<id>/frame_*.png`, `dgt.png`, `record.json`, `manifest.json`.
void cmd_augment(const RunConfig& cfg);

void cmd_gen_synth(const RunConfig& cfg);

/// Output: `checkpoint.{bin,json}`, `loss.jsonl`, `summary.json`.
void cmd_train(const RunConfig& cfg);

/// Output: `pred/`, `ic/`, `gt/`, `dmap/`, `dgt/` image folders keyed by
/// sample id, `report.json` and `report_{blended,continuous}.csv`.
void cmd_eval(const RunConfig& cfg);

/// Output: `panel.png` laid out as previous frame | D-map | target with
/// the D-map outline in red, separated by gutters.
void cmd_inspect(const RunConfig& cfg);

inline constexpr std::size_t kPanelGutter = 4;

/// Entry point shared by the binary and the tests: dispatches on
/// `cfg.command`, prints errors to stderr and returns the exit status.
/// `threads` takes precedence over DVFI_NUM_THREADS.
int run_command(const RunConfig& cfg, std::optional<int> threads = std::nullopt);

}  // namespace dvfi
