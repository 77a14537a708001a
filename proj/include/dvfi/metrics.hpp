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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dvfi/image.hpp"

namespace dvfi {

inline constexpr double kPsnrCapDb = 100.0;

/// 10*log10(1/MSE) over all samples, capped at 100 dB (so identical frames
/// give 100).
double psnr(const Frame& a, const Frame& b);

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM over all valid 11x11 Gaussian windows, per channel, averaged
/// over channels. Throws InvalidArgument when a side is shorter than the
/// window.
double ssim(const Frame& a, const Frame& b, const SsimOptions& opt = {});

/// Normalized 1-D Gaussian of the given length.
std::vector<double> gaussian_kernel(std::size_t length, double sigma);

/// IoU of (d >= threshold) against binary `dgt`; 1 when both are empty.
double dmap_iou(const Mask& d, const Mask& dgt, double threshold = 0.5);

struct SampleMetrics {
  std::string id;
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<double> iou;
};

struct MetricsReport {
  std::vector<SampleMetrics> samples;  // sorted by id
  std::size_t count = 0;
  double mean_psnr_db = 0.0;
  double mean_ssim = 0.0;
  std::optional<double> mean_iou;  // over samples that have an iou
  std::size_t iou_count = 0;

  /// Recomputes count and means from `samples`.
  void aggregate();
  std::string to_csv() const;
};

void to_json(nlohmann::json& j, const MetricsReport& r);

struct DmapDirs {
  std::filesystem::path predicted;
  std::filesystem::path ground_truth;
};

/// Pairs files by basename (`<id>.png` or `<id>.ppm`) between `pred_dir` and
/// `gt_dir`. With `dmaps`, also pairs D-map masks and reports IoU. Throws
/// FileNotFound when an id lacks its counterpart.
MetricsReport evaluate_dataset(const std::filesystem::path& pred_dir,
                               const std::filesystem::path& gt_dir,
                               const std::optional<DmapDirs>& dmaps = std::nullopt);

}  // namespace dvfi
