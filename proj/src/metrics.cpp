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
#include "dvfi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "dvfi/error.hpp"
#include "dvfi/image_io.hpp"
#include "dvfi/kernels.hpp"

namespace fs = std::filesystem;

namespace dvfi {

double psnr(const Frame& a, const Frame& b) {
  if (!a.same_dims(b)) throw DimensionError("psnr: dims differ");
  const auto x = a.data();
  const auto y = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(x.size());
  if (mse == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

std::vector<double> gaussian_kernel(std::size_t length, double sigma) {
  std::vector<double> k(length);
  const double center = 0.5 * static_cast<double>(length - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    const double x = static_cast<double>(i) - center;
    k[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

double ssim(const Frame& a, const Frame& b, const SsimOptions& opt) {
  if (!a.same_dims(b)) throw DimensionError("ssim: dims differ");
  const std::size_t H = a.height(), W = a.width(), n = opt.window;
  if (H < n || W < n) {
    throw InvalidArgument("ssim: frame " + std::to_string(H) + "x" + std::to_string(W) +
                          " is smaller than the " + std::to_string(n) + "x" + std::to_string(n) +
                          " window");
  }
  const auto kernel = gaussian_kernel(n, opt.sigma);
  const double c1 = (opt.k1 * opt.dynamic_range) * (opt.k1 * opt.dynamic_range);
  const double c2 = (opt.k2 * opt.dynamic_range) * (opt.k2 * opt.dynamic_range);
  const std::size_t plane = H * W;
  const std::size_t out_plane = (H - n + 1) * (W - n + 1);

  std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
  std::vector<double> mx(out_plane), my(out_plane), sxx(out_plane), syy(out_plane), sxy(out_plane);
  double total = 0.0;
  for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) {
    for (std::size_t i = 0; i < plane; ++i) {
      x[i] = a.data()[i * Frame::kChannels + ch];
      y[i] = b.data()[i * Frame::kChannels + ch];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    kernels::separable_filter_valid(x, H, W, kernel, mx);
    kernels::separable_filter_valid(y, H, W, kernel, my);
    kernels::separable_filter_valid(xx, H, W, kernel, sxx);
    kernels::separable_filter_valid(yy, H, W, kernel, syy);
    kernels::separable_filter_valid(xy, H, W, kernel, sxy);
    double sum = 0.0;
    for (std::size_t i = 0; i < out_plane; ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(out_plane);
  }
  return total / static_cast<double>(Frame::kChannels);
}

double dmap_iou(const Mask& d, const Mask& dgt, double threshold) {
  if (!d.same_dims(dgt)) throw DimensionError("dmap_iou: dims differ");
  if (!dgt.is_binary()) throw InvalidArgument("dmap_iou: ground truth must be binary");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool p = d.data()[i] >= threshold;
    const bool g = dgt.data()[i] == 1.0;
    inter += (p && g) ? 1 : 0;
    uni += (p || g) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void MetricsReport::aggregate() {
  std::sort(samples.begin(), samples.end(),
            [](const SampleMetrics& l, const SampleMetrics& r) { return l.id < r.id; });
  count = samples.size();
  double sp = 0.0, ss = 0.0, si = 0.0;
  iou_count = 0;
  for (const auto& s : samples) {
    sp += s.psnr_db;
    ss += s.ssim;
    if (s.iou) {
      si += *s.iou;
      ++iou_count;
    }
  }
  mean_psnr_db = count ? sp / static_cast<double>(count) : 0.0;
  mean_ssim = count ? ss / static_cast<double>(count) : 0.0;
  mean_iou = iou_count ? std::optional<double>(si / static_cast<double>(iou_count)) : std::nullopt;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "id,psnr_db,ssim,iou\n";
  for (const auto& s : samples) {
    out << s.id << ',' << s.psnr_db << ',' << s.ssim << ',';
    if (s.iou) out << *s.iou;
    out << '\n';
  }
  return out.str();
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = nlohmann::json::object();
  auto& rows = j["samples"] = nlohmann::json::array();
  for (const auto& s : r.samples) {
    nlohmann::json row = {{"id", s.id}, {"psnr_db", s.psnr_db}, {"ssim", s.ssim}};
    row["iou"] = s.iou ? nlohmann::json(*s.iou) : nlohmann::json(nullptr);
    rows.push_back(std::move(row));
  }
  j["count"] = r.count;
  j["mean"] = {{"psnr_db", r.mean_psnr_db},
               {"ssim", r.mean_ssim},
               {"iou", r.mean_iou ? nlohmann::json(*r.mean_iou) : nlohmann::json(nullptr)},
               // not computed: requires a pretrained perceptual network
               {"lpips", nullptr}};
  j["iou_count"] = r.iou_count;
}

namespace {

std::map<std::string, fs::path> list_images(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw FileNotFound("no such directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext != ".png" && ext != ".ppm") continue;
    const auto id = e.path().stem().string();
    if (!out.emplace(id, e.path()).second) {
      throw InvalidArgument("duplicate sample id '" + id + "' in " + dir.string());
    }
  }
  return out;
}

const fs::path& counterpart(const std::map<std::string, fs::path>& files, const std::string& id,
                            const fs::path& dir) {
  const auto it = files.find(id);
  if (it == files.end()) {
    throw FileNotFound("missing counterpart for sample '" + id + "' in " + dir.string());
  }
  return it->second;
}

}  // namespace

MetricsReport evaluate_dataset(const fs::path& pred_dir, const fs::path& gt_dir,
                               const std::optional<DmapDirs>& dmaps) {
  const auto gt = list_images(gt_dir);
  const auto pred = list_images(pred_dir);
  for (const auto& [id, path] : pred) counterpart(gt, id, gt_dir);
  std::map<std::string, fs::path> dm, dg;
  if (dmaps) {
    dm = list_images(dmaps->predicted);
    dg = list_images(dmaps->ground_truth);
  }
  MetricsReport report;
  for (const auto& [id, gt_path] : gt) {
    const Frame g = read_frame(gt_path);
    const Frame p = read_frame(counterpart(pred, id, pred_dir));
    SampleMetrics m{id, psnr(p, g), ssim(p, g), std::nullopt};
    if (dmaps) {
      const Mask d = read_mask(counterpart(dm, id, dmaps->predicted));
      Mask t = read_mask(counterpart(dg, id, dmaps->ground_truth));
      for (double& v : t.data()) v = v >= 0.5 ? 1.0 : 0.0;
      m.iou = dmap_iou(d, t);
    }
    report.samples.push_back(std::move(m));
  }
  report.aggregate();
  return report;
}

}  // namespace dvfi
