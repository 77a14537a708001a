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
// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion
// numbers as arguments to run a subset.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "dvfi/blend.hpp"
#include "dvfi/dataset.hpp"
#include "dvfi/ftm.hpp"
#include "dvfi/image_io.hpp"
#include "dvfi/metrics.hpp"
#include "dvfi/model.hpp"
#include "dvfi/synth.hpp"
#include "support.hpp"

using namespace dvfi;
using dvfi::testing::random_frame;
using dvfi::testing::random_mask;
using dvfi::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome blending_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  std::size_t endpoint_failures = 0, convexity_failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = 1 + static_cast<std::size_t>(rng.uniform_int(0, 31));
    const std::size_t w = 1 + static_cast<std::size_t>(rng.uniform_int(0, 31));
    const Frame c = random_frame(rng, h, w), p = random_frame(rng, h, w);
    endpoint_failures += !(blend(c, p, Mask::filled(h, w, 0.0)) == c);
    endpoint_failures += !(blend(c, p, Mask::filled(h, w, 1.0)) == p);
    const Frame out = blend(c, p, random_mask(rng, h, w));
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double v = out.data()[i];
      convexity_failures += v < std::min(c.data()[i], p.data()[i]) || v > std::max(c.data()[i], p.data()[i]);
    }
  }
  const double secs = seconds_since(t0);
  return {endpoint_failures == 0 && convexity_failures == 0 && secs < 1.0,
          fmt("200 random pairs: %zu endpoint mismatches, %zu convexity violations, %.3f s", endpoint_failures,
              convexity_failures, secs)};
}

Outcome loss_correctness() {
  const LossConfig cfg;
  Rng rng(102);
  const Frame a = random_frame(rng, 16, 16);
  const double phi0 = charbonnier_loss(a, a, cfg);

  // Total is the plain sum, checked both on the scalar helper and on the
  // autodiff graph of a real sample.
  double worst_ulps = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double l1 = rng.uniform(0.001, 1.0), ld = rng.uniform(0.001, 1.0);
    const double t = total_loss(l1, ld, cfg).total;
    worst_ulps = std::max(worst_ulps, std::abs(t - (l1 + ld)) / (std::nextafter(t, 2.0 * t + 1.0) - t));
  }
  for (int trial = 0; trial < 5; ++trial) {
    TrainingSample s{"x",
                     {random_frame(rng, 8, 8), random_frame(rng, 8, 8), random_frame(rng, 8, 8), random_frame(rng, 8, 8)},
                     random_frame(rng, 8, 8),
                     Mask(8, 8)};
    for (double& v : s.dgt.data()) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
    auto model = DMapEstimator::initialized(static_cast<std::uint64_t>(trial));
    const auto g = build_loss_graph(s, model, cfg);
    const double t = g.total.item(), sum = g.l1.item() + g.l_d.item();
    worst_ulps = std::max(worst_ulps, std::abs(t - sum) / (std::nextafter(t, 2.0 * t + 1.0) - t));
  }

  const Frame b = Frame::filled(16, 16, 0.3), b2 = Frame::filled(16, 16, 0.303);
  const long double gap = static_cast<long double>(0.303) - 0.3L;
  const double oracle = static_cast<double>(std::sqrt(gap * gap + 1e-6L));
  const double uniform_err = std::abs(charbonnier_loss(b2, b, cfg) - oracle);
  const bool ok = phi0 == 0.001 && worst_ulps <= 1.0 && uniform_err < 1e-12;
  return {ok, fmt("Phi(0) = %.17g, total vs L1+L_D worst %.1f ulp, uniform-gap error %.2e", phi0, worst_ulps,
                  uniform_err)};
}

Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(103);
  double worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  const int configs = 20;
  for (int k = 0; k < configs; ++k) {
    const std::size_t h = 5 + static_cast<std::size_t>(rng.uniform_int(0, 4));
    const std::size_t w = 5 + static_cast<std::size_t>(rng.uniform_int(0, 4));
    TrainingSample s{"g",
                     {random_frame(rng, h, w), random_frame(rng, h, w), random_frame(rng, h, w), random_frame(rng, h, w)},
                     random_frame(rng, h, w),
                     Mask(h, w)};
    for (double& v : s.dgt.data()) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
    const LossConfig cfg{0.001, k % 4 == 3 ? 0.5 : 1.0};
    const auto r = gradient_check(DMapEstimator::initialized(1000 + static_cast<std::uint64_t>(k)), s, cfg, 200,
                                  static_cast<std::uint64_t>(k));
    worst = std::max(worst, r.max_relative_error);
    checked += r.checked;
    skipped += r.skipped_at_kinks;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && checked >= 200u * configs && secs < 60.0,
          fmt("%d configs, %zu parameters (%zu redrawn at kinks), max relative error %.2e, %.1f s", configs, checked,
              skipped, worst, secs)};
}

Sequence noise_septuplet(Rng& rng, std::size_t h, std::size_t w) {
  return dvfi::testing::random_septuplet(rng, h, w);
}

Outcome ftm_copy_consistency() {
  Rng rng(104);
  FtmParams params;
  params.p_fm = params.p_tm = 0.75;
  std::size_t violations = 0, mask_pixels = 0, augmented = 0;
  const std::size_t n = 1000;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = apply_ftm(noise_septuplet(rng, 64, 64), derive_seed(104, i), params);
    const Frame& target = s.augmented.target();
    const Frame& prev = s.augmented.frame(2);
    augmented += (s.record.fm_applied || s.record.tm_applied) ? 1 : 0;
    for (std::size_t r = 0; r < 64; ++r) {
      for (std::size_t c = 0; c < 64; ++c) {
        if (s.dgt.at(r, c) != 1.0) continue;
        ++mask_pixels;
        for (std::size_t ch = 0; ch < 3; ++ch) violations += target.at(r, c, ch) != prev.at(r, c, ch) ? 1 : 0;
      }
    }
  }
  return {violations == 0 && mask_pixels > 0,
          fmt("%zu septuplets (%zu with overlays), %zu D_gt pixels, %zu violations", n, augmented, mask_pixels,
              violations)};
}

Outcome ftm_determinism() {
  TempDir dir("acc_ftm");
  Rng rng(105);
  FtmParams params;
  std::size_t mismatches = 0;
  const std::size_t n = 50;
  for (std::size_t i = 0; i < n; ++i) {
    const Sequence seq = noise_septuplet(rng, 48, 48);
    const std::uint64_t seed = derive_seed(105, i);
    for (const char* run : {"a", "b"}) {
      const auto s = apply_ftm(seq, seed, params);
      const fs::path d = dir.path() / run / std::to_string(i);
      write_sample_dir(d, s.augmented, s.dgt);
      write_file_atomic(d / "record.json", dump_json(s.record));
    }
    for (const auto& e : fs::directory_iterator(dir.path() / "a" / std::to_string(i))) {
      const fs::path other = dir.path() / "b" / std::to_string(i) / e.path().filename();
      mismatches += read_file_bytes(e.path()) != read_file_bytes(other) ? 1 : 0;
    }
  }
  return {mismatches == 0, fmt("%zu septuplets augmented twice, %zu differing files", n, mismatches)};
}

double naive_ssim(const Frame& a, const Frame& b) {
  double w2[11][11], norm = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) norm += w2[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5);
  }
  double total = 0.0;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r + 11 <= a.height(); ++r) {
      for (std::size_t c = 0; c + 11 <= a.width(); ++c) {
        double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
        for (int i = 0; i < 11; ++i) {
          for (int j = 0; j < 11; ++j) {
            const double wt = w2[i][j] / norm, x = a.at(r + i, c + j, ch), y = b.at(r + i, c + j, ch);
            mx += wt * x;
            my += wt * y;
            xx += wt * x * x;
            yy += wt * y * y;
            xy += wt * x * y;
          }
        }
        sum += (2 * mx * my + 1e-4) * (2 * (xy - mx * my) + 9e-4) /
               ((mx * mx + my * my + 1e-4) * (xx - mx * mx + yy - my * my + 9e-4));
        ++count;
      }
    }
    total += sum / static_cast<double>(count);
  }
  return total / 3.0;
}

Outcome metric_oracles() {
  const double p = psnr(Frame::filled(20, 20, 0.25), Frame::filled(20, 20, 0.75));
  Rng rng(106);
  double worst = 0.0;
  bool self_one = true;
  const int pairs = 60;
  for (int k = 0; k < pairs; ++k) {
    const std::size_t h = 11 + static_cast<std::size_t>(rng.uniform_int(0, 13));
    const std::size_t w = 11 + static_cast<std::size_t>(rng.uniform_int(0, 13));
    const Frame a = random_frame(rng, h, w);
    Frame b = random_frame(rng, h, w);
    const double mix = rng.uniform();
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = mix * a.data()[i] + (1 - mix) * b.data()[i];
    worst = std::max(worst, std::abs(ssim(a, b) - naive_ssim(a, b)));
    self_one = self_one && ssim(a, a) == 1.0;
  }
  return {std::abs(p - 6.0206) <= 1e-4 && std::abs(p - 10.0 * std::log10(4.0)) <= 1e-6 && worst < 1e-9 && self_one,
          fmt("PSNR(|a-b|=0.5) = %.7f dB, SSIM vs brute force on %d pairs max diff %.2e, ssim(a,a)=1 %s", p, pairs,
              worst, self_one ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// Toy-scale mechanism reproduction.

std::vector<TrainingSample> synthetic_set(std::size_t n, std::uint64_t seed, const SynthParams& p, double* min_cov) {
  std::vector<TrainingSample> out;
  double lowest = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = generate_sequence(sample_scene(derive_seed(seed, i), p));
    const Mask& m = s.target_mask();
    lowest = std::min(lowest, static_cast<double>(m.popcount()) / static_cast<double>(m.size()));
    out.push_back(make_training_sample(s.sequence, m, sample_id(i)));
  }
  if (min_cov) *min_cov = lowest;
  return out;
}

struct HeldOut {
  double psnr_hat = 0.0, psnr_c = 0.0, iou = 0.0, mean_d = 0.0, mean_abs_gap = 0.0;
  std::size_t improved = 0;  // samples with PSNR(i_hat) > PSNR(i_c)
};

HeldOut score(const std::vector<TrainingSample>& test, const DMapEstimator& model) {
  HeldOut h;
  for (const auto& s : test) {
    const auto r = infer(s.inputs, model);
    const double ph = psnr(r.i_hat, s.target), pc = psnr(r.i_c, s.target);
    h.psnr_hat += ph;
    h.psnr_c += pc;
    h.mean_abs_gap += std::abs(ph - pc);
    h.improved += ph > pc ? 1 : 0;
    h.iou += dmap_iou(r.d, s.dgt);
    double d = 0.0;
    for (double v : r.d.data()) d += v;
    h.mean_d += d / static_cast<double>(r.d.size());
  }
  const double n = static_cast<double>(test.size());
  h.psnr_hat /= n;
  h.psnr_c /= n;
  h.iou /= n;
  h.mean_d /= n;
  h.mean_abs_gap /= n;
  return h;
}

// Shared by the mechanism run and the negative control.
TrainConfig toy_config(long steps) {
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.steps = steps;
  cfg.batch_size = 4;
  cfg.seed = 7;
  return cfg;
}

Outcome mechanism() {
  const auto t0 = std::chrono::steady_clock::now();
  const SynthParams p;  // 64x64, overlays on every scene, >= 5% coverage
  double cov_train = 0.0, cov_test = 0.0;
  const auto train_set = synthetic_set(500, 7001, p, &cov_train);
  const auto test_set = synthetic_set(100, 7002, p, &cov_test);
  const auto result = train(train_set, toy_config(3000));
  const HeldOut h = score(test_set, result.params);
  const double gain = h.psnr_hat - h.psnr_c;
  const double secs = seconds_since(t0);
  // Every held-out scene has >= 5% coverage, so each one should improve.
  const bool ok = p.height == 64 && cov_train >= 0.05 && cov_test >= 0.05 && gain >= 1.0 && h.iou >= 0.8 &&
                  h.improved == test_set.size();
  return {ok, fmt("500 train / 100 test 64x64, 3000 steps: PSNR i_hat %.3f dB vs i_c %.3f dB (%+.3f), IoU %.3f, "
                  "%zu/%zu samples improved, min coverage %.3f, %.0f s",
                  h.psnr_hat, h.psnr_c, gain, h.iou, h.improved, test_set.size(), std::min(cov_train, cov_test), secs)};
}

Outcome negative_control() {
  const auto t0 = std::chrono::steady_clock::now();
  SynthParams p;
  p.p_overlays = 0.0;
  const auto train_set = synthetic_set(200, 8001, p, nullptr);
  const auto test_set = synthetic_set(100, 8002, p, nullptr);
  const auto result = train(train_set, toy_config(1000));
  const HeldOut h = score(test_set, result.params);
  const double gap = std::abs(h.psnr_hat - h.psnr_c);
  return {h.mean_d < 0.1 && gap < 0.1,
          fmt("overlay-free, 1000 steps: mean D %.4f, |PSNR(i_hat) - PSNR(i_c)| %.4f dB (per-sample mean %.4f), %.0f s",
              h.mean_d, gap, h.mean_abs_gap, seconds_since(t0))};
}

Frame shifted(const Frame& in, long dx, long dy) {
  const long H = static_cast<long>(in.height()), W = static_cast<long>(in.width());
  Frame out(in.height(), in.width());
  for (long r = 0; r < H; ++r) {
    for (long c = 0; c < W; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) =
            in.at(static_cast<std::size_t>(((r - dy) % H + H) % H), static_cast<std::size_t>(((c - dx) % W + W) % W), ch);
      }
    }
  }
  return out;
}

Outcome synthetic_oracle() {
  SynthParams p;
  p.velocities = {-8, -6, -4, -2, 0, 2, 4, 6, 8};
  double lowest = kPsnrCapDb;
  std::size_t scenes = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const SceneSpec spec = sample_scene(derive_seed(9, seed), p);
    // Inputs 3 and 5 are 2v apart; the midpoint is frame 3 moved by v.
    const Frame mid = shifted(render_background(spec, 2), spec.velocity_x, spec.velocity_y);
    lowest = std::min(lowest, psnr(mid, render_background(spec, 3)));
    ++scenes;
  }
  return {lowest == kPsnrCapDb, fmt("%zu scenes, all even velocities in [-8,8]: lowest midpoint PSNR %.1f dB", scenes,
                                    lowest)};
}

// ---------------------------------------------------------------------------
// CLI reproducibility, through the real binary.

int run_cli(const std::string& args) {
  const std::string cmd = "'" + std::string(DVFI_CLI_PATH) + "' " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

bool trees_equal(const fs::path& a, const fs::path& b) {
  auto files = [](const fs::path& root) {
    std::vector<fs::path> out;
    if (!fs::is_directory(root)) return out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto fa = files(a);
  if (fa.empty() || fa != files(b)) return false;
  for (const auto& p : fa) {
    if (read_file_bytes(a / p) != read_file_bytes(b / p)) return false;
  }
  return true;
}

Outcome cli_reproducibility() {
  TempDir dir("acc_cli");
  const fs::path& w = dir.path();
  write_file_atomic(w / "synth.json",
                    dump_json({{"synth", {{"count", 6}, {"params", {{"height", 32}, {"width", 32}}}}}}));
  std::vector<std::string> failed;
  auto must = [&](const std::string& what, bool ok) {
    if (!ok) failed.push_back(what);
  };
  auto rerun = [&](const std::string& cmd, const fs::path& out) {
    const fs::path again = out.string() + "_rerun";
    must(cmd + " rerun", run_cli(cmd + " --config " + q(out / "config.json") + " --out " + q(again)) == 0);
    must(cmd + " echoed config", trees_equal(out, again));
  };

  must("gen-synth", run_cli("gen-synth --config " + q(w / "synth.json") + " --seed 4 --out " + q(w / "data")) == 0);
  rerun("gen-synth", w / "data");
  must("augment", run_cli("augment " + q(w / "data") + " --seed 5 --out " + q(w / "aug")) == 0);
  rerun("augment", w / "aug");

  const std::string train = "train " + q(w / "data") + " --seed 6 --lr 1.0 --batch-size 2 --flip";
  must("train", run_cli(train + " --steps 120 --out " + q(w / "full")) == 0);
  rerun("train", w / "full");
  must("train half", run_cli(train + " --steps 50 --out " + q(w / "half")) == 0);
  must("train resume", run_cli(train + " --steps 120 --resume " + q(w / "half" / "checkpoint") + " --out " +
                               q(w / "resumed")) == 0);
  bool resumed_equal = fs::exists(w / "resumed" / "checkpoint.bin") &&
                       read_file_bytes(w / "resumed" / "checkpoint.bin") == read_file_bytes(w / "full" / "checkpoint.bin") &&
                       read_file_bytes(w / "resumed" / "loss.jsonl") == read_file_bytes(w / "full" / "loss.jsonl");
  must("resume bit-identical", resumed_equal);

  must("eval", run_cli("eval " + q(w / "data") + " --checkpoint " + q(w / "full" / "checkpoint") + " --out " +
                       q(w / "eval")) == 0);
  rerun("eval", w / "eval");
  must("inspect", run_cli("inspect " + q(w / "data" / "s000000") + " --out " + q(w / "panel")) == 0);
  rerun("inspect", w / "panel");

  std::string detail = "gen-synth, augment, train, eval, inspect reruns from echoed config byte-identical; resume at "
                       "step 50 of 120 bit-identical";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " [" + f + "]";
  }
  return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"blending identities", blending_identities},
      {"loss correctness", loss_correctness},
      {"gradient fidelity", gradient_fidelity},
      {"FTM copy-consistency", ftm_copy_consistency},
      {"FTM determinism", ftm_determinism},
      {"metric oracles", metric_oracles},
      {"D-map mechanism on synthetic data", mechanism},
      {"overlay-free negative control", negative_control},
      {"synthetic midpoint oracle", synthetic_oracle},
      {"CLI reproducibility", cli_reproducibility},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[k].first << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
