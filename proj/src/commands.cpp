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
#include "dvfi/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "dvfi/dataset.hpp"
#include "dvfi/error.hpp"
#include "dvfi/image_io.hpp"
#include "dvfi/kernels.hpp"
#include "dvfi/metrics.hpp"

namespace fs = std::filesystem;

namespace dvfi {
namespace {

constexpr std::size_t kSummaryWindow = 20;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

fs::path require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw InvalidArgument("no output directory (--out)");
  fs::create_directories(cfg.out);
  return cfg.out;
}

fs::path require_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw InvalidArgument("no input path");
  std::error_code ec;
  if (!fs::exists(cfg.input, ec)) throw FileNotFound("no such input: " + cfg.input);
  return cfg.input;
}

void echo_config(const RunConfig& cfg, const fs::path& out) {
  write_file_atomic(out / "config.json", dump_json(cfg));
}

void require_files(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) {
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) throw IoError("expected output missing: " + p.string());
  }
}

nlohmann::json loss_line(const StepLog& s) {
  return {{"step", s.step}, {"l1", s.loss.l1}, {"l_d", s.loss.l_d}, {"total", s.loss.total}};
}

std::vector<StepLog> read_loss_log(const fs::path& path, long before) {
  std::vector<StepLog> out;
  std::istringstream in(read_file_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    StepLog s{j.at("step").get<long>(),
              {j.at("l1").get<double>(), j.at("l_d").get<double>(), j.at("total").get<double>()}};
    if (s.step < before) out.push_back(s);
  }
  return out;
}

double window_mean(const std::vector<StepLog>& curve, bool head) {
  const std::size_t n = std::min(kSummaryWindow, std::max<std::size_t>(1, curve.size() / 2));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += curve[head ? i : curve.size() - 1 - i].loss.total;
  return n ? sum / static_cast<double>(n) : 0.0;
}

Frame mask_to_frame(const Mask& m) {
  Frame f(m.height(), m.width());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) f.data()[i * Frame::kChannels + ch] = m.data()[i];
  }
  return f;
}

bool on_outline(const Mask& m, std::size_t r, std::size_t c) {
  auto in = [&](long rr, long cc) {
    if (rr < 0 || cc < 0 || rr >= static_cast<long>(m.height()) || cc >= static_cast<long>(m.width())) {
      return false;
    }
    return m.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) >= 0.5;
  };
  const long y = static_cast<long>(r), x = static_cast<long>(c);
  return in(y, x) && !(in(y - 1, x) && in(y + 1, x) && in(y, x - 1) && in(y, x + 1));
}

void paste(Frame& dst, const Frame& src, std::size_t left) {
  for (std::size_t r = 0; r < src.height(); ++r) {
    for (std::size_t c = 0; c < src.width(); ++c) {
      for (std::size_t ch = 0; ch < Frame::kChannels; ++ch) dst.at(r, left + c, ch) = src.at(r, c, ch);
    }
  }
}

}  // namespace

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"command", c.command}, {"seed", c.seed}, {"input", c.input}};
  if (c.command == "augment") j["ftm"] = c.ftm;
  if (c.command == "gen-synth") j["synth"] = {{"count", c.synth.count}, {"params", c.synth.params}};
  if (c.command == "train") {
    nlohmann::json t = c.train.config;
    t.erase("seed");  // the run seed is authoritative
    t["resume"] = c.train.resume;
    j["train"] = t;
  }
  if (c.command == "eval") j["eval"] = {{"checkpoint", c.eval.checkpoint}, {"sanity", c.eval.sanity}};
  if (c.command == "inspect") j["inspect"] = {{"dmap", c.inspect.dmap}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  c.command = j.value("command", c.command);
  c.seed = j.value("seed", c.seed);
  c.input = j.value("input", c.input);
  c.out = j.value("out", c.out);
  if (j.contains("ftm")) c.ftm = j.at("ftm").get<FtmParams>();
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    c.synth.count = s.value("count", c.synth.count);
    if (s.contains("params")) c.synth.params = s.at("params").get<SynthParams>();
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    c.train.config = t.get<TrainConfig>();
    c.train.resume = t.value("resume", c.train.resume);
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    c.eval.checkpoint = e.value("checkpoint", c.eval.checkpoint);
    c.eval.sanity = e.value("sanity", c.eval.sanity);
  }
  if (j.contains("inspect")) c.inspect.dmap = j.at("inspect").value("dmap", c.inspect.dmap);
}

RunConfig load_run_config(const fs::path& path) {
  const auto text = read_file_text(path);
  try {
    return nlohmann::json::parse(text).get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed config " + path.string() + ": " + e.what());
  }
}

std::optional<int> threads_from_env() {
  const char* v = std::getenv(kThreadsEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) {
    throw InvalidArgument(std::string(kThreadsEnv) + " must be a positive integer, got '" + v + "'");
  }
  return static_cast<int>(n);
}

void cmd_augment(const RunConfig& cfg) {
  cfg.ftm.validate();
  const fs::path in = require_input(cfg);
  if (!fs::is_directory(in)) throw InvalidArgument("input is not a directory: " + in.string());
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(in)) {
    if (e.is_directory()) ids.push_back(e.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw InvalidArgument("no sequence directories in " + in.string());

  const fs::path out = require_out(cfg);
  Manifest manifest{"ftm", {}};
  std::vector<fs::path> declared;
  for (const auto& id : ids) {
    const Sequence seq = load_septuplet_dir(in / id);
    const std::uint64_t seed = derive_seed(cfg.seed, fnv1a(id));
    const AugmentedSample s = apply_ftm(seq, seed, cfg.ftm);
    write_sample_dir(out / id, s.augmented, s.dgt);
    write_file_atomic(out / id / "record.json", dump_json(s.record));
    manifest.samples.push_back({id, id,
                                {{"seed", seed},
                                 {"fm_applied", s.record.fm_applied},
                                 {"tm_applied", s.record.tm_applied},
                                 {"overlays", s.record.overlays.size()}}});
    declared.push_back(out / id / "dgt.png");
    declared.push_back(out / id / "record.json");
  }
  write_manifest(out, manifest);
  echo_config(cfg, out);
  declared.push_back(out / "manifest.json");
  require_files(declared);
  std::cout << "augmented " << ids.size() << " sequences into " << out.string() << "\n";
}

void cmd_gen_synth(const RunConfig& cfg) {
  if (cfg.synth.count == 0) throw InvalidArgument("count must be >= 1");
  cfg.synth.params.validate();
  const fs::path out = require_out(cfg);
  const Manifest m = generate_dataset(cfg.synth.count, cfg.seed, cfg.synth.params, out);
  echo_config(cfg, out);
  require_files({out / "manifest.json", out / m.samples.back().dir / "dgt.png"});
  std::cout << "generated " << m.samples.size() << " synthetic sequences into " << out.string() << "\n";
}

void cmd_train(const RunConfig& cfg) {
  TrainConfig tc = cfg.train.config;
  tc.seed = cfg.seed;
  tc.validate();
  const fs::path in = require_input(cfg);
  const auto dataset = load_training_set(in);
  if (dataset.empty()) throw InvalidArgument("dataset " + in.string() + " is empty");

  std::optional<TrainState> resume;
  std::vector<StepLog> curve;
  if (!cfg.train.resume.empty()) {
    auto [params, meta] = load_checkpoint(cfg.train.resume);
    if (meta.seed != tc.seed) {
      throw InvalidArgument("checkpoint seed " + std::to_string(meta.seed) +
                            " differs from run seed " + std::to_string(tc.seed));
    }
    if (meta.step > tc.steps) {
      throw InvalidArgument("checkpoint is at step " + std::to_string(meta.step) +
                            ", beyond the requested " + std::to_string(tc.steps));
    }
    curve = read_loss_log(fs::path(cfg.train.resume).parent_path() / "loss.jsonl", meta.step);
    resume = TrainState{std::move(params), meta.step};
  }
  const fs::path out = require_out(cfg);

  TrainResult result;
  try {
    result = train(dataset, tc, resume);
  } catch (const TrainingDiverged& e) {
    throw Error(std::string(e.what()) + "; last finite step " + std::to_string(e.last_finite_step()));
  }
  curve.insert(curve.end(), result.curve.begin(), result.curve.end());

  std::string log;
  for (const auto& s : curve) log += loss_line(s).dump() + "\n";
  write_file_atomic(out / "loss.jsonl", log);
  save_checkpoint(out / "checkpoint", result.params, {tc.seed, tc.steps});
  nlohmann::json summary = {{"samples", dataset.size()},
                            {"steps", tc.steps},
                            {"parameter_count", DMapEstimator::parameter_count()}};
  if (!curve.empty()) {
    summary["initial_loss"] = curve.front().loss.total;
    summary["final_loss"] = curve.back().loss.total;
    summary["initial_window_mean"] = window_mean(curve, true);
    summary["final_window_mean"] = window_mean(curve, false);
  }
  write_file_atomic(out / "summary.json", dump_json(summary));
  echo_config(cfg, out);
  require_files({out / "checkpoint.bin", out / "checkpoint.json", out / "loss.jsonl"});
  std::cout << "trained " << tc.steps << " steps on " << dataset.size() << " samples";
  if (!curve.empty()) {
    std::cout << "; loss " << window_mean(curve, true) << " -> " << window_mean(curve, false);
  }
  std::cout << "\n";
}

void cmd_eval(const RunConfig& cfg) {
  const fs::path in = require_input(cfg);
  std::optional<DMapEstimator> params;
  if (!cfg.eval.sanity) {
    if (cfg.eval.checkpoint.empty()) throw InvalidArgument("no checkpoint given");
    params = load_checkpoint(cfg.eval.checkpoint).first;
  }
  const auto samples = load_training_set(in);
  if (samples.empty()) throw InvalidArgument("test set " + in.string() + " is empty");
  const fs::path out = require_out(cfg);
  const char* subdirs[] = {"pred", "ic", "gt", "dmap", "dgt"};
  for (const char* d : subdirs) {
    fs::remove_all(out / d);
    fs::create_directories(out / d);
  }
  for (const auto& s : samples) {
    const std::string name = s.id + ".png";
    const Frame i_c = continuous_branch(s.inputs);
    if (params) {
      const ForwardResult r = infer(s.inputs, *params);
      write_frame(r.i_hat, out / "pred" / name);
      write_mask(r.d, out / "dmap" / name);
    } else {
      write_frame(s.target, out / "pred" / name);
      write_mask(s.dgt, out / "dmap" / name);
    }
    write_frame(i_c, out / "ic" / name);
    write_frame(s.target, out / "gt" / name);
    write_mask(s.dgt, out / "dgt" / name);
  }
  const MetricsReport blended =
      evaluate_dataset(out / "pred", out / "gt", DmapDirs{out / "dmap", out / "dgt"});
  const MetricsReport continuous = evaluate_dataset(out / "ic", out / "gt");
  write_file_atomic(out / "report.json",
                    dump_json({{"blended", blended}, {"continuous", continuous}}));
  write_file_atomic(out / "report_blended.csv", blended.to_csv());
  write_file_atomic(out / "report_continuous.csv", continuous.to_csv());
  echo_config(cfg, out);
  require_files({out / "report.json"});
  std::cout << "evaluated " << blended.count << " samples: psnr " << blended.mean_psnr_db
            << " dB (continuous " << continuous.mean_psnr_db << " dB), ssim " << blended.mean_ssim;
  if (blended.mean_iou) std::cout << ", D-map IoU " << *blended.mean_iou;
  std::cout << "\n";
}

void cmd_inspect(const RunConfig& cfg) {
  const fs::path dir = require_input(cfg);
  const fs::path dmap_path = cfg.inspect.dmap.empty() ? dir / "dgt.png" : fs::path(cfg.inspect.dmap);
  const Sequence seq = load_septuplet_dir(dir);
  const Mask d = read_mask(dmap_path);
  const std::size_t H = seq.height(), W = seq.width();
  if (!d.same_dims(seq.frame(0))) throw DimensionError("D-map size differs from the frames");

  Frame target = seq.target();
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      if (!on_outline(d, r, c)) continue;
      target.at(r, c, 0) = 1.0;
      target.at(r, c, 1) = 0.0;
      target.at(r, c, 2) = 0.0;
    }
  }
  Frame panel = Frame::filled(H, 3 * W + 2 * kPanelGutter, 1.0);
  paste(panel, seq.frame(seq.roles().inputs.at(kPreviousInput)), 0);
  paste(panel, mask_to_frame(d), W + kPanelGutter);
  paste(panel, target, 2 * (W + kPanelGutter));

  const fs::path out = require_out(cfg);
  write_frame(panel, out / "panel.png");
  echo_config(cfg, out);
  require_files({out / "panel.png"});
  std::cout << "wrote " << (out / "panel.png").string() << " (" << panel.width() << "x" << H << ")\n";
}

int run_command(const RunConfig& cfg, std::optional<int> threads) {
  try {
    if (!threads) threads = threads_from_env();
    if (threads) kernels::set_num_threads(*threads);
    if (cfg.command == "augment") {
      cmd_augment(cfg);
    } else if (cfg.command == "gen-synth") {
      cmd_gen_synth(cfg);
    } else if (cfg.command == "train") {
      cmd_train(cfg);
    } else if (cfg.command == "eval") {
      cmd_eval(cfg);
    } else if (cfg.command == "inspect") {
      cmd_inspect(cfg);
    } else {
      throw InvalidArgument("unknown command '" + cfg.command + "'");
    }
  } catch (const std::exception& e) {
    std::cerr << "dvfi " << cfg.command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dvfi
