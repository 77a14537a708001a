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
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dvfi/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> input;
  std::optional<int> threads;
  // augment
  std::optional<double> p_fm, p_tm;
  // gen-synth
  std::optional<std::size_t> count;
  // train
  std::optional<long> steps;
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::optional<std::string> resume;
  bool flip = false;
  // eval
  std::optional<std::string> checkpoint;
  bool sanity = false;
  // inspect
  std::optional<std::string> dmap;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Flags& f) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", f.config, "JSON run config; flags override its values")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "Run seed");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--threads", f.threads, "OpenMP threads (default: $DVFI_NUM_THREADS)")
      ->check(CLI::PositiveNumber);
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discontinuity-aware frame interpolation toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto* augment = add_command(app, "augment", "Apply figure/text mixing to a directory of septuplets", f);
  augment->add_option("input", f.input, "Directory of septuplet directories");
  augment->add_option("--p-fm", f.p_fm, "Figure mixing probability")->check(CLI::Range(0.0, 1.0));
  augment->add_option("--p-tm", f.p_tm, "Text mixing probability")->check(CLI::Range(0.0, 1.0));

  auto* gen = add_command(app, "gen-synth", "Generate a synthetic discontinuous-motion dataset", f);
  gen->add_option("-n,--count", f.count, "Number of sequences");

  auto* train = add_command(app, "train", "Train the D-map estimator", f);
  train->add_option("input", f.input, "Dataset root (with manifest.json)");
  train->add_option("--steps", f.steps, "Total SGD steps");
  train->add_option("--lr", f.lr, "Learning rate");
  train->add_option("--batch-size", f.batch_size, "Samples per step");
  train->add_option("--resume", f.resume, "Checkpoint prefix to continue from");
  train->add_flag("--flip", f.flip, "Random horizontal/vertical flips");

  auto* eval = add_command(app, "eval", "Evaluate a checkpoint on a test set", f);
  eval->add_option("input", f.input, "Test set root (with manifest.json)");
  eval->add_option("--checkpoint", f.checkpoint, "Checkpoint prefix");
  eval->add_flag("--sanity", f.sanity, "Score ground truth against itself");

  auto* inspect = add_command(app, "inspect", "Render a D-map review panel for one sample", f);
  inspect->add_option("input", f.input, "Sample directory");
  inspect->add_option("--dmap", f.dmap, "D-map image (default: <sample>/dgt.png)");

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  dvfi::RunConfig cfg;
  try {
    if (!f.config.empty()) cfg = dvfi::load_run_config(f.config);
  } catch (const std::exception& e) {
    std::cerr << "dvfi: " << e.what() << "\n";
    return 1;
  }
  cfg.command = sub->get_name();
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.input) cfg.input = *f.input;
  if (f.p_fm) cfg.ftm.p_fm = *f.p_fm;
  if (f.p_tm) cfg.ftm.p_tm = *f.p_tm;
  if (f.count) cfg.synth.count = *f.count;
  if (f.steps) cfg.train.config.steps = *f.steps;
  if (f.lr) cfg.train.config.learning_rate = *f.lr;
  if (f.batch_size) cfg.train.config.batch_size = *f.batch_size;
  if (f.resume) cfg.train.resume = *f.resume;
  if (f.flip) cfg.train.config.flip_augment = true;
  if (f.checkpoint) cfg.eval.checkpoint = *f.checkpoint;
  if (f.sanity) cfg.eval.sanity = true;
  if (f.dmap) cfg.inspect.dmap = *f.dmap;

  return dvfi::run_command(cfg, f.threads);
}
