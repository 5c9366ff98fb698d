/*
 * Copyright 2026 The platekit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
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
#include <vector>

#include "CLI11.hpp"
#include "platekit/pipeline.hpp"
#include "platekit/thread.hpp"

namespace {

// exit codes: 0 success, 1 usage/config, 2 runtime failure
constexpr int kOkay = 0;
constexpr int kUsage = 1;
constexpr int kRuntime = 2;

struct CommonOpts {
  std::string config;
  std::optional<int64_t> seed;
  std::string out;
  std::string tag;
  std::optional<int> iterations;
  std::vector<std::string> images;
};

platekit::RunConfig load_config(const CommonOpts& opts) {
  platekit::RunConfig cfg = platekit::RunConfig::load(opts.config);
  if (opts.seed.has_value()) cfg.seed = static_cast<uint64_t>(*opts.seed);
  if (!opts.out.empty()) cfg.out_dir = opts.out;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config, "run configuration file")->required();
  cmd->add_option("--seed", opts.seed, "override the config seed");
  cmd->add_option("--out", opts.out, "override paths.out_dir");
}

}  // namespace

int main(int argc, char** argv) {
  platekit::tune_allocator_for_training();
  CLI::App app{"platekit - synthetic license plate detection and recognition toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  int chosen = -1;

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  add_common(gen, opts);
  gen->callback([&] { chosen = 0; });

  CLI::App* traind = app.add_subcommand("train-detector", "train the grid detector");
  add_common(traind, opts);
  traind->callback([&] { chosen = 1; });

  CLI::App* trainr = app.add_subcommand("train-recognizer", "train the vision+language recognizer");
  add_common(trainr, opts);
  trainr->callback([&] { chosen = 2; });

  CLI::App* eval = app.add_subcommand("eval", "evaluate on a manifest split");
  add_common(eval, opts);
  eval->add_option("--tag", opts.tag, "restrict evaluation to records carrying this tag");
  eval->add_option("--iterations", opts.iterations, "override the refinement iteration count");
  eval->callback([&] { chosen = 3; });

  CLI::App* infer = app.add_subcommand("infer", "run the pipeline on image files");
  add_common(infer, opts);
  infer->add_option("--iterations", opts.iterations, "override the refinement iteration count");
  infer->add_option("images", opts.images, "P5/P6 image files")->required()->expected(-1);
  infer->callback([&] { chosen = 4; });

  CLI::App* bench = app.add_subcommand("bench", "measure per-stage latency and model cost");
  add_common(bench, opts);
  bench->callback([&] { chosen = 5; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOkay : kUsage;
  }

  try {
    const platekit::RunConfig cfg = load_config(opts);
    switch (chosen) {
      case 0:
        platekit::cmd_gen_data(cfg, std::cout);
        break;
      case 1: {
        const auto r = platekit::cmd_train_detector(cfg, std::cout);
        std::cout << "checkpoint: " << r.checkpoint << "  val mAP@0.5 " << r.final_val_metric
                  << "\n";
        break;
      }
      case 2: {
        const auto r = platekit::cmd_train_recognizer(cfg, std::cout);
        std::cout << "checkpoint: " << r.checkpoint << "  val plate accuracy "
                  << r.final_val_metric << "\n";
        break;
      }
      case 3:
        platekit::cmd_eval(cfg, opts.tag, opts.iterations, std::cout);
        break;
      case 4:
        platekit::cmd_infer(cfg, opts.images, opts.iterations, std::cout);
        break;
      case 5:
        platekit::cmd_bench(cfg, std::cout);
        break;
      default:
        return kUsage;
    }
  } catch (const platekit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOkay;
}
