// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// trojan-game <command> --config PATH [--seed N] [--out DIR] [--baseline]
//             [--iterations N] [--alpha-grid a,b,c]
//
// Exit codes: 0 ok, 2 config error, 3 numerical divergence, 4 IO error.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "trojan_game/config.hpp"
#include "trojan_game/error.hpp"
#include "trojan_game/experiments.hpp"

namespace tg = trojan_game;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

int run(int argc, char** argv) {
  CLI::App app{"Minimax Trojan game experiments on synthetic data"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir = "out", alpha_grid;
  std::uint64_t seed = 0;
  int iterations = 0;
  bool baseline = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file")->required();
    cmd->add_option("--seed", seed, "master seed (overrides the file)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_flag("--baseline", baseline, "static Trojan, no game iterations");
    cmd->add_option("--iterations", iterations, "game iterations (overrides the file)");
    cmd->add_option("--alpha-grid", alpha_grid, "comma-separated poisoning ratios");
  };
  for (const char* name : {"train-shadows", "mm-trojan", "greedy-select", "ablate", "eval-detectors"}) {
    add_common(app.add_subcommand(name));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const CLI::App* cmd = app.get_subcommands().front();

  tg::ExperimentConfig cfg = tg::load_config(config_path);
  tg::CliOverrides o;
  if (cmd->count("--seed")) o.seed = seed;
  if (cmd->count("--iterations")) {
    if (iterations < 0) throw tg::ConfigError("--iterations must be non-negative");
    o.iterations = iterations;
  }
  if (cmd->count("--alpha-grid")) o.alpha_grid = tg::parse_real_list(alpha_grid);
  tg::apply_overrides(cfg, o);
  cfg.validate();

  const std::string name = cmd->get_name();
  if (baseline && name != "mm-trojan") throw tg::ConfigError("--baseline applies to mm-trojan only");
  if (name == "train-shadows") {
    tg::cmd_train_shadows(cfg, out_dir);
  } else if (name == "mm-trojan") {
    tg::cmd_mm_trojan(cfg, out_dir, baseline);
  } else if (name == "greedy-select") {
    tg::cmd_greedy(cfg, out_dir);
  } else if (name == "ablate") {
    tg::cmd_ablate(cfg, out_dir);
  } else {
    tg::cmd_eval_detectors(cfg, out_dir);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const tg::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const tg::DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return kExitDivergence;
  } catch (const tg::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const tg::ShapeError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
