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

#pragma once

// Experiment configuration: a small INI/TOML-like file of `key = value`
// lines grouped under [section] headers. Command-line flags are applied on
// top of the file; file values override the built-in defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trojan_game/baselines.hpp"
#include "trojan_game/data.hpp"
#include "trojan_game/detector.hpp"
#include "trojan_game/game.hpp"
#include "trojan_game/greedy.hpp"
#include "trojan_game/serialize.hpp"
#include "trojan_game/train.hpp"

namespace trojan_game {

struct DataConfig {
  std::string source = "blobs";  // blobs | csv
  std::filesystem::path path;    // csv only
  int classes = 2;
  int dim = 16;
  int per_class = 100;
  double spread = 0.1;
  double test_fraction = 0.25;
};

struct TriggerConfig {
  int start = 0;
  int size = 4;
  double value = 0.8;
  double transparency = 0.0;
  bool all_to_all = false;
  int target = 0;
  double poison_fraction = 0.1;
};

struct ShadowConfig {
  int trojan = 64;
  int clean = 64;
  int holdout_clean = 8;  // evaluation negatives, disjoint seeds
  int targets = 4;        // target Trojans (one game per target)
  std::filesystem::path dir;  // optional: load shadows written by train-shadows
};

struct DetectorConfig {
  std::vector<int> hidden = {16};
  Activation activation = Activation::tanh;
  int epochs = 100;
  double rate = 0.1;
  int batch_size = 32;
  double query_mean = 0.5;
  double query_var = 0.0025;
  int queries = 64;
};

struct GreedyHarnessConfig {
  GreedyConfig greedy;
  int pool = 0;  // 0 uses the whole training split
  std::vector<double> alpha_grid = {0.0, 0.02, 0.05, 0.1, 0.2, 0.3};
};

struct BaselineConfig {
  ReverseOptions reverse;
  double anomaly_threshold = 4.0;
  int nc_probes = 32;
  int strip_probes = 64;
  int strip_blends = 16;
  int models = 8;  // baseline Trojans, MM Trojans and clean models each
  std::filesystem::path checkpoint_dir;  // optional: reuse saved models
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  DataConfig data;
  TrainConfig train;
  TriggerConfig trigger;
  JumboParams jumbo;
  ShadowConfig shadows;
  DetectorConfig detector;
  GameConfig game;
  GreedyHarnessConfig greedy;
  std::vector<double> ablate_alphas = {0.05, 0.1, 0.25, 0.5};
  BaselineConfig baselines;

  // Checks every nested config; throws ConfigError.
  void validate() const;
  Json to_json() const;
  // Hex FNV-1a of the canonical JSON form.
  std::string hash() const;
};

ExperimentConfig default_config();
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<std::vector<double>> alpha_grid;
};

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& o);

std::vector<double> parse_real_list(const std::string& text);

}  // namespace trojan_game
