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

// Experiment pipelines behind the CLI commands. Each cmd_* validates the
// config first, then writes only into its output directory.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trojan_game/config.hpp"
#include "trojan_game/game.hpp"
#include "trojan_game/metrics.hpp"

namespace trojan_game {

struct DataSplit {
  Dataset train;
  Dataset test;
};

DataSplit prepare_data(const ExperimentConfig& cfg);

// Trigger from the [trigger] section; all_to_all overrides the target.
TriggerSpec config_trigger(const ExperimentConfig& cfg, int feature_dim, int num_classes,
                           std::optional<bool> all_to_all = std::nullopt);

TrainConfig config_train(const ExperimentConfig& cfg);

ShadowPopulation train_shadows(const ExperimentConfig& cfg, const Dataset& train);
ShadowPopulation load_shadows(const std::filesystem::path& dir);

// Clean models on seeds disjoint from the shadows.
std::vector<MlpModel> train_clean_models(const ExperimentConfig& cfg, const Dataset& train,
                                         int count, const std::string& tag);

DetectorModel train_meta_detector(const ExperimentConfig& cfg, const ShadowPopulation& shadows,
                                  int num_classes);

// Seeded prefix of a fixed permutation of the training indices; nested in alpha.
std::vector<std::size_t> poison_indices(const ExperimentConfig& cfg, std::size_t n, double alpha,
                                        std::uint64_t stream);

// Shared state for the MM pipeline: data, shadows, vanilla detector, holdouts.
struct MmContext {
  DataSplit data;
  ShadowPopulation shadows;
  DetectorModel h0;
  std::vector<MlpModel> holdouts;
  double clean_acc = 0.0;  // mean accuracy of the clean holdouts
};

MmContext prepare_mm_context(const ExperimentConfig& cfg);

struct MmRun {
  std::vector<MlpModel> initial;  // target Trojans before the game
  std::vector<GameResult> games;  // empty for a static Trojan
  std::vector<MlpModel> finals;
  EvalReport report;
  TriggerSpec trigger;
};

// Trains shadows.targets Trojans at the given poisoning ratio and plays one
// game per target. iterations == 0 means the static baseline.
MmRun run_mm_pipeline(const ExperimentConfig& cfg, const MmContext& ctx, double alpha,
                      bool all_to_all);

void cmd_train_shadows(const ExperimentConfig& cfg, const std::filesystem::path& out);
void cmd_mm_trojan(const ExperimentConfig& cfg, const std::filesystem::path& out, bool baseline);
void cmd_greedy(const ExperimentConfig& cfg, const std::filesystem::path& out);
void cmd_ablate(const ExperimentConfig& cfg, const std::filesystem::path& out);
void cmd_eval_detectors(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace trojan_game
