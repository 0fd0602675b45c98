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

// Clean accuracy, attack success rate, shadow populations and the
// multi-generation AUC report.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trojan_game/data.hpp"
#include "trojan_game/detector.hpp"
#include "trojan_game/train.hpp"

namespace trojan_game {

double accuracy(const MlpModel& f, const Dataset& test);

// Fraction of trigger-embedded copies of `clean_test` classified to the
// trigger's target (y_T, or (y+1) mod k for all-to-all).
double attack_success_rate(const MlpModel& f, const Dataset& clean_test,
                           const TriggerSpec& trigger);

struct ShadowInfo {
  bool trojan = false;
  int index = 0;
  std::uint64_t seed = 0;
  std::optional<JumboDraw> draw;  // set for Trojan shadows
};

struct ShadowPopulation {
  std::vector<MlpModel> trojan;
  std::vector<MlpModel> clean;
  std::vector<ShadowInfo> trojan_info;
  std::vector<ShadowInfo> clean_info;
};

// `first_index` offsets the seed range so detector-training shadows and
// evaluation holdouts never share seeds.
ShadowPopulation build_shadow_population(int n_trojan, int n_clean,
                                         const JumboParams& jumbo,
                                         const Dataset& base_data,
                                         const TrainConfig& train_cfg,
                                         std::uint64_t master_seed,
                                         int first_index = 0, int threads = 0);

struct EvalReport {
  double acc = 0.0;
  double asr = 0.0;
  double auc_0 = 0.0;
  std::optional<double> auc_t_minus_1;
  double auc_t = 0.0;
  int n_pos = 0;
  int n_neg = 0;
};

struct DetectorGenerations {
  const DetectorModel* vanilla = nullptr;   // h_0
  const DetectorModel* previous = nullptr;  // h_{t-1}; null for a static Trojan
  const DetectorModel* current = nullptr;   // h_t; null for a static Trojan
};

// Acc/ASR are averaged over the target models. `detectors` holds either one
// entry shared by all targets or one entry per target (each MM run owns its
// t-1 and t detectors). Each AUC is the fraction of (target, clean holdout)
// pairs ranked correctly, where both members of a pair are scored by the
// target's own detector generation. With a shared detector this is the plain
// population AUC.
EvalReport evaluate_generations(std::span<const MlpModel> targets,
                                std::span<const DetectorGenerations> detectors,
                                std::span<const MlpModel> clean_holdouts,
                                const Dataset& clean_test, const TriggerSpec& trigger);

// AUC of one detector over a positive and a negative model population.
double population_auc(const DetectorModel& h, std::span<const MlpModel> positives,
                      std::span<const MlpModel> negatives);

}  // namespace trojan_game
