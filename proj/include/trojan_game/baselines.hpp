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

// Two reference detectors for cross-evaluation: per-class trigger reversal
// with a MAD outlier test, and blended-input entropy.

#include <cstdint>
#include <vector>

#include "trojan_game/data.hpp"
#include "trojan_game/nn.hpp"

namespace trojan_game {

// Mask and pattern live in [0,1]^d through a sigmoid of these raw values.
struct TriggerParams {
  Vector mask_raw;
  Vector pattern_raw;
};

struct TriggerLossGrad {
  double loss = 0.0;  // mean CE to target + lambda * |m|_1
  double ce = 0.0;
  Vector grad_mask_raw;
  Vector grad_pattern_raw;
};

// `probes` holds one input per column.
double reverse_trigger_loss(const MlpModel& f, int target, const Matrix& probes,
                            const TriggerParams& p, double lambda);
TriggerLossGrad reverse_trigger_loss_grad(const MlpModel& f, int target, const Matrix& probes,
                                          const TriggerParams& p, double lambda);

struct ReverseOptions {
  double lambda = 0.05;
  int steps = 1000;
  double rate = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ReversedTrigger {
  int class_id = 0;
  Vector mask;
  Vector pattern;
  double mask_norm = 0.0;
  double attack_success = 0.0;
  std::vector<double> loss_history;  // loss before each step, then final
};

ReversedTrigger reverse_trigger(const MlpModel& f, int target, const Matrix& probes,
                                const ReverseOptions& opt);

struct AnomalyReport {
  std::vector<double> mask_norms;
  std::vector<double> anomaly_index;  // |norm - median| / (1.4826 * MAD)
  double max_low_index = 0.0;         // largest index among below-median norms
  int flagged_class = -1;             // argmax of the above, -1 if none
  double model_score = 0.0;           // sigmoid(max_low_index - threshold)
};

AnomalyReport anomaly_report(const std::vector<double>& mask_norms, double threshold = 4.0);

// Reverses a trigger for every class (tasks on the pool) and scores the model.
AnomalyReport neural_cleanse_score(const MlpModel& f, const Matrix& probes,
                                   const ReverseOptions& opt, double threshold = 4.0,
                                   int threads = 0);

// Mean natural-log entropy of f(0.5 x + 0.5 x_b) over the first n_blends
// columns of `blend_pool`.
double strip_entropy(const MlpModel& f, const Vector& x, const Matrix& blend_pool, int n_blends);

// Fraction of trigger-embedded probes whose blended entropy falls below the
// 10th percentile of the clean probes' blended entropies.
double strip_model_score(const MlpModel& f, const Matrix& clean_probes, const TriggerSpec& trigger,
                         const Matrix& blend_pool, int n_blends);

}  // namespace trojan_game
