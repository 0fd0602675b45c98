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

// Iterated min-max co-evolution between a Trojaned classifier and an
// output-based detector, plus equilibrium diagnostics.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "trojan_game/data.hpp"
#include "trojan_game/detector.hpp"
#include "trojan_game/nn.hpp"

namespace trojan_game {

struct GameConfig {
  double gamma_d = 0.0002;  // detector ascent rate
  double gamma_t = 0.1;     // adversary descent rate; 0 freezes the adversary
  int iterations = 20;
  int inner_detector_epochs = 5;
  int inner_trojan_epochs = 5;
  int batch_size = 32;
  std::uint64_t seed = 0;
  int js_queries = 512;   // fixed probing set for the js diagnostic
  int js_bins = 20;

  void validate() const;
};

struct GameRecord {
  int iter = 0;
  double loss_detector = 0.0;  // L_D
  double loss_trojan = 0.0;    // L_T
  double acc = 0.0;
  double asr = 0.0;
  double auc = 0.0;            // current detector vs {f_T} and the clean pool
  double js = 0.0;
};

struct GameTrace {
  std::vector<GameRecord> records;
};

struct TrojanLoss {
  double query_term = 0.0;   // mean ln(1 - h(f_T(x))) over the queries
  double trojan_term = 0.0;  // mean CE on the trigger-embedded set (0 when empty)
  double clean_term = 0.0;   // mean CE on the clean set
  double total() const { return query_term + trojan_term + clean_term; }
};

// L_T for the adversary. `trojan_set` holds trigger-embedded samples with
// their target labels and may be empty; `clean_set` may not.
TrojanLoss trojan_loss(const MlpModel& f_t, const DetectorModel& h, const Matrix& queries,
                       const Dataset& trojan_set, const Dataset& clean_set);

struct TrojanLossGrad {
  TrojanLoss loss;
  Gradients grads;  // dL_T/dtheta_T
};
TrojanLossGrad trojan_loss_grad(const MlpModel& f_t, const DetectorModel& h,
                                const Matrix& queries, const Dataset& trojan_set,
                                const Dataset& clean_set);

struct GameInputs {
  MlpModel trojan_init;
  std::vector<MlpModel> clean_pool;
  DetectorModel detector_init;
  Dataset clean_set;   // D
  Dataset trojan_set;  // trigger-embedded, relabeled D~
  // Optional held-out sets for the Acc/ASR columns of the trace; the training
  // sets are used when absent.
  std::optional<Dataset> eval_clean;
  std::optional<TriggerSpec> trigger;
};

struct GameResult {
  MlpModel trojan;
  DetectorModel detector_prev;   // last detector the adversary responded to
  DetectorModel detector_final;  // one more detector round after the last move
  GameTrace trace;
};

using IterationObserver =
    std::function<void(int iter, const MlpModel& trojan, const DetectorModel& detector)>;

// Query set used in iteration `iter` (1-based) of a run seeded with `seed`.
QuerySpec iteration_queries(const QuerySpec& base, std::uint64_t seed, int iter);

// Runs iterations start_iteration+1 .. cfg.iterations. When resuming,
// `inputs.trojan_init` / `inputs.detector_init` are the checkpoints written
// after iteration `start_iteration`.
GameResult run_mm_trojan(const GameInputs& inputs, const GameConfig& cfg,
                         int start_iteration = 0,
                         const IterationObserver& observer = {});

// Detector phase of one iteration, exposed for recomputation and tests.
DetectorModel detector_phase(const DetectorModel& h, const MlpModel& f_t,
                             const std::vector<MlpModel>& clean_pool,
                             const GameConfig& cfg, int iter);

// L_D of (h, f_t) against the clean pool on the detector's own query set.
double game_detector_loss(const DetectorModel& h, const MlpModel& f_t,
                          const std::vector<MlpModel>& clean_pool);

// Maximizer of a ln(1-x) + b ln(x) over [0,1]: b / (a + b).
double optimal_discriminator_value(double a, double b);

// Histogram estimate of KL(p_T || m) + KL(p_C || m), m = (p_T + p_C)/2, with
// the first k-1 simplex coordinates discretized into n_bins each.
double js_proxy(const OutputBatch& trojan_outputs, const OutputBatch& clean_outputs,
                int n_bins);

}  // namespace trojan_game
