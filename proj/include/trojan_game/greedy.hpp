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

// Greedy choice of which training samples carry the trigger, plus the
// marginal-gain and supermodularity diagnostics for the total test loss.

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "trojan_game/data.hpp"
#include "trojan_game/train.hpp"

namespace trojan_game {

struct SubsetLoss {
  double l_t = 0.0;  // mean CE on the trigger-embedded test set
  double l_c = 0.0;  // mean CE on the clean test set
  double l_tot = 0.0;
};

// Loss of a candidate poison set, given as sorted sample indices.
using SubsetOracle = std::function<SubsetLoss(const std::vector<std::size_t>&)>;

enum class SelectionRule { min_resulting_loss, literal_argmax };

struct GreedyConfig {
  double epsilon = 0.0;
  int batch_groups = 1;  // 1 means every sample is its own unit
  int retrain_epochs = 40;
  double max_fraction_cap = 0.5;
  SelectionRule selection_rule = SelectionRule::min_resulting_loss;
  std::uint64_t seed = 0;

  void validate(std::size_t n_samples) const;
};

struct GreedyStep {
  long unit = -1;  // sample or group id; -1 for the empty starting set
  std::size_t set_size = 0;
  SubsetLoss loss;
};

struct GreedyResult {
  std::vector<std::size_t> selected;  // sorted
  Dataset selected_set;               // trigger-embedded, relabelled
  std::vector<GreedyStep> history;    // starting set, then accepted steps
  double final_alpha = 0.0;
  std::size_t evaluations = 0;
  std::vector<std::size_t> evaluations_per_step;
};

struct TestSets {
  Dataset clean;   // D_Test
  Dataset trojan;  // trigger-embedded and relabelled copies, D~_Test
};

TestSets make_test_sets(const Dataset& clean_test, const TriggerSpec& trigger);

// Trains a fresh model from train_cfg (shared init seed) on `data` with the
// samples at `poisoned` replaced by their trigger-embedded versions.
SubsetLoss total_test_loss(const Dataset& data, const std::vector<std::size_t>& poisoned,
                           const TestSets& tests, const TriggerSpec& trigger,
                           const TrainConfig& train_cfg);

// Units are single samples, or a seeded partition into batch_groups groups.
std::vector<std::vector<std::size_t>> candidate_units(std::size_t n, const GreedyConfig& cfg);

// Core loop over an arbitrary oracle. Candidate scoring runs on the task
// pool; ties go to the lowest unit id.
GreedyResult greedy_select(std::size_t n, const SubsetOracle& oracle, const GreedyConfig& cfg,
                           int threads = 0);

GreedyResult greedy_select(const Dataset& data, const TestSets& tests, const TriggerSpec& trigger,
                           const GreedyConfig& cfg, const TrainConfig& train_cfg,
                           int threads = 0);

struct MarginalGains {
  double m_c_s = 0.0, m_t_s = 0.0;  // smaller set S1
  double m_c_k = 0.0, m_t_k = 0.0;  // larger set S2
  bool condition_holds() const { return m_c_s + m_t_s >= m_c_k + m_t_k; }
};

// Requires S1 ⊆ S2 and probe ∉ S2.
MarginalGains marginal_gains(const SubsetOracle& oracle, const std::vector<std::size_t>& s1,
                             const std::vector<std::size_t>& s2, std::size_t probe);

struct SupermodularityReport {
  bool is_supermodular = false;
  double worst_violation = 0.0;
};

// `values` is keyed by bitmask over a ground set of size n ≤ 16 and must
// hold all 2^n subsets. Tests g(V+v) - g(V) <= g(U+v) - g(U) for V ⊆ U,
// v ∉ U; a violation counts when it exceeds `tolerance`.
SupermodularityReport supermodularity_check(const std::map<std::uint32_t, double>& values, int n,
                                            double tolerance = 1e-12);

SupermodularityReport supermodularity_check(const std::function<double(std::uint32_t)>& g, int n,
                                            double tolerance = 1e-12);

}  // namespace trojan_game
