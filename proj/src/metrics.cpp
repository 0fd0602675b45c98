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

#include "trojan_game/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trojan_game/error.hpp"
#include "trojan_game/parallel.hpp"
#include "trojan_game/rng.hpp"

namespace trojan_game {

double accuracy(const MlpModel& f, const Dataset& test) {
  if (test.empty()) throw ConfigError("accuracy needs a non-empty test set");
  const Matrix probs = forward_batch(f, test.features());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (argmax_column(probs, static_cast<Eigen::Index>(i)) == test.samples[i].y) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double attack_success_rate(const MlpModel& f, const Dataset& clean_test,
                           const TriggerSpec& trigger) {
  if (clean_test.empty()) throw ConfigError("attack success rate needs a non-empty test set");
  return accuracy(f, poison_dataset(clean_test, trigger));
}

ShadowPopulation build_shadow_population(int n_trojan, int n_clean,
                                         const JumboParams& jumbo,
                                         const Dataset& base_data,
                                         const TrainConfig& train_cfg,
                                         std::uint64_t master_seed, int first_index,
                                         int threads) {
  if (n_trojan < 1 || n_clean < 1) throw ConfigError("shadow counts must be positive");
  base_data.validate();
  jumbo.validate(base_data.feature_dim);
  train_cfg.validate();

  ShadowPopulation pop;
  pop.trojan.resize(static_cast<std::size_t>(n_trojan));
  pop.clean.resize(static_cast<std::size_t>(n_clean));
  pop.trojan_info.resize(pop.trojan.size());
  pop.clean_info.resize(pop.clean.size());
  const std::size_t total = pop.trojan.size() + pop.clean.size();

  parallel_for(total, [&](std::size_t task) {
    const bool is_trojan = task < pop.trojan.size();
    const std::size_t local = is_trojan ? task : task - pop.trojan.size();
    const int index = first_index + static_cast<int>(local);
    const std::uint64_t seed = derive_seed(master_seed, is_trojan ? "trojan-shadow" : "clean-shadow",
                                           static_cast<std::uint64_t>(index));
    TrainConfig cfg = train_cfg;
    cfg.seed = derive_seed(seed, "train");
    ShadowInfo info{is_trojan, index, seed, std::nullopt};
    try {
      if (is_trojan) {
        JumboDraw draw = sample_jumbo_trigger(jumbo, base_data.feature_dim,
                                              base_data.num_classes, derive_seed(seed, "jumbo"));
        const auto n = base_data.size();
        auto count = static_cast<std::size_t>(std::llround(draw.poison_ratio * static_cast<double>(n)));
        count = std::clamp<std::size_t>(count, 1, n);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(seed, "poison"));
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(count);
        pop.trojan[local] = train_classifier(poison_subset(base_data, order, draw.trigger), cfg);
        info.draw = std::move(draw);
        pop.trojan_info[local] = std::move(info);
      } else {
        pop.clean[local] = train_classifier(base_data, cfg);
        pop.clean_info[local] = std::move(info);
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(is_trojan ? "trojan" : "clean") + " shadow " +
                            std::to_string(index) + ": " + e.what());
    }
  }, threads);
  return pop;
}

double population_auc(const DetectorModel& h, std::span<const MlpModel> positives,
                      std::span<const MlpModel> negatives) {
  std::vector<double> pos, neg;
  for (const MlpModel& m : positives) pos.push_back(model_score(h, m));
  for (const MlpModel& m : negatives) neg.push_back(model_score(h, m));
  return auc(pos, neg);
}

namespace {

// Mean over targets of auc([score_j], holdout scores), all under detector j.
double paired_auc(std::span<const MlpModel> targets,
                  const std::vector<const DetectorModel*>& per_target,
                  std::span<const MlpModel> clean_holdouts) {
  if (per_target.size() == 1) {
    return population_auc(*per_target.front(), targets, clean_holdouts);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    sum += population_auc(*per_target[j], targets.subspan(j, 1), clean_holdouts);
  }
  return sum / static_cast<double>(targets.size());
}

}  // namespace

EvalReport evaluate_generations(std::span<const MlpModel> targets,
                                std::span<const DetectorGenerations> detectors,
                                std::span<const MlpModel> clean_holdouts,
                                const Dataset& clean_test, const TriggerSpec& trigger) {
  if (targets.empty()) throw ConfigError("evaluation needs at least one target model");
  if (clean_holdouts.empty()) throw ConfigError("evaluation needs clean holdout models");
  if (detectors.size() != 1 && detectors.size() != targets.size()) {
    throw ConfigError("need one detector set shared by all targets or one per target");
  }
  const bool iterative = detectors.front().previous != nullptr;
  std::vector<const DetectorModel*> vanilla, previous, current;
  for (const DetectorGenerations& g : detectors) {
    if (g.vanilla == nullptr) throw ConfigError("missing vanilla detector checkpoint");
    if ((g.previous != nullptr) != iterative || (g.current != nullptr) != iterative) {
      throw ConfigError("missing t-1 or t detector checkpoint");
    }
    vanilla.push_back(g.vanilla);
    previous.push_back(g.previous);
    current.push_back(g.current);
  }

  EvalReport r;
  for (const MlpModel& t : targets) {
    r.acc += accuracy(t, clean_test);
    r.asr += attack_success_rate(t, clean_test, trigger);
  }
  r.acc /= static_cast<double>(targets.size());
  r.asr /= static_cast<double>(targets.size());
  r.auc_0 = paired_auc(targets, vanilla, clean_holdouts);
  if (iterative) {
    r.auc_t_minus_1 = paired_auc(targets, previous, clean_holdouts);
    r.auc_t = paired_auc(targets, current, clean_holdouts);
  } else {
    r.auc_t = r.auc_0;
  }
  r.n_pos = static_cast<int>(targets.size());
  r.n_neg = static_cast<int>(clean_holdouts.size());
  return r;
}

}  // namespace trojan_game
