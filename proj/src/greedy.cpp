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

#include "trojan_game/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "trojan_game/error.hpp"
#include "trojan_game/parallel.hpp"
#include "trojan_game/rng.hpp"

namespace trojan_game {

void GreedyConfig::validate(std::size_t n_samples) const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in [0,1)");
  if (batch_groups < 1) throw ConfigError("batch_groups must be positive");
  if (n_samples > 0 && static_cast<std::size_t>(batch_groups) > n_samples) {
    throw ConfigError("batch_groups exceeds the number of samples");
  }
  if (retrain_epochs < 1) throw ConfigError("retrain_epochs must be positive");
  if (!(max_fraction_cap > 0.0 && max_fraction_cap <= 1.0)) {
    throw ConfigError("max_fraction_cap must lie in (0,1]");
  }
}

TestSets make_test_sets(const Dataset& clean_test, const TriggerSpec& trigger) {
  return {clean_test, poison_dataset(clean_test, trigger)};
}

SubsetLoss total_test_loss(const Dataset& data, const std::vector<std::size_t>& poisoned,
                           const TestSets& tests, const TriggerSpec& trigger,
                           const TrainConfig& train_cfg) {
  if (tests.clean.empty() || tests.trojan.empty()) throw ConfigError("test sets must be non-empty");
  for (std::size_t i : poisoned) {
    if (i >= data.size()) throw ConfigError("poison index out of range");
  }
  const MlpModel f = train_classifier(poison_subset(data, poisoned, trigger), train_cfg);
  const std::vector<int> yt = tests.trojan.labels();
  const std::vector<int> yc = tests.clean.labels();
  SubsetLoss l;
  l.l_t = mean_cross_entropy(forward_batch(f, tests.trojan.features()), yt);
  l.l_c = mean_cross_entropy(forward_batch(f, tests.clean.features()), yc);
  l.l_tot = l.l_t + l.l_c;
  return l;
}

std::vector<std::vector<std::size_t>> candidate_units(std::size_t n, const GreedyConfig& cfg) {
  std::vector<std::vector<std::size_t>> units;
  if (cfg.batch_groups <= 1) {
    for (std::size_t i = 0; i < n; ++i) units.push_back({i});
    return units;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, "groups"));
  std::shuffle(order.begin(), order.end(), rng);
  const auto g = static_cast<std::size_t>(cfg.batch_groups);
  units.resize(g);
  for (std::size_t i = 0; i < n; ++i) units[i % g].push_back(order[i]);
  for (auto& u : units) std::sort(u.begin(), u.end());
  return units;
}

namespace {

std::vector<std::size_t> merged(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

GreedyResult greedy_select(std::size_t n, const SubsetOracle& oracle, const GreedyConfig& cfg,
                           int threads) {
  cfg.validate(n);
  GreedyResult r;
  const SubsetLoss start = oracle({});
  r.evaluations = 1;
  r.history.push_back({-1, 0, start});
  if (n == 0) return r;

  const auto units = candidate_units(n, cfg);
  std::vector<bool> used(units.size(), false);
  const auto cap = static_cast<std::size_t>(std::floor(cfg.max_fraction_cap * static_cast<double>(n) + 1e-9));
  SubsetLoss current = start;

  while (true) {
    std::vector<std::size_t> open;
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (!used[u] && r.selected.size() + units[u].size() <= cap) open.push_back(u);
    }
    if (open.empty()) break;

    std::vector<SubsetLoss> scores(open.size());
    parallel_for(
        open.size(), [&](std::size_t j) { scores[j] = oracle(merged(r.selected, units[open[j]])); },
        threads);
    r.evaluations += open.size();
    r.evaluations_per_step.push_back(open.size());

    std::size_t best = 0;
    for (std::size_t j = 1; j < open.size(); ++j) {
      const bool better = cfg.selection_rule == SelectionRule::min_resulting_loss
                              ? scores[j].l_tot < scores[best].l_tot
                              : scores[j].l_tot > scores[best].l_tot;
      if (better) best = j;
    }
    if (!(scores[best].l_tot < (1.0 - cfg.epsilon) * current.l_tot)) break;

    const std::size_t u = open[best];
    used[u] = true;
    r.selected = merged(r.selected, units[u]);
    current = scores[best];
    r.history.push_back({static_cast<long>(u), r.selected.size(), current});
  }
  r.final_alpha = static_cast<double>(r.selected.size()) / static_cast<double>(n);
  return r;
}

GreedyResult greedy_select(const Dataset& data, const TestSets& tests, const TriggerSpec& trigger,
                           const GreedyConfig& cfg, const TrainConfig& train_cfg, int threads) {
  data.validate();
  trigger.validate(data.feature_dim, data.num_classes);
  TrainConfig tc = train_cfg;
  tc.epochs = cfg.retrain_epochs;
  tc.validate();
  // Candidate scoring is already parallel; each oracle call trains serially.
  const SubsetOracle oracle = [&](const std::vector<std::size_t>& s) {
    return total_test_loss(data, s, tests, trigger, tc);
  };
  GreedyResult r = greedy_select(data.size(), oracle, cfg, threads);
  r.selected_set = poison_dataset(data.subset(r.selected), trigger);
  return r;
}

MarginalGains marginal_gains(const SubsetOracle& oracle, const std::vector<std::size_t>& s1,
                             const std::vector<std::size_t>& s2, std::size_t probe) {
  std::vector<std::size_t> a = s1, b = s2;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (std::adjacent_find(a.begin(), a.end()) != a.end() ||
      std::adjacent_find(b.begin(), b.end()) != b.end()) {
    throw ConfigError("subsets must not repeat indices");
  }
  if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) {
    throw ConfigError("S1 must be a subset of S2");
  }
  if (std::binary_search(b.begin(), b.end(), probe)) throw ConfigError("probe must lie outside S2");

  const SubsetLoss l1 = oracle(a), l2 = oracle(b);
  const SubsetLoss l1p = oracle(merged(a, {probe})), l2p = oracle(merged(b, {probe}));
  return {l1.l_c - l1p.l_c, l1.l_t - l1p.l_t, l2.l_c - l2p.l_c, l2.l_t - l2p.l_t};
}

SupermodularityReport supermodularity_check(const std::function<double(std::uint32_t)>& g, int n,
                                            double tolerance) {
  if (n < 0 || n > 16) throw ConfigError("ground set size must lie in [0,16]");
  const std::uint32_t full = n == 0 ? 0u : ((1u << n) - 1u);
  std::vector<double> val(static_cast<std::size_t>(full) + 1);
  for (std::uint32_t s = 0; s <= full; ++s) val[s] = g(s);

  double worst = 0.0;
  // Every U, every V ⊆ U (submask enumeration), every v outside U.
  for (std::uint32_t u = 0; u <= full; ++u) {
    const std::uint32_t outside = full & ~u;
    for (std::uint32_t v = u;; v = (v - 1) & u) {
      for (int e = 0; e < n; ++e) {
        const std::uint32_t bit = 1u << e;
        if (!(outside & bit)) continue;
        const double dv = val[v | bit] - val[v];
        const double du = val[u | bit] - val[u];
        worst = std::max(worst, dv - du);
      }
      if (v == 0) break;
    }
  }
  return {worst <= tolerance, worst};
}

SupermodularityReport supermodularity_check(const std::map<std::uint32_t, double>& values, int n,
                                            double tolerance) {
  if (n < 0 || n > 16) throw ConfigError("ground set size must lie in [0,16]");
  const std::uint32_t full = n == 0 ? 0u : ((1u << n) - 1u);
  for (std::uint32_t s = 0; s <= full; ++s) {
    if (!values.count(s)) throw ConfigError("missing value for subset mask " + std::to_string(s));
  }
  return supermodularity_check([&](std::uint32_t s) { return values.at(s); }, n, tolerance);
}

}  // namespace trojan_game
