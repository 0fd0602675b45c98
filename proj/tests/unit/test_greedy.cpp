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

#include <bit>
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "trojan_game/error.hpp"
#include "trojan_game/greedy.hpp"

using namespace trojan_game;
using namespace tg_test;

namespace {

// c - sum w + lambda (sum w)^2, split across the two loss terms.
struct Surrogate {
  std::vector<double> w;
  double c = 10.0, lambda = 0.02;

  explicit Surrogate(std::uint64_t seed, int n = 12) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int i = 0; i < n; ++i) w.push_back(u(rng));
  }
  SubsetLoss operator()(const std::vector<std::size_t>& s) const {
    double sw = 0.0;
    for (std::size_t i : s) sw += w[i];
    SubsetLoss l{c - sw, lambda * sw * sw, 0.0};
    l.l_tot = l.l_t + l.l_c;
    return l;
  }
};

double popcount_pow(std::uint32_t s, double p) { return std::pow(std::popcount(s), p); }

}  // namespace

TEST_CASE("supermodularity toys") {
  CHECK(supermodularity_check([](std::uint32_t s) { return popcount_pow(s, 2); }, 6).is_supermodular);
  const auto sq = supermodularity_check([](std::uint32_t s) { return popcount_pow(s, 0.5); }, 6);
  CHECK_FALSE(sq.is_supermodular);
  CHECK(sq.worst_violation > 0.0);
  const auto mod = supermodularity_check([](std::uint32_t s) { return 3.0 * std::popcount(s) + 1; }, 6);
  CHECK(mod.is_supermodular);
  CHECK(mod.worst_violation == 0.0);
  std::map<std::uint32_t, double> partial{{0, 0.0}, {1, 1.0}};
  CHECK_THROWS_AS(supermodularity_check(partial, 2), ConfigError);
}

TEST_CASE("marginal gains") {
  const Surrogate g(1);
  const SubsetOracle oracle = [&](const std::vector<std::size_t>& s) { return g(s); };
  const MarginalGains eq = marginal_gains(oracle, {1, 3}, {1, 3}, 5);
  CHECK(eq.m_c_s == eq.m_c_k);
  CHECK(eq.m_t_s == eq.m_t_k);
  const MarginalGains m = marginal_gains(oracle, {1}, {1, 2, 7}, 5);
  CHECK(m.m_t_s == doctest::Approx(g.w[5]));
  CHECK(m.condition_holds());
  CHECK_THROWS_AS(marginal_gains(oracle, {4}, {1, 2}, 5), ConfigError);
  CHECK_THROWS_AS(marginal_gains(oracle, {1}, {1, 2}, 2), ConfigError);
}

TEST_CASE("greedy first pick agrees with exhaustive single additions") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Surrogate g(s);
    const SubsetOracle oracle = [&](const std::vector<std::size_t>& v) { return g(v); };
    std::size_t best = 0;
    for (std::size_t i = 1; i < 12; ++i) {
      if (g({i}).l_tot < g({best}).l_tot) best = i;
    }
    GreedyConfig cfg;
    cfg.max_fraction_cap = 1.0;
    const GreedyResult r = greedy_select(12, oracle, cfg, 1);
    REQUIRE(r.history.size() >= 2);
    CHECK(r.history[1].unit == static_cast<long>(best));
  }
}

TEST_CASE("selected set shrinks as epsilon grows") {
  const Surrogate g(4);
  const SubsetOracle oracle = [&](const std::vector<std::size_t>& v) { return g(v); };
  std::size_t last = 13;
  for (double eps : {0.0, 0.01, 0.05, 0.1}) {
    GreedyConfig cfg;
    cfg.epsilon = eps;
    cfg.max_fraction_cap = 1.0;
    const GreedyResult r = greedy_select(12, oracle, cfg, 1);
    CHECK(r.selected.size() <= last);
    last = r.selected.size();
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      CHECK(r.history[i].loss.l_tot < r.history[i - 1].loss.l_tot);
    }
  }
}

TEST_CASE("greedy respects the fraction cap and groups") {
  const Surrogate g(2);
  const SubsetOracle oracle = [&](const std::vector<std::size_t>& v) { return g(v); };
  GreedyConfig cfg;
  cfg.max_fraction_cap = 0.25;
  CHECK(greedy_select(12, oracle, cfg, 1).selected.size() <= 3);
  cfg.batch_groups = 4;
  const auto units = candidate_units(12, cfg);
  CHECK(units.size() == 4);
  std::vector<int> seen(12, 0);
  for (const auto& u : units) {
    for (std::size_t i : u) ++seen[i];
  }
  for (int v : seen) CHECK(v == 1);
  cfg.batch_groups = 20;
  CHECK_THROWS_AS(cfg.validate(12), ConfigError);
}
