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

#include "doctest.h"
#include "support.hpp"
#include "trojan_game/error.hpp"
#include "trojan_game/metrics.hpp"

using namespace trojan_game;
using namespace tg_test;

TEST_CASE("accuracy and ASR match direct counting") {
  const Dataset d = make_blobs(3, 5, 15, 0.2, 2);
  const MlpModel f = init_model({5, 6, 3}, Activation::tanh, Head::softmax, 3);
  for (const TargetRule rule : {TargetRule::fixed(1), TargetRule::all_to_all()}) {
    const TriggerSpec t = block_trigger(5, 1, 2, 0.9, 0.3, rule);
    int acc = 0, hit = 0;
    for (const Sample& s : d.samples) {
      acc += argmax(forward(f, s.x)) == s.y;
      hit += argmax(forward(f, embed_trigger(s.x, t))) == rule.apply(s.y, 3);
    }
    CHECK(accuracy(f, d) == static_cast<double>(acc) / static_cast<double>(d.size()));
    CHECK(attack_success_rate(f, d, t) == static_cast<double>(hit) / static_cast<double>(d.size()));
  }
}

TEST_CASE("evaluate_generations null semantics") {
  const Dataset d = make_blobs(2, 4, 10, 0.2, 2);
  const TriggerSpec t = block_trigger(4, 0, 1, 1.0, 0.0, TargetRule::fixed(0));
  const auto q = QuerySpec::isotropic(4, 0.5, 0.01, 8, 1);
  const DetectorModel h0 = make_detector(2, q, {3}, Activation::tanh, 1);
  const DetectorModel h1 = make_detector(2, q, {3}, Activation::tanh, 2);
  std::vector<MlpModel> targets, holdouts;
  for (int i = 0; i < 3; ++i) {
    targets.push_back(init_model({4, 5, 2}, Activation::relu, Head::softmax, 10 + i));
    holdouts.push_back(init_model({4, 5, 2}, Activation::relu, Head::softmax, 20 + i));
  }

  const std::vector<DetectorGenerations> stat{{&h0, nullptr, nullptr}};
  const EvalReport s = evaluate_generations(targets, stat, holdouts, d, t);
  CHECK_FALSE(s.auc_t_minus_1.has_value());
  CHECK(s.auc_t == s.auc_0);
  CHECK(s.auc_0 == population_auc(h0, targets, holdouts));
  CHECK(s.n_pos == 3);
  CHECK(s.n_neg == 3);

  const std::vector<DetectorGenerations> it{{&h0, &h1, &h0}};
  const EvalReport r = evaluate_generations(targets, it, holdouts, d, t);
  REQUIRE(r.auc_t_minus_1.has_value());
  CHECK(*r.auc_t_minus_1 == population_auc(h1, targets, holdouts));

  const std::vector<DetectorGenerations> mixed{{&h0, &h1, &h0}, {&h0, nullptr, nullptr}, {&h0, &h1, &h0}};
  CHECK_THROWS_AS(evaluate_generations(targets, mixed, holdouts, d, t), ConfigError);
  const std::vector<DetectorGenerations> missing{{nullptr, nullptr, nullptr}};
  CHECK_THROWS_AS(evaluate_generations(targets, missing, holdouts, d, t), ConfigError);
}

TEST_CASE("shadow populations are reproducible and thread-independent") {
  const Dataset d = make_blobs(2, 6, 20, 0.1, 1);
  TrainConfig tc;
  tc.epochs = 3;
  const ShadowPopulation a = build_shadow_population(3, 2, JumboParams{}, d, tc, 9, 0, 1);
  const ShadowPopulation b = build_shadow_population(3, 2, JumboParams{}, d, tc, 9, 0, 4);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.trojan[i] == b.trojan[i]);
    CHECK(a.trojan_info[i].draw.has_value());
  }
  CHECK(a.clean[1] == b.clean[1]);
  const ShadowPopulation c = build_shadow_population(3, 2, JumboParams{}, d, tc, 9, 5, 1);
  CHECK_FALSE(a.clean[0] == c.clean[0]);
}
