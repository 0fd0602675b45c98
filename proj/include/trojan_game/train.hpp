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

// Supervised minibatch SGD on mean cross-entropy, shared by shadow models,
// target models and the retraining inside greedy selection.

#include <cstdint>
#include <vector>

#include "trojan_game/data.hpp"
#include "trojan_game/nn.hpp"

namespace trojan_game {

struct TrainConfig {
  std::vector<int> hidden = {32};
  Activation activation = Activation::relu;
  int epochs = 40;
  double rate = 0.1;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

MlpModel train_classifier(const Dataset& data, const TrainConfig& cfg);

// Runs cfg.epochs more epochs starting from `model`; init seed unused.
MlpModel continue_training(MlpModel model, const Dataset& data,
                           const TrainConfig& cfg);

// Fixed-order minibatch partition of [0, n) for one epoch.
std::vector<std::vector<std::size_t>> minibatches(std::size_t n, int batch_size,
                                                  std::uint64_t seed);

}  // namespace trojan_game
