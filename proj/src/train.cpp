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

#include "trojan_game/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trojan_game/error.hpp"
#include "trojan_game/rng.hpp"

namespace trojan_game {

void TrainConfig::validate() const {
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("hidden layer sizes must be positive");
  }
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("train rate must lie in (0,1)");
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
}

std::vector<std::vector<std::size_t>> minibatches(std::size_t n, int batch_size,
                                                  std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t b = 0; b < n; b += static_cast<std::size_t>(batch_size)) {
    const std::size_t e = std::min(n, b + static_cast<std::size_t>(batch_size));
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                     order.begin() + static_cast<std::ptrdiff_t>(e));
  }
  return out;
}

MlpModel continue_training(MlpModel model, const Dataset& data,
                           const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (model.input_dim() != data.feature_dim || model.output_dim() != data.num_classes) {
    throw ShapeError("model does not match dataset dimensions");
  }
  const Matrix features = data.features();
  const std::vector<int> labels = data.labels();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& batch :
         minibatches(data.size(), cfg.batch_size, derive_seed(cfg.seed, "epoch", epoch))) {
      Matrix x(features.rows(), static_cast<Eigen::Index>(batch.size()));
      std::vector<int> y(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        x.col(static_cast<Eigen::Index>(i)) = features.col(static_cast<Eigen::Index>(batch[i]));
        y[i] = labels[batch[i]];
      }
      const Matrix probs = forward_batch(model, x);
      const Matrix g = cross_entropy_logit_grad(probs, y);
      BatchBackwardResult r = backward_batch_logits(model, x, g);
      if (!r.grads.all_finite()) {
        throw DivergenceError("non-finite gradient at epoch " + std::to_string(epoch));
      }
      model = sgd_step(model, r.grads, cfg.rate, Direction::descent);
    }
  }
  return model;
}

MlpModel train_classifier(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  std::vector<int> dims{data.feature_dim};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(data.num_classes);
  MlpModel model = init_model(dims, cfg.activation, Head::softmax,
                              derive_seed(cfg.seed, "init"));
  return continue_training(std::move(model), data, cfg);
}

}  // namespace trojan_game
