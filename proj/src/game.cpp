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

#include "trojan_game/game.hpp"

#include <cmath>
#include <map>

#include "trojan_game/error.hpp"
#include "trojan_game/metrics.hpp"
#include "trojan_game/rng.hpp"
#include "trojan_game/train.hpp"

namespace trojan_game {
namespace {

Matrix pooled_outputs(const std::vector<MlpModel>& models, const Matrix& queries) {
  const Eigen::Index q = queries.cols();
  Matrix out(models.front().output_dim(), q * static_cast<Eigen::Index>(models.size()));
  for (std::size_t i = 0; i < models.size(); ++i) {
    out.middleCols(static_cast<Eigen::Index>(i) * q, q) = forward_batch(models[i], queries);
  }
  return out;
}

Dataset batch_of(const Dataset& data, const std::vector<std::size_t>& idx) {
  return data.subset(idx);
}

// Adds the gradient of mean CE over `data` to `grads`; returns the loss.
double add_ce_term(const MlpModel& f, const Dataset& data, Gradients& grads) {
  const Matrix x = data.features();
  const std::vector<int> y = data.labels();
  const Matrix probs = forward_batch(f, x);
  grads += backward_batch_logits(f, x, cross_entropy_logit_grad(probs, y)).grads;
  return mean_cross_entropy(probs, y);
}

}  // namespace

void GameConfig::validate() const {
  if (!(gamma_d > 0.0 && gamma_d < 1.0)) throw ConfigError("gamma_d must lie in (0,1)");
  if (!(gamma_t >= 0.0 && gamma_t < 1.0)) throw ConfigError("gamma_t must lie in [0,1)");
  if (iterations < 0) throw ConfigError("iterations must be non-negative");
  if (inner_detector_epochs <= 0 || inner_trojan_epochs <= 0) {
    throw ConfigError("inner epoch counts must be positive");
  }
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (js_queries <= 0 || js_bins <= 0) throw ConfigError("js settings must be positive");
}

TrojanLoss trojan_loss(const MlpModel& f_t, const DetectorModel& h, const Matrix& queries,
                       const Dataset& trojan_set, const Dataset& clean_set) {
  if (clean_set.empty()) throw ConfigError("adversary loss needs a non-empty clean set");
  TrojanLoss l;
  l.query_term = trojan_side_term(h, model_outputs(f_t, queries, SourceLabel::trojan));
  if (!trojan_set.empty()) {
    l.trojan_term = mean_cross_entropy(forward_batch(f_t, trojan_set.features()),
                                       trojan_set.labels());
  }
  l.clean_term =
      mean_cross_entropy(forward_batch(f_t, clean_set.features()), clean_set.labels());
  return l;
}

TrojanLossGrad trojan_loss_grad(const MlpModel& f_t, const DetectorModel& h,
                                const Matrix& queries, const Dataset& trojan_set,
                                const Dataset& clean_set) {
  if (clean_set.empty()) throw ConfigError("adversary loss needs a non-empty clean set");
  TrojanLossGrad out;
  out.grads = Gradients::zeros_like(f_t);

  const Matrix z = forward_batch(f_t, queries);
  out.loss.query_term = trojan_side_term(h, OutputBatch{z, SourceLabel::trojan});
  // d ln(1 - sigmoid(a)) / da = -sigmoid(a), zero where the floor is active.
  const Matrix hz = forward_batch(h.net, z);
  Matrix da(1, z.cols());
  const double n = static_cast<double>(z.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    da(0, i) = 1.0 - hz(0, i) < kProbFloor ? 0.0 : -hz(0, i) / n;
  }
  const Matrix dz = backward_batch_logits(h.net, z, da).input_grad;
  out.grads += backward_batch(f_t, queries, dz).grads;

  if (!trojan_set.empty()) out.loss.trojan_term = add_ce_term(f_t, trojan_set, out.grads);
  out.loss.clean_term = add_ce_term(f_t, clean_set, out.grads);
  return out;
}

QuerySpec iteration_queries(const QuerySpec& base, std::uint64_t seed, int iter) {
  QuerySpec q = base;
  q.seed = derive_seed(seed, "queries", static_cast<std::uint64_t>(iter));
  return q;
}

DetectorModel detector_phase(const DetectorModel& h, const MlpModel& f_t,
                             const std::vector<MlpModel>& clean_pool,
                             const GameConfig& cfg, int iter) {
  DetectorModel next = h;
  next.query = iteration_queries(h.query, cfg.seed, iter);
  const Matrix queries = sample_queries(next.query);
  const OutputBatch t{forward_batch(f_t, queries), SourceLabel::trojan};
  const OutputBatch c{pooled_outputs(clean_pool, queries), SourceLabel::clean};
  DetectorTrainOptions opt;
  opt.epochs = cfg.inner_detector_epochs;
  opt.rate = cfg.gamma_d;
  opt.batch_size = cfg.batch_size;
  opt.seed = derive_seed(cfg.seed, "detector", static_cast<std::uint64_t>(iter));
  return train_detector_on_outputs(std::move(next), t, c, opt);
}

double game_detector_loss(const DetectorModel& h, const MlpModel& f_t,
                          const std::vector<MlpModel>& clean_pool) {
  const Matrix queries = sample_queries(h.query);
  return detector_loss(h, model_outputs(f_t, queries, SourceLabel::trojan),
                       OutputBatch{pooled_outputs(clean_pool, queries), SourceLabel::clean});
}

GameResult run_mm_trojan(const GameInputs& in, const GameConfig& cfg, int start_iteration,
                         const IterationObserver& observer) {
  cfg.validate();
  if (in.clean_pool.empty()) throw ConfigError("game needs at least one clean model");
  if (in.clean_set.empty()) throw ConfigError("game needs a non-empty clean set");
  if (start_iteration < 0 || start_iteration > cfg.iterations) {
    throw ConfigError("start iteration outside [0, iterations]");
  }
  in.detector_init.validate();
  in.trojan_init.validate();

  GameResult r{in.trojan_init, in.detector_init, in.detector_init, {}};
  if (cfg.iterations == 0) return r;

  QuerySpec js_spec = in.detector_init.query;
  js_spec.n_queries = cfg.js_queries;
  js_spec.seed = derive_seed(cfg.seed, "js");
  const Matrix js_queries = sample_queries(js_spec);
  const OutputBatch js_clean{pooled_outputs(in.clean_pool, js_queries), SourceLabel::clean};

  auto make_record = [&](int iter, const MlpModel& f_t, const DetectorModel& h,
                         const Matrix& queries) {
    GameRecord rec;
    rec.iter = iter;
    rec.loss_detector = game_detector_loss(h, f_t, in.clean_pool);
    rec.loss_trojan = trojan_loss(f_t, h, queries, in.trojan_set, in.clean_set).total();
    if (in.eval_clean && in.trigger) {
      rec.acc = accuracy(f_t, *in.eval_clean);
      rec.asr = attack_success_rate(f_t, *in.eval_clean, *in.trigger);
    } else {
      rec.acc = accuracy(f_t, in.clean_set);
      rec.asr = in.trojan_set.empty() ? 0.0 : accuracy(f_t, in.trojan_set);
    }
    const double pos = model_score(h, f_t);
    std::vector<double> neg;
    for (const MlpModel& c : in.clean_pool) neg.push_back(model_score(h, c));
    rec.auc = auc(std::span<const double>(&pos, 1), neg);
    rec.js = js_proxy(model_outputs(f_t, js_queries, SourceLabel::trojan), js_clean,
                      cfg.js_bins);
    if (!std::isfinite(rec.loss_detector) || !std::isfinite(rec.loss_trojan) ||
        !std::isfinite(rec.js)) {
      throw DivergenceError("non-finite trace value at iteration " + std::to_string(iter));
    }
    return rec;
  };

  MlpModel f_t = in.trojan_init;
  DetectorModel h = in.detector_init;
  for (int iter = start_iteration + 1; iter <= cfg.iterations; ++iter) {
    h = detector_phase(h, f_t, in.clean_pool, cfg, iter);
    const Matrix queries = sample_queries(h.query);

    if (cfg.gamma_t > 0.0) {
      const std::size_t n = in.clean_set.size();
      const std::size_t n_batches =
          (n + static_cast<std::size_t>(cfg.batch_size) - 1) / static_cast<std::size_t>(cfg.batch_size);
      for (int epoch = 0; epoch < cfg.inner_trojan_epochs; ++epoch) {
        const std::uint64_t es = derive_seed(cfg.seed, "adversary",
                                             static_cast<std::uint64_t>(iter) * 1000003ULL +
                                                 static_cast<std::uint64_t>(epoch));
        const auto bc = minibatches(n, cfg.batch_size, derive_seed(es, "clean"));
        std::vector<std::vector<std::size_t>> bt;
        if (!in.trojan_set.empty()) {
          const std::size_t nt = in.trojan_set.size();
          bt = minibatches(nt, static_cast<int>((nt + n_batches - 1) / n_batches),
                           derive_seed(es, "trojan"));
        }
        for (std::size_t s = 0; s < bc.size(); ++s) {
          const Dataset tb = bt.empty() ? Dataset{{}, in.clean_set.feature_dim,
                                                  in.clean_set.num_classes}
                                        : batch_of(in.trojan_set, bt[s % bt.size()]);
          TrojanLossGrad g = trojan_loss_grad(f_t, h, queries, tb, batch_of(in.clean_set, bc[s]));
          if (!std::isfinite(g.loss.total()) || !g.grads.all_finite()) {
            throw DivergenceError("adversary loss diverged at iteration " + std::to_string(iter));
          }
          f_t = sgd_step(f_t, g.grads, cfg.gamma_t, Direction::descent);
        }
      }
    }

    r.trace.records.push_back(make_record(iter, f_t, h, queries));
    if (observer) observer(iter, f_t, h);
  }
  r.trojan = f_t;
  r.detector_prev = h;
  r.detector_final = detector_phase(h, f_t, in.clean_pool, cfg, cfg.iterations + 1);
  return r;
}

double optimal_discriminator_value(double a, double b) {
  if (a < 0.0 || b < 0.0) throw ConfigError("weights must be non-negative");
  if (a == 0.0 && b == 0.0) throw ConfigError("weights must not both be zero");
  return b / (a + b);
}

double js_proxy(const OutputBatch& trojan_outputs, const OutputBatch& clean_outputs,
                int n_bins) {
  if (n_bins <= 0) throw ConfigError("n_bins must be positive");
  if (trojan_outputs.size() == 0 || clean_outputs.size() == 0) {
    throw ConfigError("js_proxy needs non-empty batches");
  }
  if (trojan_outputs.vectors.rows() != clean_outputs.vectors.rows()) {
    throw ShapeError("output batches have different dimensions");
  }
  const Eigen::Index dims = trojan_outputs.vectors.rows() - 1;
  auto key = [&](const Matrix& m, Eigen::Index col) {
    std::vector<int> k(static_cast<std::size_t>(std::max<Eigen::Index>(dims, 1)), 0);
    for (Eigen::Index j = 0; j < dims; ++j) {
      k[static_cast<std::size_t>(j)] =
          std::clamp(static_cast<int>(std::floor(m(j, col) * n_bins)), 0, n_bins - 1);
    }
    return k;
  };
  std::map<std::vector<int>, std::pair<double, double>> hist;
  const double wt = 1.0 / static_cast<double>(trojan_outputs.size());
  const double wc = 1.0 / static_cast<double>(clean_outputs.size());
  for (Eigen::Index i = 0; i < trojan_outputs.size(); ++i)
    hist[key(trojan_outputs.vectors, i)].first += wt;
  for (Eigen::Index i = 0; i < clean_outputs.size(); ++i)
    hist[key(clean_outputs.vectors, i)].second += wc;
  double js = 0.0;
  for (const auto& [bin, pq] : hist) {
    const auto [p, q] = pq;
    const double m = 0.5 * (p + q);
    const double tp = p > 0.0 ? p * std::log(p / m) : 0.0;
    const double tq = q > 0.0 ? q * std::log(q / m) : 0.0;
    js += tp + tq;
  }
  return std::max(js, 0.0);
}

}  // namespace trojan_game
