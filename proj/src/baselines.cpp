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

#include "trojan_game/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trojan_game/error.hpp"
#include "trojan_game/parallel.hpp"
#include "trojan_game/rng.hpp"

namespace trojan_game {

namespace {

Vector sigmoid(const Vector& v) {
  return v.unaryExpr([](double a) { return 1.0 / (1.0 + std::exp(-a)); });
}

void check_probe_shape(const MlpModel& f, int target, const Matrix& probes,
                       const TriggerParams& p) {
  if (target < 0 || target >= f.output_dim()) throw ConfigError("target class out of range");
  if (probes.rows() != f.input_dim() || probes.cols() == 0) {
    throw ShapeError("probes must be non-empty with one input per column");
  }
  if (p.mask_raw.size() != probes.rows() || p.pattern_raw.size() != probes.rows()) {
    throw ShapeError("trigger parameters do not match the input dimension");
  }
}

Matrix stamped(const Matrix& probes, const Vector& m, const Vector& pat) {
  Matrix x = probes;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    x.col(j) = probes.col(j).cwiseProduct(Vector::Ones(m.size()) - m) + pat.cwiseProduct(m);
  }
  return x;
}

double entropy(const Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) h -= p(i) * std::log(p(i));
  }
  return std::max(h, 0.0);
}

}  // namespace

double reverse_trigger_loss(const MlpModel& f, int target, const Matrix& probes,
                            const TriggerParams& p, double lambda) {
  check_probe_shape(f, target, probes, p);
  const Vector m = sigmoid(p.mask_raw), pat = sigmoid(p.pattern_raw);
  const std::vector<int> y(static_cast<std::size_t>(probes.cols()), target);
  return mean_cross_entropy(forward_batch(f, stamped(probes, m, pat)), y) + lambda * m.sum();
}

TriggerLossGrad reverse_trigger_loss_grad(const MlpModel& f, int target, const Matrix& probes,
                                          const TriggerParams& p, double lambda) {
  check_probe_shape(f, target, probes, p);
  const Vector m = sigmoid(p.mask_raw), pat = sigmoid(p.pattern_raw);
  const Matrix x = stamped(probes, m, pat);
  const Matrix probs = forward_batch(f, x);
  const std::vector<int> y(static_cast<std::size_t>(probes.cols()), target);

  TriggerLossGrad out;
  out.ce = mean_cross_entropy(probs, y);
  out.loss = out.ce + lambda * m.sum();
  const Matrix dx = backward_batch_logits(f, x, cross_entropy_logit_grad(probs, y, 1.0)).input_grad;

  Vector gm = Vector::Zero(m.size()), gp = Vector::Zero(m.size());
  for (Eigen::Index j = 0; j < dx.cols(); ++j) {
    gm += dx.col(j).cwiseProduct(pat - probes.col(j));
    gp += dx.col(j).cwiseProduct(m);
  }
  gm.array() += lambda;
  out.grad_mask_raw = gm.cwiseProduct(m.cwiseProduct(Vector::Ones(m.size()) - m));
  out.grad_pattern_raw = gp.cwiseProduct(pat.cwiseProduct(Vector::Ones(m.size()) - pat));
  return out;
}

void ReverseOptions::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (steps < 1) throw ConfigError("steps must be positive");
  if (!(rate > 0.0)) throw ConfigError("rate must be positive");
}

ReversedTrigger reverse_trigger(const MlpModel& f, int target, const Matrix& probes,
                                const ReverseOptions& opt) {
  opt.validate();
  const auto d = probes.rows();
  Rng rng(derive_seed(opt.seed, "reverse", static_cast<std::uint64_t>(target)));
  std::normal_distribution<double> noise(0.0, 0.1);
  // Start from a small mask and a random mid-range pattern.
  TriggerParams p{Vector::Constant(d, -2.0), Vector(d)};
  for (Eigen::Index i = 0; i < d; ++i) p.pattern_raw(i) = noise(rng);

  ReversedTrigger r;
  r.class_id = target;
  for (int s = 0; s < opt.steps; ++s) {
    const TriggerLossGrad g = reverse_trigger_loss_grad(f, target, probes, p, opt.lambda);
    if (!std::isfinite(g.loss) || !g.grad_mask_raw.allFinite() || !g.grad_pattern_raw.allFinite()) {
      throw DivergenceError("trigger reversal diverged for class " + std::to_string(target));
    }
    r.loss_history.push_back(g.loss);
    p.mask_raw -= opt.rate * g.grad_mask_raw;
    p.pattern_raw -= opt.rate * g.grad_pattern_raw;
  }
  const double final_loss = reverse_trigger_loss(f, target, probes, p, opt.lambda);
  if (!std::isfinite(final_loss)) {
    throw DivergenceError("trigger reversal diverged for class " + std::to_string(target));
  }
  r.loss_history.push_back(final_loss);

  r.mask = sigmoid(p.mask_raw);
  r.pattern = sigmoid(p.pattern_raw);
  r.mask_norm = r.mask.lpNorm<1>();
  const Matrix probs = forward_batch(f, stamped(probes, r.mask, r.pattern));
  int hits = 0;
  for (Eigen::Index j = 0; j < probs.cols(); ++j) hits += argmax_column(probs, j) == target;
  r.attack_success = static_cast<double>(hits) / static_cast<double>(probs.cols());
  return r;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

AnomalyReport anomaly_report(const std::vector<double>& mask_norms, double threshold) {
  if (mask_norms.empty()) throw ConfigError("need at least one mask norm");
  AnomalyReport a;
  a.mask_norms = mask_norms;
  const double med = median(mask_norms);
  std::vector<double> dev;
  for (double v : mask_norms) dev.push_back(std::abs(v - med));
  // Floor keeps the index finite when every norm coincides.
  const double scale = std::max(1.4826 * median(dev), 1e-12);
  for (std::size_t c = 0; c < mask_norms.size(); ++c) {
    const double idx = dev[c] / scale;
    a.anomaly_index.push_back(idx);
    if (mask_norms[c] < med && idx > a.max_low_index) {
      a.max_low_index = idx;
      a.flagged_class = static_cast<int>(c);
    }
  }
  a.model_score = 1.0 / (1.0 + std::exp(-(a.max_low_index - threshold)));
  return a;
}

AnomalyReport neural_cleanse_score(const MlpModel& f, const Matrix& probes,
                                   const ReverseOptions& opt, double threshold, int threads) {
  const int k = f.output_dim();
  std::vector<double> norms(static_cast<std::size_t>(k));
  parallel_for(
      static_cast<std::size_t>(k),
      [&](std::size_t c) { norms[c] = reverse_trigger(f, static_cast<int>(c), probes, opt).mask_norm; },
      threads);
  return anomaly_report(norms, threshold);
}

double strip_entropy(const MlpModel& f, const Vector& x, const Matrix& blend_pool, int n_blends) {
  if (n_blends < 1 || n_blends > blend_pool.cols()) {
    throw ConfigError("n_blends must lie in [1, pool size]");
  }
  if (x.size() != blend_pool.rows()) throw ShapeError("input and blend pool dimensions differ");
  Matrix blends(blend_pool.rows(), n_blends);
  for (int b = 0; b < n_blends; ++b) blends.col(b) = 0.5 * x + 0.5 * blend_pool.col(b);
  const Matrix probs = forward_batch(f, blends);
  double h = 0.0;
  for (int b = 0; b < n_blends; ++b) h += entropy(probs.col(b));
  return h / n_blends;
}

double strip_model_score(const MlpModel& f, const Matrix& clean_probes, const TriggerSpec& trigger,
                         const Matrix& blend_pool, int n_blends) {
  if (clean_probes.cols() == 0) throw ConfigError("need clean probes");
  std::vector<double> clean_h;
  for (Eigen::Index j = 0; j < clean_probes.cols(); ++j) {
    clean_h.push_back(strip_entropy(f, clean_probes.col(j), blend_pool, n_blends));
  }
  std::vector<double> sorted = clean_h;
  std::sort(sorted.begin(), sorted.end());
  // Linear-interpolated 10th percentile.
  const double pos = 0.1 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double cut = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);

  const Matrix stamped_probes = embed_trigger_batch(clean_probes, trigger);
  int below = 0;
  for (Eigen::Index j = 0; j < stamped_probes.cols(); ++j) {
    below += strip_entropy(f, stamped_probes.col(j), blend_pool, n_blends) < cut;
  }
  return static_cast<double>(below) / static_cast<double>(stamped_probes.cols());
}

}  // namespace trojan_game
