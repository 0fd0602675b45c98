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

#include "trojan_game/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trojan_game/error.hpp"
#include "trojan_game/rng.hpp"
#include "trojan_game/train.hpp"

namespace trojan_game {
namespace {

Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(cols[i]));
  }
  return out;
}

void check_batches(const DetectorModel& h, const OutputBatch& t, const OutputBatch& c) {
  if (t.size() == 0 || c.size() == 0) throw ConfigError("empty output batch");
  if (t.vectors.rows() != h.net.input_dim() || c.vectors.rows() != h.net.input_dim()) {
    throw ShapeError("output vectors do not match detector input dimension");
  }
}

}  // namespace

void QuerySpec::validate() const {
  if (mean.size() == 0 || mean.size() != cov_diag.size()) {
    throw ShapeError("query mean and covariance must have the same positive length");
  }
  if (!(cov_diag.array() > 0.0).all()) {
    throw ConfigError("query covariance entries must be positive");
  }
  if (n_queries <= 0) throw ConfigError("n_queries must be positive");
}

QuerySpec QuerySpec::isotropic(int feature_dim, double mean, double variance,
                               int n_queries, std::uint64_t seed) {
  QuerySpec q{Vector::Constant(feature_dim, mean),
              Vector::Constant(feature_dim, variance), n_queries, seed};
  q.validate();
  return q;
}

void DetectorModel::validate() const {
  net.validate();
  query.validate();
  if (net.output_head != Head::sigmoid_scalar) {
    throw ConfigError("detector net must use the sigmoid_scalar head");
  }
}

void OutputBatch::validate() const {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    if (std::abs(vectors.col(c).sum() - 1.0) > 1e-9) {
      throw ConfigError("output vector does not sum to one");
    }
  }
}

Matrix sample_queries(const QuerySpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const Vector sd = spec.cov_diag.cwiseSqrt();
  Matrix out(spec.mean.size(), spec.n_queries);
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      out(r, c) = spec.mean(r) + sd(r) * n01(rng);
    }
  }
  return out;
}

DetectorModel make_detector(int num_classes, const QuerySpec& query,
                            std::vector<int> hidden, Activation activation,
                            std::uint64_t seed) {
  std::vector<int> dims{num_classes};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  DetectorModel h{init_model(dims, activation, Head::sigmoid_scalar, seed), query};
  h.validate();
  return h;
}

OutputBatch model_outputs(const MlpModel& f, const Matrix& queries, SourceLabel source) {
  return {forward_batch(f, queries), source};
}

double trojan_side_term(const DetectorModel& h, const OutputBatch& trojan_outputs) {
  if (trojan_outputs.size() == 0) throw ConfigError("empty output batch");
  const Matrix ht = forward_batch(h.net, trojan_outputs.vectors);
  double st = 0.0;
  for (Eigen::Index i = 0; i < ht.cols(); ++i) st += std::log(std::max(1.0 - ht(0, i), kProbFloor));
  return st / static_cast<double>(ht.cols());
}

double clean_side_term(const DetectorModel& h, const OutputBatch& clean_outputs) {
  if (clean_outputs.size() == 0) throw ConfigError("empty output batch");
  const Matrix hc = forward_batch(h.net, clean_outputs.vectors);
  double sc = 0.0;
  for (Eigen::Index i = 0; i < hc.cols(); ++i) sc += std::log(std::max(hc(0, i), kProbFloor));
  return sc / static_cast<double>(hc.cols());
}

double detector_loss(const DetectorModel& h, const OutputBatch& trojan_outputs,
                     const OutputBatch& clean_outputs) {
  check_batches(h, trojan_outputs, clean_outputs);
  return trojan_side_term(h, trojan_outputs) + clean_side_term(h, clean_outputs);
}

DetectorLossGrad detector_loss_grad(const DetectorModel& h,
                                    const OutputBatch& trojan_outputs,
                                    const OutputBatch& clean_outputs) {
  check_batches(h, trojan_outputs, clean_outputs);
  const double nt = static_cast<double>(trojan_outputs.size());
  const double nc = static_cast<double>(clean_outputs.size());
  // With h = sigmoid(a): d ln(1-h)/da = -h and d ln h/da = 1 - h. Working on
  // the logit keeps the gradient informative where h saturates.
  const Matrix ht = forward_batch(h.net, trojan_outputs.vectors);
  const Matrix hc = forward_batch(h.net, clean_outputs.vectors);
  Matrix gt(1, ht.cols()), gc(1, hc.cols());
  double st = 0.0, sc = 0.0;
  for (Eigen::Index i = 0; i < ht.cols(); ++i) {
    const double v = ht(0, i);
    st += std::log(std::max(1.0 - v, kProbFloor));
    gt(0, i) = 1.0 - v < kProbFloor ? 0.0 : -v / nt;
  }
  for (Eigen::Index i = 0; i < hc.cols(); ++i) {
    const double v = hc(0, i);
    sc += std::log(std::max(v, kProbFloor));
    gc(0, i) = v < kProbFloor ? 0.0 : (1.0 - v) / nc;
  }
  DetectorLossGrad out;
  out.loss = st / nt + sc / nc;
  out.grads = backward_batch_logits(h.net, trojan_outputs.vectors, gt).grads;
  out.grads += backward_batch_logits(h.net, clean_outputs.vectors, gc).grads;
  return out;
}

DetectorModel train_detector_on_outputs(DetectorModel h, const OutputBatch& trojan_outputs,
                                        const OutputBatch& clean_outputs,
                                        const DetectorTrainOptions& options) {
  check_batches(h, trojan_outputs, clean_outputs);
  if (options.epochs < 0 || options.batch_size <= 0) {
    throw ConfigError("invalid detector training options");
  }
  const auto nt = static_cast<std::size_t>(trojan_outputs.size());
  const auto nc = static_cast<std::size_t>(clean_outputs.size());
  // Clean minibatches are sized so both sides are exhausted together.
  const std::size_t n_batches =
      (std::max(nt, nc) + static_cast<std::size_t>(options.batch_size) - 1) /
      static_cast<std::size_t>(options.batch_size);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const auto bt = minibatches(nt, static_cast<int>((nt + n_batches - 1) / n_batches),
                                derive_seed(options.seed, "det-t", epoch));
    const auto bc = minibatches(nc, static_cast<int>((nc + n_batches - 1) / n_batches),
                                derive_seed(options.seed, "det-c", epoch));
    const std::size_t steps = std::min(bt.size(), bc.size());
    for (std::size_t s = 0; s < steps; ++s) {
      const OutputBatch t{select_columns(trojan_outputs.vectors, bt[s]), SourceLabel::trojan};
      const OutputBatch c{select_columns(clean_outputs.vectors, bc[s]), SourceLabel::clean};
      DetectorLossGrad g = detector_loss_grad(h, t, c);
      if (!std::isfinite(g.loss)) throw DivergenceError("non-finite detector loss");
      h.net = sgd_step(h.net, g.grads, options.rate, Direction::ascent);
    }
  }
  return h;
}

DetectorModel train_detector(DetectorModel h, std::span<const MlpModel> trojan_models,
                             std::span<const MlpModel> clean_models,
                             const DetectorTrainOptions& options) {
  h.validate();
  if (trojan_models.empty() || clean_models.empty()) {
    throw ConfigError("detector training needs both Trojaned and clean models");
  }
  const std::size_t n = std::min(trojan_models.size(), clean_models.size());
  const Matrix queries = sample_queries(h.query);
  const Eigen::Index q = queries.cols();
  const Eigen::Index k = h.net.input_dim();
  OutputBatch t{Matrix(k, q * static_cast<Eigen::Index>(n)), SourceLabel::trojan};
  OutputBatch c{Matrix(k, q * static_cast<Eigen::Index>(n)), SourceLabel::clean};
  for (std::size_t i = 0; i < n; ++i) {
    const auto off = static_cast<Eigen::Index>(i) * q;
    t.vectors.middleCols(off, q) = forward_batch(trojan_models[i], queries);
    c.vectors.middleCols(off, q) = forward_batch(clean_models[i], queries);
  }
  return train_detector_on_outputs(std::move(h), t, c, options);
}

double model_score(const DetectorModel& h, const MlpModel& f) {
  const Matrix z = forward_batch(f, sample_queries(h.query));
  if (z.rows() != h.net.input_dim()) {
    throw ShapeError("model output dimension does not match detector");
  }
  return 1.0 - forward_batch(h.net, z).mean();
}

double auc(std::span<const double> scores_positive,
           std::span<const double> scores_negative) {
  if (scores_positive.empty() || scores_negative.empty()) {
    throw ConfigError("auc needs non-empty positive and negative score lists");
  }
  // Rank-sum form with mid-ranks for ties. Ranks are multiples of 1/2, so
  // the U statistic is exact in double precision.
  struct Entry { double score; bool positive; };
  std::vector<Entry> all;
  all.reserve(scores_positive.size() + scores_negative.size());
  for (double s : scores_positive) all.push_back({s, true});
  for (double s : scores_negative) all.push_back({s, false});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });
  double rank_sum_twice = 0.0;  // 2 * sum of positive mid-ranks (1-based)
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double twice_mid = static_cast<double>(i + 1 + j);  // 2 * (i+1+j)/2
    for (std::size_t m = i; m < j; ++m) {
      if (all[m].positive) rank_sum_twice += twice_mid;
    }
    i = j;
  }
  const double np = static_cast<double>(scores_positive.size());
  const double nn = static_cast<double>(scores_negative.size());
  const double u_twice = rank_sum_twice - np * (np + 1.0);
  return u_twice / (2.0 * np * nn);
}

}  // namespace trojan_game
