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

// Output-based Trojaned-model detector. h(z) is trained to estimate the
// probability that the output vector z came from a clean model, so the
// per-model detection score is 1 - mean h over the probing queries.

#include <cstdint>
#include <span>
#include <vector>

#include "trojan_game/nn.hpp"

namespace trojan_game {

struct QuerySpec {
  Vector mean;      // mu
  Vector cov_diag;  // diagonal of Sigma (variances)
  int n_queries = 64;
  std::uint64_t seed = 0;

  void validate() const;
  static QuerySpec isotropic(int feature_dim, double mean, double variance,
                             int n_queries, std::uint64_t seed);
};

struct DetectorModel {
  MlpModel net;  // sigmoid_scalar head over the k-dim output vector
  QuerySpec query;

  void validate() const;
};

enum class SourceLabel { clean = 0, trojan = 1 };

struct OutputBatch {
  Matrix vectors;  // k x n, each column a probability vector
  SourceLabel source = SourceLabel::clean;

  Eigen::Index size() const { return vectors.cols(); }
  void validate() const;
};

// n_queries draws from N(mean, diag(cov_diag)); not clipped.
Matrix sample_queries(const QuerySpec& spec);

DetectorModel make_detector(int num_classes, const QuerySpec& query,
                            std::vector<int> hidden, Activation activation,
                            std::uint64_t seed);

OutputBatch model_outputs(const MlpModel& f, const Matrix& queries,
                          SourceLabel source);

// mean ln(1 - h(z_T)): the Trojan-side term shared by the detector's and the
// adversary's objectives.
double trojan_side_term(const DetectorModel& h, const OutputBatch& trojan_outputs);
// mean ln(h(z_C)).
double clean_side_term(const DetectorModel& h, const OutputBatch& clean_outputs);

// mean ln(1 - h(z_T)) + mean ln(h(z_C)); always <= 0. The detector ascends it.
double detector_loss(const DetectorModel& h, const OutputBatch& trojan_outputs,
                     const OutputBatch& clean_outputs);

struct DetectorLossGrad {
  double loss = 0.0;
  Gradients grads;  // dL_D/dtheta_D
};
DetectorLossGrad detector_loss_grad(const DetectorModel& h,
                                    const OutputBatch& trojan_outputs,
                                    const OutputBatch& clean_outputs);

struct DetectorTrainOptions {
  int epochs = 50;
  double rate = 0.1;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

// Minibatch gradient ascent on L_D over pooled outputs of the given models
// on the detector's own query set. The larger population is truncated so
// both sides contribute the same number of outputs.
DetectorModel train_detector(DetectorModel h, std::span<const MlpModel> trojan_models,
                             std::span<const MlpModel> clean_models,
                             const DetectorTrainOptions& options);

// Ascent epochs on fixed output batches.
DetectorModel train_detector_on_outputs(DetectorModel h, const OutputBatch& trojan_outputs,
                                        const OutputBatch& clean_outputs,
                                        const DetectorTrainOptions& options);

// 1 - mean_{x in D_R} h(f(x)); higher means more likely Trojaned.
double model_score(const DetectorModel& h, const MlpModel& f);

// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked correctly,
// ties counted one half.
double auc(std::span<const double> scores_positive,
           std::span<const double> scores_negative);

}  // namespace trojan_game
