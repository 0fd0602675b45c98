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

// Minimal dense network engine: forward pass, hand-derived backward pass
// and plain SGD. Matrices store one sample per column.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace trojan_game {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { relu, tanh };
enum class Head { softmax, sigmoid_scalar };
enum class Direction { descent, ascent };

// Probability floor applied before every logarithm.
inline constexpr double kProbFloor = 1e-12;

struct MlpModel {
  std::vector<int> layer_dims;   // d, hidden..., output
  std::vector<Matrix> weights;   // layer l: layer_dims[l+1] x layer_dims[l]
  std::vector<Vector> biases;    // layer l: layer_dims[l+1]
  Activation hidden_activation = Activation::relu;
  Head output_head = Head::softmax;

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  std::size_t num_layers() const { return weights.size(); }
  std::size_t parameter_count() const;

  // Throws ShapeError/ConfigError when an invariant is broken.
  void validate() const;

  // All parameters in a fixed order (per layer: weights row-major, then
  // biases). Used for checksums and finite-difference probes.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> params);

  friend bool operator==(const MlpModel&, const MlpModel&);
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static Gradients zeros_like(const MlpModel& model);

  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double scale);
  bool all_finite() const;
  std::vector<double> flatten() const;
};

struct BackwardResult {
  Gradients grads;
  Vector input_grad;
};

struct BatchBackwardResult {
  Gradients grads;     // summed over the batch columns
  Matrix input_grad;   // d x n
};

Vector forward(const MlpModel& model, const Vector& x);
Matrix forward_batch(const MlpModel& model, const Matrix& inputs);

// Pre-head outputs (logits), d_out x n.
Matrix logits_batch(const MlpModel& model, const Matrix& inputs);

// `upstream` is dLoss/dOutput where output is the head's probability vector
// (or scalar). Returns parameter and input gradients.
BackwardResult backward(const MlpModel& model, const Vector& x,
                        const Vector& upstream);
BatchBackwardResult backward_batch(const MlpModel& model, const Matrix& inputs,
                                   const Matrix& upstream);
// Same, with the upstream gradient given directly w.r.t. the logits.
BatchBackwardResult backward_batch_logits(const MlpModel& model,
                                          const Matrix& inputs,
                                          const Matrix& upstream_logits);

double cross_entropy(const Vector& probs, int label);

// Mean cross-entropy over the columns of `probs`.
double mean_cross_entropy(const Matrix& probs, std::span<const int> labels);

// dMeanCE/dlogits for a softmax head, scaled by `weight`: weight*(p - e_y)/n.
Matrix cross_entropy_logit_grad(const Matrix& probs, std::span<const int> labels,
                                double weight = 1.0);

MlpModel sgd_step(const MlpModel& model, const Gradients& grads, double rate,
                  Direction direction);

MlpModel init_model(const std::vector<int>& layer_dims, Activation activation,
                    Head head, std::uint64_t seed);

// Exact elementwise equality; false when the shapes differ.
inline bool same_values(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}
inline bool same_values(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

// Index of the largest entry, ties broken towards the lowest index.
int argmax(const Vector& v);
int argmax_column(const Matrix& m, Eigen::Index col);

}  // namespace trojan_game
