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

#include "trojan_game/nn.hpp"

#include <cmath>
#include <random>

#include "trojan_game/error.hpp"
#include "trojan_game/rng.hpp"

namespace trojan_game {
namespace {

struct Trace {
  std::vector<Matrix> activations;  // input, then post-activation per hidden layer
  std::vector<Matrix> pre;          // pre-activation per layer
};

void check_input(const MlpModel& model, Eigen::Index rows) {
  if (rows != model.input_dim()) {
    throw ShapeError("input has " + std::to_string(rows) +
                     " features, model expects " +
                     std::to_string(model.input_dim()));
  }
}

Matrix activate(const Matrix& z, Activation act) {
  if (act == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Elementwise derivative of the hidden activation given pre-activation z
// and post-activation a.
Matrix activation_grad(const Matrix& z, const Matrix& a, Activation act) {
  if (act == Activation::relu) {
    return (z.array() > 0.0).cast<double>().matrix();
  }
  return (1.0 - a.array().square()).matrix();
}

Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    Vector e = (logits.col(c).array() - m).exp().matrix();
    out.col(c) = e / e.sum();
  }
  return out;
}

Matrix sigmoid(const Matrix& z) {
  return z.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Matrix apply_head(const Matrix& logits, Head head) {
  return head == Head::softmax ? softmax_columns(logits) : sigmoid(logits);
}

Trace run(const MlpModel& model, const Matrix& inputs) {
  check_input(model, inputs.rows());
  Trace t;
  t.activations.reserve(model.num_layers());
  t.pre.reserve(model.num_layers());
  t.activations.push_back(inputs);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    Matrix z = model.weights[l] * t.activations.back();
    z.colwise() += model.biases[l];
    if (l + 1 < model.num_layers()) {
      t.activations.push_back(activate(z, model.hidden_activation));
    }
    t.pre.push_back(std::move(z));
  }
  return t;
}

BatchBackwardResult backprop(const MlpModel& model, const Trace& t,
                             Matrix delta) {
  BatchBackwardResult r;
  const std::size_t L = model.num_layers();
  r.grads.weights.resize(L);
  r.grads.biases.resize(L);
  for (std::size_t l = L; l-- > 0;) {
    r.grads.weights[l] = delta * t.activations[l].transpose();
    r.grads.biases[l] = delta.rowwise().sum();
    Matrix back = model.weights[l].transpose() * delta;
    if (l == 0) {
      r.input_grad = std::move(back);
    } else {
      delta = back.cwiseProduct(activation_grad(t.pre[l - 1], t.activations[l],
                                                model.hidden_activation));
    }
  }
  return r;
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

void MlpModel::validate() const {
  if (layer_dims.size() < 2) {
    throw ConfigError("model needs at least an input and an output dimension");
  }
  for (int d : layer_dims) {
    if (d <= 0) throw ConfigError("layer dimensions must be positive");
  }
  if (weights.size() + 1 != layer_dims.size() ||
      biases.size() + 1 != layer_dims.size()) {
    throw ShapeError("layer count does not match layer_dims");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_dims[l + 1] ||
        weights[l].cols() != layer_dims[l]) {
      throw ShapeError("weight matrix " + std::to_string(l) + " has wrong shape");
    }
    if (biases[l].size() != layer_dims[l + 1]) {
      throw ShapeError("bias vector " + std::to_string(l) + " has wrong length");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw DivergenceError("non-finite parameter in layer " + std::to_string(l));
    }
  }
  if (output_head == Head::softmax && output_dim() < 2) {
    throw ConfigError("softmax head needs at least two outputs");
  }
  if (output_head == Head::sigmoid_scalar && output_dim() != 1) {
    throw ConfigError("sigmoid_scalar head needs exactly one output");
  }
}

std::vector<double> MlpModel::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
        out.push_back(weights[l](r, c));
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) out.push_back(biases[l](r));
  }
  return out;
}

void MlpModel::assign_flat(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw ShapeError("flat parameter vector has wrong length");
  }
  std::size_t i = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
        weights[l](r, c) = params[i++];
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) biases[l](r) = params[i++];
  }
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.layer_dims != b.layer_dims || a.hidden_activation != b.hidden_activation ||
      a.output_head != b.output_head || a.weights.size() != b.weights.size() ||
      a.biases.size() != b.biases.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (!same_values(a.weights[l], b.weights[l]) ||
        !same_values(a.biases[l], b.biases[l])) {
      return false;
    }
  }
  return true;
}

Gradients Gradients::zeros_like(const MlpModel& model) {
  Gradients g;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    g.weights.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
    g.biases.push_back(Vector::Zero(model.biases[l].size()));
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.weights.size() != weights.size()) {
    throw ShapeError("gradient layer count mismatch");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  return *this;
}

Gradients& Gradients::operator*=(double scale) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= scale;
    biases[l] *= scale;
  }
  return *this;
}

bool Gradients::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

std::vector<double> Gradients::flatten() const {
  std::vector<double> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
        out.push_back(weights[l](r, c));
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) out.push_back(biases[l](r));
  }
  return out;
}

Matrix logits_batch(const MlpModel& model, const Matrix& inputs) {
  return run(model, inputs).pre.back();
}

Matrix forward_batch(const MlpModel& model, const Matrix& inputs) {
  return apply_head(logits_batch(model, inputs), model.output_head);
}

Vector forward(const MlpModel& model, const Vector& x) {
  return forward_batch(model, x).col(0);
}

BatchBackwardResult backward_batch_logits(const MlpModel& model,
                                          const Matrix& inputs,
                                          const Matrix& upstream_logits) {
  Trace t = run(model, inputs);
  if (upstream_logits.rows() != model.output_dim() ||
      upstream_logits.cols() != inputs.cols()) {
    throw ShapeError("upstream gradient shape does not match model output");
  }
  return backprop(model, t, upstream_logits);
}

BatchBackwardResult backward_batch(const MlpModel& model, const Matrix& inputs,
                                   const Matrix& upstream) {
  Trace t = run(model, inputs);
  if (upstream.rows() != model.output_dim() || upstream.cols() != inputs.cols()) {
    throw ShapeError("upstream gradient shape does not match model output");
  }
  const Matrix out = apply_head(t.pre.back(), model.output_head);
  Matrix delta(upstream.rows(), upstream.cols());
  if (model.output_head == Head::softmax) {
    // J^T u = p * (u - <p, u>)
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      const double pu = out.col(c).dot(upstream.col(c));
      delta.col(c) = out.col(c).cwiseProduct(
          (upstream.col(c).array() - pu).matrix());
    }
  } else {
    delta = upstream.cwiseProduct(
        out.cwiseProduct((1.0 - out.array()).matrix()));
  }
  return backprop(model, t, std::move(delta));
}

BackwardResult backward(const MlpModel& model, const Vector& x,
                        const Vector& upstream) {
  BatchBackwardResult r = backward_batch(model, x, upstream);
  return {std::move(r.grads), r.input_grad.col(0)};
}

double cross_entropy(const Vector& probs, int label) {
  if (label < 0 || label >= probs.size()) {
    throw ConfigError("label " + std::to_string(label) + " out of range for " +
                      std::to_string(probs.size()) + " classes");
  }
  return -std::log(std::max(probs(label), kProbFloor));
}

double mean_cross_entropy(const Matrix& probs, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.cols()) {
    throw ShapeError("label count does not match batch size");
  }
  if (labels.empty()) throw ConfigError("empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sum += cross_entropy(probs.col(static_cast<Eigen::Index>(i)), labels[i]);
  }
  return sum / static_cast<double>(labels.size());
}

Matrix cross_entropy_logit_grad(const Matrix& probs, std::span<const int> labels,
                                double weight) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.cols()) {
    throw ShapeError("label count does not match batch size");
  }
  Matrix g = probs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    g(labels[i], static_cast<Eigen::Index>(i)) -= 1.0;
  }
  g *= weight / static_cast<double>(labels.size());
  return g;
}

MlpModel sgd_step(const MlpModel& model, const Gradients& grads, double rate,
                  Direction direction) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw ConfigError("learning rate must lie in (0, 1)");
  }
  if (grads.weights.size() != model.num_layers()) {
    throw ShapeError("gradient layer count mismatch");
  }
  if (!grads.all_finite()) {
    throw DivergenceError("non-finite gradient entry");
  }
  const double s = direction == Direction::descent ? -rate : rate;
  MlpModel out = model;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    if (grads.weights[l].rows() != model.weights[l].rows() ||
        grads.weights[l].cols() != model.weights[l].cols() ||
        grads.biases[l].size() != model.biases[l].size()) {
      throw ShapeError("gradient shape does not match model");
    }
    out.weights[l] += s * grads.weights[l];
    out.biases[l] += s * grads.biases[l];
  }
  return out;
}

MlpModel init_model(const std::vector<int>& layer_dims, Activation activation,
                    Head head, std::uint64_t seed) {
  if (layer_dims.empty()) throw ConfigError("empty layer list");
  MlpModel m;
  m.layer_dims = layer_dims;
  m.hidden_activation = activation;
  m.output_head = head;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const int fan_in = layer_dims[l];
    const int fan_out = layer_dims[l + 1];
    if (fan_in <= 0 || fan_out <= 0) {
      throw ConfigError("layer dimensions must be positive");
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Vector::Zero(fan_out));
  }
  m.validate();
  return m;
}

int argmax(const Vector& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

int argmax_column(const Matrix& m, Eigen::Index col) {
  int best = 0;
  for (Eigen::Index i = 1; i < m.rows(); ++i) {
    if (m(i, col) > m(best, col)) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace trojan_game
