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

// Test-side oracles shared by the unit and acceptance suites. Nothing here
// calls into the code under test beyond evaluating the function to probe.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "trojan_game/nn.hpp"
#include "trojan_game/rng.hpp"

namespace tg_test {

using Fn = std::function<double(const std::vector<double>&)>;

// Central differences, one coordinate at a time.
inline std::vector<double> numeric_gradient(const Fn& f, std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||); 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale < 1e-300 ? 0.0 : std::sqrt(diff) / scale;
}

inline std::vector<double> to_std(const trojan_game::Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline trojan_game::Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const trojan_game::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Pair-counting AUC: ties count one half.
inline double brute_force_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  }
  return wins / static_cast<double>(pos.size() * neg.size());
}

// Maximizer of a ln(1-x) + b ln(x) over a uniform grid on (0,1).
inline double grid_argmax(double a, double b, double step = 1e-4) {
  double best_x = step, best = -INFINITY;
  for (double x = step; x < 1.0; x += step) {
    const double v = a * std::log(1.0 - x) + b * std::log(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

inline trojan_game::Matrix random_matrix(int rows, int cols, std::uint64_t seed, double lo = 0.0,
                                         double hi = 1.0) {
  trojan_game::Rng rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  trojan_game::Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = u(rng);
  }
  return m;
}

}  // namespace tg_test
