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

// Datasets, trigger embedding and shadow-trigger sampling.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "trojan_game/nn.hpp"

namespace trojan_game {

struct Sample {
  Vector x;  // features in [0,1]
  int y = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  int feature_dim = 0;
  int num_classes = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  // Throws when the dataset is empty, ragged, or holds invalid labels.
  void validate() const;

  Matrix features() const;           // feature_dim x n
  std::vector<int> labels() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;

  friend bool operator==(const Dataset&, const Dataset&);
};

struct TargetRule {
  enum class Kind { fixed, all_to_all };
  Kind kind = Kind::fixed;
  int label = 0;  // used by Kind::fixed

  static TargetRule fixed(int y) { return {Kind::fixed, y}; }
  static TargetRule all_to_all() { return {Kind::all_to_all, 0}; }
  int apply(int y, int num_classes) const {
    return kind == Kind::fixed ? label : (y + 1) % num_classes;
  }
  friend bool operator==(const TargetRule&, const TargetRule&) = default;
};

struct TriggerSpec {
  Vector mask;     // Delta, entries in [0,1]
  Vector pattern;  // delta, entries in [0,1]
  TargetRule target;

  void validate(int feature_dim, int num_classes) const;
  friend bool operator==(const TriggerSpec&, const TriggerSpec&);
};

// Contiguous block trigger: `size` coordinates starting at `start` carry
// `value` with mask 1 - transparency.
TriggerSpec block_trigger(int feature_dim, int start, int size, double value,
                          double transparency, TargetRule target);

struct JumboParams {
  int mask_size_min = 2;
  int mask_size_max = 5;
  double p_zero_transparency = 0.5;
  double transparency_lo = 0.0;
  double transparency_hi = 0.7;
  double poison_ratio_lo = 0.05;
  double poison_ratio_hi = 0.5;

  void validate(int feature_dim) const;
};

struct JumboDraw {
  TriggerSpec trigger;
  double poison_ratio = 0.0;
  double transparency = 0.0;
};

// x * (1 - mask) + pattern * mask, clipped to [0,1].
Vector embed_trigger(const Vector& x, const TriggerSpec& spec);
Matrix embed_trigger_batch(const Matrix& inputs, const TriggerSpec& spec);

// Relabels every sample per the trigger's target rule. When
// `embed` is set, features are also trigger-embedded.
std::vector<Sample> poison_labels(std::vector<Sample> samples,
                                  const TriggerSpec& spec, int num_classes,
                                  bool embed = false);

// Trigger-embedded, relabeled copy of a whole dataset.
Dataset poison_dataset(const Dataset& data, const TriggerSpec& spec);

// Copy of `data` with the samples at `indices` trigger-embedded and relabeled
// in place.
Dataset poison_subset(const Dataset& data, const std::vector<std::size_t>& indices,
                      const TriggerSpec& spec);

// Gaussian clusters around low-discrepancy centers in [0.2, 0.8]^d.
Dataset make_blobs(int num_classes, int feature_dim, int n_per_class,
                   double cluster_spread, std::uint64_t seed);

// The deterministic cluster center used by make_blobs for class `c`.
Vector blob_center(int c, int feature_dim);

Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

JumboDraw sample_jumbo_trigger(const JumboParams& params, int feature_dim,
                               int num_classes, std::uint64_t seed);

// Stratified, seeded split into (train, test).
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed);

}  // namespace trojan_game
