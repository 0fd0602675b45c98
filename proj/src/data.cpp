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

#include "trojan_game/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "trojan_game/error.hpp"
#include "trojan_game/rng.hpp"

namespace trojan_game {
namespace {

void check_length(const Vector& v, int d, const char* what) {
  if (v.size() != d) {
    throw ShapeError(std::string(what) + " has length " +
                     std::to_string(v.size()) + ", expected " + std::to_string(d));
  }
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  return s.substr(b);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, std::size_t line) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(line, "non-numeric cell '" + cell + "'");
  }
  return v;
}

int parse_label(const std::string& cell, std::size_t line) {
  int v = 0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || v < 0) {
    throw ParseError(line, "invalid label '" + cell + "'");
  }
  return v;
}

}  // namespace

void Dataset::validate() const {
  if (samples.empty()) throw ConfigError("dataset is empty");
  if (feature_dim <= 0) throw ConfigError("feature_dim must be positive");
  if (num_classes < 2) throw ConfigError("need at least two classes");
  for (const Sample& s : samples) {
    check_length(s.x, feature_dim, "sample");
    if (s.y < 0 || s.y >= num_classes) {
      throw ConfigError("label " + std::to_string(s.y) + " out of range");
    }
  }
}

Matrix Dataset::features() const {
  Matrix m(feature_dim, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = samples[i].x;
  }
  return m;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.y);
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out{{}, feature_dim, num_classes};
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= samples.size()) throw ShapeError("subset index out of range");
    out.samples.push_back(samples[i]);
  }
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.feature_dim != b.feature_dim || a.num_classes != b.num_classes ||
      a.samples.size() != b.samples.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    if (a.samples[i].y != b.samples[i].y ||
        !same_values(a.samples[i].x, b.samples[i].x)) {
      return false;
    }
  }
  return true;
}

void TriggerSpec::validate(int feature_dim, int num_classes) const {
  check_length(mask, feature_dim, "trigger mask");
  check_length(pattern, feature_dim, "trigger pattern");
  if ((mask.array() < 0.0).any() || (mask.array() > 1.0).any()) {
    throw ConfigError("trigger mask entries must lie in [0,1]");
  }
  if ((pattern.array() < 0.0).any() || (pattern.array() > 1.0).any()) {
    throw ConfigError("trigger pattern entries must lie in [0,1]");
  }
  if (target.kind == TargetRule::Kind::fixed &&
      (target.label < 0 || target.label >= num_classes)) {
    throw ConfigError("trigger target label out of range");
  }
}

bool operator==(const TriggerSpec& a, const TriggerSpec& b) {
  return a.target == b.target && same_values(a.mask, b.mask) &&
         same_values(a.pattern, b.pattern);
}

TriggerSpec block_trigger(int feature_dim, int start, int size, double value,
                          double transparency, TargetRule target) {
  if (size <= 0 || start < 0 || start + size > feature_dim) {
    throw ConfigError("trigger block does not fit the feature vector");
  }
  if (transparency < 0.0 || transparency > 1.0 || value < 0.0 || value > 1.0) {
    throw ConfigError("trigger value and transparency must lie in [0,1]");
  }
  TriggerSpec t;
  t.mask = Vector::Zero(feature_dim);
  t.pattern = Vector::Zero(feature_dim);
  t.mask.segment(start, size).setConstant(1.0 - transparency);
  t.pattern.segment(start, size).setConstant(value);
  t.target = target;
  return t;
}

void JumboParams::validate(int feature_dim) const {
  if (mask_size_min < 1 || mask_size_max < mask_size_min ||
      mask_size_max > feature_dim) {
    throw ConfigError("jumbo mask size range invalid");
  }
  if (p_zero_transparency < 0.0 || p_zero_transparency > 1.0) {
    throw ConfigError("jumbo zero-transparency probability must lie in [0,1]");
  }
  if (transparency_lo < 0.0 || transparency_hi > 1.0 ||
      transparency_lo > transparency_hi) {
    throw ConfigError("jumbo transparency range invalid");
  }
  if (poison_ratio_lo < 0.0 || poison_ratio_hi > 1.0 ||
      poison_ratio_lo > poison_ratio_hi) {
    throw ConfigError("jumbo poison ratio range invalid");
  }
}

Vector embed_trigger(const Vector& x, const TriggerSpec& spec) {
  check_length(spec.mask, static_cast<int>(x.size()), "trigger mask");
  check_length(spec.pattern, static_cast<int>(x.size()), "trigger pattern");
  Vector out = x.cwiseProduct((1.0 - spec.mask.array()).matrix()) +
               spec.pattern.cwiseProduct(spec.mask);
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

Matrix embed_trigger_batch(const Matrix& inputs, const TriggerSpec& spec) {
  check_length(spec.mask, static_cast<int>(inputs.rows()), "trigger mask");
  check_length(spec.pattern, static_cast<int>(inputs.rows()), "trigger pattern");
  Matrix out = (inputs.array().colwise() * (1.0 - spec.mask.array())).matrix();
  out.colwise() += spec.pattern.cwiseProduct(spec.mask);
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

std::vector<Sample> poison_labels(std::vector<Sample> samples,
                                  const TriggerSpec& spec, int num_classes,
                                  bool embed) {
  for (Sample& s : samples) {
    if (embed) s.x = embed_trigger(s.x, spec);
    s.y = spec.target.apply(s.y, num_classes);
  }
  return samples;
}

Dataset poison_dataset(const Dataset& data, const TriggerSpec& spec) {
  spec.validate(data.feature_dim, data.num_classes);
  return Dataset{poison_labels(data.samples, spec, data.num_classes, true),
                 data.feature_dim, data.num_classes};
}

Dataset poison_subset(const Dataset& data, const std::vector<std::size_t>& indices,
                      const TriggerSpec& spec) {
  spec.validate(data.feature_dim, data.num_classes);
  Dataset out = data;
  for (std::size_t i : indices) {
    if (i >= out.size()) throw ShapeError("poison index out of range");
    Sample& s = out.samples[i];
    s.x = embed_trigger(s.x, spec);
    s.y = spec.target.apply(s.y, data.num_classes);
  }
  return out;
}

Vector blob_center(int c, int feature_dim) {
  // Additive recurrence on the generalized golden ratio (R_d sequence).
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) {
    phi = std::pow(1.0 + phi, 1.0 / (feature_dim + 1));
  }
  Vector center(feature_dim);
  double alpha = 1.0;
  for (int j = 0; j < feature_dim; ++j) {
    alpha /= phi;
    const double u = std::fmod(0.5 + (c + 1) * alpha, 1.0);
    center(j) = 0.2 + 0.6 * u;
  }
  return center;
}

Dataset make_blobs(int num_classes, int feature_dim, int n_per_class,
                   double cluster_spread, std::uint64_t seed) {
  if (num_classes < 2) throw ConfigError("make_blobs needs at least two classes");
  if (feature_dim < 2) throw ConfigError("make_blobs needs at least two features");
  if (n_per_class < 1) throw ConfigError("make_blobs needs n_per_class >= 1");
  if (!(cluster_spread >= 0.0) || !std::isfinite(cluster_spread)) {
    throw ConfigError("cluster spread must be a finite non-negative number");
  }
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset out{{}, feature_dim, num_classes};
  out.samples.reserve(static_cast<std::size_t>(num_classes) * n_per_class);
  for (int c = 0; c < num_classes; ++c) {
    const Vector center = blob_center(c, feature_dim);
    for (int i = 0; i < n_per_class; ++i) {
      Vector x(feature_dim);
      for (int j = 0; j < feature_dim; ++j) {
        x(j) = std::clamp(center(j) + cluster_spread * noise(rng), 0.0, 1.0);
      }
      out.samples.push_back({std::move(x), c});
    }
  }
  return out;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::optional<int> declared_classes;
  bool auto_scale = false;
  int dim = -1;
  std::vector<Sample> samples;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.rfind("#classes=", 0) == 0) {
        const int k = parse_label(line.substr(9), line_no);
        if (k < 2) throw ParseError(line_no, "#classes must be at least 2");
        declared_classes = k;
      } else if (line == "#scale=auto") {
        auto_scale = true;
      }
      continue;
    }
    std::vector<std::string> cells = split_commas(line);
    if (dim < 0) {
      if (cells.size() < 2 || cells.back() != "label") {
        throw ParseError(line_no, "header must be f0,...,f{d-1},label");
      }
      for (std::size_t j = 0; j + 1 < cells.size(); ++j) {
        if (cells[j] != "f" + std::to_string(j)) {
          throw ParseError(line_no, "unexpected header column '" + cells[j] + "'");
        }
      }
      dim = static_cast<int>(cells.size()) - 1;
      continue;
    }
    if (static_cast<int>(cells.size()) != dim + 1) {
      throw ParseError(line_no, "expected " + std::to_string(dim) +
                                    " features and a label, got " +
                                    std::to_string(cells.size()) + " cells");
    }
    Sample s;
    s.x.resize(dim);
    for (int j = 0; j < dim; ++j) s.x(j) = parse_double(cells[j], line_no);
    s.y = parse_label(cells.back(), line_no);
    if (declared_classes && s.y >= *declared_classes) {
      throw ParseError(line_no, "label " + std::to_string(s.y) +
                                    " not below declared class count " +
                                    std::to_string(*declared_classes));
    }
    samples.push_back(std::move(s));
  }
  if (dim < 0) throw ParseError(line_no, "missing header row");
  if (samples.empty()) throw ParseError(line_no, "no data rows");

  int k = declared_classes.value_or(0);
  if (!declared_classes) {
    for (const Sample& s : samples) k = std::max(k, s.y + 1);
    k = std::max(k, 2);
  }
  if (auto_scale) {
    double lo = samples.front().x.minCoeff();
    double hi = samples.front().x.maxCoeff();
    for (const Sample& s : samples) {
      lo = std::min(lo, s.x.minCoeff());
      hi = std::max(hi, s.x.maxCoeff());
    }
    const double range = hi > lo ? hi - lo : 1.0;
    for (Sample& s : samples) s.x = ((s.x.array() - lo) / range).matrix();
  }
  Dataset out{std::move(samples), dim, k};
  out.validate();
  return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "#classes=" << data.num_classes << '\n';
  for (int j = 0; j < data.feature_dim; ++j) out << 'f' << j << ',';
  out << "label\n";
  char buf[32];
  for (const Sample& s : data.samples) {
    for (int j = 0; j < data.feature_dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", s.x(j));
      out << buf << ',';
    }
    out << s.y << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

JumboDraw sample_jumbo_trigger(const JumboParams& params, int feature_dim,
                               int num_classes, std::uint64_t seed) {
  params.validate(feature_dim);
  Rng rng(seed);
  const int size =
      std::uniform_int_distribution<int>(params.mask_size_min, params.mask_size_max)(rng);
  const int start = std::uniform_int_distribution<int>(0, feature_dim - size)(rng);
  double transparency = 0.0;
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= params.p_zero_transparency) {
    transparency = std::uniform_real_distribution<double>(params.transparency_lo,
                                                          params.transparency_hi)(rng);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  JumboDraw draw;
  draw.transparency = transparency;
  draw.trigger.mask = Vector::Zero(feature_dim);
  draw.trigger.mask.segment(start, size).setConstant(1.0 - transparency);
  draw.trigger.pattern.resize(feature_dim);
  for (int j = 0; j < feature_dim; ++j) draw.trigger.pattern(j) = unit(rng);
  draw.trigger.target = TargetRule::fixed(
      std::uniform_int_distribution<int>(0, num_classes - 1)(rng));
  draw.poison_ratio = std::uniform_real_distribution<double>(params.poison_ratio_lo,
                                                             params.poison_ratio_hi)(rng);
  return draw;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0,1)");
  }
  data.validate();
  std::vector<std::vector<std::size_t>> by_class(data.num_classes);
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.samples[i].y].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (int c = 0; c < data.num_classes; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw ConfigError("class " + std::to_string(c) + " has fewer than 2 samples");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * idx.size()));
    n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + n_test);
    train_idx.insert(train_idx.end(), idx.begin() + n_test, idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {data.subset(train_idx), data.subset(test_idx)};
}

}  // namespace trojan_game
