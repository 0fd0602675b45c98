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

#include "trojan_game/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "trojan_game/error.hpp"

namespace trojan_game {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double to_real(const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("expected a number, got \"" + v + "\"");
  }
  return out;
}

long long to_int(const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("expected an integer, got \"" + v + "\"");
  }
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("expected a non-negative integer, got \"" + v + "\"");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::string s = v;
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> to_int_list(const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<int>(to_int(s)));
  return out;
}

Activation to_activation(const std::string& v) {
  if (v == "relu") return Activation::relu;
  if (v == "tanh") return Activation::tanh;
  throw ConfigError("activation must be relu or tanh, got \"" + v + "\"");
}

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](auto& c, auto& v) { c.seed = to_u64(v); }},

      {"data.source", [](auto& c, auto& v) { c.data.source = v; }},
      {"data.path", [](auto& c, auto& v) { c.data.path = v; }},
      {"data.classes", [](auto& c, auto& v) { c.data.classes = static_cast<int>(to_int(v)); }},
      {"data.dim", [](auto& c, auto& v) { c.data.dim = static_cast<int>(to_int(v)); }},
      {"data.per_class", [](auto& c, auto& v) { c.data.per_class = static_cast<int>(to_int(v)); }},
      {"data.spread", [](auto& c, auto& v) { c.data.spread = to_real(v); }},
      {"data.test_fraction", [](auto& c, auto& v) { c.data.test_fraction = to_real(v); }},

      {"train.hidden", [](auto& c, auto& v) { c.train.hidden = to_int_list(v); }},
      {"train.activation", [](auto& c, auto& v) { c.train.activation = to_activation(v); }},
      {"train.epochs", [](auto& c, auto& v) { c.train.epochs = static_cast<int>(to_int(v)); }},
      {"train.rate", [](auto& c, auto& v) { c.train.rate = to_real(v); }},
      {"train.batch_size", [](auto& c, auto& v) { c.train.batch_size = static_cast<int>(to_int(v)); }},

      {"trigger.start", [](auto& c, auto& v) { c.trigger.start = static_cast<int>(to_int(v)); }},
      {"trigger.size", [](auto& c, auto& v) { c.trigger.size = static_cast<int>(to_int(v)); }},
      {"trigger.value", [](auto& c, auto& v) { c.trigger.value = to_real(v); }},
      {"trigger.transparency", [](auto& c, auto& v) { c.trigger.transparency = to_real(v); }},
      {"trigger.target",
       [](auto& c, auto& v) {
         if (v == "all_to_all") {
           c.trigger.all_to_all = true;
         } else {
           c.trigger.all_to_all = false;
           c.trigger.target = static_cast<int>(to_int(v));
         }
       }},
      {"trigger.poison_fraction", [](auto& c, auto& v) { c.trigger.poison_fraction = to_real(v); }},

      {"jumbo.mask_size_min", [](auto& c, auto& v) { c.jumbo.mask_size_min = static_cast<int>(to_int(v)); }},
      {"jumbo.mask_size_max", [](auto& c, auto& v) { c.jumbo.mask_size_max = static_cast<int>(to_int(v)); }},
      {"jumbo.p_zero_transparency", [](auto& c, auto& v) { c.jumbo.p_zero_transparency = to_real(v); }},
      {"jumbo.transparency_lo", [](auto& c, auto& v) { c.jumbo.transparency_lo = to_real(v); }},
      {"jumbo.transparency_hi", [](auto& c, auto& v) { c.jumbo.transparency_hi = to_real(v); }},
      {"jumbo.poison_ratio_lo", [](auto& c, auto& v) { c.jumbo.poison_ratio_lo = to_real(v); }},
      {"jumbo.poison_ratio_hi", [](auto& c, auto& v) { c.jumbo.poison_ratio_hi = to_real(v); }},

      {"shadows.trojan", [](auto& c, auto& v) { c.shadows.trojan = static_cast<int>(to_int(v)); }},
      {"shadows.clean", [](auto& c, auto& v) { c.shadows.clean = static_cast<int>(to_int(v)); }},
      {"shadows.holdout_clean", [](auto& c, auto& v) { c.shadows.holdout_clean = static_cast<int>(to_int(v)); }},
      {"shadows.targets", [](auto& c, auto& v) { c.shadows.targets = static_cast<int>(to_int(v)); }},
      {"shadows.dir", [](auto& c, auto& v) { c.shadows.dir = v; }},

      {"detector.hidden", [](auto& c, auto& v) { c.detector.hidden = to_int_list(v); }},
      {"detector.activation", [](auto& c, auto& v) { c.detector.activation = to_activation(v); }},
      {"detector.epochs", [](auto& c, auto& v) { c.detector.epochs = static_cast<int>(to_int(v)); }},
      {"detector.rate", [](auto& c, auto& v) { c.detector.rate = to_real(v); }},
      {"detector.batch_size", [](auto& c, auto& v) { c.detector.batch_size = static_cast<int>(to_int(v)); }},
      {"detector.query_mean", [](auto& c, auto& v) { c.detector.query_mean = to_real(v); }},
      {"detector.query_var", [](auto& c, auto& v) { c.detector.query_var = to_real(v); }},
      {"detector.queries", [](auto& c, auto& v) { c.detector.queries = static_cast<int>(to_int(v)); }},

      {"game.gamma_d", [](auto& c, auto& v) { c.game.gamma_d = to_real(v); }},
      {"game.gamma_t", [](auto& c, auto& v) { c.game.gamma_t = to_real(v); }},
      {"game.iterations", [](auto& c, auto& v) { c.game.iterations = static_cast<int>(to_int(v)); }},
      {"game.inner_detector_epochs",
       [](auto& c, auto& v) { c.game.inner_detector_epochs = static_cast<int>(to_int(v)); }},
      {"game.inner_trojan_epochs",
       [](auto& c, auto& v) { c.game.inner_trojan_epochs = static_cast<int>(to_int(v)); }},
      {"game.batch_size", [](auto& c, auto& v) { c.game.batch_size = static_cast<int>(to_int(v)); }},
      {"game.js_queries", [](auto& c, auto& v) { c.game.js_queries = static_cast<int>(to_int(v)); }},
      {"game.js_bins", [](auto& c, auto& v) { c.game.js_bins = static_cast<int>(to_int(v)); }},

      {"greedy.epsilon", [](auto& c, auto& v) { c.greedy.greedy.epsilon = to_real(v); }},
      {"greedy.groups", [](auto& c, auto& v) { c.greedy.greedy.batch_groups = static_cast<int>(to_int(v)); }},
      {"greedy.retrain_epochs",
       [](auto& c, auto& v) { c.greedy.greedy.retrain_epochs = static_cast<int>(to_int(v)); }},
      {"greedy.max_fraction", [](auto& c, auto& v) { c.greedy.greedy.max_fraction_cap = to_real(v); }},
      {"greedy.rule",
       [](auto& c, auto& v) {
         if (v == "min_resulting_loss") {
           c.greedy.greedy.selection_rule = SelectionRule::min_resulting_loss;
         } else if (v == "literal_argmax") {
           c.greedy.greedy.selection_rule = SelectionRule::literal_argmax;
         } else {
           throw ConfigError("greedy.rule must be min_resulting_loss or literal_argmax");
         }
       }},
      {"greedy.pool", [](auto& c, auto& v) { c.greedy.pool = static_cast<int>(to_int(v)); }},
      {"greedy.alpha_grid", [](auto& c, auto& v) { c.greedy.alpha_grid = parse_real_list(v); }},

      {"ablate.alphas", [](auto& c, auto& v) { c.ablate_alphas = parse_real_list(v); }},

      {"baselines.nc_lambda", [](auto& c, auto& v) { c.baselines.reverse.lambda = to_real(v); }},
      {"baselines.nc_steps", [](auto& c, auto& v) { c.baselines.reverse.steps = static_cast<int>(to_int(v)); }},
      {"baselines.nc_rate", [](auto& c, auto& v) { c.baselines.reverse.rate = to_real(v); }},
      {"baselines.nc_probes", [](auto& c, auto& v) { c.baselines.nc_probes = static_cast<int>(to_int(v)); }},
      {"baselines.anomaly_threshold", [](auto& c, auto& v) { c.baselines.anomaly_threshold = to_real(v); }},
      {"baselines.strip_probes",
       [](auto& c, auto& v) { c.baselines.strip_probes = static_cast<int>(to_int(v)); }},
      {"baselines.strip_blends",
       [](auto& c, auto& v) { c.baselines.strip_blends = static_cast<int>(to_int(v)); }},
      {"baselines.models", [](auto& c, auto& v) { c.baselines.models = static_cast<int>(to_int(v)); }},
      {"baselines.checkpoint_dir", [](auto& c, auto& v) { c.baselines.checkpoint_dir = v; }},
  };
  return table;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(to_real(s));
  if (out.empty()) throw ConfigError("expected a non-empty list of numbers");
  return out;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.greedy.greedy.epsilon = 0.15;
  c.greedy.greedy.batch_groups = 30;
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg = default_config();
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    // Comments start at '#' or ';' unless inside quotes, which values here never need.
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(n, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError(n, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(n, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(n, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = setters().find(full);
    if (it == setters().end()) throw ParseError(n, "unknown key \"" + full + "\"");
    if (!seen.insert(full).second) throw ParseError(n, "duplicate key \"" + full + "\"");
    try {
      it->second(cfg, value);
    } catch (const ConfigError& e) {
      throw ParseError(n, full + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path));
}

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.iterations) cfg.game.iterations = *o.iterations;
  if (o.alpha_grid) {
    cfg.greedy.alpha_grid = *o.alpha_grid;
    cfg.ablate_alphas = *o.alpha_grid;
  }
}

void ExperimentConfig::validate() const {
  require(data.source == "blobs" || data.source == "csv", "data.source must be blobs or csv");
  if (data.source == "csv") {
    require(!data.path.empty(), "data.path is required for csv data");
  } else {
    require(data.classes >= 2, "data.classes must be at least 2");
    require(data.dim >= 1, "data.dim must be positive");
    require(data.per_class >= 2, "data.per_class must be at least 2");
    require(data.spread > 0.0, "data.spread must be positive");
  }
  require(data.test_fraction > 0.0 && data.test_fraction < 1.0, "data.test_fraction must lie in (0,1)");
  train.validate();

  require(trigger.size >= 1 && trigger.start >= 0, "trigger block must be non-empty");
  if (data.source == "blobs") {
    require(trigger.start + trigger.size <= data.dim, "trigger block exceeds data.dim");
    require(trigger.all_to_all || (trigger.target >= 0 && trigger.target < data.classes),
            "trigger.target out of range");
    jumbo.validate(data.dim);
  }
  require(trigger.value >= 0.0 && trigger.value <= 1.0, "trigger.value must lie in [0,1]");
  require(trigger.transparency >= 0.0 && trigger.transparency < 1.0,
          "trigger.transparency must lie in [0,1)");
  require(trigger.poison_fraction > 0.0 && trigger.poison_fraction <= 1.0,
          "trigger.poison_fraction must lie in (0,1]");

  require(shadows.trojan >= 1 && shadows.clean >= 1, "shadow counts must be positive");
  require(shadows.holdout_clean >= 1, "shadows.holdout_clean must be positive");
  require(shadows.targets >= 1, "shadows.targets must be positive");

  require(!detector.hidden.empty(), "detector.hidden must list at least one layer");
  for (int h : detector.hidden) require(h > 0, "detector.hidden sizes must be positive");
  require(detector.epochs >= 1, "detector.epochs must be positive");
  require(detector.rate > 0.0 && detector.rate < 1.0, "detector.rate must lie in (0,1)");
  require(detector.batch_size >= 1, "detector.batch_size must be positive");
  require(detector.query_var > 0.0, "detector.query_var must be positive");
  require(detector.queries >= 1, "detector.queries must be positive");

  game.validate();

  greedy.greedy.validate(0);
  require(greedy.pool >= 0, "greedy.pool must be non-negative");
  for (double a : greedy.alpha_grid) require(a >= 0.0 && a <= 1.0, "alpha grid values must lie in [0,1]");
  for (std::size_t i = 1; i < greedy.alpha_grid.size(); ++i) {
    require(greedy.alpha_grid[i] > greedy.alpha_grid[i - 1], "alpha grid must be increasing");
  }
  require(!ablate_alphas.empty(), "ablate.alphas must not be empty");
  for (double a : ablate_alphas) require(a > 0.0 && a <= 1.0, "ablation alphas must lie in (0,1]");

  baselines.reverse.validate();
  require(baselines.nc_probes >= 1 && baselines.strip_probes >= 2, "baseline probe counts too small");
  require(baselines.strip_blends >= 1, "baselines.strip_blends must be positive");
  require(baselines.models >= 1, "baselines.models must be positive");
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["seed"] = seed;
  j["data"] = {{"source", data.source}, {"path", data.path.string()}, {"classes", data.classes},
               {"dim", data.dim}, {"per_class", data.per_class}, {"spread", data.spread},
               {"test_fraction", data.test_fraction}};
  j["train"] = {{"hidden", train.hidden}, {"activation", activation_name(train.activation)},
                {"epochs", train.epochs}, {"rate", train.rate}, {"batch_size", train.batch_size}};
  j["trigger"] = {{"start", trigger.start}, {"size", trigger.size}, {"value", trigger.value},
                  {"transparency", trigger.transparency},
                  {"target", trigger.all_to_all ? Json("all_to_all") : Json(trigger.target)},
                  {"poison_fraction", trigger.poison_fraction}};
  j["jumbo"] = {{"mask_size_min", jumbo.mask_size_min}, {"mask_size_max", jumbo.mask_size_max},
                {"p_zero_transparency", jumbo.p_zero_transparency},
                {"transparency_lo", jumbo.transparency_lo}, {"transparency_hi", jumbo.transparency_hi},
                {"poison_ratio_lo", jumbo.poison_ratio_lo}, {"poison_ratio_hi", jumbo.poison_ratio_hi}};
  j["shadows"] = {{"trojan", shadows.trojan}, {"clean", shadows.clean},
                  {"holdout_clean", shadows.holdout_clean}, {"targets", shadows.targets},
                  {"dir", shadows.dir.string()}};
  j["detector"] = {{"hidden", detector.hidden}, {"activation", activation_name(detector.activation)},
                   {"epochs", detector.epochs}, {"rate", detector.rate},
                   {"batch_size", detector.batch_size}, {"query_mean", detector.query_mean},
                   {"query_var", detector.query_var}, {"queries", detector.queries}};
  j["game"] = {{"gamma_d", game.gamma_d}, {"gamma_t", game.gamma_t}, {"iterations", game.iterations},
               {"inner_detector_epochs", game.inner_detector_epochs},
               {"inner_trojan_epochs", game.inner_trojan_epochs}, {"batch_size", game.batch_size},
               {"js_queries", game.js_queries}, {"js_bins", game.js_bins}};
  j["greedy"] = {{"epsilon", greedy.greedy.epsilon}, {"groups", greedy.greedy.batch_groups},
                 {"retrain_epochs", greedy.greedy.retrain_epochs},
                 {"max_fraction", greedy.greedy.max_fraction_cap},
                 {"rule", greedy.greedy.selection_rule == SelectionRule::min_resulting_loss
                              ? "min_resulting_loss"
                              : "literal_argmax"},
                 {"pool", greedy.pool}, {"alpha_grid", greedy.alpha_grid}};
  j["ablate"] = {{"alphas", ablate_alphas}};
  j["baselines"] = {{"nc_lambda", baselines.reverse.lambda}, {"nc_steps", baselines.reverse.steps},
                    {"nc_rate", baselines.reverse.rate}, {"nc_probes", baselines.nc_probes},
                    {"anomaly_threshold", baselines.anomaly_threshold},
                    {"strip_probes", baselines.strip_probes}, {"strip_blends", baselines.strip_blends},
                    {"models", baselines.models}, {"checkpoint_dir", baselines.checkpoint_dir.string()}};
  return j;
}

std::string ExperimentConfig::hash() const {
  const std::string canon = to_json().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace trojan_game
