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

#include "trojan_game/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "trojan_game/error.hpp"

namespace trojan_game {

namespace {

Json vec_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vec_from_json(const Json& a, const char* what) {
  if (!a.is_array()) throw ConfigError(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw ConfigError(std::string(what) + " holds a non-number");
    v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  }
  return v;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

Json model_to_json(const MlpModel& m) {
  m.validate();
  Json j;
  j["version"] = 1;
  j["layer_dims"] = m.layer_dims;
  j["activation"] = m.hidden_activation == Activation::relu ? "relu" : "tanh";
  j["head"] = m.output_head == Head::softmax ? "softmax" : "sigmoid_scalar";
  Json w = Json::array(), b = Json::array();
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    Json flat = Json::array();
    const Matrix& wl = m.weights[l];
    for (Eigen::Index r = 0; r < wl.rows(); ++r) {
      for (Eigen::Index c = 0; c < wl.cols(); ++c) flat.push_back(wl(r, c));
    }
    w.push_back(std::move(flat));
    b.push_back(vec_to_json(m.biases[l]));
  }
  j["weights"] = std::move(w);
  j["biases"] = std::move(b);
  return j;
}

MlpModel model_from_json(const Json& j) {
  if (get_as<int>(j, "version") != 1) throw ConfigError("unsupported checkpoint version");
  MlpModel m;
  m.layer_dims = get_as<std::vector<int>>(j, "layer_dims");
  const auto act = get_as<std::string>(j, "activation");
  const auto head = get_as<std::string>(j, "head");
  if (act == "relu") {
    m.hidden_activation = Activation::relu;
  } else if (act == "tanh") {
    m.hidden_activation = Activation::tanh;
  } else {
    throw ConfigError("unknown activation \"" + act + "\"");
  }
  if (head == "softmax") {
    m.output_head = Head::softmax;
  } else if (head == "sigmoid_scalar") {
    m.output_head = Head::sigmoid_scalar;
  } else {
    throw ConfigError("unknown head \"" + head + "\"");
  }
  const Json& w = field(j, "weights");
  const Json& b = field(j, "biases");
  if (m.layer_dims.size() < 2 || !w.is_array() || !b.is_array() ||
      w.size() != m.layer_dims.size() - 1 || b.size() != w.size()) {
    throw ConfigError("checkpoint layer lists do not match layer_dims");
  }
  for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
    const int rows = m.layer_dims[l + 1], cols = m.layer_dims[l];
    if (rows <= 0 || cols <= 0) throw ConfigError("layer_dims must be positive");
    const Vector flat = vec_from_json(w[l], "weights");
    if (flat.size() != static_cast<Eigen::Index>(rows) * cols) {
      throw ConfigError("weights of layer " + std::to_string(l) + " have the wrong length");
    }
    Matrix wl(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) wl(r, c) = flat(static_cast<Eigen::Index>(r) * cols + c);
    }
    m.weights.push_back(std::move(wl));
    m.biases.push_back(vec_from_json(b[l], "biases"));
  }
  m.validate();
  return m;
}

Json detector_to_json(const DetectorModel& h) {
  h.validate();
  Json j = model_to_json(h.net);
  j["query"] = {{"mu", vec_to_json(h.query.mean)},
                {"sigma_diag", vec_to_json(h.query.cov_diag)},
                {"n", h.query.n_queries},
                {"seed", h.query.seed}};
  return j;
}

DetectorModel detector_from_json(const Json& j) {
  DetectorModel h;
  h.net = model_from_json(j);
  const Json& q = field(j, "query");
  h.query.mean = vec_from_json(field(q, "mu"), "mu");
  h.query.cov_diag = vec_from_json(field(q, "sigma_diag"), "sigma_diag");
  h.query.n_queries = get_as<int>(q, "n");
  h.query.seed = get_as<std::uint64_t>(q, "seed");
  h.validate();
  return h;
}

Json trigger_to_json(const TriggerSpec& t) {
  Json j;
  j["mask"] = vec_to_json(t.mask);
  j["pattern"] = vec_to_json(t.pattern);
  if (t.target.kind == TargetRule::Kind::fixed) {
    j["target"] = t.target.label;
  } else {
    j["target"] = "all_to_all";
  }
  return j;
}

TriggerSpec trigger_from_json(const Json& j) {
  TriggerSpec t;
  t.mask = vec_from_json(field(j, "mask"), "mask");
  t.pattern = vec_from_json(field(j, "pattern"), "pattern");
  const Json& tg = field(j, "target");
  if (tg.is_string() && tg.get<std::string>() == "all_to_all") {
    t.target = TargetRule::all_to_all();
  } else if (tg.is_number_integer()) {
    t.target = TargetRule::fixed(tg.get<int>());
  } else {
    throw ConfigError("target must be a class index or \"all_to_all\"");
  }
  return t;
}

Json record_to_json(const GameRecord& r) {
  Json j;
  j["iter"] = r.iter;
  j["L_D"] = r.loss_detector;
  j["L_T"] = r.loss_trojan;
  j["acc"] = r.acc;
  j["asr"] = r.asr;
  j["auc"] = r.auc;
  j["js"] = r.js;
  return j;
}

GameRecord record_from_json(const Json& j) {
  GameRecord r;
  r.iter = get_as<int>(j, "iter");
  r.loss_detector = get_as<double>(j, "L_D");
  r.loss_trojan = get_as<double>(j, "L_T");
  r.acc = get_as<double>(j, "acc");
  r.asr = get_as<double>(j, "asr");
  r.auc = get_as<double>(j, "auc");
  r.js = get_as<double>(j, "js");
  return r;
}

std::string trace_to_jsonl(const GameTrace& t) {
  std::string out;
  for (const GameRecord& r : t.records) out += record_to_json(r).dump() + "\n";
  return out;
}

GameTrace trace_from_jsonl(const std::string& text) {
  GameTrace t;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      t.records.push_back(record_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(n, e.what());
    } catch (const ConfigError& e) {
      throw ParseError(n, e.what());
    }
  }
  return t;
}

Json report_to_json(const EvalReport& r) {
  Json j;
  j["acc"] = r.acc;
  j["asr"] = r.asr;
  j["auc_0"] = r.auc_0;
  j["auc_t_minus_1"] = r.auc_t_minus_1 ? Json(*r.auc_t_minus_1) : Json(nullptr);
  j["auc_t"] = r.auc_t;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  return j;
}

Json greedy_to_json(const GreedyResult& r) {
  Json j;
  j["selected"] = r.selected;
  j["final_alpha"] = r.final_alpha;
  j["evaluations"] = r.evaluations;
  Json h = Json::array();
  for (const GreedyStep& s : r.history) {
    Json e;
    if (s.unit < 0) {
      e["unit"] = nullptr;
    } else {
      e["unit"] = s.unit;
    }
    e["size"] = s.set_size;
    e["L_T"] = s.loss.l_t;
    e["L_C"] = s.loss.l_c;
    e["L_tot"] = s.loss.l_tot;
    h.push_back(std::move(e));
  }
  j["history"] = std::move(h);
  return j;
}

Json anomaly_to_json(const AnomalyReport& a) {
  Json j;
  j["mask_norms"] = a.mask_norms;
  j["anomaly_index"] = a.anomaly_index;
  j["max_low_index"] = a.max_low_index;
  j["flagged_class"] = a.flagged_class;
  j["model_score"] = a.model_score;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const MlpModel& m,
                const std::string& config_hash) {
  Json j = model_to_json(m);
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  write_json(path, j);
}

MlpModel load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

void save_detector(const std::filesystem::path& path, const DetectorModel& h,
                   const std::string& config_hash) {
  Json j = detector_to_json(h);
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  write_json(path, j);
}

DetectorModel load_detector(const std::filesystem::path& path) {
  return detector_from_json(read_json(path));
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace trojan_game
