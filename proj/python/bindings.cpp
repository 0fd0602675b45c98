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

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "trojan_game/baselines.hpp"
#include "trojan_game/config.hpp"
#include "trojan_game/detector.hpp"
#include "trojan_game/error.hpp"
#include "trojan_game/experiments.hpp"
#include "trojan_game/game.hpp"
#include "trojan_game/greedy.hpp"
#include "trojan_game/serialize.hpp"
#include "trojan_game/train.hpp"

namespace py = pybind11;
namespace tg = trojan_game;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Python side uses (n, d) arrays; the library stores one sample per column.
tg::Dataset to_dataset(const RowMatrix& x, const std::vector<int>& y, int classes) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw tg::ShapeError("x and y have different lengths");
  }
  tg::Dataset d{{}, static_cast<int>(x.cols()), classes};
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    d.samples.push_back({x.row(i).transpose(), y[static_cast<std::size_t>(i)]});
  }
  d.validate();
  return d;
}

tg::Activation activation_of(const std::string& s) {
  if (s == "relu") return tg::Activation::relu;
  if (s == "tanh") return tg::Activation::tanh;
  throw tg::ConfigError("activation must be relu or tanh");
}

tg::Head head_of(const std::string& s) {
  if (s == "softmax") return tg::Head::softmax;
  if (s == "sigmoid_scalar") return tg::Head::sigmoid_scalar;
  throw tg::ConfigError("head must be softmax or sigmoid_scalar");
}

void run_command(const std::string& name, const std::filesystem::path& config,
                 const std::filesystem::path& out, std::optional<std::uint64_t> seed,
                 std::optional<int> iterations, std::optional<std::vector<double>> alpha_grid,
                 bool baseline) {
  tg::ExperimentConfig cfg = tg::load_config(config);
  tg::apply_overrides(cfg, {seed, iterations, alpha_grid});
  py::gil_scoped_release release;
  if (name == "train-shadows") {
    tg::cmd_train_shadows(cfg, out);
  } else if (name == "mm-trojan") {
    tg::cmd_mm_trojan(cfg, out, baseline);
  } else if (name == "greedy-select") {
    tg::cmd_greedy(cfg, out);
  } else if (name == "ablate") {
    tg::cmd_ablate(cfg, out);
  } else if (name == "eval-detectors") {
    tg::cmd_eval_detectors(cfg, out);
  } else {
    throw tg::ConfigError("unknown command " + name);
  }
}

}  // namespace

PYBIND11_MODULE(_trojan_game, m) {
  m.doc() = "Trojan/detector co-evolution toolkit";

  py::register_exception<tg::ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<tg::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<tg::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<tg::DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<tg::IoError>(m, "IoError", PyExc_OSError);

  py::class_<tg::MlpModel>(m, "Model")
      .def_property_readonly("layer_dims", [](const tg::MlpModel& f) { return f.layer_dims; })
      .def_property_readonly("parameter_count", &tg::MlpModel::parameter_count)
      .def("flatten", &tg::MlpModel::flatten)
      .def("forward",
           [](const tg::MlpModel& f, const RowMatrix& x) -> RowMatrix {
             return tg::forward_batch(f, x.transpose()).transpose();
           },
           py::arg("x"), "Rows of x are inputs; returns one output row per input.")
      .def("save", [](const tg::MlpModel& f, const std::filesystem::path& p) { tg::save_model(p, f); })
      .def("__eq__", [](const tg::MlpModel& a, const tg::MlpModel& b) { return a == b; });

  m.def("init_model",
        [](const std::vector<int>& dims, const std::string& act, const std::string& head,
           std::uint64_t seed) { return tg::init_model(dims, activation_of(act), head_of(head), seed); },
        py::arg("layer_dims"), py::arg("activation") = "relu", py::arg("head") = "softmax",
        py::arg("seed") = 0);
  m.def("load_model", &tg::load_model, py::arg("path"));

  m.def("make_blobs",
        [](int k, int d, int n, double spread, std::uint64_t seed) {
          const tg::Dataset data = tg::make_blobs(k, d, n, spread, seed);
          RowMatrix x = data.features().transpose();
          return py::make_tuple(x, data.labels());
        },
        py::arg("num_classes"), py::arg("feature_dim"), py::arg("n_per_class"),
        py::arg("spread") = 0.1, py::arg("seed") = 0);

  m.def("train_classifier",
        [](const RowMatrix& x, const std::vector<int>& y, int classes, std::vector<int> hidden,
           const std::string& act, int epochs, double rate, int batch, std::uint64_t seed) {
          tg::TrainConfig tc;
          tc.hidden = std::move(hidden);
          tc.activation = activation_of(act);
          tc.epochs = epochs;
          tc.rate = rate;
          tc.batch_size = batch;
          tc.seed = seed;
          const tg::Dataset d = to_dataset(x, y, classes);
          py::gil_scoped_release release;
          return tg::train_classifier(d, tc);
        },
        py::arg("x"), py::arg("y"), py::arg("num_classes"), py::arg("hidden") = std::vector<int>{32},
        py::arg("activation") = "relu", py::arg("epochs") = 40, py::arg("rate") = 0.1,
        py::arg("batch_size") = 32, py::arg("seed") = 0);

  m.def("accuracy",
        [](const tg::MlpModel& f, const RowMatrix& x, const std::vector<int>& y) {
          return tg::accuracy(f, to_dataset(x, y, f.output_dim()));
        },
        py::arg("model"), py::arg("x"), py::arg("y"));

  m.def("auc",
        [](const std::vector<double>& p, const std::vector<double>& n) { return tg::auc(p, n); },
        py::arg("scores_positive"), py::arg("scores_negative"));
  m.def("optimal_discriminator_value", &tg::optimal_discriminator_value, py::arg("a"), py::arg("b"));
  m.def("js_proxy",
        [](const RowMatrix& t, const RowMatrix& c, int bins) {
          return tg::js_proxy({t.transpose(), tg::SourceLabel::trojan},
                              {c.transpose(), tg::SourceLabel::clean}, bins);
        },
        py::arg("trojan_outputs"), py::arg("clean_outputs"), py::arg("n_bins") = 20,
        "Each row is one probability vector.");

  m.def("anomaly_report",
        [](const std::vector<double>& norms, double threshold) {
          const tg::AnomalyReport a = tg::anomaly_report(norms, threshold);
          py::dict d;
          d["anomaly_index"] = a.anomaly_index;
          d["max_low_index"] = a.max_low_index;
          d["flagged_class"] = a.flagged_class;
          d["model_score"] = a.model_score;
          return d;
        },
        py::arg("mask_norms"), py::arg("threshold") = 4.0);

  m.def("supermodularity_check",
        [](const std::function<double(std::uint32_t)>& g, int n, double tol) {
          const tg::SupermodularityReport r = tg::supermodularity_check(g, n, tol);
          return py::make_tuple(r.is_supermodular, r.worst_violation);
        },
        py::arg("g"), py::arg("n"), py::arg("tolerance") = 1e-12,
        "g maps a subset bitmask to a value; returns (is_supermodular, worst_violation).");

  m.def("config_hash", [](const std::filesystem::path& p) { return tg::load_config(p).hash(); },
        py::arg("path"));
  m.def("run_command", &run_command, py::arg("command"), py::arg("config"), py::arg("out"),
        py::arg("seed") = py::none(), py::arg("iterations") = py::none(),
        py::arg("alpha_grid") = py::none(), py::arg("baseline") = false,
        "Runs one harness command, as the trojan-game CLI does.");
}
