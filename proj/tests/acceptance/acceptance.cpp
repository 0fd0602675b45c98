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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance --cli PATH/trojan-game --work DIR [--only N[,M...]]

#include <bit>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "gradcheck.hpp"
#include "trojan_game/config.hpp"
#include "trojan_game/experiments.hpp"
#include "trojan_game/greedy.hpp"
#include "trojan_game/metrics.hpp"
#include "trojan_game/serialize.hpp"

namespace fs = std::filesystem;
namespace tg = trojan_game;
using namespace tg_test;

namespace {

struct Args {
  std::string cli;
  fs::path work = "acceptance_work";
  std::set<int> only;
};

fs::path config_path(const char* name) { return fs::path(TG_SOURCE_DIR) / "configs" / name; }

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

int run_cli(const Args& a, const std::string& cmd, const fs::path& config, const fs::path& out,
            const std::string& extra = {}) {
  const std::string line = "\"" + a.cli + "\" " + cmd + " --config \"" + config.string() +
                           "\" --out \"" + out.string() + "\" " + extra + " > \"" +
                           (out.string() + ".log") + "\" 2>&1";
  fs::remove_all(out);
  const int rc = std::system(line.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::map<std::string, double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, double>> rows;
  auto cells = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ',')) out.push_back(c);
    return out;
  };
  if (!std::getline(in, line)) return rows;
  header = cells(line);
  while (std::getline(in, line)) {
    const auto c = cells(line);
    std::map<std::string, double> row;
    for (std::size_t i = 0; i < c.size() && i < header.size(); ++i) {
      try {
        row[header[i]] = std::stod(c[i]);
      } catch (...) {
        row[header[i]] = 0.0;
        row["#" + c[i]] = 1.0;  // non-numeric cell, kept as a tag
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Byte comparison of every regular file under two directories.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::set<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) fa.insert(fs::relative(e.path(), a));
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) fb.insert(fs::relative(e.path(), b));
  }
  if (fa != fb) {
    why = "file sets differ";
    return false;
  }
  for (const auto& f : fa) {
    if (tg::read_text(a / f) != tg::read_text(b / f)) {
      why = f.string() + " differs";
      return false;
    }
  }
  if (fa.empty()) {
    why = "no output files";
    return false;
  }
  return true;
}

struct Line {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Line> results;

void report(int id, bool pass, const std::string& detail) {
  results.push_back({id, pass, detail});
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
}

// 1. Analytical gradients against central differences.
void criterion_1() {
  const Clock clock;
  const int n = 50;
  double worst[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const auto s = static_cast<std::uint64_t>(1000 + i);
    worst[0] = std::max(worst[0], detector_loss_case(s));
    worst[1] = std::max(worst[1], adversary_loss_case(s));
    worst[2] = std::max(worst[2], cross_entropy_case(s));
    worst[3] = std::max(worst[3], trigger_loss_case(s));
  }
  const double t = clock.seconds();
  bool ok = t < 30.0;
  for (double w : worst) ok = ok && w < 1e-4;
  report(1, ok,
         std::to_string(n) + " instances each; worst rel err detector " + fmt(worst[0]) +
             ", adversary " + fmt(worst[1]) + ", cross-entropy " + fmt(worst[2]) + ", trigger " +
             fmt(worst[3]) + " (tol 1e-4); " + fmt(t) + " s (limit 30)");
}

// 2. Optimal discriminator.
void criterion_2() {
  tg::Rng rng(2);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng);
    worst = std::max(worst, std::abs(tg::optimal_discriminator_value(a, b) - grid_argmax(a, b)));
  }
  // No hidden layer: h = sigmoid(w.z + b) on one repeated output vector.
  const auto q = tg::QuerySpec::isotropic(2, 0.5, 0.01, 4, 1);
  double worst_h = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    tg::DetectorModel h = tg::make_detector(3, q, {}, tg::Activation::tanh, 50 + s);
    const tg::Vector z = random_matrix(3, 1, 60 + s).col(0).normalized().cwiseAbs();
    tg::Matrix zs(3, 32);
    zs.colwise() = z / z.sum();
    tg::DetectorTrainOptions opt;
    opt.epochs = 500;
    opt.rate = 0.5;
    opt.batch_size = 32;
    opt.seed = s;
    h = tg::train_detector_on_outputs(h, {zs, tg::SourceLabel::trojan}, {zs, tg::SourceLabel::clean},
                                      opt);
    worst_h = std::max(worst_h, std::abs(tg::forward(h.net, zs.col(0))(0) - 0.5));
  }
  report(2, worst <= 1e-4 && worst_h <= 0.02,
         "100 (a,b): worst |b/(a+b) - grid| " + fmt(worst) + " (tol 1e-4); point-mass detector " +
             "worst |h - 0.5| " + fmt(worst_h) + " over 5 seeds (tol 0.02)");
}

// 3. Equilibrium direction on blobs.
void criterion_3() {
  const Clock total;
  const tg::ExperimentConfig base = tg::load_config(config_path("blobs.ini"));
  int js_ok = 0, js_n = 0;
  bool ok = true;
  std::string worst;
  double max_run = 0.0, min_base = 1.0, max_a0 = 0.0, max_a1 = 0.0, min_asr = 1.0, max_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Clock clock;
    tg::ExperimentConfig cfg = base;
    cfg.seed = seed;
    const tg::MmContext ctx = tg::prepare_mm_context(cfg);
    tg::ExperimentConfig stat = cfg;
    stat.game.iterations = 0;
    const tg::MmRun b = tg::run_mm_pipeline(stat, ctx, cfg.trigger.poison_fraction, false);
    const tg::MmRun m = tg::run_mm_pipeline(cfg, ctx, cfg.trigger.poison_fraction, false);
    max_run = std::max(max_run, clock.seconds());
    const double gap = std::abs(m.report.acc - ctx.clean_acc);
    min_base = std::min(min_base, b.report.auc_0);
    max_a0 = std::max(max_a0, m.report.auc_0);
    max_a1 = std::max(max_a1, m.report.auc_t_minus_1.value_or(1.0));
    min_asr = std::min(min_asr, m.report.asr);
    max_gap = std::max(max_gap, gap);
    for (const tg::GameResult& g : m.games) {
      ++js_n;
      js_ok += g.trace.records.back().js <= g.trace.records.front().js;
    }
    std::cout << "  seed " << seed << ": baseline auc " << fmt(b.report.auc_0) << ", mm auc0 "
              << fmt(m.report.auc_0) << ", auc(t-1) " << fmt(m.report.auc_t_minus_1.value_or(-1))
              << ", asr " << fmt(m.report.asr) << ", acc " << fmt(m.report.acc) << " vs clean "
              << fmt(ctx.clean_acc) << ", js";
    for (const tg::GameResult& g : m.games) {
      std::cout << " " << fmt(g.trace.records.front().js) << "->" << fmt(g.trace.records.back().js);
    }
    std::cout << ", " << fmt(clock.seconds()) << " s" << std::endl;
  }
  ok = min_base >= 0.9 && max_a0 <= 0.2 && max_a1 <= 0.2 && min_asr >= 0.9 && max_gap <= 0.05 &&
       js_ok >= 19 * js_n / 20 && max_run <= 300.0;
  report(3, ok,
         "5 seeds x 4 targets: min baseline auc " + fmt(min_base) + " (>=0.9), max auc0 " +
             fmt(max_a0) + ", max auc(t-1) " + fmt(max_a1) + " (<=0.2), min asr " + fmt(min_asr) +
             " (>=0.9), max |acc - clean| " + fmt(max_gap) + " (<=0.05), js final<=initial in " +
             std::to_string(js_ok) + "/" + std::to_string(js_n) + " (need 19/20 rate), longest run " +
             fmt(max_run) + " s (<=300)");
}

// 4. AUC against pair counting.
void criterion_4() {
  tg::Rng rng(4);
  int exact = 0, sym = 0, mono = 0;
  for (int i = 0; i < 200; ++i) {
    std::uniform_int_distribution<int> size(1, 30), levels(2, 50);
    const int lv = levels(rng);
    std::uniform_int_distribution<int> val(0, lv);
    std::vector<double> p(static_cast<std::size_t>(size(rng))), n(static_cast<std::size_t>(size(rng)));
    for (double& v : p) v = val(rng) / static_cast<double>(lv);
    for (double& v : n) v = val(rng) / static_cast<double>(lv);
    const double a = tg::auc(p, n);
    exact += a == brute_force_auc(p, n);
    sym += std::abs(a - (1.0 - tg::auc(n, p))) <= 1e-15;
    std::vector<double> pt, nt;
    for (double v : p) pt.push_back(std::atan(5 * v - 2) * 3 + 1);
    for (double v : n) nt.push_back(std::atan(5 * v - 2) * 3 + 1);
    mono += tg::auc(pt, nt) == a;
  }
  report(4, exact == 200 && sym == 200 && mono == 200,
         "200 score sets with ties: exact " + std::to_string(exact) + ", symmetric " +
             std::to_string(sym) + ", monotone-invariant " + std::to_string(mono));
}

// Surrogate c - sum w + lambda (sum w)^2 over 12 items.
struct Surrogate {
  std::vector<double> w;
  double c = 10.0, lambda = 0.02;
  explicit Surrogate(std::uint64_t seed) {
    tg::Rng rng(seed);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int i = 0; i < 12; ++i) w.push_back(u(rng));
  }
  tg::SubsetLoss operator()(const std::vector<std::size_t>& s) const {
    double sw = 0.0;
    for (std::size_t i : s) sw += w[i];
    return {c - sw, lambda * sw * sw, c - sw + lambda * sw * sw};
  }
};

// 5. Supermodularity machinery.
void criterion_5() {
  const auto sq = tg::supermodularity_check(
      [](std::uint32_t s) { return std::pow(std::popcount(s), 2.0); }, 10);
  const auto rt = tg::supermodularity_check(
      [](std::uint32_t s) { return std::sqrt(static_cast<double>(std::popcount(s))); }, 10);
  const auto md = tg::supermodularity_check(
      [](std::uint32_t s) {
        double v = 0.5;
        for (int i = 0; i < 10; ++i) v += (s >> i & 1u) ? 0.25 * (i + 1) : 0.0;
        return v;
      },
      10);
  const bool toys = sq.is_supermodular && sq.worst_violation == 0.0 && !rt.is_supermodular &&
                    rt.worst_violation > 0.0 && md.is_supermodular && md.worst_violation == 0.0;

  const Surrogate g(5);
  const tg::SubsetOracle oracle = [&](const std::vector<std::size_t>& s) { return g(s); };
  tg::Rng rng(55);
  int equal = 0, holds = 0;
  for (int i = 0; i < 500; ++i) {
    std::vector<std::size_t> order(12);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<int> k2(0, 11);
    const int n2 = k2(rng);
    std::uniform_int_distribution<int> k1(0, n2);
    const int n1 = k1(rng);
    std::vector<std::size_t> s2(order.begin(), order.begin() + n2), s1(order.begin(), order.begin() + n1);
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    const std::size_t probe = order[static_cast<std::size_t>(n2)];
    holds += tg::marginal_gains(oracle, s1, s2, probe).condition_holds();
    const tg::MarginalGains e = tg::marginal_gains(oracle, s1, s1, probe);
    equal += e.m_c_s == e.m_c_k && e.m_t_s == e.m_t_k;
  }
  report(5, toys && equal == 500 && holds == 500,
         std::string("toys: |S|^2 violation ") + fmt(sq.worst_violation) + ", sqrt|S| violation " +
             fmt(rt.worst_violation) + " (flagged " + (rt.is_supermodular ? "no" : "yes") +
             "), modular violation " + fmt(md.worst_violation) + "; S1=S2 equality " +
             std::to_string(equal) + "/500; surrogate inequality " + std::to_string(holds) + "/500");
}

// 6. Greedy selection.
void criterion_6(const Args& a) {
  const fs::path out = a.work / "greedy_a";
  const int rc = run_cli(a, "greedy-select", config_path("blobs.ini"), out);
  if (rc != 0) {
    report(6, false, "greedy-select exited " + std::to_string(rc));
    return;
  }
  const tg::Json j = tg::read_json(out / "greedy.json");
  const double alpha = j.at("final_alpha").get<double>();
  bool decreasing = true;
  const auto& h = j.at("history");
  for (std::size_t i = 1; i < h.size(); ++i) {
    decreasing = decreasing && h[i].at("L_tot").get<double>() < h[i - 1].at("L_tot").get<double>();
  }
  const auto sweep = read_csv(out / "alpha_sweep.csv");
  double first = 0.0, last = 0.0;
  if (sweep.size() >= 3) {
    first = sweep[0].at("L_tot") - sweep[1].at("L_tot");
    last = sweep[sweep.size() - 2].at("L_tot") - sweep.back().at("L_tot");
  }
  int agree = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Surrogate g(600 + s);
    const tg::SubsetOracle oracle = [&](const std::vector<std::size_t>& v) { return g(v); };
    std::size_t best = 0;
    for (std::size_t i = 1; i < 12; ++i) {
      if (g({i}).l_tot < g({best}).l_tot) best = i;
    }
    tg::GreedyConfig cfg;
    cfg.max_fraction_cap = 1.0;
    const tg::GreedyResult r = tg::greedy_select(12, oracle, cfg, 1);
    agree += r.history.size() > 1 && r.history[1].unit == static_cast<long>(best);
  }
  report(6, alpha <= 0.15 && decreasing && sweep.size() >= 3 && last <= first && agree == 50,
         "final alpha " + fmt(alpha) + " (<=0.15), " + std::to_string(h.size() - 1) +
             " accepted steps, L_tot strictly decreasing " + (decreasing ? "yes" : "no") +
             "; sweep first dL " + fmt(first) + ", last dL " + fmt(last) +
             "; exhaustive first-pick agreement " + std::to_string(agree) + "/50 on |D|=12");
}

// 7. Ablation trends.
void criterion_7(const Args& a) {
  const fs::path out = a.work / "ablate_a";
  const int rc = run_cli(a, "ablate", config_path("blobs.ini"), out);
  if (rc != 0) {
    report(7, false, "ablate exited " + std::to_string(rc));
    return;
  }
  const auto rows = read_csv(out / "ablate.csv");
  bool ok = rows.size() == 4;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    ok = ok && r.at("auc") <= 0.3;
    if (i > 0) {
      ok = ok && r.at("acc") <= rows[i - 1].at("acc") + 0.03;
      ok = ok && r.at("asr") >= rows[i - 1].at("asr") - 0.03;
    }
    detail += (i ? "; " : "") + std::string("alpha ") + fmt(r.at("alpha")) + " acc " +
              fmt(r.at("acc")) + " asr " + fmt(r.at("asr")) + " auc " + fmt(r.at("auc"));
  }
  report(7, ok, detail + " (trend tol 0.03, auc<=0.3)");
}

// 8. Reference detectors.
void criterion_8(const Args& a) {
  const Clock clock;
  const fs::path out = a.work / "eval_a";
  const int rc = run_cli(a, "eval-detectors", config_path("table2.ini"), out);
  const double t = clock.seconds();
  if (rc != 0) {
    report(8, false, "eval-detectors exited " + std::to_string(rc));
    return;
  }
  const auto rows = read_csv(out / "eval_detectors.csv");
  bool ok = rows.size() == 3 && t <= 600.0;
  std::string detail;
  const char* names[] = {"meta", "nc", "strip"};
  for (std::size_t i = 0; i < rows.size() && i < 3; ++i) {
    const double b = rows[i].at("baseline_auc"), m = rows[i].at("mm_auc");
    if (i > 0) ok = ok && b >= 0.7;
    ok = ok && m <= b - 0.1;
    detail += std::string(names[i]) + " " + fmt(b) + " -> " + fmt(m) + "; ";
  }
  report(8, ok, detail + "baseline nc/strip >=0.7, mm <= baseline - 0.1; " + fmt(t) + " s (<=600)");
}

// 9. Determinism and persistence.
void criterion_9(const Args& a) {
  bool ok = true;
  std::string detail;
  struct Cmd {
    const char* name;
    const char* config;
    std::string extra;
    const char* first;  // reuse an earlier run when present
  };
  const std::vector<Cmd> cmds = {{"train-shadows", "blobs.ini", "", nullptr},
                                 {"mm-trojan", "blobs.ini", "", nullptr},
                                 {"mm-trojan", "blobs.ini", "--baseline --seed 3", nullptr},
                                 {"greedy-select", "blobs.ini", "", "greedy_a"},
                                 {"ablate", "blobs.ini", "", "ablate_a"},
                                 {"eval-detectors", "table2.ini", "", "eval_a"}};
  int idx = 0;
  for (const Cmd& c : cmds) {
    fs::path first = c.first ? a.work / c.first : a.work / ("det_" + std::to_string(idx) + "_a");
    if (!c.first || !fs::exists(first)) {
      if (run_cli(a, c.name, config_path(c.config), first, c.extra) != 0) {
        ok = false;
        detail += std::string(c.name) + " failed; ";
        continue;
      }
    }
    const fs::path second = a.work / ("det_" + std::to_string(idx) + "_b");
    std::string why;
    const bool same = run_cli(a, c.name, config_path(c.config), second, c.extra) == 0 &&
                      same_tree(first, second, why);
    ok = ok && same;
    detail += std::string(c.name) + (c.extra.empty() ? "" : " " + c.extra) +
              (same ? " identical; " : " differs (" + why + "); ");
    ++idx;
  }

  // Checkpoint round trip through the files the CLI wrote.
  bool ckpt = true;
  const fs::path mm = a.work / "det_1_a";
  for (const char* f : {"trojan_final_000.json", "detector_final_000.json"}) {
    const fs::path p = mm / f;
    if (!fs::exists(p)) {
      ckpt = false;
      continue;
    }
    const fs::path copy = a.work / (std::string("resaved_") + f);
    if (std::string(f).rfind("trojan", 0) == 0) {
      const tg::MlpModel m = tg::load_model(p);
      tg::save_model(copy, m, tg::read_json(p).value("config_hash", ""));
      ckpt = ckpt && tg::load_model(copy) == m;
    } else {
      const tg::DetectorModel h = tg::load_detector(p);
      tg::save_detector(copy, h, tg::read_json(p).value("config_hash", ""));
      ckpt = ckpt && tg::load_detector(copy).net == h.net;
    }
    ckpt = ckpt && tg::read_text(copy) == tg::read_text(p);
  }
  detail += std::string("checkpoint reload/resave ") + (ckpt ? "bit-exact" : "mismatch") + "; ";

  // Resume a game from on-disk checkpoints at iteration 10.
  const tg::ExperimentConfig cfg = tg::load_config(config_path("blobs.ini"));
  const tg::MmContext ctx = tg::prepare_mm_context(cfg);
  const tg::Dataset& train = ctx.data.train;
  const tg::TriggerSpec trig = tg::config_trigger(cfg, train.feature_dim, train.num_classes);
  const auto pidx = tg::poison_indices(cfg, train.size(), cfg.trigger.poison_fraction, 0);
  std::vector<std::size_t> rest;
  for (std::size_t i = 0, j = 0; i < train.size(); ++i) {
    if (j < pidx.size() && pidx[j] == i) {
      ++j;
    } else {
      rest.push_back(i);
    }
  }
  tg::TrainConfig tc = cfg.train;
  tc.seed = tg::derive_seed(cfg.seed, "target", 0);
  tg::GameInputs in{tg::train_classifier(tg::poison_subset(train, pidx, trig), tc),
                    ctx.shadows.clean,
                    ctx.h0,
                    train.subset(rest),
                    tg::poison_dataset(train.subset(pidx), trig),
                    ctx.data.test,
                    trig};
  tg::GameConfig gc = cfg.game;
  gc.seed = tg::derive_seed(cfg.seed, "game", 0);
  const int cut = gc.iterations / 2;
  const fs::path ck = a.work / "resume";
  fs::create_directories(ck);
  const tg::GameResult full = tg::run_mm_trojan(in, gc, 0, [&](int it, const tg::MlpModel& f,
                                                              const tg::DetectorModel& h) {
    if (it == cut) {
      tg::save_model(ck / "trojan.json", f);
      tg::save_detector(ck / "detector.json", h);
    }
  });
  tg::GameInputs resumed = in;
  resumed.trojan_init = tg::load_model(ck / "trojan.json");
  resumed.detector_init = tg::load_detector(ck / "detector.json");
  const tg::GameResult tail = tg::run_mm_trojan(resumed, gc, cut);
  double diff = tail.trace.records.size() == full.trace.records.size() - static_cast<std::size_t>(cut)
                    ? 0.0
                    : INFINITY;
  for (std::size_t i = 0; std::isfinite(diff) && i < tail.trace.records.size(); ++i) {
    const tg::GameRecord& x = full.trace.records[i + static_cast<std::size_t>(cut)];
    const tg::GameRecord& y = tail.trace.records[i];
    for (double d : {x.loss_detector - y.loss_detector, x.loss_trojan - y.loss_trojan, x.acc - y.acc,
                     x.asr - y.asr, x.auc - y.auc, x.js - y.js}) {
      diff = std::max(diff, std::abs(d));
    }
  }
  detail += "resume at iteration " + std::to_string(cut) + ": max trace diff " + fmt(diff) + " (tol 1e-9)";
  report(9, ok && ckpt && diff <= 1e-9, detail);
}

}  // namespace

int main(int argc, char** argv) {
  Args a;
  for (int i = 1; i < argc; ++i) {
    const std::string s = argv[i];
    if (s == "--cli" && i + 1 < argc) {
      a.cli = argv[++i];
    } else if (s == "--work" && i + 1 < argc) {
      a.work = argv[++i];
    } else if (s == "--only" && i + 1 < argc) {
      for (double v : tg::parse_real_list(argv[++i])) a.only.insert(static_cast<int>(v));
    } else {
      std::cerr << "usage: acceptance --cli PATH [--work DIR] [--only N,M]\n";
      return 2;
    }
  }
  fs::create_directories(a.work);
  auto want = [&](int id) { return a.only.empty() || a.only.count(id); };
  const bool has_cli = !a.cli.empty();

  const Clock clock;
  try {
    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    for (int id : {6, 7, 8, 9}) {
      if (!want(id)) continue;
      if (!has_cli) {
        report(id, false, "needs --cli");
        continue;
      }
      if (id == 6) criterion_6(a);
      if (id == 7) criterion_7(a);
      if (id == 8) criterion_8(a);
      if (id == 9) criterion_9(a);
    }
  } catch (const std::exception& e) {
    std::cout << "FAIL: uncaught error: " << e.what() << std::endl;
    return 1;
  }
  int failed = 0;
  for (const Line& l : results) failed += !l.pass;
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size()
            << " criteria passed in " << fmt(clock.seconds()) << " s" << std::endl;
  return failed ? 1 : 0;
}
