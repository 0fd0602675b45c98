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

#include "trojan_game/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "trojan_game/baselines.hpp"
#include "trojan_game/error.hpp"
#include "trojan_game/greedy.hpp"
#include "trojan_game/parallel.hpp"
#include "trojan_game/rng.hpp"
#include "trojan_game/serialize.hpp"

namespace trojan_game {

namespace {

std::string indexed(const std::string& stem, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%03zu", i);
  return stem + buf + ".json";
}

void check_writable(const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) {
    throw IoError("cannot create output directory " + out.string());
  }
}

Json with_hash(Json j, const ExperimentConfig& cfg) {
  j["config_hash"] = cfg.hash();
  return j;
}

Matrix columns_of(const Dataset& d, const std::vector<std::size_t>& idx) {
  Matrix m(d.feature_dim, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = d.samples[idx[j]].x;
  return m;
}

std::vector<std::size_t> shuffled_prefix(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(count, n));
  return order;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& idx) {
  std::vector<bool> used(n, false);
  for (std::size_t i : idx) used[i] = true;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) rest.push_back(i);
  }
  return rest;
}

std::string csv_row(std::initializer_list<double> values) {
  std::string row;
  for (double v : values) {
    if (!row.empty()) row += ',';
    row += format_double(v);
  }
  return row + "\n";
}

}  // namespace

DataSplit prepare_data(const ExperimentConfig& cfg) {
  Dataset all;
  if (cfg.data.source == "csv") {
    all = load_csv(cfg.data.path);
  } else {
    all = make_blobs(cfg.data.classes, cfg.data.dim, cfg.data.per_class, cfg.data.spread,
                     derive_seed(cfg.seed, "data"));
  }
  auto [train, test] = split(all, cfg.data.test_fraction, derive_seed(cfg.seed, "split"));
  if (train.empty() || test.empty()) throw ConfigError("train/test split left an empty side");
  return {std::move(train), std::move(test)};
}

TriggerSpec config_trigger(const ExperimentConfig& cfg, int feature_dim, int num_classes,
                           std::optional<bool> all_to_all) {
  const auto& t = cfg.trigger;
  if (t.start + t.size > feature_dim) throw ConfigError("trigger block exceeds the feature dimension");
  const bool a2a = all_to_all.value_or(t.all_to_all);
  const int target = t.all_to_all ? 0 : t.target;
  if (!a2a && target >= num_classes) throw ConfigError("trigger.target out of range");
  return block_trigger(feature_dim, t.start, t.size, t.value, t.transparency,
                       a2a ? TargetRule::all_to_all() : TargetRule::fixed(target));
}

TrainConfig config_train(const ExperimentConfig& cfg) {
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, "train");
  return tc;
}

ShadowPopulation train_shadows(const ExperimentConfig& cfg, const Dataset& train) {
  return build_shadow_population(cfg.shadows.trojan, cfg.shadows.clean, cfg.jumbo, train,
                                 config_train(cfg), derive_seed(cfg.seed, "shadows"));
}

ShadowPopulation load_shadows(const std::filesystem::path& dir) {
  const Json manifest = read_json(dir / "manifest.json");
  ShadowPopulation pop;
  try {
    for (const Json& e : manifest.at("trojan")) {
      pop.trojan.push_back(load_model(dir / e.at("file").get<std::string>()));
      pop.trojan_info.push_back({true, e.at("index").get<int>(), e.at("seed").get<std::uint64_t>(), {}});
    }
    for (const Json& e : manifest.at("clean")) {
      pop.clean.push_back(load_model(dir / e.at("file").get<std::string>()));
      pop.clean_info.push_back({false, e.at("index").get<int>(), e.at("seed").get<std::uint64_t>(), {}});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed shadow manifest: " + std::string(e.what()));
  }
  if (pop.trojan.empty() || pop.clean.empty()) throw ConfigError("shadow manifest lists no models");
  return pop;
}

std::vector<MlpModel> train_clean_models(const ExperimentConfig& cfg, const Dataset& train,
                                         int count, const std::string& tag) {
  std::vector<MlpModel> out(static_cast<std::size_t>(count));
  parallel_for(out.size(), [&](std::size_t i) {
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, tag, i);
    out[i] = train_classifier(train, tc);
  });
  return out;
}

DetectorModel train_meta_detector(const ExperimentConfig& cfg, const ShadowPopulation& shadows,
                                  int num_classes) {
  const auto& d = cfg.detector;
  const int dim = shadows.trojan.front().input_dim();
  const QuerySpec q = QuerySpec::isotropic(dim, d.query_mean, d.query_var, d.queries,
                                           derive_seed(cfg.seed, "queries"));
  DetectorModel h = make_detector(num_classes, q, d.hidden, d.activation,
                                  derive_seed(cfg.seed, "detector-init"));
  DetectorTrainOptions opt;
  opt.epochs = d.epochs;
  opt.rate = d.rate;
  opt.batch_size = d.batch_size;
  opt.seed = derive_seed(cfg.seed, "detector-train");
  return train_detector(std::move(h), shadows.trojan, shadows.clean, opt);
}

std::vector<std::size_t> poison_indices(const ExperimentConfig& cfg, std::size_t n, double alpha,
                                        std::uint64_t stream) {
  auto count = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
  if (alpha > 0.0) count = std::clamp<std::size_t>(count, 1, n);
  auto idx = shuffled_prefix(n, count, derive_seed(cfg.seed, "poison", stream));
  std::sort(idx.begin(), idx.end());
  return idx;
}

MmContext prepare_mm_context(const ExperimentConfig& cfg) {
  MmContext ctx;
  ctx.data = prepare_data(cfg);
  ctx.shadows = cfg.shadows.dir.empty() ? train_shadows(cfg, ctx.data.train) : load_shadows(cfg.shadows.dir);
  if (ctx.shadows.trojan.front().input_dim() != ctx.data.train.feature_dim ||
      ctx.shadows.trojan.front().output_dim() != ctx.data.train.num_classes) {
    throw ConfigError("shadow models do not match the dataset shape");
  }
  ctx.h0 = train_meta_detector(cfg, ctx.shadows, ctx.data.train.num_classes);
  ctx.holdouts = train_clean_models(cfg, ctx.data.train, cfg.shadows.holdout_clean, "holdout");
  for (const MlpModel& m : ctx.holdouts) ctx.clean_acc += accuracy(m, ctx.data.test);
  ctx.clean_acc /= static_cast<double>(ctx.holdouts.size());
  return ctx;
}

MmRun run_mm_pipeline(const ExperimentConfig& cfg, const MmContext& ctx, double alpha,
                      bool all_to_all) {
  const Dataset& train = ctx.data.train;
  MmRun run;
  run.trigger = config_trigger(cfg, train.feature_dim, train.num_classes, all_to_all);
  const auto n_targets = static_cast<std::size_t>(cfg.shadows.targets);
  run.initial.resize(n_targets);
  run.finals.resize(n_targets);
  const bool play = cfg.game.iterations > 0;
  if (play) run.games.resize(n_targets);

  parallel_for(n_targets, [&](std::size_t s) {
    const auto idx = poison_indices(cfg, train.size(), alpha, s);
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, "target", s);
    run.initial[s] = train_classifier(poison_subset(train, idx, run.trigger), tc);
    if (!play) {
      run.finals[s] = run.initial[s];
      return;
    }
    GameInputs in{run.initial[s], ctx.shadows.clean, ctx.h0,
                  train.subset(complement(train.size(), idx)),
                  poison_dataset(train.subset(idx), run.trigger), ctx.data.test, run.trigger};
    GameConfig gc = cfg.game;
    gc.seed = derive_seed(cfg.seed, "game", s);
    run.games[s] = run_mm_trojan(in, gc);
    run.finals[s] = run.games[s].trojan;
  });

  std::vector<DetectorGenerations> gens;
  if (play) {
    for (const GameResult& g : run.games) gens.push_back({&ctx.h0, &g.detector_prev, &g.detector_final});
  } else {
    gens.push_back({&ctx.h0, nullptr, nullptr});
  }
  run.report = evaluate_generations(run.finals, gens, ctx.holdouts, ctx.data.test, run.trigger);
  return run;
}

void cmd_train_shadows(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  check_writable(out);
  const DataSplit data = prepare_data(cfg);
  const ShadowPopulation pop = train_shadows(cfg, data.train);

  Json manifest;
  manifest["config_hash"] = cfg.hash();
  manifest["count"] = pop.trojan.size() + pop.clean.size();
  Json trojans = Json::array(), cleans = Json::array();
  for (std::size_t i = 0; i < pop.trojan.size(); ++i) {
    const ShadowInfo& info = pop.trojan_info[i];
    const std::string file = indexed("trojan", i);
    save_model(out / file, pop.trojan[i], cfg.hash());
    trojans.push_back({{"file", file},
                       {"index", info.index},
                       {"seed", info.seed},
                       {"trigger", trigger_to_json(info.draw->trigger)},
                       {"poison_ratio", info.draw->poison_ratio},
                       {"transparency", info.draw->transparency},
                       {"acc", accuracy(pop.trojan[i], data.test)},
                       {"asr", attack_success_rate(pop.trojan[i], data.test, info.draw->trigger)}});
  }
  for (std::size_t i = 0; i < pop.clean.size(); ++i) {
    const ShadowInfo& info = pop.clean_info[i];
    const std::string file = indexed("clean", i);
    save_model(out / file, pop.clean[i], cfg.hash());
    cleans.push_back({{"file", file},
                      {"index", info.index},
                      {"seed", info.seed},
                      {"acc", accuracy(pop.clean[i], data.test)}});
  }
  manifest["trojan"] = std::move(trojans);
  manifest["clean"] = std::move(cleans);
  write_json(out / "manifest.json", manifest);
}

void cmd_mm_trojan(const ExperimentConfig& config, const std::filesystem::path& out, bool baseline) {
  ExperimentConfig cfg = config;
  if (baseline) cfg.game.iterations = 0;
  cfg.validate();
  check_writable(out);
  const MmContext ctx = prepare_mm_context(cfg);
  const MmRun run = run_mm_pipeline(cfg, ctx, cfg.trigger.poison_fraction, cfg.trigger.all_to_all);

  const std::string hash = cfg.hash();
  save_detector(out / "detector_h0.json", ctx.h0, hash);
  Json runs = Json::array();
  for (std::size_t s = 0; s < run.finals.size(); ++s) {
    save_model(out / indexed("trojan_init", s), run.initial[s], hash);
    save_model(out / indexed("trojan_final", s), run.finals[s], hash);
    Json entry{{"target", s}};
    if (!run.games.empty()) {
      const GameResult& g = run.games[s];
      save_detector(out / indexed("detector_prev", s), g.detector_prev, hash);
      save_detector(out / indexed("detector_final", s), g.detector_final, hash);
      write_text(out / ("trace_" + std::to_string(s) + ".jsonl"), trace_to_jsonl(g.trace));
      entry["js_initial"] = g.trace.records.front().js;
      entry["js_final"] = g.trace.records.back().js;
    }
    runs.push_back(std::move(entry));
  }
  Json report = report_to_json(run.report);
  report["clean_acc"] = ctx.clean_acc;
  report["iterations"] = cfg.game.iterations;
  report["trigger"] = trigger_to_json(run.trigger);
  report["runs"] = std::move(runs);
  write_json(out / "report.json", with_hash(std::move(report), cfg));
}

void cmd_greedy(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  check_writable(out);
  const DataSplit data = prepare_data(cfg);
  const TriggerSpec trig = config_trigger(cfg, data.train.feature_dim, data.train.num_classes);

  Dataset pool = data.train;
  if (cfg.greedy.pool > 0 && static_cast<std::size_t>(cfg.greedy.pool) < pool.size()) {
    auto idx = shuffled_prefix(pool.size(), static_cast<std::size_t>(cfg.greedy.pool),
                               derive_seed(cfg.seed, "greedy-pool"));
    std::sort(idx.begin(), idx.end());
    pool = pool.subset(idx);
  }
  const TestSets tests = make_test_sets(data.test, trig);
  TrainConfig tc = config_train(cfg);
  tc.epochs = cfg.greedy.greedy.retrain_epochs;
  GreedyConfig gcfg = cfg.greedy.greedy;
  gcfg.seed = derive_seed(cfg.seed, "greedy");
  const GreedyResult res = greedy_select(pool, tests, trig, gcfg, tc);

  Json j = greedy_to_json(res);
  j["n"] = pool.size();
  write_json(out / "greedy.json", with_hash(std::move(j), cfg));

  std::string curve = "alpha,L_T,L_C,L_tot\n";
  for (const GreedyStep& s : res.history) {
    const double alpha = static_cast<double>(s.set_size) / static_cast<double>(pool.size());
    curve += csv_row({alpha, s.loss.l_t, s.loss.l_c, s.loss.l_tot});
  }
  write_text(out / "greedy_curve.csv", curve);

  // Random nested prefixes: the same permutation for every grid point.
  const auto& grid = cfg.greedy.alpha_grid;
  std::vector<std::string> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t g) {
    const auto idx = poison_indices(cfg, pool.size(), grid[g], 0x5eed);
    const MlpModel f = train_classifier(poison_subset(pool, idx, trig), tc);
    const double l_t = mean_cross_entropy(forward_batch(f, tests.trojan.features()), tests.trojan.labels());
    const double l_c = mean_cross_entropy(forward_batch(f, tests.clean.features()), tests.clean.labels());
    rows[g] = csv_row({grid[g], l_t, l_c, l_t + l_c, accuracy(f, data.test),
                       attack_success_rate(f, data.test, trig)});
  });
  std::string sweep = "alpha,L_T,L_C,L_tot,acc,asr\n";
  for (const auto& r : rows) sweep += r;
  write_text(out / "alpha_sweep.csv", sweep);
}

void cmd_ablate(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  check_writable(out);
  const MmContext ctx = prepare_mm_context(cfg);
  std::string csv = "alpha,acc,asr,auc\n";
  Json reports = Json::array();
  for (double alpha : cfg.ablate_alphas) {
    const MmRun run = run_mm_pipeline(cfg, ctx, alpha, cfg.trigger.all_to_all);
    csv += csv_row({alpha, run.report.acc, run.report.asr, run.report.auc_0});
    Json r = report_to_json(run.report);
    r["alpha"] = alpha;
    reports.push_back(std::move(r));
  }
  write_text(out / "ablate.csv", csv);
  Json j{{"clean_acc", ctx.clean_acc}, {"reports", std::move(reports)}};
  write_json(out / "ablate.json", with_hash(std::move(j), cfg));
}

namespace {

struct DetectorModels {
  DetectorModel h0;
  std::vector<MlpModel> baseline;
  std::vector<MlpModel> mm;
  std::vector<DetectorModel> mm_prev;
  std::vector<MlpModel> clean;
};

DetectorModels load_detector_models(const std::filesystem::path& dir, std::size_t m) {
  DetectorModels d;
  auto need = [&](const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw IoError("missing checkpoint " + p.string());
    return p;
  };
  d.h0 = load_detector(need(dir / "detector_h0.json"));
  for (std::size_t i = 0; i < m; ++i) {
    d.baseline.push_back(load_model(need(dir / indexed("baseline", i))));
    d.mm.push_back(load_model(need(dir / indexed("mm", i))));
    d.mm_prev.push_back(load_detector(need(dir / indexed("mm_detector_prev", i))));
    d.clean.push_back(load_model(need(dir / indexed("clean", i))));
  }
  return d;
}

}  // namespace

void cmd_eval_detectors(const ExperimentConfig& config, const std::filesystem::path& out) {
  ExperimentConfig cfg = config;
  cfg.validate();
  check_writable(out);
  const auto m = static_cast<std::size_t>(cfg.baselines.models);
  const std::string hash = cfg.hash();

  DetectorModels d;
  DataSplit data;
  if (!cfg.baselines.checkpoint_dir.empty()) {
    data = prepare_data(cfg);
    d = load_detector_models(cfg.baselines.checkpoint_dir, m);
  } else {
    const MmContext ctx = prepare_mm_context(cfg);
    data = ctx.data;
    ExperimentConfig sub = cfg;
    sub.shadows.targets = cfg.baselines.models;
    sub.game.iterations = 0;
    const MmRun base = run_mm_pipeline(sub, ctx, cfg.trigger.poison_fraction, false);
    sub.game.iterations = cfg.game.iterations;
    const MmRun mm = run_mm_pipeline(sub, ctx, cfg.trigger.poison_fraction, true);
    d.h0 = ctx.h0;
    d.baseline = base.finals;
    d.mm = mm.finals;
    for (const GameResult& g : mm.games) d.mm_prev.push_back(g.detector_prev);
    if (d.mm_prev.empty()) d.mm_prev.assign(m, ctx.h0);
    d.clean = train_clean_models(cfg, data.train, cfg.baselines.models, "eval-clean");
    const auto dir = out / "checkpoints";
    save_detector(dir / "detector_h0.json", d.h0, hash);
    for (std::size_t i = 0; i < m; ++i) {
      save_model(dir / indexed("baseline", i), d.baseline[i], hash);
      save_model(dir / indexed("mm", i), d.mm[i], hash);
      save_detector(dir / indexed("mm_detector_prev", i), d.mm_prev[i], hash);
      save_model(dir / indexed("clean", i), d.clean[i], hash);
    }
  }
  const Dataset& train = data.train;
  const TriggerSpec fixed = config_trigger(cfg, train.feature_dim, train.num_classes, false);
  const TriggerSpec a2a = config_trigger(cfg, train.feature_dim, train.num_classes, true);

  // Meta-detector: vanilla detector for the static Trojans, and the detector
  // each MM Trojan last responded to.
  std::vector<double> meta_base, meta_mm, meta_clean;
  for (const MlpModel& f : d.baseline) meta_base.push_back(model_score(d.h0, f));
  for (const MlpModel& f : d.clean) meta_clean.push_back(model_score(d.h0, f));
  const double meta_base_auc = auc(meta_base, meta_clean);
  double meta_mm_auc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double pos = model_score(d.mm_prev[i], d.mm[i]);
    meta_mm.push_back(pos);
    std::vector<double> neg;
    for (const MlpModel& f : d.clean) neg.push_back(model_score(d.mm_prev[i], f));
    meta_mm_auc += auc(std::span<const double>(&pos, 1), neg);
  }
  meta_mm_auc /= static_cast<double>(m);

  const Matrix nc_probes =
      columns_of(data.test, shuffled_prefix(data.test.size(), static_cast<std::size_t>(cfg.baselines.nc_probes),
                                            derive_seed(cfg.seed, "nc-probes")));
  const Matrix strip_probes =
      columns_of(data.test, shuffled_prefix(data.test.size(), static_cast<std::size_t>(cfg.baselines.strip_probes),
                                            derive_seed(cfg.seed, "strip-probes")));
  const Matrix blend_pool =
      columns_of(train, shuffled_prefix(train.size(), train.size(), derive_seed(cfg.seed, "strip-pool")));
  const int n_blends = std::min<int>(cfg.baselines.strip_blends, static_cast<int>(blend_pool.cols()));
  ReverseOptions ropt = cfg.baselines.reverse;
  ropt.seed = derive_seed(cfg.seed, "nc");

  // One task per model; scored into fixed slots for determinism.
  std::vector<const MlpModel*> all;
  for (const auto* v : {&d.baseline, &d.mm, &d.clean}) {
    for (const MlpModel& f : *v) all.push_back(&f);
  }
  std::vector<double> nc(all.size()), strip(all.size());
  std::vector<Json> nc_reports(all.size());
  parallel_for(all.size(), [&](std::size_t i) {
    const AnomalyReport a =
        neural_cleanse_score(*all[i], nc_probes, ropt, cfg.baselines.anomaly_threshold, 1);
    nc[i] = a.model_score;
    nc_reports[i] = anomaly_to_json(a);
    const bool is_mm = i >= m && i < 2 * m;
    strip[i] = strip_model_score(*all[i], strip_probes, is_mm ? a2a : fixed, blend_pool, n_blends);
  });
  auto slice = [&](const std::vector<double>& v, std::size_t from) {
    return std::vector<double>(v.begin() + static_cast<long>(from), v.begin() + static_cast<long>(from + m));
  };
  const double nc_base = auc(slice(nc, 0), slice(nc, 2 * m));
  const double nc_mm = auc(slice(nc, m), slice(nc, 2 * m));
  const double strip_base = auc(slice(strip, 0), slice(strip, 2 * m));
  const double strip_mm = auc(slice(strip, m), slice(strip, 2 * m));

  std::string csv = "detector,baseline_auc,mm_auc\n";
  csv += "meta," + format_double(meta_base_auc) + "," + format_double(meta_mm_auc) + "\n";
  csv += "nc," + format_double(nc_base) + "," + format_double(nc_mm) + "\n";
  csv += "strip," + format_double(strip_base) + "," + format_double(strip_mm) + "\n";
  write_text(out / "eval_detectors.csv", csv);

  Json scores;
  scores["meta"] = {{"baseline", meta_base}, {"mm", meta_mm}, {"clean", meta_clean}};
  scores["nc"] = {{"baseline", slice(nc, 0)}, {"mm", slice(nc, m)}, {"clean", slice(nc, 2 * m)}};
  scores["strip"] = {{"baseline", slice(strip, 0)}, {"mm", slice(strip, m)}, {"clean", slice(strip, 2 * m)}};
  scores["nc_reports"] = nc_reports;
  scores["auc"] = {{"meta", {meta_base_auc, meta_mm_auc}},
                   {"nc", {nc_base, nc_mm}},
                   {"strip", {strip_base, strip_mm}}};
  write_json(out / "eval_detectors.json", with_hash(std::move(scores), cfg));
}

}  // namespace trojan_game
