/*
 * Copyright 2026 The rhd Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "commands.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "rhd/assessment_io.h"
#include "rhd/bundle.h"
#include "rhd/config.h"
#include "rhd/ensemble.h"
#include "rhd/episode_io.h"
#include "rhd/eval.h"
#include "rhd/experiments.h"
#include "rhd/prng.h"
#include "rhd/report.h"

#ifndef RHD_VERSION
#define RHD_VERSION "unknown"
#endif

namespace rhd::cli {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

class Manifest {
 public:
  explicit Manifest(std::string command) {
    j_["tool"] = "rhd";
    j_["version"] = RHD_VERSION;
    j_["command"] = std::move(command);
    j_["inputs"] = json::array();
    j_["outputs"] = json::array();
    j_["wall_seconds"] = json::object();
  }
  void set(const std::string& key, json value) { j_[key] = std::move(value); }
  void input(const fs::path& p) { j_["inputs"].push_back(p.generic_string()); }
  void output(const fs::path& p) { j_["outputs"].push_back(p.generic_string()); }

  // Times the phase and records it under wall_seconds.
  template <typename F>
  auto phase(const std::string& name, F&& f) {
    const auto t0 = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(name, t0);
    } else {
      auto result = f();
      record(name, t0);
      return result;
    }
  }
  double seconds(const std::string& name) const {
    auto it = j_["wall_seconds"].find(name);
    return it == j_["wall_seconds"].end() ? 0.0 : it->get<double>();
  }

  // Written to a temporary name and renamed into place.
  void write(const fs::path& path) const {
    const fs::path tmp = path.string() + ".tmp";
    report::write_text(tmp, j_.dump(2) + "\n");
    fs::rename(tmp, path);
  }

 private:
  void record(const std::string& name, Clock::time_point t0) {
    j_["wall_seconds"][name] = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  json j_;
};

std::vector<Episode> read_nonempty_log(const fs::path& path) {
  auto episodes = read_episode_log(path);
  if (episodes.empty()) fail(ErrorCode::kEmptyInput, path.string() + ": no episodes");
  return episodes;
}

void write_svg(const fs::path& path, const report::Chart& chart, Manifest& m) {
  report::write_text(path, report::render_svg(chart));
  m.output(path);
}

void write_csv(const fs::path& path, const report::CsvTable& t, Manifest& m) {
  report::write_text(path, t.to_string());
  m.output(path);
}

eval::DetectionMetrics prf_metrics(const eval::Prf& p, double auc) {
  eval::DetectionMetrics m;
  m.precision = p.precision;
  m.recall = p.recall;
  m.f1 = p.f1;
  m.auc_roc = auc;
  return m;
}

double safe_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  const auto pos = std::count(labels.begin(), labels.end(), true);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) return std::nan("");
  return eval::roc_auc(scores, labels);
}

// Per-detector rows from native flags and raw scores.
std::vector<std::pair<std::string, eval::DetectionMetrics>> detector_rows(
    const std::vector<RiskAssessment>& as, const std::vector<bool>& labels) {
  std::vector<std::pair<std::string, eval::DetectionMetrics>> rows;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    std::vector<bool> flags;
    std::vector<double> raw;
    for (const auto& a : as) {
      flags.push_back(a.signals[k].flagged);
      raw.push_back(a.signals[k].abstained ? -1e300 : a.signals[k].raw_score);
    }
    rows.emplace_back(std::string(to_string(kAllCategories[k])),
                      prf_metrics(eval::prf(flags, labels), safe_auc(raw, labels)));
  }
  std::vector<bool> consensus;
  std::vector<double> counts;
  for (const auto& a : as) {
    consensus.push_back(a.consensus_count >= ensemble::kConsensusQuorum);
    counts.push_back(a.consensus_count);
  }
  rows.emplace_back("consensus_3_of_6",
                    prf_metrics(eval::prf(consensus, labels), safe_auc(counts, labels)));
  return rows;
}

std::vector<RiskAssessment> assess_all(const ensemble::EnsembleModel& model,
                                       const std::vector<SignalSet>& signals,
                                       const std::vector<Episode>& episodes) {
  std::vector<RiskAssessment> out;
  out.reserve(signals.size());
  for (std::size_t i = 0; i < signals.size(); ++i) {
    out.push_back(ensemble::assess(model, signals[i], episodes[i].id, episodes[i].episode_index));
  }
  return out;
}

json metrics_json(const eval::DetectionMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"auc_roc", m.auc_roc},     {"brier", m.brier}};
}

void benchmark_extras(const config::RunConfig& cfg, const experiments::BenchmarkResult& r,
                      const fs::path& dir, std::size_t jobs, Manifest& m) {
  // Emergence streams, one per onset pattern, scored with the benchmark's
  // detectors and an ensemble calibrated on the whole benchmark stream.
  const auto model = ensemble::calibrate(r.signals, r.labels, cfg.risk_threshold);
  report::CsvTable table;
  table.header = {"planted", "classified", "onset_episode", "detection_episode", "latency"};
  std::vector<std::vector<double>> series;
  const std::array<TemporalPattern, 3> patterns = {TemporalPattern::kGradualEmergence,
                                                   TemporalPattern::kSuddenOnset,
                                                   TemporalPattern::kIntermittent};
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    envgen::StreamConfig sc = config::stream_of(cfg);
    sc.seed = derive_seed(cfg.seed, 0xe3, k);
    sc.injection = envgen::mixed_injection(0.8, cfg.strength, patterns[k]);
    const auto episodes = envgen::generate_stream(sc);
    const auto signals = experiments::score_all(r.detectors, episodes, {}, jobs);
    std::vector<std::pair<std::int64_t, bool>> flags;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      flags.emplace_back(episodes[i].episode_index, ensemble::assess(model, signals[i]).flagged);
    }
    const auto rep = ensemble::classify_emergence(flags);
    series.push_back(rep.flag_rate_series);
    auto opt = [](const std::optional<std::int64_t>& v) {
      return v ? std::to_string(*v) : std::string("NA");
    };
    table.rows.push_back({std::string(to_string(patterns[k])), std::string(to_string(rep.pattern)),
                          opt(rep.onset_episode), opt(rep.detection_episode),
                          rep.onset_episode && rep.detection_episode
                              ? std::to_string(*rep.detection_episode - *rep.onset_episode)
                              : std::string("NA")});
  }
  write_csv(dir / "emergence.csv", table, m);
  auto chart = report::flag_rate_chart(series, ensemble::EmergenceParams{}.bucket);
  for (std::size_t k = 0; k < patterns.size() && k < chart.series.size(); ++k) {
    chart.series[k].name = std::string(to_string(patterns[k]));
  }
  write_svg(dir / "flag_rate.svg", chart, m);
}

}  // namespace

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfigError: return kExitConfig;
    case ErrorCode::kEmptyInput: return kExitEmpty;
    default: return kExitData;
  }
}

std::size_t default_jobs() {
  if (const char* v = std::getenv("RHD_JOBS")) {
    const char* end = v + std::strlen(v);
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(v, end, n);
    if (ec == std::errc() && ptr == end && n > 0) return n;
  }
  return 1;
}

fs::path manifest_path(const fs::path& output) {
  fs::path p = output;
  p.replace_extension(".manifest.json");
  return p;
}

void cmd_generate(const GenerateOptions& o, std::ostream& log) {
  Manifest m("generate");
  const config::RunConfig cfg = config::load_config(o.config.string());
  m.input(o.config);
  m.set("config_hash", config::config_hash(cfg));
  m.set("seed", cfg.seed);
  const auto episodes =
      m.phase("generate", [&] { return envgen::generate_stream(config::stream_of(cfg)); });
  m.phase("write", [&] { write_episode_log(o.out, episodes); });
  m.output(o.out);
  std::size_t hacked = 0;
  for (const auto& e : episodes) hacked += e.is_hacking() ? 1 : 0;
  m.set("counts", {{"episodes", episodes.size()}, {"hacking", hacked}});
  m.write(manifest_path(o.out));
  log << "generate: " << episodes.size() << " episodes (" << hacked << " hacking) -> "
      << o.out.string() << "\n";
}

void cmd_fit(const FitOptions& o, std::ostream& log) {
  Manifest m("fit");
  config::RunConfig cfg;
  if (o.config) {
    cfg = config::load_config(o.config->string());
    m.input(*o.config);
  }
  const std::uint64_t seed = o.seed.value_or(cfg.seed);
  m.set("config_hash", config::config_hash(cfg));
  m.set("seed", seed);

  auto episodes = read_nonempty_log(o.log);
  m.input(o.log);
  std::vector<Episode> clean;
  for (auto& e : episodes) {
    if (!e.is_hacking()) clean.push_back(std::move(e));
  }
  ModelBundle bundle;
  bundle.seed = seed;
  bundle.n_reference = clean.size();
  if (clean.size() != episodes.size()) {
    bundle.warnings.push_back("ignored " + std::to_string(episodes.size() - clean.size()) +
                              " labeled hacking episodes in the reference log");
  }
  bundle.detectors = m.phase("fit", [&] {
    return detect::fit_detectors(clean, cfg.params, envgen::wirehead_registry());
  });
  if (o.adaptive_thresholds || cfg.adaptive_thresholds) {
    bundle.factors = ensemble::adaptive_thresholds(clean, bundle.detectors, &bundle.warnings);
  }

  if (o.validation) {
    const auto val = read_nonempty_log(*o.validation);
    m.input(*o.validation);
    detect::ScoreOptions so;
    if (bundle.factors) so.threshold_factors = &*bundle.factors;
    const auto signals =
        m.phase("score_validation", [&] { return experiments::score_all(bundle.detectors, val, so, o.jobs); });
    const auto labels = experiments::labels_of(val);
    eval::DetectionMetrics held_out;
    if (o.folds >= 2) {
      const auto fit = experiments::cross_fit(signals, val, o.folds, seed, cfg.risk_threshold);
      held_out = eval::metrics_from_assessments(fit.assessments, labels);
    } else {
      std::vector<std::size_t> order(val.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      Prng rng(derive_seed(seed, 0x5b));
      rng.shuffle(order);
      const std::size_t n_train = order.size() * 4 / 5;
      std::vector<SignalSet> train;
      std::vector<bool> train_labels, test_labels;
      for (std::size_t i = 0; i < n_train; ++i) {
        train.push_back(signals[order[i]]);
        train_labels.push_back(labels[order[i]]);
      }
      const auto model = ensemble::calibrate(train, train_labels, cfg.risk_threshold);
      std::vector<RiskAssessment> test;
      for (std::size_t i = n_train; i < order.size(); ++i) {
        test.push_back(ensemble::assess(model, signals[order[i]]));
        test_labels.push_back(labels[order[i]]);
      }
      held_out = eval::metrics_from_assessments(test, test_labels);
    }
    m.set("held_out", metrics_json(held_out));
    bundle.ensemble =
        ensemble::calibrate(signals, labels, cfg.risk_threshold, &bundle.warnings);
    log << "fit: held-out F1 " << held_out.f1 << ", AUC " << held_out.auc_roc << "\n";
  } else {
    bundle.ensemble = ensemble::uncalibrated_model(cfg.risk_threshold);
    bundle.warnings.push_back(
        "no validation log: ensemble uses equal weights over uncalibrated confidences");
  }
  for (const auto& w : bundle.warnings) log << "warning: " << w << "\n";
  save_bundle(o.out, bundle);
  m.output(o.out);
  m.set("counts", {{"reference_episodes", clean.size()}});
  m.write(manifest_path(o.out));
  log << "fit: " << clean.size() << " reference episodes -> " << o.out.string() << "\n";
}

void cmd_detect(const DetectOptions& o, std::ostream& log) {
  Manifest m("detect");
  ModelBundle bundle = load_bundle(o.model);
  m.input(o.model);
  if (o.risk_threshold) {
    require(*o.risk_threshold >= 0.0 && *o.risk_threshold <= 1.0, ErrorCode::kConfigError,
            "--risk-threshold must be in [0, 1]");
    bundle.ensemble.risk_threshold = *o.risk_threshold;
  }
  const auto episodes = read_nonempty_log(o.log);
  m.input(o.log);
  m.set("seed", bundle.seed);
  m.set("risk_threshold", bundle.ensemble.risk_threshold);
  m.set("selective", o.selective);
  detect::ScoreOptions so;
  so.selective = o.selective;
  if (bundle.factors) so.threshold_factors = &*bundle.factors;
  const auto signals = m.phase(
      "score", [&] { return experiments::score_all(bundle.detectors, episodes, so, o.jobs); });
  const auto assessments = assess_all(bundle.ensemble, signals, episodes);
  write_assessment_file(o.out, assessments);
  m.output(o.out);
  std::size_t flagged = 0;
  for (const auto& a : assessments) flagged += a.flagged ? 1 : 0;
  m.set("counts", {{"episodes", assessments.size()}, {"flagged", flagged}});
  m.write(manifest_path(o.out));
  log << "detect: " << flagged << " of " << assessments.size() << " episodes flagged -> "
      << o.out.string() << "\n";
}

void cmd_report(const ReportOptions& o, std::ostream& log) {
  Manifest m("report");
  const auto assessments = read_assessment_file(o.assessments);
  m.input(o.assessments);
  if (assessments.empty()) fail(ErrorCode::kEmptyInput, o.assessments.string() + ": no assessments");
  const auto episodes = read_nonempty_log(o.labels);
  m.input(o.labels);
  require(episodes.size() == assessments.size(), ErrorCode::kInvalidInput,
          "assessments (" + std::to_string(assessments.size()) + ") and labels (" +
              std::to_string(episodes.size()) + ") differ in length");
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    require(episodes[i].id == assessments[i].episode_id, ErrorCode::kInvalidInput,
            "episode " + std::to_string(i) + ": id '" + assessments[i].episode_id +
                "' does not match label log id '" + episodes[i].id + "'");
  }
  const auto labels = experiments::labels_of(episodes);
  fs::create_directories(o.out_dir);
  std::vector<std::pair<std::string, eval::DetectionMetrics>> rows;
  const auto pos = std::count(labels.begin(), labels.end(), true);
  if (pos > 0 && pos < static_cast<std::ptrdiff_t>(labels.size())) {
    rows.emplace_back("ensemble", eval::metrics_from_assessments(assessments, labels));
  } else {
    std::vector<bool> flags;
    for (const auto& a : assessments) flags.push_back(a.flagged);
    rows.emplace_back("ensemble", prf_metrics(eval::prf(flags, labels), std::nan("")));
  }
  const auto detectors = detector_rows(assessments, labels);
  rows.insert(rows.end(), detectors.begin(), detectors.end());
  write_csv(o.out_dir / "metrics.csv", report::metrics_table(rows), m);
  write_svg(o.out_dir / "roc.svg", report::roc_chart(assessments, labels), m);
  m.write(o.out_dir / "manifest.json");
  log << "report: ensemble F1 " << rows.front().second.f1 << " -> " << o.out_dir.string() << "\n";
}

void cmd_experiment(const ExperimentOptions& o, std::ostream& log) {
  static const std::vector<std::string> kKinds = {"benchmark", "factorial", "ablation",
                                                  "mitigation", "sensitivity"};
  if (std::find(kKinds.begin(), kKinds.end(), o.kind) == kKinds.end()) {
    fail(ErrorCode::kConfigError, "unknown experiment kind '" + o.kind + "'");
  }
  Manifest m("experiment " + o.kind);
  const config::RunConfig cfg = config::load_config(o.config.string());
  m.input(o.config);
  m.set("config_hash", config::config_hash(cfg));
  m.set("seed", cfg.seed);
  fs::create_directories(o.out_dir);
  const fs::path& dir = o.out_dir;
  report::CsvTable timing;
  timing.header = {"item", "seconds", "overhead_pct"};

  auto benchmark = [&] {
    auto b = config::benchmark_of(cfg);
    b.jobs = o.jobs;
    auto r = m.phase("benchmark", [&] { return experiments::run_benchmark(b); });
    m.set("counts", {{"reference_episodes", r.reference.size()},
                     {"stream_episodes", r.stream.size()},
                     {"hacking", std::count(r.labels.begin(), r.labels.end(), true)}});
    timing.rows.push_back({"generation", report::cell(r.generation_seconds), ""});
    timing.rows.push_back({"detection", report::cell(r.detection_seconds),
                           report::cell(r.metrics.overhead_pct)});
    return r;
  };

  if (o.kind == "benchmark") {
    const auto r = benchmark();
    std::vector<std::pair<std::string, eval::DetectionMetrics>> rows;
    rows.emplace_back("ensemble", r.metrics);
    rows.emplace_back("naive_ratio_baseline", prf_metrics(r.baseline, std::nan("")));
    const auto detectors = detector_rows(r.fit.assessments, r.labels);
    rows.insert(rows.end(), detectors.begin(), detectors.end());
    write_csv(dir / "metrics.csv", report::metrics_table(rows), m);
    report::CsvTable cal;
    cal.header = {"model", "brier"};
    cal.rows.push_back({"uncalibrated", report::cell(r.uncalibrated_brier)});
    cal.rows.push_back({"calibrated", report::cell(r.metrics.brier)});
    write_csv(dir / "calibration.csv", cal, m);
    write_svg(dir / "roc.svg", report::roc_chart(r.fit.assessments, r.labels), m);
    write_assessment_file(dir / "assessments.jsonl", r.fit.assessments);
    m.output(dir / "assessments.jsonl");
    m.phase("emergence", [&] { benchmark_extras(cfg, r, dir, o.jobs, m); });
    log << "benchmark: F1 " << r.metrics.f1 << ", AUC " << r.metrics.auc_roc
        << ", baseline F1 " << r.baseline.f1 << "\n";
  } else if (o.kind == "ablation") {
    const auto r = benchmark();
    const auto rows = experiments::cross_fitted_ablation(r, cfg.risk_threshold);
    write_csv(dir / "ablation.csv", report::ablation_table(rows), m);
    write_svg(dir / "roc.svg", report::roc_chart(r.fit.assessments, r.labels), m);
    log << "ablation: " << rows.size() << " configurations\n";
  } else if (o.kind == "sensitivity") {
    const auto r = benchmark();
    const auto rows = m.phase("sweep", [&] {
      return experiments::sensitivity_grid(r, cfg.tau_grid, cfg.delta_grid,
                                           cfg.contamination_grid, cfg.ppl_grid, cfg.seed);
    });
    write_csv(dir / "sensitivity.csv", report::sensitivity_table(rows), m);
    report::Chart chart;
    chart.title = "F1 across the parameter grid";
    chart.x_label = "grid point";
    chart.y_label = "F1";
    chart.x_max = static_cast<double>(std::max<std::size_t>(rows.size(), 1));
    report::Series s;
    s.name = "ensemble F1";
    s.markers_only = true;
    double worst = 1.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      s.xs.push_back(static_cast<double>(i + 1));
      s.ys.push_back(rows[i].metrics.f1);
      worst = std::min(worst, rows[i].metrics.f1);
    }
    chart.series.push_back(std::move(s));
    write_svg(dir / "sensitivity.svg", chart, m);
    log << "sensitivity: " << rows.size() << " grid points, min F1 " << worst << "\n";
  } else if (o.kind == "factorial") {
    experiments::FactorialConfig fc;
    for (auto f : cfg.factorial_envs) fc.envs.push_back(envgen::make_env(f, cfg.max_steps));
    fc.seeds_per_cell = cfg.seeds_per_cell;
    fc.episodes_per_run = cfg.episodes_per_run;
    fc.max_steps = cfg.max_steps;
    fc.scale = cfg.factorial_scale;
    fc.seed = cfg.seed;
    fc.jobs = o.jobs;
    const auto r = m.phase("factorial", [&] { return experiments::run_factorial(fc); });
    m.set("counts", {{"runs", r.runs.size()}});
    write_csv(dir / "effects.csv", report::effects_table(r.effects), m);
    const auto cells = report::factorial_cells_table(r.runs);
    write_csv(dir / "cells.csv", cells, m);
    report::Chart chart;
    chart.title = "Hacking frequency by reward design";
    chart.x_label = "cell (density | alignment<<1 | complexity<<2)";
    chart.y_label = "mean hacking frequency";
    chart.x_max = 7.0;
    report::Series s;
    s.name = "cell mean";
    s.markers_only = true;
    for (std::size_t i = 0; i < cells.rows.size(); ++i) {
      s.xs.push_back(static_cast<double>(i));
      s.ys.push_back(std::stod(cells.rows[i].back()));
    }
    chart.series.push_back(std::move(s));
    write_svg(dir / "cells.svg", chart, m);
    log << "factorial: " << r.runs.size() << " runs\n";
  } else if (o.kind == "mitigation") {
    experiments::MitigationConfig mc;
    mc.env = config::env_of(cfg);
    mc.policy = cfg.policy;
    mc.streams = cfg.mitigation_streams;
    mc.episodes = cfg.episodes;
    mc.injection_rate = cfg.injection_rate;
    mc.seed = cfg.seed;
    mc.jobs = o.jobs;
    envgen::StreamConfig ref;
    ref.env = mc.env;
    ref.policy = cfg.policy;
    ref.n_episodes = cfg.reference_episodes;
    ref.seed = derive_seed(cfg.seed, 1);
    const auto detectors = m.phase("fit", [&] {
      return detect::fit_detectors(envgen::generate_stream(ref), cfg.params,
                                   envgen::wirehead_registry());
    });
    mc.detectors = &detectors;
    std::vector<experiments::MitigationRow> rows;
    m.phase("mitigation", [&] {
      for (auto t : cfg.techniques) {
        for (double intensity : cfg.intensities) {
          rows.push_back(experiments::run_mitigation(mc, config::mitigation_spec(cfg, t, intensity)));
          timing.rows.push_back({std::string(mitigation::to_string(t)) + "@" + report::cell(intensity),
                                 report::cell(rows.back().after.wall_seconds),
                                 report::cell(rows.back().outcome.overhead_pct)});
        }
      }
    });
    write_csv(dir / "mitigation.csv", report::mitigation_table(rows), m);
    write_svg(dir / "pareto.svg", report::pareto_chart(rows), m);
    log << "mitigation: " << rows.size() << " rows\n";
  }
  if (!timing.rows.empty()) {
    report::write_text(dir / "timing.csv", timing.to_string());
    m.set("timing", dir.generic_string() + "/timing.csv");
  }
  m.write(dir / "manifest.json");
}

}  // namespace rhd::cli
