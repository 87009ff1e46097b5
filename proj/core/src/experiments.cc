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

#include "rhd/experiments.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rhd/error.h"
#include "rhd/parallel.h"
#include "rhd/prng.h"

namespace rhd::experiments {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<SignalSet> score_all(const detect::DetectorSet& detectors,
                                 const std::vector<Episode>& episodes,
                                 const detect::ScoreOptions& options, std::size_t jobs) {
  std::vector<SignalSet> out(episodes.size());
  parallel_for(episodes.size(), jobs, [&](std::size_t i) {
    out[i] = detect::score_episode(detectors, episodes[i], options);
  });
  return out;
}

std::vector<bool> labels_of(const std::vector<Episode>& episodes) {
  std::vector<bool> out;
  out.reserve(episodes.size());
  for (const Episode& e : episodes) out.push_back(e.is_hacking());
  return out;
}

SignalSet rethreshold(const SignalSet& signals,
                      const std::array<double, kNumCategories>& thresholds) {
  SignalSet out = signals;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    DetectorSignal& s = out[k];
    s.threshold_used = thresholds[k];
    s.flagged = !s.abstained && !(s.warnings & kWarnSkipped) && s.raw_score > thresholds[k];
  }
  return out;
}

CrossFit cross_fit(const std::vector<SignalSet>& signals, const std::vector<Episode>& episodes,
                   std::size_t folds, std::uint64_t seed, double risk_threshold) {
  require(folds >= 2, ErrorCode::kInvalidInput, "cross_fit: folds must be >= 2");
  require(signals.size() == episodes.size(), ErrorCode::kInvalidInput,
          "cross_fit: signals and episodes differ in length");
  const std::vector<bool> labels = labels_of(episodes);
  CrossFit fit;
  fit.fold_of.assign(signals.size(), 0);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  Prng rng(derive_seed(seed, 0xcf));
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::size_t next = 0;
  for (std::size_t i : pos) fit.fold_of[i] = next++ % folds;
  for (std::size_t i : neg) fit.fold_of[i] = next++ % folds;

  fit.assessments.resize(signals.size());
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<SignalSet> train;
    std::vector<bool> train_labels;
    for (std::size_t i = 0; i < signals.size(); ++i) {
      if (fit.fold_of[i] == f) continue;
      train.push_back(signals[i]);
      train_labels.push_back(labels[i]);
    }
    fit.models.push_back(
        ensemble::calibrate(train, train_labels, risk_threshold, &fit.warnings));
  }
  for (std::size_t i = 0; i < signals.size(); ++i) {
    fit.assessments[i] = ensemble::assess(fit.models[fit.fold_of[i]], signals[i],
                                          episodes[i].id, episodes[i].episode_index);
  }
  return fit;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
  BenchmarkResult r;
  auto t0 = Clock::now();
  envgen::StreamConfig ref;
  ref.env = cfg.env;
  ref.n_episodes = cfg.n_reference;
  ref.seed = derive_seed(cfg.seed, 1);
  ref.policy = cfg.policy;
  ref.mitigation = cfg.mitigation;
  envgen::StreamConfig stream = ref;
  stream.n_episodes = cfg.n_stream;
  stream.seed = derive_seed(cfg.seed, 2);
  stream.injection = cfg.injection.empty()
                         ? envgen::mixed_injection(cfg.injection_rate, cfg.strength, cfg.onset)
                         : cfg.injection;
  r.reference = envgen::generate_stream(ref);
  r.stream = envgen::generate_stream(stream);
  r.generation_seconds = seconds_since(t0);

  t0 = Clock::now();
  r.detectors = detect::fit_detectors(r.reference, cfg.params, envgen::wirehead_registry({cfg.env}));
  if (cfg.adaptive_thresholds) r.factors = ensemble::adaptive_thresholds(r.reference, r.detectors);
  r.fit_seconds = seconds_since(t0);

  t0 = Clock::now();
  detect::ScoreOptions options;
  options.selective = cfg.selective;
  if (r.factors) options.threshold_factors = &*r.factors;
  r.signals = score_all(r.detectors, r.stream, options, cfg.jobs);
  r.detection_seconds = seconds_since(t0);

  r.labels = labels_of(r.stream);
  r.fit = cross_fit(r.signals, r.stream, cfg.folds, cfg.seed, cfg.risk_threshold);
  r.metrics = eval::metrics_from_assessments(r.fit.assessments, r.labels);
  r.metrics.overhead_pct = eval::overhead_pct(r.generation_seconds, r.detection_seconds);

  std::vector<double> uncal;
  const auto plain = ensemble::uncalibrated_model(cfg.risk_threshold);
  for (const SignalSet& s : r.signals) uncal.push_back(ensemble::assess(plain, s).risk);
  r.uncalibrated_brier = eval::brier(uncal, r.labels);

  const eval::RatioBaseline baseline = eval::fit_ratio_baseline(r.reference);
  std::vector<bool> naive;
  for (const Episode& e : r.stream) {
    naive.push_back(eval::naive_ratio_flag(baseline, e, cfg.ratio_threshold));
  }
  r.baseline = eval::prf(naive, r.labels);

  for (std::size_t k = 0; k < kNumCategories; ++k) {
    std::vector<bool> flags;
    std::vector<double> raw;
    for (const SignalSet& s : r.signals) {
      flags.push_back(s[k].flagged);
      raw.push_back(s[k].abstained ? -1e300 : s[k].raw_score);
    }
    r.per_detector.push_back(eval::prf(flags, r.labels));
    const auto pos = std::count(r.labels.begin(), r.labels.end(), true);
    r.per_detector_auc.push_back(
        pos > 0 && pos < static_cast<std::ptrdiff_t>(r.labels.size()) ? eval::roc_auc(raw, r.labels)
                                                                     : 0.5);
  }
  return r;
}

std::vector<eval::AblationRow> cross_fitted_ablation(const BenchmarkResult& r,
                                                     double risk_threshold) {
  auto run = [&](std::optional<HackingCategory> removed) {
    auto as = reassess(r.fit, r.signals, r.stream, [&](ensemble::EnsembleModel m) {
      m.risk_threshold = risk_threshold;
      return removed ? ensemble::without_detector(m, *removed) : m;
    });
    return eval::metrics_from_assessments(as, r.labels);
  };
  std::vector<eval::AblationRow> rows;
  eval::AblationRow full;
  full.configuration = "full";
  full.metrics = run(std::nullopt);
  rows.push_back(full);
  for (HackingCategory c : kAllCategories) {
    eval::AblationRow row;
    row.configuration = "without_" + std::string(to_string(c));
    row.removed = c;
    row.metrics = run(c);
    row.delta_f1 = row.metrics.f1 - full.metrics.f1;
    rows.push_back(row);
  }
  return rows;
}

std::vector<SensitivityRow> sensitivity_grid(const BenchmarkResult& r,
                                             const std::vector<double>& tau_spec,
                                             const std::vector<double>& delta_rho,
                                             const std::vector<double>& contamination,
                                             const std::vector<double>& ppl_multiplier,
                                             std::uint64_t seed) {
  std::vector<double> tamper_thresholds;
  for (double g : contamination) {
    detect::TamperingParams tp;
    tp.contamination = g;
    tamper_thresholds.push_back(detect::tampering_fit(r.reference, tp).threshold());
  }
  const auto& mis = r.detectors.misalignment;
  std::vector<SensitivityRow> rows;
  for (double tau : tau_spec) {
    for (double dr : delta_rho) {
      for (std::size_t gi = 0; gi < contamination.size(); ++gi) {
        for (double k : ppl_multiplier) {
          std::array<double, kNumCategories> thr;
          for (HackingCategory c : kAllCategories) {
            thr[index_of(c)] = detect::threshold_of(r.detectors, c);
          }
          thr[index_of(HackingCategory::kSpecificationGaming)] = tau;
          thr[index_of(HackingCategory::kProxyOptimization)] = dr;
          thr[index_of(HackingCategory::kRewardTampering)] = tamper_thresholds[gi];
          thr[index_of(HackingCategory::kObjectiveMisalignment)] =
              mis.mu_ppl + k * mis.sigma_ppl;
          std::vector<SignalSet> signals;
          signals.reserve(r.signals.size());
          for (const SignalSet& s : r.signals) signals.push_back(rethreshold(s, thr));
          const CrossFit fit = cross_fit(signals, r.stream, 5, seed);
          SensitivityRow row;
          row.tau_spec = tau;
          row.delta_rho = dr;
          row.contamination = contamination[gi];
          row.ppl_multiplier = k;
          row.metrics = eval::metrics_from_assessments(fit.assessments, r.labels);
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

LatencyResult run_latency(const LatencyConfig& cfg) {
  const BenchmarkResult base = run_benchmark(cfg.calibration);
  const ensemble::EnsembleModel model =
      ensemble::calibrate(base.signals, base.labels, cfg.calibration.risk_threshold);
  LatencyResult out;
  for (std::size_t s = 0; s < cfg.streams; ++s) {
    envgen::StreamConfig sc;
    sc.env = cfg.calibration.env;
    sc.policy = cfg.calibration.policy;
    sc.n_episodes = cfg.stream_length;
    sc.seed = derive_seed(cfg.calibration.seed, 0x1a7, s);
    sc.injection = envgen::mixed_injection(cfg.post_onset_rate, 1.0, cfg.onset);
    const auto episodes = envgen::generate_stream(sc);
    const auto signals = score_all(base.detectors, episodes, {}, cfg.calibration.jobs);
    std::vector<std::pair<std::int64_t, bool>> flags;
    std::optional<std::int64_t> onset;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      const RiskAssessment a = ensemble::assess(model, signals[i]);
      flags.emplace_back(episodes[i].episode_index, a.flagged);
      if (!onset && episodes[i].is_hacking()) onset = episodes[i].episode_index;
    }
    out.emergence.push_back(ensemble::classify_emergence(flags));
    if (!onset) continue;
    std::optional<std::int64_t> first;
    for (const auto& [index, flagged] : flags) {
      if (index >= *onset && flagged) {
        first = index;
        break;
      }
    }
    out.onsets.push_back(*onset);
    out.first_flags.push_back(first);
  }
  std::vector<std::pair<std::int64_t, std::optional<std::int64_t>>> pairs;
  for (std::size_t i = 0; i < out.onsets.size(); ++i) {
    pairs.emplace_back(out.onsets[i], out.first_flags[i]);
  }
  out.summary = eval::detection_latency(pairs);
  return out;
}

FactorialResult run_factorial(const FactorialConfig& cfg) {
  std::vector<envgen::EnvSpec> envs;
  for (const auto& e : cfg.envs) {
    envgen::EnvSpec env = e;
    env.max_steps = cfg.max_steps;
    envs.push_back(env);
  }
  const auto configs =
      envgen::factorial_design(envs, cfg.seeds_per_cell, cfg.episodes_per_run, cfg.seed, cfg.scale);
  FactorialResult out;
  out.runs.resize(configs.size());
  parallel_for(configs.size(), cfg.jobs, [&](std::size_t i) {
    const auto episodes = envgen::generate_stream(configs[i]);
    double hacked = 0;
    for (const Episode& e : episodes) hacked += e.is_hacking() ? 1.0 : 0.0;
    eval::FactorialRun run;
    run.cell.dense = configs[i].env.reward.density == envgen::Density::kDense;
    run.cell.high_alignment = configs[i].env.reward.alignment == envgen::Alignment::kHigh;
    run.cell.complex = configs[i].env.reward.complexity == envgen::Complexity::kComplex;
    run.hacking_frequency = hacked / static_cast<double>(episodes.size());
    out.runs[i] = run;
  });
  out.effects = eval::factorial_effects(out.runs);
  return out;
}

MitigationRow run_mitigation(const MitigationConfig& cfg, const mitigation::MitigationSpec& m) {
  struct Pool {
    double episodes = 0, hacked = 0, clean = 0, clean_return = 0, seconds = 0;
    mitigation::StreamOutcome outcome() const {
      mitigation::StreamOutcome o;
      o.hacking_frequency = episodes > 0 ? hacked / episodes : 0.0;
      o.performance = clean > 0 ? clean_return / clean : 0.0;
      o.wall_seconds = seconds;
      return o;
    }
  };
  Pool before, after;
  auto consume = [&](const envgen::StreamConfig& sc, Pool& pool) {
    const auto t0 = Clock::now();
    const auto episodes = envgen::generate_stream(sc);
    if (cfg.detectors != nullptr) score_all(*cfg.detectors, episodes, {}, cfg.jobs);
    pool.seconds += seconds_since(t0);
    for (const Episode& e : episodes) {
      pool.episodes += 1;
      if (e.is_hacking()) {
        pool.hacked += 1;
      } else {
        pool.clean += 1;
        pool.clean_return += e.true_return();
      }
    }
  };
  for (std::size_t s = 0; s < cfg.streams; ++s) {
    envgen::StreamConfig sc;
    sc.env = cfg.env;
    sc.policy = cfg.policy;
    sc.n_episodes = cfg.episodes;
    sc.seed = derive_seed(cfg.seed, 0x417, s);
    sc.injection = envgen::mixed_injection(cfg.injection_rate);
    consume(sc, before);
    consume(mitigation::apply_mitigation(sc, m), after);
  }
  MitigationRow row;
  row.technique = m.technique;
  row.intensity = m.intensity;
  row.before = before.outcome();
  row.after = after.outcome();
  row.outcome = mitigation::evaluate_mitigation(row.before, row.after);
  return row;
}

}  // namespace rhd::experiments
