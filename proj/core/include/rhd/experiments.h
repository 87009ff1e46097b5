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

// End-to-end experiment protocols built from the library pieces: the
// synthetic detection benchmark (with cross-fitted ensemble calibration),
// detector ablation, threshold sensitivity, onset latency, the factorial
// reward-design study and the mitigation comparison.

#ifndef RHD_EXPERIMENTS_H_
#define RHD_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rhd/detectors.h"
#include "rhd/ensemble.h"
#include "rhd/envgen.h"
#include "rhd/eval.h"
#include "rhd/mitigation.h"
#include "rhd/types.h"

namespace rhd::experiments {

// Scores every episode; slot i of the result belongs to episodes[i] for any
// job count.
std::vector<SignalSet> score_all(const detect::DetectorSet& detectors,
                                 const std::vector<Episode>& episodes,
                                 const detect::ScoreOptions& options = {}, std::size_t jobs = 1);

std::vector<bool> labels_of(const std::vector<Episode>& episodes);

// Recomputes flags for new thresholds from stored raw scores.
SignalSet rethreshold(const SignalSet& signals,
                      const std::array<double, kNumCategories>& thresholds);

struct CrossFit {
  std::vector<ensemble::EnsembleModel> models;  // one per fold
  std::vector<std::size_t> fold_of;             // per episode
  std::vector<RiskAssessment> assessments;      // held-out, stream order
  std::vector<std::string> warnings;
};

// Stratified k-fold cross-fitting: each episode is assessed by an ensemble
// calibrated on the other folds. folds must be >= 2.
CrossFit cross_fit(const std::vector<SignalSet>& signals, const std::vector<Episode>& episodes,
                   std::size_t folds, std::uint64_t seed, double risk_threshold = 0.5);

// Held-out assessments under a transformed copy of each fold model.
template <typename Transform>
std::vector<RiskAssessment> reassess(const CrossFit& fit, const std::vector<SignalSet>& signals,
                                     const std::vector<Episode>& episodes, Transform&& transform) {
  std::vector<ensemble::EnsembleModel> models;
  for (const auto& m : fit.models) models.push_back(transform(m));
  std::vector<RiskAssessment> out;
  out.reserve(signals.size());
  for (std::size_t i = 0; i < signals.size(); ++i) {
    out.push_back(ensemble::assess(models[fit.fold_of[i]], signals[i], episodes[i].id,
                                   episodes[i].episode_index));
  }
  return out;
}

struct BenchmarkConfig {
  envgen::EnvSpec env = envgen::make_env(envgen::EnvFamily::kGridWorld);
  envgen::Policy policy = envgen::Policy::kGoalSeeker;
  std::size_t n_reference = 200;
  std::size_t n_stream = 1000;
  double injection_rate = 0.2;
  double strength = 1.0;
  TemporalPattern onset = TemporalPattern::kNone;
  // Overrides the mixed injection when non-empty.
  std::vector<envgen::InjectionSpec> injection;
  std::optional<mitigation::MitigationSpec> mitigation;
  std::uint64_t seed = 1;
  detect::DetectorParams params;
  std::size_t folds = 5;
  double risk_threshold = 0.5;
  bool selective = false;
  bool adaptive_thresholds = false;
  double ratio_threshold = 2.0;
  std::size_t jobs = 1;
};

struct BenchmarkResult {
  std::vector<Episode> reference;
  std::vector<Episode> stream;
  detect::DetectorSet detectors;
  std::optional<detect::ThresholdFactors> factors;
  std::vector<SignalSet> signals;
  std::vector<bool> labels;
  CrossFit fit;
  eval::DetectionMetrics metrics;
  eval::Prf baseline;                   // naive ratio threshold
  std::vector<eval::Prf> per_detector;  // native detector flags
  std::vector<double> per_detector_auc;
  double uncalibrated_brier = 0.0;
  double generation_seconds = 0.0;
  double fit_seconds = 0.0;
  double detection_seconds = 0.0;
};

// Generates a clean reference stream and a labeled evaluation stream (with
// the same seed family but disjoint episode indices), fits the detectors on
// the references, scores the stream and cross-fits the ensemble.
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg);

// Seven rows: full ensemble, then each detector's weight zeroed.
std::vector<eval::AblationRow> cross_fitted_ablation(const BenchmarkResult& r,
                                                     double risk_threshold = 0.5);

struct SensitivityRow {
  double tau_spec = 0.3;
  double delta_rho = 0.5;
  double contamination = 0.1;
  double ppl_multiplier = 2.0;
  eval::DetectionMetrics metrics;
};

// Full grid over the four detection parameters. Raw scores do not depend on
// them, so the stream is scored once and only flags and calibration rerun.
std::vector<SensitivityRow> sensitivity_grid(const BenchmarkResult& r,
                                             const std::vector<double>& tau_spec,
                                             const std::vector<double>& delta_rho,
                                             const std::vector<double>& contamination,
                                             const std::vector<double>& ppl_multiplier,
                                             std::uint64_t seed);

struct LatencyConfig {
  BenchmarkConfig calibration;  // fits detectors and the ensemble
  std::size_t streams = 10;
  std::size_t stream_length = 300;
  double post_onset_rate = 0.5;
  TemporalPattern onset = TemporalPattern::kSuddenOnset;
};

struct LatencyResult {
  std::vector<std::int64_t> onsets;                     // first labeled hacking
  std::vector<std::optional<std::int64_t>> first_flags;  // at or after onset
  eval::LatencySummary summary;
  std::vector<ensemble::EmergenceReport> emergence;
};

LatencyResult run_latency(const LatencyConfig& cfg);

struct FactorialConfig {
  std::vector<envgen::EnvSpec> envs;
  std::size_t seeds_per_cell = 40;
  std::size_t episodes_per_run = 50;
  std::size_t max_steps = 200;
  double scale = 1.0;
  std::uint64_t seed = 7;
  std::size_t jobs = 1;
};

struct FactorialResult {
  std::vector<eval::FactorialRun> runs;
  std::vector<eval::EffectEstimate> effects;
};

// Hacking frequency per run is the labeled fraction of injected episodes.
FactorialResult run_factorial(const FactorialConfig& cfg);

struct MitigationConfig {
  envgen::EnvSpec env = envgen::make_env(envgen::EnvFamily::kGridWorld);
  envgen::Policy policy = envgen::Policy::kGoalSeeker;
  std::size_t streams = 10;
  std::size_t episodes = 1000;
  double injection_rate = 0.2;
  std::uint64_t seed = 11;
  std::size_t jobs = 1;
  // When set, detection runs on every stream with these detectors so the
  // overhead column measures generation plus detection.
  const detect::DetectorSet* detectors = nullptr;
};

struct MitigationRow {
  mitigation::Technique technique = mitigation::Technique::kCombined;
  double intensity = 0.0;
  mitigation::StreamOutcome before;
  mitigation::StreamOutcome after;
  mitigation::MitigationOutcome outcome;
};

MitigationRow run_mitigation(const MitigationConfig& cfg, const mitigation::MitigationSpec& m);

}  // namespace rhd::experiments

#endif  // RHD_EXPERIMENTS_H_
