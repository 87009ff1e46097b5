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

#include "rhd/ensemble.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "rhd/error.h"
#include "rhd/eval.h"
#include "rhd/stats.h"

namespace rhd::ensemble {

EnsembleModel uncalibrated_model(double risk_threshold) {
  require(risk_threshold > 0.0 && risk_threshold < 1.0, ErrorCode::kInvalidInput,
          "risk_threshold must be in (0, 1)");
  EnsembleModel m;
  m.weights.fill(1.0 / static_cast<double>(kNumCategories));
  m.risk_threshold = risk_threshold;
  m.calibrated = false;
  return m;
}

EnsembleModel calibrate(std::span<const SignalSet> signals, const std::vector<bool>& labels,
                        double risk_threshold, std::vector<std::string>* warnings) {
  require(signals.size() == labels.size(), ErrorCode::kInvalidInput,
          "calibrate: signals and labels differ in length");
  require(signals.size() >= 20, ErrorCode::kInvalidInput,
          "calibrate: need >= 20 labeled episodes");
  require(risk_threshold > 0.0 && risk_threshold < 1.0, ErrorCode::kInvalidInput,
          "risk_threshold must be in (0, 1)");
  const auto positives = std::count(labels.begin(), labels.end(), true);
  require(positives > 0 && positives < static_cast<std::ptrdiff_t>(labels.size()),
          ErrorCode::kCalibrationError, "calibrate: labels contain a single class");

  EnsembleModel m;
  m.risk_threshold = risk_threshold;
  m.calibrated = true;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    const std::string name(to_string(kAllCategories[k]));
    std::vector<double> scores;
    std::vector<bool> y;
    std::vector<bool> predicted(labels.size());
    for (std::size_t i = 0; i < signals.size(); ++i) {
      const DetectorSignal& s = signals[i][k];
      predicted[i] = s.flagged;
      if (s.abstained) continue;
      scores.push_back(s.raw_score);
      y.push_back(labels[i]);
    }
    try {
      m.platt[k] = stats::platt_fit(scores, y);
      m.platt_fitted[k] = true;
    } catch (const Error&) {
      m.platt_fitted[k] = false;
      if (warnings) warnings->push_back(name + ": Platt fit skipped, using min-max confidence");
    }
    const auto tp_fp = std::count(predicted.begin(), predicted.end(), true);
    if (tp_fp == 0 && positives == 0) {
      m.f1_defined[k] = false;
      if (warnings) warnings->push_back(name + ": F1 undefined, weight 0");
      continue;
    }
    m.f1_defined[k] = true;
    m.f1[k] = eval::prf(predicted, labels).f1;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    if (m.f1_defined[k]) total += m.f1[k];
  }
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    if (total > 0.0) {
      m.weights[k] = m.f1_defined[k] ? m.f1[k] / total : 0.0;
    } else {
      m.weights[k] = 1.0 / static_cast<double>(kNumCategories);
    }
  }
  if (total <= 0.0 && warnings) warnings->push_back("all detector F1 are 0, equal weights");
  return m;
}

double confidence(const EnsembleModel& model, const DetectorSignal& s) {
  if (s.abstained) return 0.0;
  const std::size_t k = index_of(s.category);
  if (model.calibrated && model.platt_fitted[k]) {
    return stats::platt_apply(model.platt[k], s.raw_score);
  }
  return s.calibrated_confidence;
}

SignalSet calibrated_signals(const EnsembleModel& model, const SignalSet& signals) {
  SignalSet out = signals;
  for (DetectorSignal& s : out) s.calibrated_confidence = confidence(model, s);
  return out;
}

RiskAssessment assess(const EnsembleModel& model, const SignalSet& signals,
                      std::string episode_id, std::int64_t episode_index) {
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    require(signals[k].category == kAllCategories[k], ErrorCode::kInvalidInput,
            "assess: missing signal for " + std::string(to_string(kAllCategories[k])));
  }
  RiskAssessment r;
  r.episode_id = std::move(episode_id);
  r.episode_index = episode_index;
  r.signals = calibrated_signals(model, signals);
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    if (r.signals[k].abstained) continue;
    weighted += model.weights[k] * r.signals[k].calibrated_confidence;
    weight_sum += model.weights[k];
  }
  r.risk = weight_sum > 0.0 ? std::clamp(weighted / weight_sum, 0.0, 1.0) : 0.0;
  r.flagged = r.risk > model.risk_threshold;
  r.consensus_count = consensus_count(signals);
  return r;
}

int consensus_count(const SignalSet& signals) {
  return static_cast<int>(std::count_if(signals.begin(), signals.end(),
                                        [](const DetectorSignal& s) { return s.flagged; }));
}

bool consensus_label(const SignalSet& signals) {
  return consensus_count(signals) >= kConsensusQuorum;
}

EnsembleModel without_detector(const EnsembleModel& model, HackingCategory c) {
  EnsembleModel m = model;
  m.weights[index_of(c)] = 0.0;
  double total = 0.0;
  for (double w : m.weights) total += w;
  if (total > 0.0) {
    for (double& w : m.weights) w /= total;
  }
  return m;
}

detect::ThresholdFactors adaptive_thresholds(const std::vector<Episode>& reference,
                                             const detect::DetectorSet& detectors,
                                             std::vector<std::string>* warnings) {
  std::map<std::string, std::vector<const Episode*>> by_env;
  for (const Episode& e : reference) by_env[e.env_id].push_back(&e);

  constexpr std::array<bool, kNumCategories> kAdapts = {true, true, false, true, true, false};
  std::array<std::vector<double>, kNumCategories> all_scores;
  std::map<std::string, std::array<std::vector<double>, kNumCategories>> env_scores;
  for (const auto& [env, episodes] : by_env) {
    auto& per = env_scores[env];
    for (const Episode* e : episodes) {
      for (std::size_t k = 0; k < kNumCategories; ++k) {
        if (!kAdapts[k]) continue;
        const double s = detect::raw_score_only(detectors, kAllCategories[k], *e);
        per[k].push_back(s);
        all_scores[k].push_back(s);
      }
    }
  }
  std::array<double, kNumCategories> global{};
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    if (!all_scores[k].empty()) global[k] = stats::median(all_scores[k]);
  }

  detect::ThresholdFactors out;
  for (auto& [env, episodes] : by_env) {
    std::array<double, kNumCategories> factors;
    factors.fill(1.0);
    if (episodes.size() < 5) {
      if (warnings) warnings->push_back(env + ": fewer than 5 reference episodes, global thresholds kept");
      out[env] = factors;
      continue;
    }
    std::vector<std::size_t> order(episodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return episodes[a]->episode_index < episodes[b]->episode_index;
    });
    std::vector<double> x;
    for (std::size_t i : order) x.push_back(static_cast<double>(episodes[i]->episode_index));
    const std::size_t initial = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(x.size()))));
    const double at = x[initial - 1];
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      if (!kAdapts[k] || !(global[k] > 0.0)) continue;
      std::vector<double> y;
      for (std::size_t i : order) y.push_back(env_scores[env][k][i]);
      double level = stats::median(y);
      if (x.front() != x.back()) level = stats::theil_sen(x, y).predict(at);
      factors[k] = std::clamp(level / global[k], 0.5, 2.0);
    }
    out[env] = factors;
  }
  return out;
}

EmergenceReport classify_emergence(std::span<const std::pair<std::int64_t, bool>> flags,
                                   const EmergenceParams& p) {
  EmergenceReport report;
  const std::size_t bucket = std::max<std::size_t>(1, p.bucket);
  for (std::size_t b = 0; b < flags.size(); b += bucket) {
    const std::size_t end = std::min(flags.size(), b + bucket);
    std::size_t hits = 0;
    for (std::size_t i = b; i < end; ++i) hits += flags[i].second ? 1 : 0;
    report.flag_rate_series.push_back(static_cast<double>(hits) /
                                      static_cast<double>(end - b));
  }
  const auto& r = report.flag_rate_series;
  if (flags.size() < p.min_episodes) {
    report.warning = "stream too short for emergence classification";
    return report;
  }

  std::optional<std::size_t> onset_bucket;
  for (std::size_t b = 0; b < r.size(); ++b) {
    if (r[b] > p.low) {
      onset_bucket = b;
      break;
    }
  }
  if (onset_bucket) {
    const std::size_t first = *onset_bucket * bucket;
    report.onset_episode = flags[first].first;
    for (std::size_t i = first; i < flags.size(); ++i) {
      if (flags[i].second) {
        report.detection_episode = flags[i].first;
        break;
      }
    }
  }

  // Sudden onset.
  for (std::size_t b = 0; b < r.size(); ++b) {
    if (!(r[b] < p.low)) continue;
    for (std::size_t k = 1; k <= p.sudden_max_buckets && b + k < r.size(); ++k) {
      if (!(r[b + k] > p.high)) continue;
      // The whole sustain window must be observed, otherwise a jump in the
      // last bucket would be reclassified once more data arrives.
      if (b + k + p.sustain_buckets >= r.size()) break;
      bool sustained = true;
      for (std::size_t j = b + k + 1; j <= b + k + p.sustain_buckets; ++j) {
        if (r[j] < p.sustain) sustained = false;
      }
      if (sustained) {
        report.pattern = TemporalPattern::kSuddenOnset;
        return report;
      }
      break;
    }
  }

  // Gradual emergence.
  std::optional<std::size_t> first_high;
  for (std::size_t b = 0; b < r.size(); ++b) {
    if (r[b] > p.high) {
      first_high = b;
      break;
    }
  }
  if (first_high && *first_high + 1 >= p.gradual_min_buckets) {
    std::size_t last_low = 0;
    bool have_low = false;
    for (std::size_t b = 0; b < *first_high; ++b) {
      if (r[b] < p.low) {
        last_low = b;
        have_low = true;
      }
    }
    if (have_low && *first_high - last_low >= p.gradual_min_buckets) {
      std::vector<double> x, y;
      for (std::size_t b = 0; b <= *first_high; ++b) {
        x.push_back(static_cast<double>(b));
        y.push_back(r[b]);
      }
      if (stats::theil_sen(x, y).slope > 0.0) {
        report.pattern = TemporalPattern::kGradualEmergence;
        return report;
      }
    }
  }

  // Intermittent: maximal runs above the sustain level separated by quiet buckets.
  int runs = 0;
  bool in_run = false;
  bool quiet_since_run = true;
  for (double v : r) {
    if (v > p.sustain) {
      if (!in_run && quiet_since_run) {
        ++runs;
        quiet_since_run = false;
      }
      in_run = true;
    } else {
      in_run = false;
      if (v < p.low) quiet_since_run = true;
    }
  }
  if (runs >= p.intermittent_runs) report.pattern = TemporalPattern::kIntermittent;
  return report;
}

}  // namespace rhd::ensemble
