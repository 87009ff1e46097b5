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

// Evaluation metrics, statistical tests, the factorial effect estimator,
// detector ablation and the naive ratio baseline.

#ifndef RHD_EVAL_H_
#define RHD_EVAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rhd/ensemble.h"
#include "rhd/types.h"

namespace rhd::eval {

struct Prf {
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;     // 0 when there are no positive labels
  double f1 = 0.0;         // 0 when precision + recall == 0
};

Prf prf(const std::vector<bool>& predictions, const std::vector<bool>& labels);

// Mann-Whitney AUC with midranks for ties. Raises kUndefined on one class.
double roc_auc(std::span<const double> scores, const std::vector<bool>& labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // predict positive when score >= threshold
};

// Staircase from (0, 0) at +inf to (1, 1), one point per distinct score in
// decreasing order.
std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                const std::vector<bool>& labels);

struct LatencySummary {
  double mean = 0.0;
  double median = 0.0;
  std::size_t detected = 0;
  std::size_t missed = 0;  // streams never flagged at all
  std::size_t early = 0;   // flagged before the labeled onset, clamped to 0
};

// One entry per stream with a known onset: (onset episode, first flagged
// episode if any).
LatencySummary detection_latency(
    std::span<const std::pair<std::int64_t, std::optional<std::int64_t>>> streams);

// 100 * detect / (gen + detect).
double overhead_pct(double generation_seconds, double detection_seconds);

// Agreement between two categorical labelings.
double cohens_kappa(std::span<const int> a, std::span<const int> b);
double cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

// (mean_a - mean_b) / pooled sd with n - 1 denominators; 0 when the pooled
// sd is 0.
double cohens_d(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// Welch's unequal-variance t-test with Welch-Satterthwaite df. Groups need
// at least two values each. Two zero-variance groups give p = 1 when their
// means match and p = 0 otherwise.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

double brier(std::span<const double> probabilities, const std::vector<bool>& labels);

struct DetectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc_roc = 0.0;
  double detection_latency_episodes = 0.0;
  double overhead_pct = 0.0;
  double brier = 0.0;
};

// Precision/recall/F1 from flags, AUC and Brier from risks. Latency and
// overhead are left at 0 for the caller to fill.
DetectionMetrics metrics_from_assessments(std::span<const RiskAssessment> assessments,
                                          const std::vector<bool>& labels);

// ---------------------------------------------------------------------------
// Factorial design

struct DesignCell {
  bool dense = false;           // density: sparse (lo) / dense (hi)
  bool high_alignment = false;  // alignment: low (lo) / high (hi)
  bool complex = false;         // complexity: simple (lo) / complex (hi)
  friend bool operator==(const DesignCell&, const DesignCell&) = default;
};

struct FactorialRun {
  DesignCell cell;
  double hacking_frequency = 0.0;
};

struct EffectEstimate {
  std::string factor;  // density, alignment, complexity, density:alignment, ...
  double effect = 0.0;
  double cohens_d = 0.0;
  double p_value = 1.0;
};

// Three main effects then the three two-way interactions. Each uses +/-1
// contrast coding: effect = mean(contrast +1) - mean(contrast -1). Raises
// kMissingCell if any of the eight cells is empty.
std::vector<EffectEstimate> factorial_effects(std::span<const FactorialRun> runs);

// ---------------------------------------------------------------------------
// Ablation

struct AblationRow {
  std::string configuration;  // "full" or "without_<category>"
  std::optional<HackingCategory> removed;
  DetectionMetrics metrics;
  double delta_f1 = 0.0;  // metrics.f1 - full f1
};

// Re-assesses stored signals under the full model and with each detector's
// weight zeroed in turn. Seven rows.
std::vector<AblationRow> ablation(const ensemble::EnsembleModel& model,
                                  std::span<const SignalSet> signals,
                                  const std::vector<bool>& labels);

// ---------------------------------------------------------------------------
// Naive ratio baseline

struct RatioBaseline {
  double clean_median_ratio = 1.0;
};

// Median of episode proxy-sum / true-sum over clean episodes (true sums are
// clamped to 1e-8).
RatioBaseline fit_ratio_baseline(const std::vector<Episode>& clean);
double episode_ratio(const Episode& e);
// Flags iff the episode ratio exceeds threshold * clean median.
bool naive_ratio_flag(const RatioBaseline& baseline, const Episode& e, double threshold);

}  // namespace rhd::eval

#endif  // RHD_EVAL_H_
