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

#include "rhd/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "rhd/error.h"
#include "rhd/stats.h"

namespace rhd::eval {

Prf prf(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
  require(predictions.size() == labels.size(), ErrorCode::kInvalidInput,
          "prf: predictions and labels differ in length");
  require(!labels.empty(), ErrorCode::kInvalidInput, "prf: empty input");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] && labels[i]) ++tp;
    if (predictions[i] && !labels[i]) ++fp;
    if (!predictions[i] && labels[i]) ++fn;
  }
  Prf out;
  out.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  out.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  const double s = out.precision + out.recall;
  out.f1 = s > 0 ? 2.0 * out.precision * out.recall / s : 0.0;
  return out;
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
  require(scores.size() == labels.size(), ErrorCode::kInvalidInput,
          "roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        pos_rank_sum += midrank;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  require(n_pos > 0 && n_neg > 0, ErrorCode::kUndefined, "roc_auc: single class");
  return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                const std::vector<bool>& labels) {
  require(scores.size() == labels.size(), ErrorCode::kInvalidInput,
          "roc_curve: scores and labels differ in length");
  const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  require(n_pos > 0 && n_neg > 0, ErrorCode::kUndefined, "roc_curve: single class");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> out;
  out.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double thr = scores[order[i]];
    while (i < order.size() && scores[order[i]] == thr) {
      if (labels[order[i]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    out.push_back({fp / n_neg, tp / n_pos, thr});
  }
  return out;
}

LatencySummary detection_latency(
    std::span<const std::pair<std::int64_t, std::optional<std::int64_t>>> streams) {
  LatencySummary out;
  std::vector<double> lags;
  for (const auto& [onset, first] : streams) {
    if (!first) {
      ++out.missed;
      continue;
    }
    double lag = static_cast<double>(*first - onset);
    if (lag < 0) {
      ++out.early;
      lag = 0;
    }
    lags.push_back(lag);
  }
  out.detected = lags.size();
  if (!lags.empty()) {
    out.mean = stats::mean(lags);
    out.median = stats::median(lags);
  }
  return out;
}

double overhead_pct(double generation_seconds, double detection_seconds) {
  const double total = generation_seconds + detection_seconds;
  return total > 0 ? 100.0 * detection_seconds / total : 0.0;
}

double cohens_kappa(std::span<const int> a, std::span<const int> b) {
  require(a.size() == b.size() && !a.empty(), ErrorCode::kInvalidInput,
          "cohens_kappa: labelings must be non-empty and equally long");
  std::map<int, double> ca, cb;
  double agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    if (a[i] == b[i]) agree += 1;
  }
  const double n = static_cast<double>(a.size());
  const double po = agree / n;
  double pe = 0;
  for (const auto& [k, v] : ca) {
    auto it = cb.find(k);
    if (it != cb.end()) pe += (v / n) * (it->second / n);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

double cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  std::vector<int> ia(a.begin(), a.end()), ib(b.begin(), b.end());
  return cohens_kappa(std::span<const int>(ia), std::span<const int>(ib));
}

namespace {

struct GroupStats {
  double n, mean, var;  // var with n - 1 denominator
};

GroupStats group_stats(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double m = stats::mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return {n, m, n > 1 ? ss / (n - 1) : 0.0};
}

}  // namespace

double cohens_d(std::span<const double> a, std::span<const double> b) {
  require(a.size() >= 2 && b.size() >= 2, ErrorCode::kInvalidInput,
          "cohens_d: each group needs >= 2 values");
  const GroupStats ga = group_stats(a), gb = group_stats(b);
  const double pooled =
      std::sqrt(((ga.n - 1) * ga.var + (gb.n - 1) * gb.var) / (ga.n + gb.n - 2));
  return pooled > 0 ? (ga.mean - gb.mean) / pooled : 0.0;
}

double incomplete_beta(double a, double b, double x) {
  require(a > 0 && b > 0, ErrorCode::kInvalidInput, "incomplete_beta: a, b must be > 0");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  // Use the symmetry relation where the continued fraction converges fast.
  if (x > (a + 1) / (a + b + 2)) return 1.0 - incomplete_beta(b, a, 1.0 - x);
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
      b * std::log1p(-x);
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1);
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= 500; ++m) {
    const double dm = static_cast<double>(m);
    double num = dm * (b - dm) * x / ((a + 2 * dm - 1) * (a + 2 * dm));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    f *= d * c;
    num = -(a + dm) * (a + b + dm) * x / ((a + 2 * dm) * (a + 2 * dm + 1));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_front) * f / a;
}

double student_t_two_sided_p(double t, double df) {
  require(df > 0, ErrorCode::kInvalidInput, "student_t: df must be > 0");
  if (!std::isfinite(t)) return 0.0;
  return std::clamp(incomplete_beta(0.5 * df, 0.5, df / (df + t * t)), 0.0, 1.0);
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  require(a.size() >= 2 && b.size() >= 2, ErrorCode::kInvalidInput,
          "welch_t: each group needs >= 2 values");
  const GroupStats ga = group_stats(a), gb = group_stats(b);
  const double va = ga.var / ga.n, vb = gb.var / gb.n;
  WelchResult out;
  const double se2 = va + vb;
  if (se2 <= 0) {
    out.t = ga.mean == gb.mean ? 0.0
                               : std::copysign(std::numeric_limits<double>::infinity(),
                                               ga.mean - gb.mean);
    out.df = ga.n + gb.n - 2;
    out.p_value = ga.mean == gb.mean ? 1.0 : 0.0;
    return out;
  }
  out.t = (ga.mean - gb.mean) / std::sqrt(se2);
  out.df = se2 * se2 / (va * va / (ga.n - 1) + vb * vb / (gb.n - 1));
  out.p_value = student_t_two_sided_p(out.t, out.df);
  return out;
}

double brier(std::span<const double> probabilities, const std::vector<bool>& labels) {
  require(probabilities.size() == labels.size() && !labels.empty(),
          ErrorCode::kInvalidInput, "brier: inputs must be non-empty and equally long");
  double s = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double d = probabilities[i] - (labels[i] ? 1.0 : 0.0);
    s += d * d;
  }
  return s / static_cast<double>(labels.size());
}

DetectionMetrics metrics_from_assessments(std::span<const RiskAssessment> assessments,
                                          const std::vector<bool>& labels) {
  require(assessments.size() == labels.size(), ErrorCode::kInvalidInput,
          "metrics: assessments and labels differ in length");
  std::vector<bool> flags;
  std::vector<double> risks;
  for (const RiskAssessment& a : assessments) {
    flags.push_back(a.flagged);
    risks.push_back(a.risk);
  }
  DetectionMetrics m;
  const Prf p = prf(flags, labels);
  m.precision = p.precision;
  m.recall = p.recall;
  m.f1 = p.f1;
  const auto pos = std::count(labels.begin(), labels.end(), true);
  m.auc_roc = (pos > 0 && pos < static_cast<std::ptrdiff_t>(labels.size()))
                  ? roc_auc(risks, labels)
                  : 0.5;
  m.brier = brier(risks, labels);
  return m;
}

std::vector<EffectEstimate> factorial_effects(std::span<const FactorialRun> runs) {
  std::array<int, 8> cell_counts{};
  for (const FactorialRun& r : runs) {
    ++cell_counts[(r.cell.dense ? 1 : 0) | (r.cell.high_alignment ? 2 : 0) |
                  (r.cell.complex ? 4 : 0)];
  }
  for (int c : cell_counts) {
    require(c > 0, ErrorCode::kMissingCell, "factorial_effects: a design cell has no runs");
  }
  struct Contrast {
    const char* name;
    int (*fn)(const DesignCell&);
  };
  const Contrast contrasts[] = {
      {"density", [](const DesignCell& c) { return c.dense ? 1 : -1; }},
      {"alignment", [](const DesignCell& c) { return c.high_alignment ? 1 : -1; }},
      {"complexity", [](const DesignCell& c) { return c.complex ? 1 : -1; }},
      {"density:alignment",
       [](const DesignCell& c) { return (c.dense ? 1 : -1) * (c.high_alignment ? 1 : -1); }},
      {"density:complexity",
       [](const DesignCell& c) { return (c.dense ? 1 : -1) * (c.complex ? 1 : -1); }},
      {"alignment:complexity",
       [](const DesignCell& c) { return (c.high_alignment ? 1 : -1) * (c.complex ? 1 : -1); }},
  };
  std::vector<EffectEstimate> out;
  for (const Contrast& c : contrasts) {
    std::vector<double> hi, lo;
    for (const FactorialRun& r : runs) {
      (c.fn(r.cell) > 0 ? hi : lo).push_back(r.hacking_frequency);
    }
    EffectEstimate e;
    e.factor = c.name;
    e.effect = stats::mean(hi) - stats::mean(lo);
    if (hi.size() >= 2 && lo.size() >= 2) {
      e.cohens_d = cohens_d(hi, lo);
      e.p_value = welch_t(hi, lo).p_value;
    }
    out.push_back(e);
  }
  return out;
}

std::vector<AblationRow> ablation(const ensemble::EnsembleModel& model,
                                  std::span<const SignalSet> signals,
                                  const std::vector<bool>& labels) {
  auto evaluate = [&](const ensemble::EnsembleModel& m) {
    std::vector<RiskAssessment> as;
    as.reserve(signals.size());
    for (const SignalSet& s : signals) as.push_back(ensemble::assess(m, s));
    return metrics_from_assessments(as, labels);
  };
  std::vector<AblationRow> rows;
  AblationRow full;
  full.configuration = "full";
  full.metrics = evaluate(model);
  rows.push_back(full);
  for (HackingCategory c : kAllCategories) {
    AblationRow row;
    row.configuration = "without_" + std::string(to_string(c));
    row.removed = c;
    row.metrics = evaluate(ensemble::without_detector(model, c));
    row.delta_f1 = row.metrics.f1 - full.metrics.f1;
    rows.push_back(row);
  }
  return rows;
}

double episode_ratio(const Episode& e) {
  return e.proxy_return() / std::max(1e-8, e.true_return());
}

RatioBaseline fit_ratio_baseline(const std::vector<Episode>& clean) {
  require(!clean.empty(), ErrorCode::kFitError, "ratio baseline: no clean episodes");
  std::vector<double> ratios;
  for (const Episode& e : clean) ratios.push_back(episode_ratio(e));
  return {stats::median(ratios)};
}

bool naive_ratio_flag(const RatioBaseline& baseline, const Episode& e, double threshold) {
  return episode_ratio(e) > threshold * baseline.clean_median_ratio;
}

}  // namespace rhd::eval
