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

#include "rhd/detectors.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "rhd/checksum.h"
#include "rhd/error.h"
#include "rhd/incremental.h"

namespace rhd::detect {
namespace {

std::vector<double> proxy_series(const Episode& e) {
  std::vector<double> out;
  out.reserve(e.steps.size());
  for (const Step& s : e.steps) out.push_back(s.proxy_reward);
  return out;
}

std::vector<double> true_series(const Episode& e) {
  std::vector<double> out;
  out.reserve(e.steps.size());
  for (const Step& s : e.steps) out.push_back(s.true_reward);
  return out;
}

DetectorSignal make_signal(HackingCategory c, double raw, double threshold,
                           const ScoreRange& range) {
  DetectorSignal s;
  s.category = c;
  s.raw_score = raw;
  s.threshold_used = threshold;
  s.flagged = raw > threshold;
  s.calibrated_confidence = range.normalize(raw);
  return s;
}

DetectorSignal abstain(HackingCategory c, double threshold, std::uint32_t warnings) {
  DetectorSignal s;
  s.category = c;
  s.threshold_used = threshold;
  s.abstained = true;
  s.warnings = warnings | kWarnAbstained;
  return s;
}

// Widens a degenerate [lo, hi] so histograms stay defined.
void ensure_range(double& lo, double& hi) {
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) {
    const double pad = std::max(1e-9, std::abs(lo) * 1e-6);
    lo -= pad;
    hi += pad;
  }
}

double scale_divergence(const RatioScale& scale, std::size_t bins, double prior_windows,
                        std::span<const double> ratios, double independent_windows) {
  std::vector<double> p = stats::histogram(ratios, bins, scale.lo, scale.hi);
  const double n = std::max(1.0, independent_windows);
  for (std::size_t k = 0; k < bins; ++k) {
    p[k] = (n * p[k] + prior_windows * scale.baseline_hist[k]) / (n + prior_windows);
  }
  return stats::kl_divergence(p, scale.baseline_hist);
}

std::vector<double> reference_scores(const std::vector<Episode>& reference,
                                     const std::function<double(const Episode&)>& f) {
  std::vector<double> out;
  out.reserve(reference.size());
  for (const Episode& e : reference) out.push_back(f(e));
  return out;
}

}  // namespace

double ScoreRange::normalize(double raw) const {
  if (hi > lo) return std::clamp((raw - lo) / (hi - lo), 0.0, 1.0);
  return raw > hi ? 1.0 : 0.0;
}

ScoreRange ScoreRange::of(std::span<const double> raw_scores) {
  ScoreRange r;
  if (raw_scores.empty()) return r;
  const auto [mn, mx] = std::minmax_element(raw_scores.begin(), raw_scores.end());
  r.lo = *mn;
  r.hi = *mx;
  return r;
}

// ---------------------------------------------------------------------------
// Specification gaming

std::size_t adaptive_window(std::size_t length) {
  return std::max<std::size_t>(10, length / 10);
}

std::vector<double> windowed_ratios(const Episode& e, std::size_t window,
                                    std::size_t stride, bool* degenerate) {
  const std::size_t n = e.steps.size();
  std::vector<double> out;
  if (n == 0) return out;
  std::vector<double> cp(n + 1, 0.0), ct(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cp[i + 1] = cp[i] + e.steps[i].proxy_reward;
    ct[i + 1] = ct[i] + e.steps[i].true_reward;
  }
  auto ratio = [&](std::size_t b, std::size_t end) {
    const double t = ct[end] - ct[b];
    if (t < kRatioEpsilon && degenerate != nullptr) *degenerate = true;
    return (cp[end] - cp[b]) / std::max(kRatioEpsilon, t);
  };
  if (n < window) {
    out.push_back(ratio(0, n));
    return out;
  }
  stride = std::max<std::size_t>(1, stride);
  out.reserve((n - window) / stride + 1);
  for (std::size_t b = 0; b + window <= n; b += stride) out.push_back(ratio(b, b + window));
  return out;
}

namespace {

double transition_score(const SpecGamingModel& model, const Episode& e) {
  if (e.steps.size() < 2) return 0.0;
  const double c = std::abs(stats::pearson(proxy_series(e), true_series(e)));
  return std::max(0.0, model.baseline_step_corr - c);
}

}  // namespace

std::array<double, 3> spec_gaming_scale_scores(const SpecGamingModel& model,
                                               const Episode& e,
                                               std::uint32_t* warnings) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  const std::size_t n = e.steps.size();
  if (n == 0) return out;
  bool degenerate = false;

  if (model.episode_scale.enabled) {
    const std::size_t w = adaptive_window(n);
    const auto ratios = windowed_ratios(e, w, model.episode_scale.stride, &degenerate);
    out[0] = scale_divergence(model.episode_scale, model.bins, model.prior_windows, ratios,
                              static_cast<double>(n / w));
  }
  if (model.segment_scale.enabled && n >= model.segment_scale.window) {
    const std::size_t w = model.segment_scale.window;
    const auto ratios = windowed_ratios(e, w, model.segment_scale.stride, &degenerate);
    out[1] = scale_divergence(model.segment_scale, model.bins, model.prior_windows, ratios,
                              static_cast<double>(n / w));
  }
  out[2] = transition_score(model, e);
  if (warnings != nullptr) {
    if (degenerate) *warnings |= kWarnDegenerateRatio;
    if (n < 10) *warnings |= kWarnShortEpisode;
  }
  return out;
}

SpecGamingModel spec_gaming_fit(const std::vector<Episode>& reference, double tau_spec) {
  require(reference.size() >= kMinSpecReferences, ErrorCode::kFitError,
          "specification_gaming: need >= 5 reference episodes");
  require(tau_spec > 0.0, ErrorCode::kInvalidInput, "tau_spec must be > 0");
  SpecGamingModel model;
  model.tau_spec = tau_spec;
  model.episode_scale.window = 0;
  model.episode_scale.stride = 1;
  model.segment_scale.window = 50;
  model.segment_scale.stride = 25;

  std::vector<double> episode_ratios, segment_ratios, step_corr;
  bool any_true_mass = false;
  for (const Episode& e : reference) {
    if (e.steps.empty()) continue;
    for (const Step& s : e.steps) {
      if (s.true_reward != 0.0) any_true_mass = true;
    }
    const auto r = windowed_ratios(e, adaptive_window(e.steps.size()), 1);
    episode_ratios.insert(episode_ratios.end(), r.begin(), r.end());
    if (e.steps.size() >= model.segment_scale.window) {
      const auto rs = windowed_ratios(e, model.segment_scale.window,
                                      model.segment_scale.stride);
      segment_ratios.insert(segment_ratios.end(), rs.begin(), rs.end());
    }
    if (e.steps.size() >= 2) {
      step_corr.push_back(std::abs(stats::pearson(proxy_series(e), true_series(e))));
    }
  }
  require(any_true_mass, ErrorCode::kFitError,
          "specification_gaming: all reference true rewards are zero");

  auto fit_scale = [&](RatioScale& scale, std::vector<double>& ratios) {
    if (ratios.empty()) {
      scale.enabled = false;
      scale.baseline_hist.assign(model.bins, 1.0 / static_cast<double>(model.bins));
      return;
    }
    std::sort(ratios.begin(), ratios.end());
    scale.lo = stats::quantile_sorted(ratios, 0.01);
    scale.hi = stats::quantile_sorted(ratios, 0.99);
    ensure_range(scale.lo, scale.hi);
    scale.baseline_hist =
        stats::smooth_histogram(stats::histogram(ratios, model.bins, scale.lo, scale.hi));
  };
  model.rho_baseline = stats::median(episode_ratios);
  fit_scale(model.episode_scale, episode_ratios);
  fit_scale(model.segment_scale, segment_ratios);
  model.baseline_step_corr = step_corr.empty() ? 0.0 : stats::median(step_corr);

  const auto scores = reference_scores(reference, [&](const Episode& e) {
    const auto s = spec_gaming_scale_scores(model, e);
    return *std::max_element(s.begin(), s.end());
  });
  model.range = ScoreRange::of(scores);
  return model;
}

DetectorSignal spec_gaming_score(const SpecGamingModel& model, const Episode& e) {
  std::uint32_t warnings = kWarnNone;
  const auto s = spec_gaming_scale_scores(model, e, &warnings);
  DetectorSignal sig = make_signal(HackingCategory::kSpecificationGaming,
                                   *std::max_element(s.begin(), s.end()), model.tau_spec,
                                   model.range);
  sig.warnings = warnings;
  return sig;
}

// ---------------------------------------------------------------------------
// Reward tampering

TamperingFeatures tampering_features(const Episode& e) {
  TamperingFeatures f{};
  const std::vector<double> r = proxy_series(e);
  if (r.empty()) return f;
  const auto m = stats::moments(r);
  f[0] = m.mean;
  f[1] = m.variance;
  f[2] = m.skewness;
  f[3] = m.kurtosis;
  if (r.size() >= 2) {
    f[4] = stats::autocorrelation(r, 1);
    f[5] = stats::linear_trend(r);
    std::vector<double> d(r.size() - 1), abs_d(r.size() - 1);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      d[i] = r[i + 1] - r[i];
      abs_d[i] = std::abs(d[i]);
    }
    f[6] = *std::max_element(abs_d.begin(), abs_d.end());
    const double sd = std::sqrt(stats::moments(d).variance);
    if (sd > 0.0) {
      f[7] = static_cast<double>(
          std::count_if(abs_d.begin(), abs_d.end(), [&](double v) { return v > 3.0 * sd; }));
    }
    f[9] = stats::median(abs_d);
  }
  if (r.size() >= 3) f[8] = stats::autocorrelation(r, 2);
  return f;
}

namespace {

std::vector<double> standardize(const TamperingModel& model, const TamperingFeatures& f) {
  std::vector<double> z(kTamperingFeatureDim);
  for (std::size_t k = 0; k < kTamperingFeatureDim; ++k) {
    const double centered = f[k] - model.feature_means[k];
    z[k] = model.feature_scales[k] > 0.0 ? centered / model.feature_scales[k] : centered;
  }
  return z;
}

}  // namespace

TamperingModel tampering_fit(const std::vector<Episode>& reference,
                             const TamperingParams& params) {
  require(reference.size() >= kMinTamperingReferences, ErrorCode::kFitError,
          "reward_tampering: need >= 20 reference episodes");
  TamperingModel model;
  std::vector<TamperingFeatures> feats;
  feats.reserve(reference.size());
  for (const Episode& e : reference) feats.push_back(tampering_features(e));

  const double n = static_cast<double>(feats.size());
  bool all_zero_scale = true;
  for (std::size_t k = 0; k < kTamperingFeatureDim; ++k) {
    double mu = 0.0;
    for (const auto& f : feats) mu += f[k];
    mu /= n;
    double var = 0.0;
    for (const auto& f : feats) var += (f[k] - mu) * (f[k] - mu);
    model.feature_means[k] = mu;
    model.feature_scales[k] = std::sqrt(var / n);
    if (model.feature_scales[k] > 0.0) all_zero_scale = false;
  }
  model.degenerate = all_zero_scale;

  std::vector<std::vector<double>> z;
  z.reserve(feats.size());
  for (const auto& f : feats) z.push_back(standardize(model, f));
  stats::IsolationForestParams fp;
  fp.n_trees = params.n_trees;
  fp.subsample = std::min(params.subsample, z.size());
  fp.contamination = params.contamination;
  fp.seed = params.seed;
  model.forest = stats::isolation_forest_fit(z, fp);

  std::vector<double> scores;
  scores.reserve(z.size());
  for (const auto& v : z) scores.push_back(stats::isolation_forest_score(model.forest, v));
  model.range = ScoreRange::of(scores);
  return model;
}

DetectorSignal tampering_score(const TamperingModel& model, const Episode& e,
                               std::optional<double> threshold) {
  const auto z = standardize(model, tampering_features(e));
  const double raw = stats::isolation_forest_score(model.forest, z);
  DetectorSignal sig = make_signal(HackingCategory::kRewardTampering, raw,
                                   threshold.value_or(model.threshold()), model.range);
  if (model.degenerate) sig.warnings |= kWarnDegenerateFit;
  if (e.steps.size() < 2) sig.warnings |= kWarnShortEpisode;
  return sig;
}

// ---------------------------------------------------------------------------
// Proxy optimization

double windowed_correlation(const Episode& e, std::size_t window, std::size_t stride,
                            std::size_t* degenerate_windows) {
  const std::size_t n = e.steps.size();
  std::size_t degenerate = 0;
  double result = 0.0;
  if (n < 2) {
    degenerate = 1;
  } else if (n < window) {
    stats::RollingCorrelation rc;
    for (const Step& s : e.steps) rc.add(s.proxy_reward, s.true_reward);
    if (rc.degenerate()) ++degenerate;
    result = rc.correlation();
  } else {
    stride = std::max<std::size_t>(1, stride);
    stats::RollingCorrelation rc;
    for (std::size_t i = 0; i < window; ++i) {
      rc.add(e.steps[i].proxy_reward, e.steps[i].true_reward);
    }
    double sum = 0.0;
    std::size_t count = 0;
    std::size_t begin = 0;
    while (true) {
      if (rc.degenerate()) ++degenerate;
      sum += rc.correlation();
      ++count;
      const std::size_t next = begin + stride;
      if (next + window > n) break;
      if (stride >= window) {
        rc.clear();
        for (std::size_t i = next; i < next + window; ++i) {
          rc.add(e.steps[i].proxy_reward, e.steps[i].true_reward);
        }
      } else {
        for (std::size_t i = begin; i < next; ++i) {
          rc.remove(e.steps[i].proxy_reward, e.steps[i].true_reward);
        }
        for (std::size_t i = begin + window; i < next + window; ++i) {
          rc.add(e.steps[i].proxy_reward, e.steps[i].true_reward);
        }
      }
      begin = next;
    }
    result = sum / static_cast<double>(count);
  }
  if (degenerate_windows != nullptr) *degenerate_windows = degenerate;
  return result;
}

namespace {

double proxy_raw(const ProxyOptModel& model, const Episode& e, std::size_t* degenerate) {
  const double idx = std::clamp(static_cast<double>(e.episode_index), model.fit_index_lo,
                                model.fit_index_hi);
  const double expected = std::clamp(model.expected_corr.predict(idx), -1.0, 1.0);
  return expected - windowed_correlation(e, model.window, model.stride, degenerate);
}

}  // namespace

ProxyOptModel proxy_opt_fit(const std::vector<Episode>& reference, double delta_threshold,
                            double initial_fraction) {
  require(reference.size() >= kMinProxyReferences, ErrorCode::kFitError,
          "proxy_optimization: need >= 10 reference episodes");
  require(delta_threshold > 0.0 && delta_threshold <= 2.0, ErrorCode::kInvalidInput,
          "delta_threshold must be in (0, 2]");
  ProxyOptModel model;
  model.delta_threshold = delta_threshold;

  std::vector<const Episode*> ordered;
  for (const Episode& e : reference) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(), [](const Episode* a, const Episode* b) {
    return a->episode_index < b->episode_index;
  });
  const auto take = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(initial_fraction * static_cast<double>(ordered.size()))),
      2, ordered.size());
  std::vector<double> x, y;
  for (std::size_t i = 0; i < take; ++i) {
    x.push_back(static_cast<double>(ordered[i]->episode_index));
    y.push_back(windowed_correlation(*ordered[i], model.window, model.stride));
  }
  model.fit_index_lo = x.front();
  model.fit_index_hi = x.back();
  if (x.front() == x.back()) {
    model.expected_corr = {0.0, stats::median(y)};
  } else {
    model.expected_corr = stats::theil_sen(x, y);
  }

  const auto scores =
      reference_scores(reference, [&](const Episode& e) { return proxy_raw(model, e, nullptr); });
  model.range = ScoreRange::of(scores);
  return model;
}

DetectorSignal proxy_opt_score(const ProxyOptModel& model, const Episode& e,
                               std::optional<double> threshold) {
  std::size_t degenerate = 0;
  const double raw = proxy_raw(model, e, &degenerate);
  DetectorSignal sig = make_signal(HackingCategory::kProxyOptimization, raw,
                                   threshold.value_or(model.delta_threshold), model.range);
  if (degenerate > 0) sig.warnings |= kWarnZeroVarianceWindow;
  return sig;
}

// ---------------------------------------------------------------------------
// Objective misalignment

std::uint64_t ActionQuantizer::symbol(const ActionValue& a) const {
  if (const auto* sym = std::get_if<std::int64_t>(&a)) {
    return static_cast<std::uint64_t>(*sym);
  }
  const auto& v = std::get<std::vector<double>>(a);
  std::uint64_t id = 0;
  std::uint64_t place = 1;
  for (std::size_t d = 0; d < v.size(); ++d) {
    const double lo_d = d < lo.size() ? lo[d] : 0.0;
    const double hi_d = d < hi.size() ? hi[d] : 1.0;
    const double pos = (v[d] - lo_d) / (hi_d - lo_d) * static_cast<double>(bins_per_dim);
    const auto b = static_cast<std::uint64_t>(
        std::clamp(std::floor(pos), 0.0, static_cast<double>(bins_per_dim - 1)));
    id += b * place;
    place *= bins_per_dim;
  }
  return id;
}

std::uint64_t TrigramModel::key3(std::uint32_t a2, std::uint32_t a1, std::uint32_t a) {
  return (static_cast<std::uint64_t>(a2) << 42) | (static_cast<std::uint64_t>(a1) << 21) | a;
}

std::uint64_t TrigramModel::key2(std::uint32_t a1, std::uint32_t a) {
  return (static_cast<std::uint64_t>(a1) << 21) | a;
}

std::uint32_t TrigramModel::count(const CountMap& m, std::uint64_t k) const {
  auto it = m.find(k);
  return it == m.end() ? 0u : it->second;
}

void TrigramModel::add_sequence(std::span<const std::uint32_t> seq, int sign) {
  auto bump = [sign](CountMap& m, std::uint64_t k) {
    if (sign > 0) {
      ++m[k];
    } else {
      auto it = m.find(k);
      if (it != m.end() && --it->second == 0) m.erase(it);
    }
  };
  for (std::size_t i = 1; i < seq.size(); ++i) {
    bump(bi_, key2(seq[i - 1], seq[i]));
    bump(bi_ctx_, seq[i - 1]);
  }
  for (std::size_t i = 2; i < seq.size(); ++i) {
    bump(tri_, key3(seq[i - 2], seq[i - 1], seq[i]));
    bump(tri_ctx_, key2(seq[i - 2], seq[i - 1]));
  }
}

TrigramModel TrigramModel::from_counts(std::size_t vocab_size, CountMap trigrams,
                                       CountMap bigrams) {
  TrigramModel m(vocab_size);
  m.tri_ = std::move(trigrams);
  m.bi_ = std::move(bigrams);
  for (const auto& [k, c] : m.tri_) m.tri_ctx_[k >> 21] += c;
  for (const auto& [k, c] : m.bi_) m.bi_ctx_[k >> 21] += c;
  return m;
}

double TrigramModel::trigram_probability(std::uint32_t a2, std::uint32_t a1,
                                         std::uint32_t a) const {
  const double num = static_cast<double>(count(tri_, key3(a2, a1, a))) + 1.0;
  const double den = static_cast<double>(count(tri_ctx_, key2(a2, a1))) +
                     static_cast<double>(vocab_size_);
  return num / den;
}

double TrigramModel::bigram_probability(std::uint32_t a1, std::uint32_t a) const {
  const double num = static_cast<double>(count(bi_, key2(a1, a))) + 1.0;
  const double den =
      static_cast<double>(count(bi_ctx_, a1)) + static_cast<double>(vocab_size_);
  return num / den;
}

std::optional<double> TrigramModel::perplexity(std::span<const std::uint32_t> seq) const {
  if (seq.size() < 2) return std::nullopt;
  double log_sum = 0.0;
  std::size_t terms = 0;
  if (seq.size() == 2) {
    log_sum = std::log2(bigram_probability(seq[0], seq[1]));
    terms = 1;
  } else {
    for (std::size_t i = 2; i < seq.size(); ++i) {
      log_sum += std::log2(trigram_probability(seq[i - 2], seq[i - 1], seq[i]));
      ++terms;
    }
  }
  return std::exp2(-log_sum / static_cast<double>(terms));
}

std::vector<std::uint32_t> MisalignmentModel::encode(const Episode& e) const {
  std::vector<std::uint32_t> out;
  out.reserve(e.steps.size());
  for (const Step& s : e.steps) {
    auto it = vocab.find(quantizer.symbol(s.action));
    out.push_back(it == vocab.end() ? unk() : it->second);
  }
  return out;
}

double action_roughness(const Episode& e) {
  if (e.action_space.is_discrete() || e.steps.size() < 3) return 0.0;
  double sum = 0.0;
  std::size_t terms = 0;
  for (std::size_t i = 2; i < e.steps.size(); ++i) {
    const auto* a0 = std::get_if<std::vector<double>>(&e.steps[i - 2].action);
    const auto* a1 = std::get_if<std::vector<double>>(&e.steps[i - 1].action);
    const auto* a2 = std::get_if<std::vector<double>>(&e.steps[i].action);
    if (!a0 || !a1 || !a2) continue;
    for (std::size_t d = 0; d < a2->size() && d < a1->size() && d < a0->size(); ++d) {
      const double dd = (*a2)[d] - 2.0 * (*a1)[d] + (*a0)[d];
      sum += dd * dd;
    }
    ++terms;
  }
  return terms > 0 ? sum / static_cast<double>(terms) : 0.0;
}

MisalignmentModel misalignment_fit(const std::vector<Episode>& reference,
                                   double sigma_multiplier) {
  std::vector<const Episode*> usable;
  for (const Episode& e : reference) {
    if (e.steps.size() >= 3) usable.push_back(&e);
  }
  require(usable.size() >= kMinMisalignmentReferences, ErrorCode::kFitError,
          "objective_misalignment: need >= 10 reference episodes with >= 3 steps");

  MisalignmentModel model;
  const ActionSpace space = usable.front()->action_space;
  for (const Episode* e : usable) {
    require(e->action_space == space, ErrorCode::kFitError,
            "objective_misalignment: reference episodes mix action spaces");
  }
  model.space = space;
  if (!space.is_discrete()) {
    model.quantizer.continuous = true;
    model.quantizer.lo.assign(space.size, std::numeric_limits<double>::infinity());
    model.quantizer.hi.assign(space.size, -std::numeric_limits<double>::infinity());
    for (const Episode* e : usable) {
      for (const Step& s : e->steps) {
        const auto* v = std::get_if<std::vector<double>>(&s.action);
        if (v == nullptr) continue;
        for (std::size_t d = 0; d < v->size() && d < space.size; ++d) {
          model.quantizer.lo[d] = std::min(model.quantizer.lo[d], (*v)[d]);
          model.quantizer.hi[d] = std::max(model.quantizer.hi[d], (*v)[d]);
        }
      }
    }
    for (std::size_t d = 0; d < space.size; ++d) {
      if (!(model.quantizer.hi[d] > model.quantizer.lo[d])) {
        model.quantizer.hi[d] = model.quantizer.lo[d] + 1.0;
      }
    }
  }

  std::set<std::uint64_t> symbols;
  for (const Episode* e : usable) {
    for (const Step& s : e->steps) symbols.insert(model.quantizer.symbol(s.action));
  }
  std::uint32_t next = 0;
  for (std::uint64_t sym : symbols) model.vocab[sym] = next++;
  model.ngram.set_vocab_size(model.vocab.size() + 1);

  std::vector<std::vector<std::uint32_t>> encoded;
  encoded.reserve(usable.size());
  for (const Episode* e : usable) {
    encoded.push_back(model.encode(*e));
    model.ngram.add_sequence(encoded.back());
  }

  // Leave-one-episode-out perplexities keep mu/sigma honest for episodes the
  // model has not seen.
  std::vector<double> ppl;
  ppl.reserve(encoded.size());
  for (const auto& seq : encoded) {
    model.ngram.add_sequence(seq, -1);
    ppl.push_back(*model.ngram.perplexity(seq));
    model.ngram.add_sequence(seq, +1);
  }
  const auto m = stats::moments(ppl);
  model.mu_ppl = m.mean;
  model.sigma_ppl = std::sqrt(m.variance);
  model.set_multiplier(sigma_multiplier);
  model.range = ScoreRange::of(ppl);
  return model;
}

DetectorSignal misalignment_score(const MisalignmentModel& model, const Episode& e,
                                  std::optional<double> threshold) {
  const double thr = threshold.value_or(model.threshold);
  if (e.action_space != model.space) {
    return abstain(HackingCategory::kObjectiveMisalignment, thr, kWarnNone);
  }
  const auto seq = model.encode(e);
  const auto ppl = model.ngram.perplexity(seq);
  if (!ppl) {
    return abstain(HackingCategory::kObjectiveMisalignment, thr, kWarnShortEpisode);
  }
  DetectorSignal sig =
      make_signal(HackingCategory::kObjectiveMisalignment, *ppl, thr, model.range);
  if (seq.size() < 3) sig.warnings |= kWarnShortEpisode;
  sig.secondary_score = action_roughness(e);
  return sig;
}

// ---------------------------------------------------------------------------
// Exploitation pattern

double exploit_exceedance(const stats::RobustBounds& b, double r) {
  const double mad_scale = std::max(3.0 * b.mad, 1e-12 * std::max(1.0, std::abs(b.median)));
  double score = std::abs(r - b.median) / mad_scale;
  if (b.iqr > 0.0) {
    score = std::max(score, (r - b.q3) / (3.0 * b.iqr));
    score = std::max(score, (b.q1 - r) / (3.0 * b.iqr));
  }
  return score;
}

ExploitModel exploit_fit(const std::vector<Episode>& reference) {
  require(reference.size() >= kMinExploitReferences, ErrorCode::kFitError,
          "exploitation_pattern: need >= 10 reference episodes");
  std::vector<double> returns;
  returns.reserve(reference.size());
  for (const Episode& e : reference) returns.push_back(e.proxy_return());
  ExploitModel model;
  model.bounds = stats::robust_bounds(returns);
  std::vector<double> scores;
  for (double r : returns) scores.push_back(exploit_exceedance(model.bounds, r));
  model.range = ScoreRange::of(scores);
  return model;
}

DetectorSignal exploit_score(const ExploitModel& model, const Episode& e,
                             std::optional<double> threshold) {
  return make_signal(HackingCategory::kExploitationPattern,
                     exploit_exceedance(model.bounds, e.proxy_return()),
                     threshold.value_or(model.threshold), model.range);
}

// ---------------------------------------------------------------------------
// Wireheading

DetectorSignal wirehead_check(const WireheadConfig& cfg, const Episode& e) {
  auto it = cfg.envs.find(e.env_id);
  if (it == cfg.envs.end() || e.steps.empty()) {
    return abstain(HackingCategory::kWireheading, cfg.threshold, kWarnNone);
  }
  const EnvRewardSpec& env = it->second;
  const std::vector<double> expected = env.recompute ? env.recompute(e) : std::vector<double>{};
  require(expected.empty() || expected.size() == e.steps.size(), ErrorCode::kInvalidInput,
          "wireheading: reward recompute returned the wrong number of steps");
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < e.steps.size(); ++i) {
    const Step& s = e.steps[i];
    bool bad = reward_checksum(s.t, s.action, s.proxy_reward, env.hash_key) !=
               s.reward_checksum;
    if (!bad && !expected.empty()) {
      bad = !(std::abs(expected[i] - s.proxy_reward) <= cfg.reward_tolerance);
    }
    if (bad) ++mismatched;
  }
  const double raw = static_cast<double>(mismatched) / static_cast<double>(e.steps.size());
  return make_signal(HackingCategory::kWireheading, raw, cfg.threshold, ScoreRange{0.0, 0.0});
}

// ---------------------------------------------------------------------------
// All six

DetectorSet fit_detectors(const std::vector<Episode>& reference,
                          const DetectorParams& params, WireheadConfig wirehead) {
  DetectorSet set;
  std::vector<std::string> failures;
  auto attempt = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& err) {
      failures.push_back(err.what());
    }
  };
  attempt([&] { set.spec = spec_gaming_fit(reference, params.tau_spec); });
  attempt([&] { set.tampering = tampering_fit(reference, params.tampering); });
  attempt([&] {
    set.proxy = proxy_opt_fit(reference, params.delta_rho, params.initial_fraction);
  });
  attempt([&] { set.misalignment = misalignment_fit(reference, params.ppl_multiplier); });
  attempt([&] { set.exploit = exploit_fit(reference); });
  set.wirehead = std::move(wirehead);
  if (!failures.empty()) {
    std::string msg = "detector fit failed:";
    for (const auto& f : failures) msg += "\n  " + f;
    fail(ErrorCode::kFitError, msg);
  }
  return set;
}

double threshold_of(const DetectorSet& set, HackingCategory c) {
  switch (c) {
    case HackingCategory::kSpecificationGaming: return set.spec.tau_spec;
    case HackingCategory::kRewardTampering: return set.tampering.threshold();
    case HackingCategory::kProxyOptimization: return set.proxy.delta_threshold;
    case HackingCategory::kObjectiveMisalignment: return set.misalignment.threshold;
    case HackingCategory::kExploitationPattern: return set.exploit.threshold;
    case HackingCategory::kWireheading: return set.wirehead.threshold;
  }
  return 0.0;
}

void set_threshold(DetectorSet& set, HackingCategory c, double value) {
  switch (c) {
    case HackingCategory::kSpecificationGaming: set.spec.tau_spec = value; break;
    case HackingCategory::kRewardTampering: set.tampering.forest.score_threshold = value; break;
    case HackingCategory::kProxyOptimization: set.proxy.delta_threshold = value; break;
    case HackingCategory::kObjectiveMisalignment: set.misalignment.threshold = value; break;
    case HackingCategory::kExploitationPattern: set.exploit.threshold = value; break;
    case HackingCategory::kWireheading: set.wirehead.threshold = value; break;
  }
}

double raw_score_only(const DetectorSet& set, HackingCategory c, const Episode& e) {
  switch (c) {
    case HackingCategory::kSpecificationGaming: return spec_gaming_score(set.spec, e).raw_score;
    case HackingCategory::kRewardTampering: return tampering_score(set.tampering, e).raw_score;
    case HackingCategory::kProxyOptimization: return proxy_opt_score(set.proxy, e).raw_score;
    case HackingCategory::kObjectiveMisalignment:
      return misalignment_score(set.misalignment, e).raw_score;
    case HackingCategory::kExploitationPattern: return exploit_score(set.exploit, e).raw_score;
    case HackingCategory::kWireheading: return wirehead_check(set.wirehead, e).raw_score;
  }
  return 0.0;
}

SignalSet score_episode(const DetectorSet& set, const Episode& e,
                        const ScoreOptions& options) {
  std::array<double, kNumCategories> thr{};
  for (HackingCategory c : kAllCategories) thr[index_of(c)] = threshold_of(set, c);
  if (options.threshold_factors != nullptr) {
    auto it = options.threshold_factors->find(e.env_id);
    if (it != options.threshold_factors->end()) {
      for (std::size_t k = 0; k < kNumCategories; ++k) thr[k] *= it->second[k];
    }
  }
  auto at = [&](HackingCategory c) { return thr[index_of(c)]; };

  SignalSet out;
  out[index_of(HackingCategory::kExploitationPattern)] =
      exploit_score(set.exploit, e, at(HackingCategory::kExploitationPattern));
  DetectorSignal wh = wirehead_check(set.wirehead, e);
  if (!wh.abstained) {
    wh.threshold_used = at(HackingCategory::kWireheading);
    wh.flagged = wh.raw_score > wh.threshold_used;
  }
  out[index_of(HackingCategory::kWireheading)] = wh;
  out[index_of(HackingCategory::kRewardTampering)] =
      tampering_score(set.tampering, e, at(HackingCategory::kRewardTampering));

  bool skip = false;
  if (options.selective) {
    skip = true;
    for (HackingCategory c : {HackingCategory::kExploitationPattern,
                              HackingCategory::kWireheading,
                              HackingCategory::kRewardTampering}) {
      if (out[index_of(c)].calibrated_confidence >= options.selective_cutoff) skip = false;
    }
  }

  if (skip) {
    for (HackingCategory c : {HackingCategory::kSpecificationGaming,
                              HackingCategory::kProxyOptimization,
                              HackingCategory::kObjectiveMisalignment}) {
      DetectorSignal s;
      s.category = c;
      s.threshold_used = at(c);
      s.warnings = kWarnSkipped;
      out[index_of(c)] = s;
    }
    return out;
  }

  DetectorSignal spec = spec_gaming_score(set.spec, e);
  spec.threshold_used = at(HackingCategory::kSpecificationGaming);
  spec.flagged = spec.raw_score > spec.threshold_used;
  out[index_of(HackingCategory::kSpecificationGaming)] = spec;
  out[index_of(HackingCategory::kProxyOptimization)] =
      proxy_opt_score(set.proxy, e, at(HackingCategory::kProxyOptimization));
  out[index_of(HackingCategory::kObjectiveMisalignment)] =
      misalignment_score(set.misalignment, e, at(HackingCategory::kObjectiveMisalignment));
  return out;
}

}  // namespace rhd::detect
