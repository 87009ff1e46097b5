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

#include "rhd/stats.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rhd/error.h"

namespace rhd::stats {

double mean(std::span<const double> series) {
  require(!series.empty(), ErrorCode::kInvalidInput, "mean of empty series");
  double sum = 0.0;
  for (double v : series) sum += v;
  return sum / static_cast<double>(series.size());
}

MomentSummary moments(std::span<const double> series) {
  require(!series.empty(), ErrorCode::kInvalidInput, "moments of empty series");
  MomentSummary out;
  out.n = series.size();
  const double n = static_cast<double>(out.n);
  out.mean = mean(series);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : series) {
    require(std::isfinite(v), ErrorCode::kInvalidInput, "non-finite value in series");
    const double d = v - out.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out.variance = m2;
  if (m2 > 0.0) {
    if (out.n >= 3) out.skewness = m3 / std::pow(m2, 1.5);
    if (out.n >= 4) out.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::kInvalidInput,
          "pearson: length mismatch");
  require(x.size() >= 2, ErrorCode::kInvalidInput, "pearson: need >= 2 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), ErrorCode::kInvalidInput,
          "kl_divergence: bin-count mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    require(q[i] > 0.0, ErrorCode::kInvalidInput,
            "kl_divergence: q has a zero bin where p > 0");
    d += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(d, 0.0);
}

std::vector<double> smooth_histogram(std::span<const double> q, double eps) {
  std::vector<double> out(q.begin(), q.end());
  double total = 0.0;
  for (double& v : out) {
    v += eps;
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

double autocorrelation(std::span<const double> series, std::size_t lag) {
  require(lag >= 1 && lag < series.size(), ErrorCode::kInvalidInput,
          "autocorrelation: need 1 <= lag < length");
  const double m = mean(series);
  double denom = 0.0;
  for (double v : series) denom += (v - m) * (v - m);
  if (denom <= 0.0) return 0.0;
  double num = 0.0;
  for (std::size_t t = 0; t + lag < series.size(); ++t) {
    num += (series[t] - m) * (series[t + lag] - m);
  }
  return num / denom;
}

double linear_trend(std::span<const double> series) {
  require(series.size() >= 2, ErrorCode::kInvalidInput,
          "linear_trend: need >= 2 points");
  const double n = static_cast<double>(series.size());
  const double mx = (n - 1.0) / 2.0;
  const double my = mean(series);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxy += dx * (series[i] - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), ErrorCode::kInvalidInput, "quantile of empty input");
  q = std::clamp(q, 0.0, 1.0);
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, q);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

RobustBounds robust_bounds(std::span<const double> values) {
  require(!values.empty(), ErrorCode::kInvalidInput, "robust_bounds of empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  RobustBounds b;
  b.median = quantile_sorted(sorted, 0.5);
  b.q1 = quantile_sorted(sorted, 0.25);
  b.q3 = quantile_sorted(sorted, 0.75);
  b.iqr = b.q3 - b.q1;
  std::vector<double> dev;
  dev.reserve(sorted.size());
  for (double v : sorted) dev.push_back(std::abs(v - b.median));
  std::sort(dev.begin(), dev.end());
  b.mad = quantile_sorted(dev, 0.5);
  return b;
}

LineFit theil_sen(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::kInvalidInput,
          "theil_sen: length mismatch");
  require(x.size() >= 2, ErrorCode::kInvalidInput, "theil_sen: need >= 2 points");
  std::vector<double> slopes;
  slopes.reserve(x.size() * (x.size() - 1) / 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      if (x[j] != x[i]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
    }
  }
  require(!slopes.empty(), ErrorCode::kDegenerateInput,
          "theil_sen: all x values are equal");
  LineFit fit;
  fit.slope = median(slopes);
  std::vector<double> residual(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) residual[i] = y[i] - fit.slope * x[i];
  fit.intercept = median(residual);
  return fit;
}

std::size_t histogram_bin(double value, std::size_t bins, double lo, double hi) {
  const double width = (hi - lo) / static_cast<double>(bins);
  const double pos = (std::clamp(value, lo, hi) - lo) / width;
  const double k = std::ceil(pos) - 1.0;
  if (!(k > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(k), bins - 1);
}

std::vector<double> histogram(std::span<const double> values, std::size_t bins,
                              double lo, double hi) {
  require(bins >= 1, ErrorCode::kInvalidInput, "histogram: bins must be >= 1");
  require(lo < hi, ErrorCode::kInvalidInput, "histogram: need lo < hi");
  std::vector<double> h(bins, 0.0);
  if (values.empty()) {
    std::fill(h.begin(), h.end(), 1.0 / static_cast<double>(bins));
    return h;
  }
  for (double v : values) h[histogram_bin(v, bins, lo, hi)] += 1.0;
  for (double& c : h) c /= static_cast<double>(values.size());
  return h;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace rhd::stats
