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

// Numeric kernels used by the detectors and the evaluation harness. All
// functions are pure; invalid arguments raise Error(kInvalidInput) unless
// noted otherwise.

#ifndef RHD_STATS_H_
#define RHD_STATS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace rhd::stats {

struct MomentSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // population
  double skewness = 0.0;  // m3 / sigma^3; 0 when n < 3 or sigma == 0
  double kurtosis = 0.0;  // m4 / sigma^4 - 3; 0 when n < 4 or sigma == 0
};

MomentSummary moments(std::span<const double> series);

double mean(std::span<const double> series);

// Sample Pearson correlation. Returns 0 when either series has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Sum p_i log2(p_i / q_i) in bits. Bins with p_i == 0 contribute nothing; a
// bin with p_i > 0 and q_i == 0 is an error, so smooth q first.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Adds eps to every bin and renormalizes.
std::vector<double> smooth_histogram(std::span<const double> q, double eps = 1e-6);

// Lag-k autocorrelation normalized by the overall (biased) variance.
// Returns 0 for zero-variance series.
double autocorrelation(std::span<const double> series, std::size_t lag);

// OLS slope of the series against index 0..n-1.
double linear_trend(std::span<const double> series);

// Type-7 quantile (linear interpolation between order statistics).
double quantile(std::span<const double> values, double q);
double quantile_sorted(std::span<const double> sorted, double q);
double median(std::span<const double> values);

struct RobustBounds {
  double median = 0.0;
  double mad = 0.0;  // unscaled median absolute deviation
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

RobustBounds robust_bounds(std::span<const double> values);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double predict(double x) const { return intercept + slope * x; }
};

// Theil-Sen estimator: median pairwise slope over pairs with distinct x,
// intercept = median(y - slope * x). Raises kDegenerateInput when all x
// are equal.
LineFit theil_sen(std::span<const double> x, std::span<const double> y);

// Equal-width histogram over [lo, hi], normalized to sum 1. Values are
// clamped into range. Bins are right-closed, (edge_k, edge_{k+1}], with the
// first bin also containing lo. Empty input yields the uniform histogram.
std::vector<double> histogram(std::span<const double> values, std::size_t bins,
                              double lo, double hi);

// Bin index used by histogram().
std::size_t histogram_bin(double value, std::size_t bins, double lo, double hi);

double sigmoid(double z);

}  // namespace rhd::stats

#endif  // RHD_STATS_H_
