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

// Brute-force reference implementations used to check the library kernels.
// They follow the textbook definitions directly (two-pass, long double,
// O(n^2) where that is the plain definition) and share no code with core.

#ifndef RHD_TESTS_TESTING_ORACLES_H_
#define RHD_TESTS_TESTING_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace rhd::oracle {

using Real = long double;

inline Real sum(const std::vector<double>& v) {
  Real s = 0;
  for (double x : v) s += x;
  return s;
}

inline double mean(const std::vector<double>& v) {
  return static_cast<double>(sum(v) / v.size());
}

struct Moments {
  double mean, variance, skewness, kurtosis;
};

inline Moments moments(const std::vector<double>& v) {
  const Real n = v.size();
  const Real m = sum(v) / n;
  Real m2 = 0, m3 = 0, m4 = 0;
  for (double x : v) {
    const Real d = x - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  Moments out{static_cast<double>(m), static_cast<double>(m2), 0.0, 0.0};
  if (m2 > 0 && v.size() >= 3) out.skewness = static_cast<double>(m3 / std::pow(m2, 1.5L));
  if (m2 > 0 && v.size() >= 4) out.kurtosis = static_cast<double>(m4 / (m2 * m2) - 3);
  return out;
}

// Covariance over product of standard deviations.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const Real mx = sum(x) / x.size(), my = sum(y) / y.size();
  Real cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  if (vx == 0 || vy == 0) return 0.0;
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

inline double kl_bits(const std::vector<double>& p, const std::vector<double>& q) {
  Real s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) s += p[i] * std::log2(static_cast<Real>(p[i]) / q[i]);
  }
  return static_cast<double>(s);
}

inline double autocorrelation(const std::vector<double>& v, std::size_t lag) {
  const Real m = sum(v) / v.size();
  Real num = 0, den = 0;
  for (std::size_t t = 0; t < v.size(); ++t) {
    den += (v[t] - m) * (v[t] - m);
    if (t + lag < v.size()) num += (v[t] - m) * (v[t + lag] - m);
  }
  return den == 0 ? 0.0 : static_cast<double>(num / den);
}

// Normal equations for y = a + b t.
inline double ols_slope(const std::vector<double>& y) {
  const Real n = y.size();
  Real st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    st += t;
    sy += y[t];
    stt += static_cast<Real>(t) * t;
    sty += t * static_cast<Real>(y[t]);
  }
  return static_cast<double>((n * sty - st * sy) / (n * stt - st * st));
}

// Type-7: h = (n - 1) q, interpolate between floor(h) and floor(h) + 1.
inline double quantile7(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const Real h = (v.size() - 1) * static_cast<Real>(q);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return static_cast<double>(v[lo] + (h - lo) * (static_cast<Real>(v[hi]) - v[lo]));
}

inline double median(const std::vector<double>& v) { return quantile7(v, 0.5); }

inline double mad(const std::vector<double>& v) {
  const double m = median(v);
  std::vector<double> dev;
  for (double x : v) dev.push_back(std::fabs(x - m));
  return median(dev);
}

struct Line {
  double slope, intercept;
};

inline Line theil_sen(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> slopes;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (i < j && x[i] != x[j]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
  const double b = median(slopes);
  std::vector<double> r;
  for (std::size_t i = 0; i < x.size(); ++i) r.push_back(y[i] - b * x[i]);
  return {b, median(r)};
}

inline double logistic(double a, double b, double s) {
  return static_cast<double>(1.0L / (1.0L + std::exp(-(static_cast<Real>(a) * s + b))));
}

// Probability that a random positive outscores a random negative, ties
// counting one half; every pair enumerated.
inline double auc_pairs(const std::vector<double>& s, const std::vector<bool>& y) {
  Real wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      if (s[i] > s[j]) wins += 1;
      else if (s[i] == s[j]) wins += 0.5L;
    }
  }
  return static_cast<double>(wins / pairs);
}

}  // namespace rhd::oracle

#endif  // RHD_TESTS_TESTING_ORACLES_H_
