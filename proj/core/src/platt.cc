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

#include "rhd/platt.h"

#include <cmath>
#include <cstddef>

#include "rhd/error.h"
#include "rhd/stats.h"

namespace rhd::stats {
namespace {

// Negative log-likelihood of targets under p = 1 / (1 + exp(A f + B)),
// evaluated without overflow.
double objective(std::span<const double> f, std::span<const double> t, double a,
                 double b) {
  double value = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double z = f[i] * a + b;
    if (z >= 0.0) {
      value += t[i] * z + std::log1p(std::exp(-z));
    } else {
      value += (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
  }
  return value;
}

}  // namespace

PlattParams platt_fit(std::span<const double> scores, const std::vector<bool>& labels) {
  require(scores.size() == labels.size(), ErrorCode::kInvalidInput,
          "platt_fit: size mismatch");
  require(scores.size() >= 4, ErrorCode::kInvalidInput, "platt_fit: need >= 4 samples");
  double n_pos = 0.0, n_neg = 0.0;
  for (bool l : labels) (l ? n_pos : n_neg) += 1.0;
  require(n_pos > 0.0 && n_neg > 0.0, ErrorCode::kCalibrationError,
          "platt_fit: both classes must be present");

  // Standardize so the Newton system is well conditioned for any score scale.
  const double mu = mean(scores);
  double var = 0.0;
  for (double s : scores) var += (s - mu) * (s - mu);
  double sd = std::sqrt(var / static_cast<double>(scores.size()));
  if (!(sd > 0.0)) sd = 1.0;
  std::vector<double> f(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) f[i] = (scores[i] - mu) / sd;

  const double hi_target = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo_target = 1.0 / (n_neg + 2.0);
  std::vector<double> t(scores.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = labels[i] ? hi_target : lo_target;

  constexpr int kMaxIterations = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  constexpr double kEps = 1e-5;

  double a = 0.0;
  double b = std::log((n_neg + 1.0) / (n_pos + 1.0));
  double fval = objective(f, t, a, b);

  for (int it = 0; it < kMaxIterations; ++it) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double z = f[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(f, t, na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }

  // p = 1/(1+exp(A f + B)) = sigmoid(-A (s - mu)/sd - B).
  PlattParams out;
  out.a = -a / sd;
  out.b = a * mu / sd - b;
  return out;
}

double platt_apply(const PlattParams& params, double score) {
  return sigmoid(params.a * score + params.b);
}

}  // namespace rhd::stats
