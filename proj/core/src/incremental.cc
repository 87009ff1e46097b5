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

#include "rhd/incremental.h"

#include <algorithm>
#include <cmath>

#include "rhd/error.h"

namespace rhd::stats {

void RunningMoments::add(double x) {
  const double n1 = static_cast<double>(n_);
  ++n_;
  const double n = static_cast<double>(n_);
  const double delta = x - mean_;
  const double delta_n = delta / n;
  const double delta_n2 = delta_n * delta_n;
  const double term1 = delta * delta_n * n1;
  mean_ += delta_n;
  m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ -
         4.0 * delta_n * m3_;
  m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
  m2_ += term1;
}

double RunningMoments::skewness() const {
  if (n_ < 3 || m2_ <= 0.0) return 0.0;
  const double n = static_cast<double>(n_);
  return std::sqrt(n) * m3_ / std::pow(m2_, 1.5);
}

double RunningMoments::kurtosis() const {
  if (n_ < 4 || m2_ <= 0.0) return 0.0;
  const double n = static_cast<double>(n_);
  return n * m4_ / (m2_ * m2_) - 3.0;
}

void RollingCorrelation::add(double x, double y) {
  window_.emplace_back(x, y);
  ++n_;
  const double n = static_cast<double>(n_);
  const double dx = x - mean_x_;
  mean_x_ += dx / n;
  const double dy = y - mean_y_;
  mean_y_ += dy / n;
  cxy_ += dx * (y - mean_y_);
  m2x_ += dx * (x - mean_x_);
  m2y_ += dy * (y - mean_y_);
}

void RollingCorrelation::remove(double x, double y) {
  require(!window_.empty() && window_.front() == std::make_pair(x, y),
          ErrorCode::kInvalidInput, "RollingCorrelation::remove: not the oldest pair");
  window_.pop_front();
  if (n_ <= 1) {
    clear();
    return;
  }
  const double before_x = m2x_, before_y = m2y_;
  --n_;
  const double n = static_cast<double>(n_);
  const double dx = x - mean_x_;
  mean_x_ -= dx / n;
  const double dy = y - mean_y_;
  mean_y_ -= dy / n;
  cxy_ -= dx * (y - mean_y_);
  m2x_ -= dx * (x - mean_x_);
  m2y_ -= dy * (y - mean_y_);
  // A removal that cancels most of a sum of squares leaves mostly rounding.
  if (++removals_ >= n_ || m2x_ < 1e-3 * before_x || m2y_ < 1e-3 * before_y) resync();
}

void RollingCorrelation::resync() {
  removals_ = 0;
  const double n = static_cast<double>(window_.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : window_) {
    sx += x;
    sy += y;
  }
  mean_x_ = sx / n;
  mean_y_ = sy / n;
  m2x_ = m2y_ = cxy_ = 0.0;
  for (const auto& [x, y] : window_) {
    m2x_ += (x - mean_x_) * (x - mean_x_);
    m2y_ += (y - mean_y_) * (y - mean_y_);
    cxy_ += (x - mean_x_) * (y - mean_y_);
  }
}

bool RollingCorrelation::degenerate() const {
  // Rounding residue: a standard deviation below 1e-12 of the level counts
  // as zero.
  const double n = static_cast<double>(n_);
  const double floor_x = 1e-24 * n * std::max(1.0, mean_x_ * mean_x_);
  const double floor_y = 1e-24 * n * std::max(1.0, mean_y_ * mean_y_);
  return n_ < 2 || m2x_ <= floor_x || m2y_ <= floor_y;
}

double RollingCorrelation::correlation() const {
  if (degenerate()) return 0.0;
  return std::clamp(cxy_ / std::sqrt(m2x_ * m2y_), -1.0, 1.0);
}

}  // namespace rhd::stats
