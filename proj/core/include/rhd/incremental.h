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

// Streaming accumulators. Both support removal so fixed-size windows can slide
// in O(1) per step instead of being recomputed.

#ifndef RHD_INCREMENTAL_H_
#define RHD_INCREMENTAL_H_

#include <cstddef>
#include <deque>
#include <utility>

namespace rhd::stats {

// Welford mean/variance with higher central moments (Terriberry update).
class RunningMoments {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 0 ? m2_ / static_cast<double>(n_) : 0.0; }
  double skewness() const;
  double kurtosis() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

// Co-moment accumulator for a pair of series with add and remove. Removal is
// first-in first-out: remove() drops the oldest pair, and the arguments must
// equal it. The window is kept so the co-moments can be rebuilt exactly when
// removals would otherwise accumulate cancellation error (after every n
// removals, or when one removal wipes out most of a variance); the cost stays
// O(1) amortized per update.
class RollingCorrelation {
 public:
  void add(double x, double y);
  void remove(double x, double y);
  void clear() { *this = RollingCorrelation(); }

  std::size_t count() const { return n_; }
  double mean_x() const { return mean_x_; }
  double mean_y() const { return mean_y_; }
  // Pearson r; 0 when either side has zero variance.
  double correlation() const;
  bool degenerate() const;

 private:
  std::size_t n_ = 0;
  double mean_x_ = 0.0;
  double mean_y_ = 0.0;
  double m2x_ = 0.0;
  double m2y_ = 0.0;
  double cxy_ = 0.0;
  std::deque<std::pair<double, double>> window_;
  std::size_t removals_ = 0;

  void resync();
};

}  // namespace rhd::stats

#endif  // RHD_INCREMENTAL_H_
