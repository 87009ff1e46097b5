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

#ifndef RHD_PLATT_H_
#define RHD_PLATT_H_

#include <span>
#include <vector>

namespace rhd::stats {

// Calibrated probability sigma(a * score + b).
struct PlattParams {
  double a = 1.0;
  double b = 0.0;
  friend bool operator==(const PlattParams&, const PlattParams&) = default;
};

// Newton's method with backtracking on the smoothed-target likelihood
// (targets (N+ + 1)/(N+ + 2) and 1/(N- + 2)). Scores are standardized
// internally. Raises kCalibrationError when only one class is present and
// kInvalidInput on size mismatch or fewer than 4 samples.
PlattParams platt_fit(std::span<const double> scores, const std::vector<bool>& labels);

double platt_apply(const PlattParams& params, double score);

}  // namespace rhd::stats

#endif  // RHD_PLATT_H_
