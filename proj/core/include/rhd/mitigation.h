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

// Mitigation techniques as transformations of the generator: each scales the
// success probability of some injected behaviors and the true-objective
// performance, and reward rebalancing or multi-objective rewards also blend
// the true reward into the proxy.

#ifndef RHD_MITIGATION_H_
#define RHD_MITIGATION_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rhd/types.h"

namespace rhd {
namespace envgen {
struct StreamConfig;
}  // namespace envgen

namespace mitigation {

enum class Technique : std::uint8_t {
  kRewardRebalancing,
  kBehavioralConstraints,
  kMultiObjectiveRewards,
  kAdversarialTraining,
  kCombined,
};

std::string_view to_string(Technique t);
Technique parse_technique(std::string_view name);

inline constexpr Technique kAllTechniques[] = {
    Technique::kRewardRebalancing, Technique::kBehavioralConstraints,
    Technique::kMultiObjectiveRewards, Technique::kAdversarialTraining,
    Technique::kCombined,
};

struct MitigationSpec {
  Technique technique = Technique::kCombined;
  double intensity = 1.0;  // [0, 1]
  // proxy' = (1 - alpha) proxy + alpha true with alpha = scale * intensity.
  double rebalance_alpha_scale = 0.4;
  // Weight of the true-objective term in the multi-objective scalarization
  // at full intensity.
  double multi_objective_weight = 0.3;

  friend bool operator==(const MitigationSpec&, const MitigationSpec&) = default;
};

// Multiplier on the injection probability of `c` (1 when the technique does
// not address that category).
double success_multiplier(const MitigationSpec& m, HackingCategory c);

// Multiplier on every true reward.
double performance_multiplier(const MitigationSpec& m);

// Weight of the true reward blended into the declared proxy.
double proxy_true_weight(const MitigationSpec& m);

// Returns cfg with the mitigation attached; intensity 0 returns cfg
// unchanged. Raises kInvalidInput for intensity outside [0, 1].
envgen::StreamConfig apply_mitigation(const envgen::StreamConfig& cfg, const MitigationSpec& m);

struct StreamOutcome {
  double hacking_frequency = 0.0;
  // Mean true return of episodes without injected hacking.
  double performance = 0.0;
  double wall_seconds = 0.0;  // generation plus detection
};

struct MitigationOutcome {
  std::optional<double> hacking_reduction_pct;  // nullopt when f_before == 0
  double performance_impact_pct = 0.0;
  double overhead_pct = 0.0;
};

StreamOutcome summarize_stream(const std::vector<Episode>& episodes, double wall_seconds);

MitigationOutcome evaluate_mitigation(const StreamOutcome& before, const StreamOutcome& after);

}  // namespace mitigation
}  // namespace rhd

#endif  // RHD_MITIGATION_H_
