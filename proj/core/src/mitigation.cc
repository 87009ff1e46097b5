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

#include "rhd/mitigation.h"

#include <array>
#include <string>

#include "rhd/envgen.h"
#include "rhd/error.h"

namespace rhd::mitigation {
namespace {

constexpr std::array<std::string_view, 5> kNames = {
    "reward_rebalancing", "behavioral_constraints", "multi_objective_rewards",
    "adversarial_training", "combined"};

struct Effect {
  double success_reduction;  // at intensity 1
  double performance_cost;   // at intensity 1
};

Effect effect_of(Technique t) {
  switch (t) {
    case Technique::kRewardRebalancing: return {0.324, 0.032};
    case Technique::kBehavioralConstraints: return {0.281, 0.057};
    case Technique::kMultiObjectiveRewards: return {0.413, 0.068};
    case Technique::kAdversarialTraining: return {0.478, 0.084};
    case Technique::kCombined: return {0.546, 0.091};
  }
  return {0.0, 0.0};
}

bool addresses(Technique t, HackingCategory c) {
  switch (t) {
    case Technique::kRewardRebalancing:
      return c == HackingCategory::kSpecificationGaming ||
             c == HackingCategory::kProxyOptimization;
    case Technique::kBehavioralConstraints:
      // Rejects action-loop and out-of-distribution action sequences.
      return c == HackingCategory::kSpecificationGaming ||
             c == HackingCategory::kObjectiveMisalignment;
    default: return true;
  }
}

}  // namespace

std::string_view to_string(Technique t) { return kNames[static_cast<std::size_t>(t)]; }

Technique parse_technique(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Technique>(i);
  }
  fail(ErrorCode::kParseError, "unknown mitigation technique '" + std::string(name) + "'");
}

double success_multiplier(const MitigationSpec& m, HackingCategory c) {
  if (!addresses(m.technique, c)) return 1.0;
  return 1.0 - effect_of(m.technique).success_reduction * m.intensity;
}

double performance_multiplier(const MitigationSpec& m) {
  return 1.0 - effect_of(m.technique).performance_cost * m.intensity;
}

double proxy_true_weight(const MitigationSpec& m) {
  switch (m.technique) {
    case Technique::kRewardRebalancing:
    case Technique::kCombined: return m.rebalance_alpha_scale * m.intensity;
    case Technique::kMultiObjectiveRewards: return m.multi_objective_weight * m.intensity;
    default: return 0.0;
  }
}

envgen::StreamConfig apply_mitigation(const envgen::StreamConfig& cfg, const MitigationSpec& m) {
  require(m.intensity >= 0.0 && m.intensity <= 1.0, ErrorCode::kInvalidInput,
          "mitigation intensity must be in [0, 1]");
  if (m.intensity == 0.0) return cfg;
  envgen::StreamConfig out = cfg;
  out.mitigation = m;
  return out;
}

StreamOutcome summarize_stream(const std::vector<Episode>& episodes, double wall_seconds) {
  StreamOutcome o;
  o.wall_seconds = wall_seconds;
  if (episodes.empty()) return o;
  double hacked = 0.0;
  double clean_return = 0.0;
  double clean = 0.0;
  for (const Episode& e : episodes) {
    if (e.is_hacking()) {
      hacked += 1.0;
    } else {
      clean_return += e.true_return();
      clean += 1.0;
    }
  }
  o.hacking_frequency = hacked / static_cast<double>(episodes.size());
  o.performance = clean > 0 ? clean_return / clean : 0.0;
  return o;
}

MitigationOutcome evaluate_mitigation(const StreamOutcome& before, const StreamOutcome& after) {
  MitigationOutcome out;
  if (before.hacking_frequency > 0.0) {
    out.hacking_reduction_pct =
        100.0 * (before.hacking_frequency - after.hacking_frequency) / before.hacking_frequency;
  }
  if (before.performance != 0.0) {
    out.performance_impact_pct =
        100.0 * (after.performance - before.performance) / before.performance;
  }
  if (before.wall_seconds > 0.0) {
    out.overhead_pct = 100.0 * (after.wall_seconds - before.wall_seconds) / before.wall_seconds;
  }
  return out;
}

}  // namespace rhd::mitigation
