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

// Domain types shared by every module: the hacking taxonomy, episodes and
// their steps, per-detector signals and ensemble assessments.

#ifndef RHD_TYPES_H_
#define RHD_TYPES_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rhd {

enum class HackingCategory : std::uint8_t {
  kSpecificationGaming = 0,
  kRewardTampering = 1,
  kProxyOptimization = 2,
  kObjectiveMisalignment = 3,
  kExploitationPattern = 4,
  kWireheading = 5,
};

inline constexpr std::size_t kNumCategories = 6;

inline constexpr std::array<HackingCategory, kNumCategories> kAllCategories = {
    HackingCategory::kSpecificationGaming, HackingCategory::kRewardTampering,
    HackingCategory::kProxyOptimization,   HackingCategory::kObjectiveMisalignment,
    HackingCategory::kExploitationPattern, HackingCategory::kWireheading,
};

constexpr std::size_t index_of(HackingCategory c) {
  return static_cast<std::size_t>(c);
}

// Ordered Low < Medium < High < Critical.
enum class Severity : std::uint8_t { kLow = 0, kMedium, kHigh, kCritical };

enum class TemporalPattern : std::uint8_t {
  kNone = 0,
  kGradualEmergence,
  kSuddenOnset,
  kIntermittent,
};

// Stable serialized names. The parse functions throw Error(kParseError) on
// unknown names.
std::string_view to_string(HackingCategory c);
std::string_view to_string(Severity s);
std::string_view to_string(TemporalPattern p);
HackingCategory parse_category(std::string_view name);
Severity parse_severity(std::string_view name);
TemporalPattern parse_temporal_pattern(std::string_view name);

struct ActionSpace {
  enum class Kind : std::uint8_t { kDiscrete, kContinuous };
  Kind kind = Kind::kDiscrete;
  // Number of symbols for discrete spaces, vector dimension for continuous.
  std::size_t size = 1;

  static ActionSpace discrete(std::size_t n) { return {Kind::kDiscrete, n}; }
  static ActionSpace continuous(std::size_t dim) {
    return {Kind::kContinuous, dim};
  }
  bool is_discrete() const { return kind == Kind::kDiscrete; }
  friend bool operator==(const ActionSpace&, const ActionSpace&) = default;
};

// A discrete symbol id or a real action vector.
using ActionValue = std::variant<std::int64_t, std::vector<double>>;

struct Step {
  std::int64_t t = 0;
  ActionValue action = std::int64_t{0};
  std::vector<double> obs_features;
  double proxy_reward = 0.0;
  double true_reward = 0.0;
  std::uint64_t reward_checksum = 0;

  friend bool operator==(const Step&, const Step&) = default;
};

struct GroundTruth {
  bool is_hacking = false;
  std::optional<HackingCategory> category;
  std::optional<Severity> severity;
  std::optional<std::int64_t> onset_step;
  std::optional<TemporalPattern> onset_episode_pattern;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Episode {
  std::string id;
  std::string env_id;
  ActionSpace action_space;
  std::uint64_t seed = 0;
  std::vector<Step> steps;
  std::int64_t episode_index = 0;
  std::optional<GroundTruth> label;
  // Free-form string metadata (generator provenance, declared reward
  // parameters). Serialized under "meta".
  std::map<std::string, std::string> meta;
  // Unrecognized top-level fields from an imported log, as compact JSON text.
  // Kept in memory for inspection; never written back out.
  std::map<std::string, std::string> unknown_fields;

  std::size_t length() const { return steps.size(); }
  double proxy_return() const;
  double true_return() const;
  bool is_hacking() const { return label.has_value() && label->is_hacking; }

  friend bool operator==(const Episode&, const Episode&) = default;
};

// Returns one human-readable description per violated invariant; empty when
// the episode is well formed.
std::vector<std::string> validate_episode(const Episode& e);

// Non-fatal conditions a detector hit while scoring. Bit flags.
enum SignalWarning : std::uint32_t {
  kWarnNone = 0,
  kWarnDegenerateRatio = 1u << 0,
  kWarnDegenerateFit = 1u << 1,
  kWarnShortEpisode = 1u << 2,
  kWarnZeroVarianceWindow = 1u << 3,
  kWarnAbstained = 1u << 4,
  kWarnSkipped = 1u << 5,
};

struct DetectorSignal {
  HackingCategory category = HackingCategory::kSpecificationGaming;
  double raw_score = 0.0;
  double calibrated_confidence = 0.0;
  bool flagged = false;
  double threshold_used = 0.0;
  // The detector could not apply to this episode; flagged is false and the
  // ensemble ignores the signal.
  bool abstained = false;
  // Smoothness score for continuous action spaces (misalignment only).
  double secondary_score = 0.0;
  std::uint32_t warnings = kWarnNone;

  friend bool operator==(const DetectorSignal&, const DetectorSignal&) = default;
};

using SignalSet = std::array<DetectorSignal, kNumCategories>;

struct RiskAssessment {
  std::string episode_id;
  std::int64_t episode_index = 0;
  double risk = 0.0;
  bool flagged = false;
  SignalSet signals{};
  int consensus_count = 0;

  friend bool operator==(const RiskAssessment&, const RiskAssessment&) = default;
};

}  // namespace rhd

#endif  // RHD_TYPES_H_
