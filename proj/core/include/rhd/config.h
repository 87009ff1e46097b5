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

// Declarative run configuration: a versioned key-value text file.
//
//   # comments run to end of line
//   schema = 1
//   env = gridworld
//   episodes = 1000
//   seed = 42
//   sensitivity.tau_spec = 0.2, 0.3, 0.4
//
// Every key is optional except `schema`. Unknown keys, duplicate keys and
// malformed values raise Error(kConfigError) with "<source>:<line>: <key>:"
// prefixed to the message. The full key list with defaults is what
// canonical_config() prints for a default RunConfig.

#ifndef RHD_CONFIG_H_
#define RHD_CONFIG_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rhd/detectors.h"
#include "rhd/envgen.h"
#include "rhd/experiments.h"
#include "rhd/mitigation.h"
#include "rhd/types.h"

namespace rhd::config {

inline constexpr int kConfigSchemaVersion = 1;

struct RunConfig {
  // Stream generation.
  envgen::EnvFamily family = envgen::EnvFamily::kGridWorld;
  envgen::RewardDesign design;
  std::size_t max_steps = 200;
  envgen::Policy policy = envgen::Policy::kGoalSeeker;
  std::size_t episodes = 1000;
  std::uint64_t seed = 1;
  double injection_rate = 0.2;
  double strength = 1.0;
  TemporalPattern onset = TemporalPattern::kNone;
  // Single-category injection at `injection_rate`; mixed when unset.
  std::optional<HackingCategory> category;
  // Mitigation applied to generated streams; none when unset.
  std::optional<mitigation::Technique> mitigation;
  double intensity = 1.0;
  double rebalance_alpha_scale = 0.4;
  double multi_objective_weight = 0.3;

  // Detection.
  std::size_t reference_episodes = 200;
  std::size_t folds = 5;
  double risk_threshold = 0.5;
  bool selective = false;
  bool adaptive_thresholds = false;
  detect::DetectorParams params;
  double ratio_threshold = 2.0;

  // Factorial experiment.
  std::vector<envgen::EnvFamily> factorial_envs = {envgen::EnvFamily::kGridWorld,
                                                   envgen::EnvFamily::kRecSys};
  std::size_t seeds_per_cell = 40;
  std::size_t episodes_per_run = 50;
  double factorial_scale = 1.0;

  // Mitigation experiment.
  std::size_t mitigation_streams = 10;
  std::vector<mitigation::Technique> techniques = {
      mitigation::Technique::kRewardRebalancing, mitigation::Technique::kBehavioralConstraints,
      mitigation::Technique::kMultiObjectiveRewards, mitigation::Technique::kAdversarialTraining,
      mitigation::Technique::kCombined};
  std::vector<double> intensities = {0.0, 0.25, 0.5, 0.75, 1.0};

  // Sensitivity experiment.
  std::vector<double> tau_grid = {0.2, 0.3, 0.4};
  std::vector<double> delta_grid = {0.3, 0.5, 0.7};
  std::vector<double> contamination_grid = {0.05, 0.1, 0.15};
  std::vector<double> ppl_grid = {1.5, 2.0, 2.5};
};

RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::string& path);

// One "key = value" line per key in a fixed order; parse_config of the
// result reproduces the config.
std::string canonical_config(const RunConfig& cfg);

// 16 hex digits of FNV-1a over canonical_config().
std::string config_hash(const RunConfig& cfg);

envgen::EnvSpec env_of(const RunConfig& cfg);
// MitigationSpec for `technique` at `intensity` with the configured weights.
mitigation::MitigationSpec mitigation_spec(const RunConfig& cfg, mitigation::Technique technique,
                                           double intensity);
std::optional<mitigation::MitigationSpec> stream_mitigation(const RunConfig& cfg);
envgen::StreamConfig stream_of(const RunConfig& cfg);
experiments::BenchmarkConfig benchmark_of(const RunConfig& cfg);

}  // namespace rhd::config

#endif  // RHD_CONFIG_H_
