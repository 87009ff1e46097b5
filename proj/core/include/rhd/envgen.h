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

// Synthetic environments with scripted policies and labeled hacking
// injection.
//
// Every step carries obs_features = [c0, c1, c2, noise, bonus]. The true
// reward is the family's true-objective formula over the components
// c0..c2, scaled by the mitigation performance multiplier and then altered
// by injected behaviors. The declared proxy reward is
//
//   raw   = formula(c) + noise + bonus + 0.02 * (v(a) - 0.5) [+ 0.05 (c2 - 0.5)]
//   proxy = (1 - alpha) * raw + alpha * true
//
// where v(a) is the action scaled to [0, 1], the bracketed term applies to
// complex reward designs, and alpha is the mitigation blend weight recorded
// in the episode meta under "reward_alpha". Wireheading checks recompute
// exactly this function, so only post-hoc edits of the proxy disagree with it.

#ifndef RHD_ENVGEN_H_
#define RHD_ENVGEN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rhd/detectors.h"
#include "rhd/mitigation.h"
#include "rhd/types.h"

namespace rhd::envgen {

enum class EnvFamily : std::uint8_t {
  kGridWorld,
  kProxyTrap,
  kTamperingTest,
  kAlignmentChallenge,
  kRecSys,
  kCompetitiveGame,
  kRoboticControl,
};

std::string_view to_string(EnvFamily f);
EnvFamily parse_family(std::string_view name);

enum class Density : std::uint8_t { kSparse, kDense };
enum class Alignment : std::uint8_t { kLow, kHigh };
enum class Complexity : std::uint8_t { kSimple, kComplex };

struct RewardDesign {
  Density density = Density::kDense;
  Alignment alignment = Alignment::kHigh;
  Complexity complexity = Complexity::kSimple;
  friend bool operator==(const RewardDesign&, const RewardDesign&) = default;
};

std::string design_label(const RewardDesign& d);  // e.g. "dense/high/simple"

struct EnvSpec {
  std::string env_id;
  EnvFamily family = EnvFamily::kGridWorld;
  ActionSpace action_space;
  std::size_t max_steps = 200;
  RewardDesign reward;
  std::uint64_t hash_key = 0;
  friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

// Catalog environment of a family; env_id is the family name. The hash key
// is derived from env_id.
EnvSpec make_env(EnvFamily family, std::size_t max_steps = 200, RewardDesign design = {});
std::uint64_t env_hash_key(std::string_view env_id);
std::vector<EnvSpec> env_catalog(std::size_t max_steps = 200);

enum class Policy : std::uint8_t { kRandomWalk, kGoalSeeker, kNoisyOptimal };
std::string_view to_string(Policy p);
Policy parse_policy(std::string_view name);

struct InjectionSpec {
  HackingCategory category = HackingCategory::kSpecificationGaming;
  double probability = 0.2;
  TemporalPattern onset = TemporalPattern::kNone;
  double strength = 1.0;
  friend bool operator==(const InjectionSpec&, const InjectionSpec&) = default;
};

struct StreamConfig {
  EnvSpec env;
  std::size_t n_episodes = 100;
  std::uint64_t seed = 0;
  std::vector<InjectionSpec> injection;
  Policy policy = Policy::kGoalSeeker;
  std::optional<mitigation::MitigationSpec> mitigation;
  // First episode_index of the stream.
  std::int64_t first_index = 0;
  friend bool operator==(const StreamConfig&, const StreamConfig&) = default;
};

// One spec per category at probability 1 - (1 - total)^(1/6), so that the
// chance of any injection in an episode is `total`.
std::vector<InjectionSpec> mixed_injection(double total, double strength = 1.0,
                                           TemporalPattern onset = TemporalPattern::kNone);

// Episode-level injection probability multiplier for stream position i of n
// (the temporal shape of the onset pattern). Deterministic given the seed.
double onset_profile(TemporalPattern pattern, std::uint64_t seed, std::size_t i, std::size_t n);

// Deterministic stream. Episodes share common random numbers across configs
// that differ only in injection or mitigation: per-episode dynamics and
// injection draws come from sub-streams keyed by (seed, episode index).
std::vector<Episode> generate_stream(const StreamConfig& cfg);

Severity severity_for(HackingCategory c, double strength);

// Declared proxy of step i, as described at the top of this header.
double declared_proxy(const EnvSpec& env, double alpha, const Step& step);

// Wireheading configuration knowing the declared reward of every catalog
// environment (and of `extra` ones).
detect::WireheadConfig wirehead_registry(const std::vector<EnvSpec>& extra = {});

// True-objective formulas.
double true_atari(double task_complete, double steps, double max_steps);
double true_mujoco(double distance, double energy_used);
double user_sat(double relevance, double diversity, double novelty);
double gameplay_quality(double strategy_diversity, double fair_play, double engagement);
double precision_accuracy(double position_error_m, double energy_used, double max_energy);

// The family's per-step true objective over components in [0, 1].
double family_objective(EnvFamily family, double c0, double c1, double c2);

// ---------------------------------------------------------------------------
// Factorial design

// Planted hacking probability of a design cell, additive in +/-1 contrasts:
//   base + scale/2 * (-0.187 d - 0.312 a + 0.094 c - 0.076 d a)
// so the difference of mean frequencies between a factor's levels equals
// its coefficient times `scale`.
double planted_hacking_rate(const RewardDesign& d, double scale = 1.0, double base = 0.35);

// All eight cells for each environment and seed: envs x 8 x seeds_per_cell
// configs with mixed injection at the planted rate.
std::vector<StreamConfig> factorial_design(const std::vector<EnvSpec>& base_envs,
                                           std::size_t seeds_per_cell,
                                           std::size_t episodes_per_run, std::uint64_t seed,
                                           double scale = 1.0);

std::vector<RewardDesign> all_designs();

}  // namespace rhd::envgen

#endif  // RHD_ENVGEN_H_
