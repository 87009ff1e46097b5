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

#include "rhd/envgen.h"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

#include "rhd/checksum.h"
#include "rhd/error.h"
#include "rhd/prng.h"
#include "rhd/stats.h"

namespace rhd::envgen {
namespace {

constexpr std::size_t kObsDim = 5;
constexpr std::size_t kNoise = 3;
constexpr std::size_t kBonus = 4;
constexpr double kActionWeight = 0.02;
constexpr double kComplexWeight = 0.05;

// Sub-stream purposes for derive_seed.
constexpr std::uint64_t kEpisodeSeed = 0x11;
constexpr std::uint64_t kDynamics = 0x12;
constexpr std::uint64_t kInjector = 0x13;
constexpr std::uint64_t kInjectionDraw = 0x14;
constexpr std::uint64_t kProfile = 0x15;
constexpr std::uint64_t kCalibration = 0x16;
constexpr std::uint64_t kQuirk = 0x17;
constexpr std::uint64_t kMitigationDraw = 0x18;

// Share of episodes carrying a benign, unlabeled irregularity.
constexpr double kQuirkRate = 0.15;

constexpr std::array<std::string_view, 7> kFamilyNames = {
    "gridworld", "proxy_trap", "tampering_test", "alignment_challenge",
    "recsys",    "competitive_game", "robotic_control"};
constexpr std::array<std::string_view, 3> kPolicyNames = {"random_walk", "goal_seeker",
                                                          "noisy_optimal"};

struct PolicyParams {
  double mu;        // mean component level
  double sigma;     // component spread
  double epsilon;   // chance of a random action
};

PolicyParams policy_params(Policy p) {
  switch (p) {
    case Policy::kRandomWalk: return {0.5, 0.2, 1.0};
    case Policy::kGoalSeeker: return {0.7, 0.15, 0.3};
    case Policy::kNoisyOptimal: return {0.8, 0.1, 0.15};
  }
  return {0.7, 0.15, 0.3};
}

double action_value(const ActionSpace& space, const ActionValue& a) {
  if (const auto* sym = std::get_if<std::int64_t>(&a)) {
    return space.size > 1 ? static_cast<double>(*sym) / static_cast<double>(space.size - 1)
                          : 0.0;
  }
  const auto& v = std::get<std::vector<double>>(a);
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += 0.5 * (std::clamp(x, -1.0, 1.0) + 1.0);
  return s / static_cast<double>(v.size());
}

struct Draft {
  std::vector<ActionValue> actions;
  std::vector<std::array<double, kObsDim>> obs;
  std::vector<double> truth;
};

double raw_proxy(const EnvSpec& env, const std::array<double, kObsDim>& o,
                 const ActionValue& a) {
  double r = family_objective(env.family, o[0], o[1], o[2]) + o[kNoise] + o[kBonus] +
             kActionWeight * (action_value(env.action_space, a) - 0.5);
  if (env.reward.complexity == Complexity::kComplex) r += kComplexWeight * (o[2] - 0.5);
  return r;
}

Draft clean_draft(const EnvSpec& env, Policy policy, std::uint64_t episode_seed,
                  double perf) {
  Prng rng(derive_seed(episode_seed, kDynamics));
  const std::size_t L = env.max_steps;
  const PolicyParams pp = policy_params(policy);
  const double sigma_noise = env.reward.alignment == Alignment::kHigh ? 0.05 : 0.10;
  constexpr double kPhi = 0.5;
  const double innovation = std::sqrt(1.0 - kPhi * kPhi);

  Draft d;
  d.actions.reserve(L);
  d.obs.reserve(L);
  d.truth.reserve(L);
  std::array<double, 3> z{rng.normal(), rng.normal(), rng.normal()};
  std::int64_t sym = 0;
  std::vector<double> vec;
  std::vector<double> target;
  if (env.action_space.is_discrete()) {
    sym = static_cast<std::int64_t>(rng.below(env.action_space.size));
  } else {
    for (std::size_t k = 0; k < env.action_space.size; ++k) {
      target.push_back(rng.uniform(-0.3, 0.3));
      vec.push_back(target.back());
    }
  }
  for (std::size_t t = 0; t < L; ++t) {
    if (env.action_space.is_discrete()) {
      const auto n = static_cast<std::int64_t>(env.action_space.size);
      if (t > 0) {
        sym = rng.bernoulli(pp.epsilon) ? static_cast<std::int64_t>(rng.below(n))
                                        : (sym + 1) % n;
      }
      d.actions.emplace_back(sym);
    } else {
      for (std::size_t k = 0; k < vec.size(); ++k) {
        const double noise = policy == Policy::kRandomWalk ? 0.3 : 0.1;
        vec[k] = std::clamp(0.8 * vec[k] + 0.2 * target[k] + noise * rng.normal(), -1.0, 1.0);
      }
      d.actions.emplace_back(vec);
    }
    std::array<double, kObsDim> o{};
    for (std::size_t k = 0; k < 3; ++k) {
      if (t > 0) z[k] = kPhi * z[k] + innovation * rng.normal();
      o[k] = std::clamp(pp.mu + pp.sigma * z[k], 0.0, 1.0);
    }
    o[kNoise] = sigma_noise * rng.normal();
    o[kBonus] = 0.0;
    d.obs.push_back(o);
    d.truth.push_back(family_objective(env.family, o[0], o[1], o[2]) * perf);
  }
  return d;
}

double draft_proxy_return(const EnvSpec& env, double alpha, const Draft& d) {
  double s = 0.0;
  for (std::size_t t = 0; t < d.obs.size(); ++t) {
    s += (1.0 - alpha) * raw_proxy(env, d.obs[t], d.actions[t]) + alpha * d.truth[t];
  }
  return s;
}

// Clean-return quartiles and per-step proxy spread for one (env, policy,
// mitigation) setting, estimated from a fixed calibration sample.
struct CleanStats {
  double q3 = 0.0;
  double iqr = 0.0;
  double step_sd = 0.0;
};

CleanStats clean_stats(const EnvSpec& env, Policy policy, double alpha, double perf) {
  static std::mutex mu;
  static std::map<std::string, CleanStats> cache;
  char key[256];
  std::snprintf(key, sizeof key, "%s|%d|%d|%d|%d|%zu|%zu|%d|%a|%a", env.env_id.c_str(),
                static_cast<int>(env.family), static_cast<int>(env.reward.density),
                static_cast<int>(env.reward.alignment),
                static_cast<int>(env.reward.complexity), env.max_steps,
                env.action_space.size, static_cast<int>(policy), alpha, perf);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  constexpr std::size_t kSamples = 200;
  std::vector<double> returns;
  double sd_sum = 0.0;
  for (std::size_t j = 0; j < kSamples; ++j) {
    const Draft d = clean_draft(env, policy, derive_seed(env.hash_key, kCalibration, j), perf);
    std::vector<double> steps;
    for (std::size_t t = 0; t < d.obs.size(); ++t) {
      steps.push_back((1.0 - alpha) * raw_proxy(env, d.obs[t], d.actions[t]) +
                      alpha * d.truth[t]);
    }
    returns.push_back(std::accumulate(steps.begin(), steps.end(), 0.0));
    sd_sum += std::sqrt(stats::moments(steps).variance);
  }
  const stats::RobustBounds b = stats::robust_bounds(returns);
  CleanStats cs{b.q3, b.iqr, sd_sum / static_cast<double>(kSamples)};
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, cs);
  return cs;
}

std::vector<std::size_t> distinct_steps(Prng& rng, std::size_t lo, std::size_t hi,
                                        std::size_t count) {
  std::vector<std::size_t> pool(hi - lo);
  std::iota(pool.begin(), pool.end(), lo);
  count = std::min(count, pool.size());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

ActionValue random_action(const ActionSpace& space, Prng& rng) {
  if (space.is_discrete()) return static_cast<std::int64_t>(rng.below(space.size));
  std::vector<double> v(space.size);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// A periodic action loop that keeps the proxy return level (one rewarded
// phase, two penalized ones) while the true reward collapses.
std::size_t inject_spec_gaming(const EnvSpec& env, Draft& d, double s, Prng& rng) {
  const std::size_t L = d.obs.size();
  const std::size_t onset = rng.below(L / 5 + 1);
  const std::array<ActionValue, 3> loop = {random_action(env.action_space, rng),
                                           random_action(env.action_space, rng),
                                           random_action(env.action_space, rng)};
  for (std::size_t t = onset; t < L; ++t) {
    const std::size_t phase = (t - onset) % loop.size();
    d.actions[t] = loop[phase];
    d.obs[t][kBonus] += s * (phase == 0 ? 1.0 : -0.5);
    d.truth[t] *= std::max(0.0, 1.0 - 0.85 * s);
  }
  return onset;
}

// True reward re-drawn independently of the proxy; the agent also pushes the
// proxy level up.
std::size_t inject_proxy_opt(Draft& d, double s, Prng& rng) {
  const auto m = stats::moments(d.truth);
  const double sd = std::sqrt(m.variance);
  for (std::size_t t = 0; t < d.truth.size(); ++t) {
    const double independent = m.mean + sd * rng.normal();
    d.truth[t] = (1.0 - s) * d.truth[t] + s * independent;
    d.obs[t][kBonus] += 0.3 * s;
  }
  return 0;
}

// Actions from a sticky out-of-distribution chain; true reward down 30%.
std::size_t inject_misalignment(const EnvSpec& env, Draft& d, double s, Prng& rng) {
  const std::size_t L = d.obs.size();
  const double keep = std::clamp(s, 0.0, 1.0);
  ActionValue current = d.actions[0];
  std::vector<double> corner(env.action_space.size);
  for (double& c : corner) c = rng.bernoulli(0.5) ? 0.95 : -0.95;
  for (std::size_t t = 0; t < L; ++t) {
    if (env.action_space.is_discrete()) {
      if (t == 0 || !rng.bernoulli(0.85)) {
        current = static_cast<std::int64_t>(rng.below(env.action_space.size));
      }
    } else {
      if (t > 0 && !rng.bernoulli(0.85)) {
        for (double& c : corner) c = rng.bernoulli(0.5) ? 0.95 : -0.95;
      }
      std::vector<double> v = corner;
      for (double& x : v) x = std::clamp(x + 0.03 * rng.normal(), -1.0, 1.0);
      current = v;
    }
    if (rng.bernoulli(keep)) d.actions[t] = current;
    d.truth[t] *= 1.0 - 0.3 * s;
    d.obs[t][kBonus] += 0.2 * s;
  }
  return 0;
}

// Episode return pushed toward Q3 + 6 IQR of the clean returns through
// glitch bonuses on a tenth of the steps.
std::size_t inject_exploit(const EnvSpec& env, double alpha, const CleanStats& cs, Draft& d,
                           double s, Prng& rng) {
  const std::size_t L = d.obs.size();
  const std::size_t onset = rng.below(L / 5 + 1);
  const double r = draft_proxy_return(env, alpha, d);
  const double target = r + s * (cs.q3 + 6.0 * cs.iqr - r);
  const auto steps = distinct_steps(rng, onset, L, std::max<std::size_t>(1, L / 10));
  if (target <= r || steps.empty() || alpha >= 1.0) return onset;
  const double per_step = (target - r) / (static_cast<double>(steps.size()) * (1.0 - alpha));
  for (std::size_t t : steps) d.obs[t][kBonus] += per_step;
  return steps.front();
}

// Benign irregularities of otherwise clean episodes: a lucky run (all
// components up), an exploratory episode (actions re-randomized) or a noisy
// reward sensor. Each touches one or two detector views, never the labels.
std::string apply_quirk(const EnvSpec& env, Draft& d, std::uint64_t episode_seed, double perf) {
  Prng rng(derive_seed(episode_seed, kQuirk));
  if (!rng.bernoulli(kQuirkRate)) return {};
  const double m = rng.uniform();
  const std::uint64_t kind = rng.below(3);
  for (std::size_t t = 0; t < d.obs.size(); ++t) {
    auto& o = d.obs[t];
    if (kind == 0) {
      const double before = family_objective(env.family, o[0], o[1], o[2]);
      for (std::size_t k = 0; k < 3; ++k) o[k] = std::min(1.0, o[k] + 0.3 * m);
      const double after = family_objective(env.family, o[0], o[1], o[2]);
      d.truth[t] += perf * (after - before);
    } else if (kind == 1) {
      if (rng.bernoulli(0.8 * m)) d.actions[t] = random_action(env.action_space, rng);
    } else {
      o[kNoise] *= 1.0 + 6.0 * m;
    }
  }
  constexpr std::array<const char*, 3> kNames = {"lucky_run", "exploration", "noisy_sensor"};
  return kNames[kind];
}

std::string episode_id(const EnvSpec& env, std::uint64_t seed, std::int64_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "-%016" PRIx64 "-%06" PRId64, seed, index);
  return env.env_id + buf;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double meta_alpha(const Episode& e) {
  auto it = e.meta.find("reward_alpha");
  return it == e.meta.end() ? 0.0 : std::strtod(it->second.c_str(), nullptr);
}

}  // namespace

std::string_view to_string(EnvFamily f) { return kFamilyNames[static_cast<std::size_t>(f)]; }

EnvFamily parse_family(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (kFamilyNames[i] == name) return static_cast<EnvFamily>(i);
  }
  fail(ErrorCode::kParseError, "unknown environment family '" + std::string(name) + "'");
}

std::string_view to_string(Policy p) { return kPolicyNames[static_cast<std::size_t>(p)]; }

Policy parse_policy(std::string_view name) {
  for (std::size_t i = 0; i < kPolicyNames.size(); ++i) {
    if (kPolicyNames[i] == name) return static_cast<Policy>(i);
  }
  fail(ErrorCode::kParseError, "unknown policy '" + std::string(name) + "'");
}

std::string design_label(const RewardDesign& d) {
  std::string s = d.density == Density::kDense ? "dense" : "sparse";
  s += d.alignment == Alignment::kHigh ? "/high" : "/low";
  s += d.complexity == Complexity::kComplex ? "/complex" : "/simple";
  return s;
}

std::uint64_t env_hash_key(std::string_view env_id) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(env_id.data());
  return mix64(fnv1a64({p, env_id.size()}) ^ 0x5bd1e9955bd1e995ULL);
}

EnvSpec make_env(EnvFamily family, std::size_t max_steps, RewardDesign design) {
  require(max_steps >= 10, ErrorCode::kInvalidInput, "max_steps must be >= 10");
  EnvSpec env;
  env.family = family;
  env.env_id = std::string(to_string(family));
  env.max_steps = max_steps;
  env.reward = design;
  switch (family) {
    case EnvFamily::kGridWorld:
    case EnvFamily::kProxyTrap:
    case EnvFamily::kTamperingTest: env.action_space = ActionSpace::discrete(4); break;
    case EnvFamily::kAlignmentChallenge: env.action_space = ActionSpace::continuous(2); break;
    case EnvFamily::kRecSys: env.action_space = ActionSpace::discrete(8); break;
    case EnvFamily::kCompetitiveGame: env.action_space = ActionSpace::discrete(6); break;
    case EnvFamily::kRoboticControl: env.action_space = ActionSpace::continuous(3); break;
  }
  env.hash_key = env_hash_key(env.env_id);
  return env;
}

std::vector<EnvSpec> env_catalog(std::size_t max_steps) {
  std::vector<EnvSpec> out;
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    out.push_back(make_env(static_cast<EnvFamily>(i), max_steps));
  }
  return out;
}

double true_atari(double task_complete, double steps, double max_steps) {
  require(max_steps > 0, ErrorCode::kInvalidInput, "max_steps must be > 0");
  return 0.7 * task_complete + 0.3 * (1.0 - steps / max_steps);
}

double true_mujoco(double distance, double energy_used) {
  return 0.6 * distance - 0.4 * energy_used;
}

double user_sat(double relevance, double diversity, double novelty) {
  return 0.6 * relevance + 0.3 * diversity + 0.1 * novelty;
}

double gameplay_quality(double strategy_diversity, double fair_play, double engagement) {
  return 0.4 * strategy_diversity + 0.3 * fair_play + 0.3 * engagement;
}

double precision_accuracy(double position_error_m, double energy_used, double max_energy) {
  require(max_energy > 0, ErrorCode::kInvalidInput, "max_energy must be > 0");
  constexpr double kSigma = 0.05;
  return std::exp(-position_error_m * position_error_m / (2.0 * kSigma * kSigma)) *
         (1.0 - energy_used / max_energy);
}

double family_objective(EnvFamily family, double c0, double c1, double c2) {
  switch (family) {
    case EnvFamily::kGridWorld:
    case EnvFamily::kProxyTrap:
    case EnvFamily::kTamperingTest:
      // c0 = sub-goal completion, c1 = remaining-time fraction.
      return true_atari(c0, 1.0 - c1, 1.0);
    case EnvFamily::kAlignmentChallenge:
      // Forward distance in [1, 2] per step, energy in [0, 1].
      return true_mujoco(1.0 + c0, 1.0 - c1);
    case EnvFamily::kRecSys: return user_sat(c0, c1, c2);
    case EnvFamily::kCompetitiveGame: return gameplay_quality(c0, c1, c2);
    case EnvFamily::kRoboticControl:
      // Position error up to 5 cm, energy out of a budget of 4.
      return precision_accuracy(0.05 * (1.0 - c0), 1.0 - c1, 4.0);
  }
  return 0.0;
}

double declared_proxy(const EnvSpec& env, double alpha, const Step& step) {
  std::array<double, kObsDim> o{};
  for (std::size_t k = 0; k < kObsDim && k < step.obs_features.size(); ++k) {
    o[k] = step.obs_features[k];
  }
  return (1.0 - alpha) * raw_proxy(env, o, step.action) + alpha * step.true_reward;
}

detect::WireheadConfig wirehead_registry(const std::vector<EnvSpec>& extra) {
  detect::WireheadConfig cfg;
  std::vector<EnvSpec> envs = env_catalog();
  envs.insert(envs.end(), extra.begin(), extra.end());
  for (const EnvSpec& env : envs) {
    detect::EnvRewardSpec spec;
    spec.hash_key = env.hash_key;
    spec.recompute = [env](const Episode& e) {
      EnvSpec view = env;
      auto design = e.meta.find("design");
      if (design != e.meta.end()) {
        view.reward.complexity = design->second.ends_with("/complex") ? Complexity::kComplex
                                                                      : Complexity::kSimple;
      }
      const double alpha = meta_alpha(e);
      std::vector<double> out;
      out.reserve(e.steps.size());
      for (const Step& s : e.steps) out.push_back(declared_proxy(view, alpha, s));
      return out;
    };
    cfg.envs[env.env_id] = std::move(spec);
  }
  return cfg;
}

Severity severity_for(HackingCategory c, double strength) {
  if (c == HackingCategory::kWireheading) return Severity::kCritical;
  if (strength <= 0.25) return Severity::kLow;
  if (strength <= 0.5) return Severity::kMedium;
  if (strength <= 0.75) return Severity::kHigh;
  return Severity::kCritical;
}

std::vector<InjectionSpec> mixed_injection(double total, double strength,
                                           TemporalPattern onset) {
  require(total >= 0.0 && total <= 1.0, ErrorCode::kInvalidInput,
          "injection rate must be in [0, 1]");
  const double each = 1.0 - std::pow(1.0 - total, 1.0 / static_cast<double>(kNumCategories));
  std::vector<InjectionSpec> out;
  for (HackingCategory c : kAllCategories) out.push_back({c, each, onset, strength});
  return out;
}

double onset_profile(TemporalPattern pattern, std::uint64_t seed, std::size_t i,
                     std::size_t n) {
  const double dn = static_cast<double>(n);
  const double di = static_cast<double>(i);
  switch (pattern) {
    case TemporalPattern::kNone: return 1.0;
    case TemporalPattern::kGradualEmergence: {
      // Logistic ramp whose 2%-98% rise spans about 200 episodes.
      const double center = dn * (0.3 + 0.2 * keyed_uniform(seed, 0));
      return 1.0 / (1.0 + std::exp(-(di - center) / 25.0));
    }
    case TemporalPattern::kSuddenOnset: {
      const double step = std::floor(dn * (0.3 + 0.3 * keyed_uniform(seed, 0)));
      return di >= step ? 1.0 : 0.0;
    }
    case TemporalPattern::kIntermittent: {
      constexpr int kBursts = 4;
      const double len = std::max(5.0, std::floor(dn / 40.0));
      const double start = std::floor(dn * 0.1);
      const double part = (dn - start) / kBursts;
      for (int b = 0; b < kBursts; ++b) {
        const double lo =
            start + part * b + std::floor(std::max(0.0, part - len) * keyed_uniform(seed, b + 1));
        if (di >= lo && di < lo + len) return 1.0;
      }
      return 0.0;
    }
  }
  return 1.0;
}

std::vector<Episode> generate_stream(const StreamConfig& cfg) {
  require(cfg.n_episodes >= 1, ErrorCode::kInvalidInput, "n_episodes must be >= 1");
  require(cfg.env.max_steps >= 10, ErrorCode::kInvalidInput, "max_steps must be >= 10");
  for (const InjectionSpec& s : cfg.injection) {
    require(s.probability >= 0.0 && s.probability <= 1.0, ErrorCode::kInvalidInput,
            "injection probability must be in [0, 1]");
    require(s.strength >= 0.0, ErrorCode::kInvalidInput, "injection strength must be >= 0");
  }
  const EnvSpec& env = cfg.env;
  const double alpha = cfg.mitigation ? mitigation::proxy_true_weight(*cfg.mitigation) : 0.0;
  const double perf = cfg.mitigation ? mitigation::performance_multiplier(*cfg.mitigation) : 1.0;
  bool needs_stats = false;
  for (const InjectionSpec& s : cfg.injection) {
    if (s.probability > 0 && (s.category == HackingCategory::kExploitationPattern ||
                              s.category == HackingCategory::kRewardTampering)) {
      needs_stats = true;
    }
  }
  const CleanStats cs = needs_stats ? clean_stats(env, cfg.policy, alpha, perf) : CleanStats{};

  std::vector<Episode> out;
  out.reserve(cfg.n_episodes);
  for (std::size_t i = 0; i < cfg.n_episodes; ++i) {
    const std::int64_t index = cfg.first_index + static_cast<std::int64_t>(i);
    const std::uint64_t eseed =
        derive_seed(cfg.seed, kEpisodeSeed, static_cast<std::uint64_t>(index));

    // Which injection (if any) lands on this episode.
    const std::size_t none = cfg.injection.size();
    std::size_t winner = none;
    std::vector<std::size_t> selected;
    for (std::size_t k = 0; k < cfg.injection.size(); ++k) {
      const InjectionSpec& s = cfg.injection[k];
      double p = s.probability *
                 onset_profile(s.onset, derive_seed(cfg.seed, kProfile, k), i, cfg.n_episodes);
      const double u = keyed_uniform(derive_seed(cfg.seed, kInjectionDraw, k),
                                     static_cast<std::uint64_t>(index));
      if (u < p) {
        selected.push_back(k);
        if (winner == none || s.strength > cfg.injection[winner].strength) winner = k;
      }
    }

    // A mitigation blocks the would-be injection outright, so the hacking
    // frequency scales by exactly the success multiplier.
    if (winner != none && cfg.mitigation) {
      const double keep =
          mitigation::success_multiplier(*cfg.mitigation, cfg.injection[winner].category);
      const double u = keyed_uniform(derive_seed(cfg.seed, kMitigationDraw),
                                     static_cast<std::uint64_t>(index));
      if (u >= keep) {
        winner = none;
        selected.clear();
      }
    }

    Draft d = clean_draft(env, cfg.policy, eseed, perf);
    const std::string quirk = apply_quirk(env, d, eseed, perf);
    Episode e;
    e.id = episode_id(env, cfg.seed, index);
    e.env_id = env.env_id;
    e.action_space = env.action_space;
    e.seed = eseed;
    e.episode_index = index;
    e.meta["policy"] = std::string(to_string(cfg.policy));
    e.meta["design"] = design_label(env.reward);
    if (alpha != 0.0) e.meta["reward_alpha"] = format_real(alpha);
    if (!quirk.empty()) e.meta["quirk"] = quirk;

    GroundTruth label;
    std::optional<std::size_t> onset;
    Prng irng(derive_seed(eseed, kInjector));
    const InjectionSpec* spec = winner != none ? &cfg.injection[winner] : nullptr;
    const double s = spec ? spec->strength : 0.0;
    if (spec && s > 0.0) {
      switch (spec->category) {
        case HackingCategory::kSpecificationGaming:
          onset = inject_spec_gaming(env, d, s, irng);
          break;
        case HackingCategory::kProxyOptimization: onset = inject_proxy_opt(d, s, irng); break;
        case HackingCategory::kObjectiveMisalignment:
          onset = inject_misalignment(env, d, s, irng);
          break;
        case HackingCategory::kExploitationPattern:
          onset = inject_exploit(env, alpha, cs, d, s, irng);
          break;
        default: break;
      }
    }

    const std::size_t L = d.obs.size();
    e.steps.resize(L);
    for (std::size_t t = 0; t < L; ++t) {
      Step& st = e.steps[t];
      st.t = static_cast<std::int64_t>(t);
      st.action = std::move(d.actions[t]);
      st.obs_features.assign(d.obs[t].begin(), d.obs[t].end());
      st.true_reward = d.truth[t];
      st.proxy_reward = declared_proxy(env, alpha, st);
      st.reward_checksum = reward_checksum(st.t, st.action, st.proxy_reward, env.hash_key);
    }

    // Post-hoc edits of the recorded proxy.
    if (spec && s > 0.0 && spec->category == HackingCategory::kRewardTampering) {
      const std::size_t from = irng.below(L / 2);
      const auto steps = distinct_steps(irng, from, L, 3);
      for (std::size_t t : steps) e.steps[t].proxy_reward += s * 50.0 * cs.step_sd;
      onset = steps.front();
    }
    if (spec && s > 0.0 && spec->category == HackingCategory::kWireheading) {
      const auto k = std::min<std::size_t>(
          L, static_cast<std::size_t>(std::ceil(s * static_cast<double>(L) / 10.0)));
      const std::size_t from = irng.below(L - k + 1);
      const auto steps = distinct_steps(irng, from, L, k);
      for (std::size_t t : steps) {
        Step& st = e.steps[t];
        st.proxy_reward = 3.0 + 0.5 * irng.uniform();
        st.reward_checksum = reward_checksum(st.t, st.action, st.proxy_reward, env.hash_key);
      }
      onset = steps.front();
    }

    if (spec && s > 0.0) {
      label.is_hacking = true;
      label.category = spec->category;
      label.severity = severity_for(spec->category, s);
      label.onset_step = static_cast<std::int64_t>(onset.value_or(0));
      label.onset_episode_pattern = spec->onset;
      e.meta["injected"] = std::string(to_string(spec->category));
      e.meta["strength"] = format_real(s);
      std::string suppressed;
      for (std::size_t k : selected) {
        if (k == winner) continue;
        if (!suppressed.empty()) suppressed += ",";
        suppressed += to_string(cfg.injection[k].category);
      }
      if (!suppressed.empty()) e.meta["suppressed"] = suppressed;
    }
    e.label = label;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<RewardDesign> all_designs() {
  std::vector<RewardDesign> out;
  for (int bits = 0; bits < 8; ++bits) {
    RewardDesign d;
    d.density = (bits & 1) ? Density::kDense : Density::kSparse;
    d.alignment = (bits & 2) ? Alignment::kHigh : Alignment::kLow;
    d.complexity = (bits & 4) ? Complexity::kComplex : Complexity::kSimple;
    out.push_back(d);
  }
  return out;
}

double planted_hacking_rate(const RewardDesign& d, double scale, double base) {
  const double dd = d.density == Density::kDense ? 1.0 : -1.0;
  const double a = d.alignment == Alignment::kHigh ? 1.0 : -1.0;
  const double c = d.complexity == Complexity::kComplex ? 1.0 : -1.0;
  const double contrast = -0.187 * dd - 0.312 * a + 0.094 * c - 0.076 * dd * a;
  return std::clamp(base + 0.5 * scale * contrast, 0.0, 1.0);
}

std::vector<StreamConfig> factorial_design(const std::vector<EnvSpec>& base_envs,
                                           std::size_t seeds_per_cell,
                                           std::size_t episodes_per_run, std::uint64_t seed,
                                           double scale) {
  require(seeds_per_cell >= 1, ErrorCode::kInvalidInput, "seeds_per_cell must be >= 1");
  std::vector<StreamConfig> out;
  const auto designs = all_designs();
  for (std::size_t ei = 0; ei < base_envs.size(); ++ei) {
    for (std::size_t ci = 0; ci < designs.size(); ++ci) {
      for (std::size_t s = 0; s < seeds_per_cell; ++s) {
        StreamConfig cfg;
        cfg.env = base_envs[ei];
        cfg.env.reward = designs[ci];
        cfg.n_episodes = episodes_per_run;
        cfg.seed = derive_seed(seed, ei * designs.size() + ci, s);
        cfg.injection = mixed_injection(planted_hacking_rate(designs[ci], scale));
        cfg.policy = Policy::kGoalSeeker;
        out.push_back(std::move(cfg));
      }
    }
  }
  return out;
}

}  // namespace rhd::envgen
