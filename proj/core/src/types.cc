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

#include "rhd/types.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "rhd/error.h"

namespace rhd {
namespace {

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "specification_gaming",   "reward_tampering",     "proxy_optimization",
    "objective_misalignment", "exploitation_pattern", "wireheading",
};
constexpr std::array<std::string_view, 4> kSeverityNames = {
    "low", "medium", "high", "critical"};
constexpr std::array<std::string_view, 4> kPatternNames = {
    "none", "gradual_emergence", "sudden_onset", "intermittent"};

template <typename Enum, std::size_t N>
Enum parse_name(const std::array<std::string_view, N>& names,
                std::string_view name, std::string_view what) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    fail(ErrorCode::kParseError,
         "unknown " + std::string(what) + " '" + std::string(name) + "'");
  }
  return static_cast<Enum>(it - names.begin());
}

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kFitError: return "FitError";
    case ErrorCode::kCalibrationError: return "CalibrationError";
    case ErrorCode::kUndefined: return "Undefined";
    case ErrorCode::kMissingCell: return "MissingCell";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
  }
  return "Unknown";
}

std::string_view to_string(HackingCategory c) {
  return kCategoryNames[index_of(c)];
}
std::string_view to_string(Severity s) {
  return kSeverityNames[static_cast<std::size_t>(s)];
}
std::string_view to_string(TemporalPattern p) {
  return kPatternNames[static_cast<std::size_t>(p)];
}
HackingCategory parse_category(std::string_view name) {
  return parse_name<HackingCategory>(kCategoryNames, name, "hacking category");
}
Severity parse_severity(std::string_view name) {
  return parse_name<Severity>(kSeverityNames, name, "severity");
}
TemporalPattern parse_temporal_pattern(std::string_view name) {
  return parse_name<TemporalPattern>(kPatternNames, name, "temporal pattern");
}

double Episode::proxy_return() const {
  double sum = 0.0;
  for (const Step& s : steps) sum += s.proxy_reward;
  return sum;
}

double Episode::true_return() const {
  double sum = 0.0;
  for (const Step& s : steps) sum += s.true_reward;
  return sum;
}

std::vector<std::string> validate_episode(const Episode& e) {
  std::vector<std::string> out;
  if (e.steps.empty()) out.push_back("episode has no steps");
  if (e.action_space.size == 0) out.push_back("action_space size is 0");

  for (std::size_t i = 0; i < e.steps.size(); ++i) {
    const Step& s = e.steps[i];
    const std::string where = std::to_string(i);
    if (i == 0 && s.t != 0) {
      out.push_back("first step t must be 0 at index 0");
    } else if (i > 0 && s.t <= e.steps[i - 1].t) {
      out.push_back("non-increasing t at index " + where);
    }
    if (!std::isfinite(s.proxy_reward)) {
      out.push_back("non-finite proxy_reward at step " + where);
    }
    if (!std::isfinite(s.true_reward)) {
      out.push_back("non-finite true_reward at step " + where);
    }
    if (e.action_space.is_discrete()) {
      const auto* sym = std::get_if<std::int64_t>(&s.action);
      if (sym == nullptr) {
        out.push_back("action arity mismatch at step " + where);
      } else if (*sym < 0 ||
                 static_cast<std::size_t>(*sym) >= e.action_space.size) {
        out.push_back("action symbol out of range at step " + where);
      }
    } else {
      const auto* vec = std::get_if<std::vector<double>>(&s.action);
      if (vec == nullptr || vec->size() != e.action_space.size) {
        out.push_back("action arity mismatch at step " + where);
      }
    }
  }

  if (e.label && !e.label->is_hacking &&
      (e.label->category || e.label->severity || e.label->onset_step)) {
    out.push_back("non-hacking label carries category/severity/onset");
  }
  if (e.label && e.label->onset_step &&
      (*e.label->onset_step < 0 ||
       static_cast<std::size_t>(*e.label->onset_step) >= e.steps.size())) {
    out.push_back("label onset_step outside episode");
  }
  return out;
}

}  // namespace rhd
