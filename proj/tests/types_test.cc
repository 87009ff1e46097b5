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

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "rhd/error.h"
#include "testing/error_matchers.h"
#include "testing/generators.h"

namespace rhd {
namespace {

using testing_util::ExpectError;

Episode well_formed() {
  std::vector<double> r(10, 1.0);
  return gen::episode(r, r);
}

TEST(TaxonomyTest, SixCategoriesWithStableNames) {
  std::set<std::string> names;
  for (HackingCategory c : kAllCategories) {
    const std::string n(to_string(c));
    names.insert(n);
    EXPECT_EQ(parse_category(n), c);
  }
  EXPECT_EQ(names.size(), kNumCategories);
  EXPECT_EQ(to_string(HackingCategory::kSpecificationGaming), "specification_gaming");
  EXPECT_EQ(to_string(HackingCategory::kWireheading), "wireheading");
  ExpectError(ErrorCode::kParseError, [] { parse_category("reward_gaming"); });
}

TEST(TaxonomyTest, SeverityOrderAndPatterns) {
  EXPECT_LT(Severity::kLow, Severity::kMedium);
  EXPECT_LT(Severity::kMedium, Severity::kHigh);
  EXPECT_LT(Severity::kHigh, Severity::kCritical);
  for (Severity s : {Severity::kLow, Severity::kMedium, Severity::kHigh, Severity::kCritical})
    EXPECT_EQ(parse_severity(to_string(s)), s);
  for (TemporalPattern p : {TemporalPattern::kNone, TemporalPattern::kGradualEmergence,
                            TemporalPattern::kSuddenOnset, TemporalPattern::kIntermittent})
    EXPECT_EQ(parse_temporal_pattern(to_string(p)), p);
  ExpectError(ErrorCode::kParseError, [] { parse_temporal_pattern("slow"); });
}

TEST(ValidateEpisodeTest, WellFormed) { EXPECT_TRUE(validate_episode(well_formed()).empty()); }

TEST(ValidateEpisodeTest, RepeatedStepIndex) {
  std::vector<double> r(4, 1.0);
  Episode e = gen::episode(r, r);
  e.steps[2].t = 1;
  e.steps[3].t = 2;
  EXPECT_EQ(validate_episode(e), std::vector<std::string>{"non-increasing t at index 2"});
}

TEST(ValidateEpisodeTest, ContinuousArityMismatch) {
  std::vector<double> r(8, 0.0);
  Episode e = gen::episode(r, r);
  e.action_space = ActionSpace::continuous(3);
  for (auto& s : e.steps) s.action = std::vector<double>{0.1, 0.2, 0.3};
  e.steps[5].action = std::vector<double>{0.1, 0.2};
  EXPECT_EQ(validate_episode(e), std::vector<std::string>{"action arity mismatch at step 5"});
}

TEST(ValidateEpisodeTest, OtherViolations) {
  Episode e = well_formed();
  e.steps[3].proxy_reward = std::nan("");
  e.steps[4].action = std::int64_t{9};
  e.label = GroundTruth{};
  e.label->category = HackingCategory::kWireheading;
  const auto v = validate_episode(e);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], "non-finite proxy_reward at step 3");
  EXPECT_EQ(v[1], "action symbol out of range at step 4");

  Episode empty;
  EXPECT_FALSE(validate_episode(empty).empty());

  Episode late = well_formed();
  late.label = GroundTruth{true, HackingCategory::kRewardTampering, Severity::kHigh, 10, {}};
  EXPECT_EQ(validate_episode(late), std::vector<std::string>{"label onset_step outside episode"});
}

TEST(EpisodeTest, Returns) {
  const Episode e = gen::episode({1.0, 2.0, 3.0}, {0.5, 0.5, 0.0});
  EXPECT_EQ(e.proxy_return(), 6.0);
  EXPECT_EQ(e.true_return(), 1.0);
  EXPECT_EQ(e.length(), 3u);
  EXPECT_FALSE(e.is_hacking());
}

TEST(ErrorTest, CodeNames) {
  EXPECT_EQ(error_code_name(ErrorCode::kConfigError), "ConfigError");
  EXPECT_EQ(error_code_name(ErrorCode::kEmptyInput), "EmptyInput");
  const Error err(ErrorCode::kFitError, "boom");
  EXPECT_EQ(err.code(), ErrorCode::kFitError);
  EXPECT_STREQ(err.what(), "boom");
}

}  // namespace
}  // namespace rhd
