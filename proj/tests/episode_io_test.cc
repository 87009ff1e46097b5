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

#include "rhd/episode_io.h"

#include <cfloat>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "rhd/prng.h"
#include "testing/error_matchers.h"

namespace rhd {
namespace {

using testing_util::ExpectError;

// Reals that stress shortest round-trip printing.
double awkward_real(Prng& rng) {
  switch (rng.below(6)) {
    case 0: return 0.1 * static_cast<double>(rng.below(100));
    case 1: return rng.normal() * 1e300;
    case 2: return DBL_MIN * rng.uniform();  // subnormal
    case 3: return -0.0;
    case 4: return std::nextafter(1.0, 2.0);
    default: return rng.normal();
  }
}

Episode random_episode(Prng& rng, std::int64_t index) {
  Episode e;
  e.id = "e\"" + std::to_string(index) + "\\";
  e.env_id = rng.bernoulli(0.5) ? "gridworld" : "robotic_control";
  e.seed = rng.next_u64();
  e.episode_index = index;
  const bool continuous = rng.bernoulli(0.5);
  e.action_space = continuous ? ActionSpace::continuous(1 + rng.below(3))
                              : ActionSpace::discrete(1 + rng.below(9));
  const std::size_t len = 1 + rng.below(20);
  for (std::size_t t = 0; t < len; ++t) {
    Step s;
    s.t = static_cast<std::int64_t>(t);
    if (continuous) {
      std::vector<double> a(e.action_space.size);
      for (double& x : a) x = awkward_real(rng);
      s.action = a;
    } else {
      s.action = static_cast<std::int64_t>(rng.below(e.action_space.size));
    }
    for (std::size_t k = 0; k < rng.below(4); ++k) s.obs_features.push_back(awkward_real(rng));
    s.proxy_reward = awkward_real(rng);
    s.true_reward = awkward_real(rng);
    s.reward_checksum = rng.next_u64();
    e.steps.push_back(s);
  }
  if (rng.bernoulli(0.5)) {
    GroundTruth g;
    g.is_hacking = rng.bernoulli(0.5);
    if (g.is_hacking) {
      g.category = kAllCategories[rng.below(kNumCategories)];
      g.severity = Severity::kHigh;
      g.onset_step = static_cast<std::int64_t>(rng.below(len));
      if (rng.bernoulli(0.5)) g.onset_episode_pattern = TemporalPattern::kSuddenOnset;
    }
    e.label = g;
  }
  if (rng.bernoulli(0.5)) e.meta["policy"] = "goal_seeker";
  return e;
}

TEST(EpisodeIoTest, RoundTripIsFieldExact) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Prng rng(seed);
    const Episode e = random_episode(rng, static_cast<std::int64_t>(seed));
    const std::string line = serialize_episode(e);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const Episode back = parse_episode(line);
    ASSERT_EQ(back, e) << line;
    // Bitwise, so -0.0 and subnormals survive too.
    for (std::size_t t = 0; t < e.steps.size(); ++t) {
      EXPECT_EQ(std::signbit(back.steps[t].proxy_reward), std::signbit(e.steps[t].proxy_reward));
    }
    EXPECT_EQ(serialize_episode(back), line);
  }
}

TEST(EpisodeIoTest, DocumentedLayout) {
  Episode e;
  e.id = "a";
  e.env_id = "gridworld";
  e.action_space = ActionSpace::discrete(4);
  e.seed = 7;
  Step s;
  s.action = std::int64_t{2};
  s.obs_features = {0.1};
  s.proxy_reward = 1.25;
  s.true_reward = 1.0;
  s.reward_checksum = 0xab;
  e.steps.push_back(s);
  // Keys come out sorted.
  EXPECT_EQ(serialize_episode(e),
            R"({"action_space":{"kind":"discrete","size":4},"env_id":"gridworld",)"
            R"("episode_index":0,"id":"a","seed":7,"steps":[{"a":2,"ck":"00000000000000ab",)"
            R"("obs":[0.1],"rp":1.25,"rt":1.0,"t":0}],"v":1})");
}

TEST(EpisodeIoTest, ImportedTotalsAndDefaults) {
  std::istringstream in(
      R"({"id":"x","proxy_return":5.5,"true_return":2,"source":"ext","extra":[1,2]})"
      "\n\n"
      R"({"id":"y","proxy_return":1,"true_return":1})"
      "\n");
  const auto eps = read_episodes(in);
  ASSERT_EQ(eps.size(), 2u);
  EXPECT_EQ(eps[0].steps.size(), 1u);
  EXPECT_EQ(eps[0].proxy_return(), 5.5);
  EXPECT_EQ(eps[0].true_return(), 2.0);
  EXPECT_EQ(eps[0].episode_index, 0);
  EXPECT_EQ(eps[1].episode_index, 1);
  EXPECT_EQ(eps[0].unknown_fields.at("source"), "\"ext\"");
  EXPECT_EQ(eps[0].unknown_fields.at("extra"), "[1,2]");
  // Unknown fields are dropped on write.
  EXPECT_EQ(serialize_episode(eps[0]).find("source"), std::string::npos);
}

TEST(EpisodeIoTest, ParseErrorsNameTheLine) {
  std::istringstream in(R"({"id":"ok","proxy_return":1,"true_return":1})"
                        "\n"
                        R"({"id":"bad"})"
                        "\n");
  const std::string msg = ExpectError(ErrorCode::kParseError, [&] { read_episodes(in); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;

  ExpectError(ErrorCode::kParseError, [] { parse_episode("{not json"); });
  ExpectError(ErrorCode::kParseError, [] { parse_episode("[1,2]"); });
  ExpectError(ErrorCode::kParseError,
              [] { parse_episode(R"({"v":2,"id":"a","proxy_return":1,"true_return":1})"); });
  ExpectError(ErrorCode::kParseError, [] {
    parse_episode(R"({"id":"a","steps":[{"t":0,"a":1,"rp":1,"rt":1,"ck":"zz"}]})");
  });
}

TEST(EpisodeIoTest, FileRoundTrip) {
  const auto path = std::filesystem::path(::testing::TempDir()) / "episode_io_test.jsonl";
  std::vector<Episode> eps;
  Prng rng(1);
  for (int i = 0; i < 20; ++i) eps.push_back(random_episode(rng, i));
  write_episode_log(path, eps);
  EXPECT_EQ(read_episode_log(path), eps);
  std::filesystem::remove(path);
  ExpectError(ErrorCode::kIoError, [&] { read_episode_log(path); });
}

}  // namespace
}  // namespace rhd
