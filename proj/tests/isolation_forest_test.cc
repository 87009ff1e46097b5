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

#include "rhd/isolation_forest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "rhd/prng.h"
#include "rhd/stats.h"
#include "testing/error_matchers.h"

namespace rhd::stats {
namespace {

using testing_util::ExpectError;

std::vector<std::vector<double>> unit_cube(Prng& rng, std::size_t n, std::size_t d) {
  std::vector<std::vector<double>> v(n, std::vector<double>(d));
  for (auto& p : v)
    for (double& x : p) x = rng.uniform();
  return v;
}

TEST(AveragePathLengthTest, KnownValues) {
  EXPECT_EQ(average_path_length(0), 0.0);
  EXPECT_EQ(average_path_length(1), 0.0);
  EXPECT_EQ(average_path_length(2), 1.0);
  // Harmonic number approximated as ln(i) + gamma; the gap to the exact sum
  // shrinks like 1 / n.
  const double gamma = 0.57721566490153286;
  for (std::size_t n : {3, 10, 256, 1000}) {
    const double m = static_cast<double>(n - 1);
    EXPECT_NEAR(average_path_length(n), 2 * (std::log(m) + gamma) - 2 * m / n, 1e-12) << n;
    long double h = 0;
    for (std::size_t i = 1; i < n; ++i) h += 1.0L / i;
    const double exact = static_cast<double>(2 * h - 2.0L * m / n);
    EXPECT_NEAR(average_path_length(n), exact, 1.0 / m) << n;
  }
}

TEST(IsolationForestTest, IdenticalVectors) {
  const std::vector<std::vector<double>> v(100, {1.0, 2.0, 3.0});
  IsolationForestParams p;
  p.seed = 4;
  const auto m = isolation_forest_fit(v, p);
  const double s0 = isolation_forest_score(m, v[0]);
  for (const auto& x : v) EXPECT_EQ(isolation_forest_score(m, x), s0);
  EXPECT_EQ(m.score_threshold, s0);
}

TEST(IsolationForestTest, PlantedOutlierRanksFirst) {
  int top = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Prng rng(derive_seed(99, trial));
    auto v = unit_cube(rng, 99, 3);
    v.push_back({10.0, 10.0, 10.0});
    IsolationForestParams p;
    p.seed = trial;
    const auto m = isolation_forest_fit(v, p);
    const double outlier = isolation_forest_score(m, v.back());
    bool best = true;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
      best = best && isolation_forest_score(m, v[i]) < outlier;
    top += best;
  }
  EXPECT_GE(top, 95);
}

TEST(IsolationForestTest, ContaminationSetsNinetiethPercentile) {
  Prng rng(8);
  const auto v = unit_cube(rng, 200, 4);
  IsolationForestParams p;
  p.contamination = 0.1;
  const auto m = isolation_forest_fit(v, p);
  std::vector<double> scores;
  for (const auto& x : v) scores.push_back(isolation_forest_score(m, x));
  EXPECT_DOUBLE_EQ(m.score_threshold, quantile(scores, 0.9));
  const auto above = std::count_if(scores.begin(), scores.end(),
                                   [&](double s) { return s > m.score_threshold; });
  EXPECT_NEAR(static_cast<double>(above), 20.0, 1.0);
}

TEST(IsolationForestTest, ScoresInUnitIntervalAndDeterministic) {
  Prng rng(21);
  const auto v = unit_cube(rng, 300, 2);
  IsolationForestParams p;
  p.seed = 77;
  const auto m = isolation_forest_fit(v, p);
  const auto m2 = isolation_forest_fit(v, p);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x = {rng.normal(0.5, 3.0), rng.normal(0.5, 3.0)};
    const double s = isolation_forest_score(m, x);
    EXPECT_GT(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(s, isolation_forest_score(m, x));
    EXPECT_EQ(s, isolation_forest_score(m2, x));
  }
}

TEST(IsolationForestTest, CentroidScoresBelowOutlier) {
  Prng rng(5);
  std::vector<std::vector<double>> v;
  for (int i = 0; i < 255; ++i) v.push_back({rng.normal(0, 0.1), rng.normal(0, 0.1)});
  const std::vector<double> far = {4.0, -4.0};
  v.push_back(far);
  const auto m = isolation_forest_fit(v, {});
  EXPECT_LT(isolation_forest_score(m, std::vector<double>{0.0, 0.0}),
            isolation_forest_score(m, far));
}

TEST(IsolationForestTest, StructureInvariants) {
  Prng rng(2);
  const auto v = unit_cube(rng, 50, 3);
  IsolationForestParams p;
  p.subsample = 1000;  // clamped to 50
  p.n_trees = 10;
  const auto m = isolation_forest_fit(v, p);
  EXPECT_EQ(m.subsample_size, 50u);
  EXPECT_EQ(m.trees.size(), 10u);
  const int cap = static_cast<int>(std::ceil(std::log2(50.0)));
  for (const auto& t : m.trees) {
    EXPECT_EQ(t.nodes[0].size, 50);
    for (const auto& n : t.nodes) {
      EXPECT_LE(n.depth, cap);
      if (n.split_dim >= 0) {
        EXPECT_EQ(t.nodes[n.left].size + t.nodes[n.right].size, n.size);
        EXPECT_EQ(t.nodes[n.left].depth, n.depth + 1);
      }
    }
  }
}

TEST(IsolationForestTest, Errors) {
  const std::vector<std::vector<double>> one = {{1.0}};
  ExpectError(ErrorCode::kInvalidInput, [&] { isolation_forest_fit(one, {}); });
  const std::vector<std::vector<double>> ragged = {{1.0}, {1.0, 2.0}};
  ExpectError(ErrorCode::kInvalidInput, [&] { isolation_forest_fit(ragged, {}); });
  IsolationForestParams bad;
  bad.contamination = 0.5;
  const std::vector<std::vector<double>> two = {{1.0}, {2.0}};
  ExpectError(ErrorCode::kInvalidInput, [&] { isolation_forest_fit(two, bad); });
  const auto m = isolation_forest_fit(two, {});
  ExpectError(ErrorCode::kInvalidInput,
              [&] { isolation_forest_score(m, std::vector<double>{1.0, 2.0}); });
}

}  // namespace
}  // namespace rhd::stats
