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

#include "rhd/experiments.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include "gtest/gtest.h"
#include "testing/error_matchers.h"

namespace rhd::experiments {
namespace {

using testing_util::ExpectError;

class BenchmarkTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    BenchmarkConfig cfg;
    cfg.seed = 4;
    result_ = std::make_unique<BenchmarkResult>(run_benchmark(cfg));
  }
  static void TearDownTestSuite() { result_.reset(); }
  static const BenchmarkResult& r() { return *result_; }

  static std::unique_ptr<BenchmarkResult> result_;
};

std::unique_ptr<BenchmarkResult> BenchmarkTest::result_;

TEST_F(BenchmarkTest, ShapesAndLabels) {
  EXPECT_EQ(r().reference.size(), 200u);
  EXPECT_EQ(r().stream.size(), 1000u);
  EXPECT_EQ(r().signals.size(), 1000u);
  EXPECT_EQ(r().labels, labels_of(r().stream));
  for (const auto& e : r().reference) EXPECT_FALSE(e.is_hacking());
  const auto pos = std::count(r().labels.begin(), r().labels.end(), true);
  EXPECT_NEAR(pos / 1000.0, 0.2, 0.04);
  EXPECT_EQ(r().per_detector.size(), kNumCategories);
  EXPECT_EQ(r().per_detector_auc.size(), kNumCategories);
}

TEST_F(BenchmarkTest, ScoreAllKeepsSlotsForAnyJobCount) {
  std::vector<Episode> some(r().stream.begin(), r().stream.begin() + 60);
  const auto one = score_all(r().detectors, some, {}, 1);
  for (std::size_t jobs : {2u, 4u, 7u}) EXPECT_EQ(score_all(r().detectors, some, {}, jobs), one);
  for (std::size_t i = 0; i < some.size(); ++i) {
    EXPECT_EQ(one[i], detect::score_episode(r().detectors, some[i]));
    EXPECT_EQ(one[i], r().signals[i]);
  }
  EXPECT_TRUE(score_all(r().detectors, {}, {}, 4).empty());
}

TEST_F(BenchmarkTest, RethresholdMatchesNativeFlags) {
  std::array<double, kNumCategories> thr;
  for (HackingCategory c : kAllCategories) thr[index_of(c)] = detect::threshold_of(r().detectors, c);
  std::array<double, kNumCategories> never;
  never.fill(1e300);
  for (std::size_t i = 0; i < 200; ++i) {
    const SignalSet same = rethreshold(r().signals[i], thr);
    const SignalSet none = rethreshold(r().signals[i], never);
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      EXPECT_EQ(same[k].flagged, r().signals[i][k].flagged) << i << " " << k;
      EXPECT_EQ(same[k].raw_score, r().signals[i][k].raw_score);
      EXPECT_FALSE(none[k].flagged);
    }
  }
}

TEST_F(BenchmarkTest, CrossFitIsStratifiedAndHeldOut) {
  const CrossFit fit = cross_fit(r().signals, r().stream, 5, 77);
  ASSERT_EQ(fit.models.size(), 5u);
  std::array<int, 5> pos{}, all{};
  for (std::size_t i = 0; i < fit.fold_of.size(); ++i) {
    ASSERT_LT(fit.fold_of[i], 5u);
    ++all[fit.fold_of[i]];
    pos[fit.fold_of[i]] += r().labels[i];
  }
  const auto [pmin, pmax] = std::minmax_element(pos.begin(), pos.end());
  const auto [amin, amax] = std::minmax_element(all.begin(), all.end());
  EXPECT_LE(*pmax - *pmin, 1);
  EXPECT_LE(*amax - *amin, 1);
  for (std::size_t i = 0; i < fit.assessments.size(); ++i) {
    const auto again = ensemble::assess(fit.models[fit.fold_of[i]], r().signals[i],
                                        r().stream[i].id, r().stream[i].episode_index);
    EXPECT_EQ(fit.assessments[i].risk, again.risk);
    EXPECT_EQ(fit.assessments[i].episode_id, r().stream[i].id);
  }
  // Same seed, same folds; identity transform reproduces the assessments.
  EXPECT_EQ(cross_fit(r().signals, r().stream, 5, 77).fold_of, fit.fold_of);
  const auto same = reassess(fit, r().signals, r().stream, [](auto m) { return m; });
  for (std::size_t i = 0; i < same.size(); ++i) EXPECT_EQ(same[i].risk, fit.assessments[i].risk);

  ExpectError(ErrorCode::kInvalidInput, [&] { cross_fit(r().signals, r().stream, 1, 1); });
  std::vector<Episode> shorter(r().stream.begin(), r().stream.end() - 1);
  ExpectError(ErrorCode::kInvalidInput, [&] { cross_fit(r().signals, shorter, 5, 1); });
}

TEST_F(BenchmarkTest, DetectionQuality) {
  EXPECT_GE(r().metrics.f1, 0.75);
  EXPECT_GE(r().metrics.auc_roc, 0.80);
  EXPECT_GE(r().metrics.f1 - r().baseline.f1, 0.10);
  EXPECT_LT(r().metrics.brier, r().uncalibrated_brier);
}

TEST_F(BenchmarkTest, AblationRowsAreRelativeToFull) {
  const auto rows = cross_fitted_ablation(r());
  ASSERT_EQ(rows.size(), 1 + kNumCategories);
  EXPECT_EQ(rows[0].delta_f1, 0.0);
  EXPECT_EQ(rows[0].metrics.f1, r().metrics.f1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].delta_f1, rows[i].metrics.f1 - rows[0].metrics.f1, 1e-12);
  }
}

TEST_F(BenchmarkTest, ThresholdSweepsMoveF1OnlySlightly) {
  const auto rows = sensitivity_grid(r(), {0.2, 0.3, 0.4}, {0.3, 0.5, 0.7}, {0.1}, {2.0}, 4);
  ASSERT_EQ(rows.size(), 9u);
  auto f1_at = [&](double tau, double dr) {
    for (const auto& row : rows) {
      if (row.tau_spec == tau && row.delta_rho == dr) return row.metrics.f1;
    }
    ADD_FAILURE() << tau << " " << dr;
    return 0.0;
  };
  const double center = f1_at(0.3, 0.5);
  for (double tau : {0.2, 0.4}) EXPECT_LE(std::abs(f1_at(tau, 0.5) - center), 0.05) << tau;
  for (double dr : {0.3, 0.7}) EXPECT_LE(std::abs(f1_at(0.3, dr) - center), 0.08) << dr;
  // Grid order: tau outermost, ppl multiplier innermost.
  const auto grid = sensitivity_grid(r(), {0.2, 0.4}, {0.5}, {0.05, 0.15}, {1.5, 2.5}, 4);
  ASSERT_EQ(grid.size(), 8u);
  EXPECT_EQ(grid[0].tau_spec, 0.2);
  EXPECT_EQ(grid[1].ppl_multiplier, 2.5);
  EXPECT_EQ(grid[2].contamination, 0.15);
  EXPECT_EQ(grid[4].tau_spec, 0.4);
}

TEST(FactorialRunTest, CountsAndDeterminism) {
  FactorialConfig fc;
  fc.envs = {envgen::make_env(envgen::EnvFamily::kGridWorld, 40)};
  fc.seeds_per_cell = 3;
  fc.episodes_per_run = 10;
  fc.max_steps = 40;
  const auto a = run_factorial(fc);
  ASSERT_EQ(a.runs.size(), 24u);
  ASSERT_EQ(a.effects.size(), 6u);
  EXPECT_EQ(a.effects[3].factor, "density:alignment");
  for (const auto& run : a.runs) {
    EXPECT_GE(run.hacking_frequency, 0.0);
    EXPECT_LE(run.hacking_frequency, 1.0);
  }
  fc.jobs = 3;
  const auto b = run_factorial(fc);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].hacking_frequency, b.runs[i].hacking_frequency);
  }
}

TEST(MitigationRunTest, ZeroIntensityChangesNothing) {
  MitigationConfig mc;
  mc.streams = 2;
  mc.episodes = 150;
  mitigation::MitigationSpec m;
  m.intensity = 0.0;
  const auto row = run_mitigation(mc, m);
  EXPECT_EQ(row.before.hacking_frequency, row.after.hacking_frequency);
  EXPECT_EQ(row.before.performance, row.after.performance);
  ASSERT_TRUE(row.outcome.hacking_reduction_pct.has_value());
  EXPECT_EQ(*row.outcome.hacking_reduction_pct, 0.0);
  EXPECT_EQ(row.outcome.performance_impact_pct, 0.0);
}

TEST(LatencyRunTest, OnsetsPrecedeFlags) {
  LatencyConfig lc;
  lc.calibration.n_stream = 300;
  lc.streams = 3;
  lc.stream_length = 150;
  const auto r = run_latency(lc);
  ASSERT_EQ(r.onsets.size(), 3u);
  ASSERT_EQ(r.first_flags.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    if (r.first_flags[s]) EXPECT_GE(*r.first_flags[s], r.onsets[s]);
  }
  EXPECT_EQ(r.summary.detected + r.summary.missed, 3u);
}

}  // namespace
}  // namespace rhd::experiments
