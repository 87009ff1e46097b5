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

// Runs the fifteen acceptance criteria and prints one PASS/FAIL line each.
// Exit status is the number of failing criteria. Criterion numbers given on
// the command line restrict the run to those.

#include <algorithm>
#include <bit>
#include <bitset>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "commands.h"
#include "rhd/detectors.h"
#include "rhd/ensemble.h"
#include "rhd/envgen.h"
#include "rhd/episode_io.h"
#include "rhd/eval.h"
#include "rhd/experiments.h"
#include "rhd/isolation_forest.h"
#include "rhd/mitigation.h"
#include "rhd/platt.h"
#include "rhd/prng.h"
#include "rhd/stats.h"
#include "testing/generators.h"
#include "testing/oracles.h"

namespace rhd {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool close(double got, double want, double tol = 1e-9) {
  return std::fabs(got - want) <= tol * (1.0 + std::fabs(want));
}

// Same tolerance as gtest's DOUBLE_EQ: four units in the last place.
bool ulp_equal(double a, double b) {
  if (a == b) return true;
  auto bits = [](double x) {
    const auto i = std::bit_cast<std::int64_t>(x);
    return i < 0 ? std::numeric_limits<std::int64_t>::min() - i : i;
  };
  return std::llabs(bits(a) - bits(b)) <= 4;
}

// The benchmark of criterion 4, shared by 4, 5, 8, 11, 12 and 14.
const experiments::BenchmarkResult& benchmark() {
  static const experiments::BenchmarkResult r = [] {
    experiments::BenchmarkConfig cfg;
    return experiments::run_benchmark(cfg);
  }();
  return r;
}

Outcome kernel_oracles() {
  const auto t0 = Clock::now();
  Outcome o;
  int bad_moments = 0, bad_pearson = 0, bad_kl = 0, bad_acf = 0, bad_trend = 0, bad_bounds = 0,
      bad_ts = 0, bad_platt = 0, bad_auc = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Prng rng(derive_seed(0xacc1, seed));
    const auto v = gen::reals(rng, gen::size_in(rng, 4, 300));
    const auto m = stats::moments(v);
    const auto w = oracle::moments(v);
    bad_moments += !(close(m.mean, w.mean) && close(m.variance, w.variance) &&
                     close(m.skewness, w.skewness) && close(m.kurtosis, w.kurtosis));

    auto y = gen::reals(rng, v.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += rng.uniform(-2, 2) * v[i];
    bad_pearson += !close(stats::pearson(v, y), oracle::pearson(v, y));

    const std::size_t bins = gen::size_in(rng, 2, 40);
    const auto p = gen::histogram(rng, bins), q = gen::histogram(rng, bins);
    bad_kl += !close(stats::kl_divergence(p, q), oracle::kl_bits(p, q));

    const std::size_t lag = gen::size_in(rng, 1, v.size() - 1);
    bad_acf += !close(stats::autocorrelation(v, lag), oracle::autocorrelation(v, lag));
    bad_trend += !close(stats::linear_trend(v), oracle::ols_slope(v));

    const auto b = stats::robust_bounds(v);
    const double q1 = oracle::quantile7(v, 0.25), q3 = oracle::quantile7(v, 0.75);
    bad_bounds += !(close(b.median, oracle::median(v)) && close(b.mad, oracle::mad(v)) &&
                    close(b.q1, q1) && close(b.q3, q3) && close(b.iqr, q3 - q1));

    std::vector<double> x(gen::size_in(rng, 3, 60)), ty(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::round(rng.uniform(0, 30));
      ty[i] = rng.normal(1.5 * x[i], 3.0);
    }
    const auto got = stats::theil_sen(x, ty);
    const auto want = oracle::theil_sen(x, ty);
    bad_ts += !(close(got.slope, want.slope) && close(got.intercept, want.intercept));

    const double a = rng.normal(0, 3), bb = rng.normal(0, 3), s = rng.normal(0, 5);
    bad_platt += !close(stats::platt_apply({a, bb}, s), oracle::logistic(a, bb, s));

    const auto labels = gen::labels(rng, gen::size_in(rng, 2, 200));
    std::vector<double> scores(labels.size());
    for (double& sc : scores) sc = std::round(rng.normal() * 4) / 4;  // with ties
    bad_auc += !close(eval::roc_auc(scores, labels), oracle::auc_pairs(scores, labels));
  }
  const std::pair<const char*, int> all[] = {
      {"moments", bad_moments}, {"pearson", bad_pearson}, {"kl", bad_kl},
      {"autocorrelation", bad_acf}, {"trend", bad_trend}, {"robust bounds", bad_bounds},
      {"theil-sen", bad_ts}, {"platt", bad_platt}, {"roc-auc", bad_auc}};
  for (const auto& [name, bad] : all) {
    o.check(bad == 0, std::string(name) + " mismatches " + std::to_string(bad) + "/100");
  }
  const double secs = seconds_since(t0);
  o.check(secs < 30, "runtime " + fmt("%.1fs", secs));
  o.note("9 kernels x 100 inputs, " + fmt("%.2fs", secs));
  return o;
}

Outcome formula_fidelity() {
  Outcome o;
  double worst = 0.0;
  for (std::size_t v : {2, 3, 5, 8, 17, 64}) {
    detect::TrigramModel uniform(v);
    for (std::uint32_t a = 0; a < v; ++a)
      for (std::uint32_t b = 0; b < v; ++b)
        for (std::uint32_t c = 0; c < v; ++c) uniform.add_sequence(std::vector<std::uint32_t>{a, b, c});
    Prng rng(v);
    std::vector<std::uint32_t> seq;
    for (int i = 0; i < 200; ++i) seq.push_back(static_cast<std::uint32_t>(rng.below(v)));
    const double ppl = *uniform.perplexity(seq);
    worst = std::max(worst, std::fabs(ppl - static_cast<double>(v)));
  }
  o.check(worst <= 1e-9, "uniform perplexity off by " + fmt("%.3g", worst));
  using namespace envgen;
  const std::pair<double, double> worked[] = {
      {true_atari(1, 0, 400), 1.0},
      {true_atari(1, 400, 400), 0.7},
      {true_atari(0, 200, 400), 0.15},
      {true_mujoco(0, 0), 0.0},
      {true_mujoco(10, 5), 4.0},
      {true_mujoco(1, 10), -3.4},
      {user_sat(1, 1, 1), 1.0},
      {user_sat(1, 0, 0), 0.6},
      {user_sat(0.5, 0.5, 0.5), 0.5},
      {gameplay_quality(1, 1, 1), 1.0},
      {gameplay_quality(0, 1, 0), 0.3},
      {precision_accuracy(0, 0, 10), 1.0},
      {precision_accuracy(0.05, 0, 10), std::exp(-0.5)},
      {precision_accuracy(0, 10, 10), 0.0},
  };
  int bad = 0;
  for (const auto& [got, want] : worked) bad += !ulp_equal(got, want);
  o.check(bad == 0, std::to_string(bad) + " worked objective values differ");
  o.note("max |PPL - |A|| " + fmt("%.2g", worst) + ", 14 worked values");
  return o;
}

Outcome planted_outlier() {
  const auto t0 = Clock::now();
  Outcome o;
  int top = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Prng rng(derive_seed(0xacc3, trial));
    std::vector<std::vector<double>> v(99, std::vector<double>(3));
    for (auto& p : v)
      for (double& x : p) x = rng.uniform();
    v.push_back({10.0, 10.0, 10.0});
    stats::IsolationForestParams params;
    params.seed = trial;
    const auto model = stats::isolation_forest_fit(v, params);
    const double outlier = stats::isolation_forest_score(model, v.back());
    bool best = true;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      best = best && stats::isolation_forest_score(model, v[i]) < outlier;
    }
    top += best;
  }
  const double secs = seconds_since(t0);
  o.check(top >= 95, "outlier top in " + std::to_string(top) + "/100");
  o.check(secs < 60, "runtime " + fmt("%.1fs", secs));
  o.note("top in " + std::to_string(top) + "/100, " + fmt("%.2fs", secs));
  return o;
}

Outcome synthetic_benchmark() {
  const auto t0 = Clock::now();
  const auto& r = benchmark();
  const double secs = seconds_since(t0);
  Outcome o;
  o.check(r.metrics.f1 >= 0.75, "F1 " + fmt("%.3f", r.metrics.f1));
  o.check(r.metrics.auc_roc >= 0.80, "AUC " + fmt("%.3f", r.metrics.auc_roc));
  o.check(secs < 300, "runtime " + fmt("%.1fs", secs));
  o.note("F1 " + fmt("%.3f", r.metrics.f1) + ", AUC " + fmt("%.3f", r.metrics.auc_roc) + ", " +
         fmt("%.1fs", secs));
  return o;
}

Outcome baseline_gap() {
  const auto& r = benchmark();
  Outcome o;
  const double gap = r.metrics.f1 - r.baseline.f1;
  o.check(gap >= 0.10, "gap " + fmt("%.3f", gap));
  o.note("ensemble " + fmt("%.3f", r.metrics.f1) + " vs ratio baseline " +
         fmt("%.3f", r.baseline.f1));
  return o;
}

Outcome ablation_structure() {
  experiments::BenchmarkConfig cfg;
  cfg.injection = envgen::mixed_injection(0.12);
  for (auto& inj : cfg.injection) {
    if (inj.category == HackingCategory::kSpecificationGaming) inj.probability = 0.12;
  }
  const auto r = experiments::run_benchmark(cfg);
  std::size_t spec = 0, total = 0;
  for (const auto& e : r.stream) {
    if (!e.is_hacking()) continue;
    ++total;
    spec += e.label->category == HackingCategory::kSpecificationGaming;
  }
  const auto rows = experiments::cross_fitted_ablation(r);
  std::size_t worst = 1;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    if (rows[i].delta_f1 < rows[worst].delta_f1) worst = i;
  }
  Outcome o;
  const double share = total ? static_cast<double>(spec) / total : 0.0;
  o.check(share >= 0.40, "spec share " + fmt("%.2f", share));
  o.check(rows[worst].removed == HackingCategory::kSpecificationGaming,
          "largest drop from " + rows[worst].configuration);
  std::string deltas;
  for (std::size_t i = 1; i < rows.size(); ++i) deltas += fmt(" %.3f", rows[i].delta_f1);
  o.note("spec share " + fmt("%.2f", share) + ", delta F1" + deltas);
  return o;
}

Outcome detection_latency() {
  experiments::LatencyConfig lc;
  const auto r = experiments::run_latency(lc);
  Outcome o;
  o.check(r.summary.detected > 0, "no stream detected");
  o.check(r.summary.median <= 20, "median " + fmt("%.1f", r.summary.median));
  o.note("median " + fmt("%.1f", r.summary.median) + " episodes, detected " +
         std::to_string(r.summary.detected) + "/" +
         std::to_string(r.summary.detected + r.summary.missed));
  return o;
}

Outcome consensus_rule() {
  Outcome o;
  int wrong = 0;
  for (unsigned mask = 0; mask < 64; ++mask) {
    SignalSet s;
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      s[k].category = kAllCategories[k];
      s[k].flagged = (mask >> k) & 1u;
    }
    const auto bits = std::bitset<6>(mask).count();
    wrong += ensemble::consensus_label(s) != (bits >= 3) ||
             ensemble::consensus_count(s) != static_cast<int>(bits);
  }
  o.check(wrong == 0, std::to_string(wrong) + "/64 consensus cases wrong");
  const auto& r = benchmark();
  std::vector<bool> consensus, flags;
  for (std::size_t i = 0; i < r.signals.size(); ++i) {
    consensus.push_back(ensemble::consensus_label(r.signals[i]));
    flags.push_back(r.fit.assessments[i].flagged);
  }
  const double kappa = eval::cohens_kappa(consensus, flags);
  o.check(kappa >= 0.6, "kappa " + fmt("%.3f", kappa));
  o.note("64/64 exact, kappa " + fmt("%.3f", kappa));
  return o;
}

Outcome factorial_recovery() {
  const auto t0 = Clock::now();
  const std::pair<const char*, double> planted[] = {
      {"density", -0.187}, {"alignment", -0.312}, {"complexity", 0.094}};
  int sign_ok[3] = {0, 0, 0}, mag_ok[3] = {0, 0, 0}, align_largest = 0;
  double worst_rel = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    experiments::FactorialConfig fc;
    fc.envs = {envgen::make_env(envgen::EnvFamily::kGridWorld, 200),
               envgen::make_env(envgen::EnvFamily::kRecSys, 200)};
    fc.seeds_per_cell = 40;
    fc.max_steps = 200;
    fc.seed = 100 + rep;
    const auto r = experiments::run_factorial(fc);
    double largest = 0.0;
    std::string largest_name;
    for (int k = 0; k < 3; ++k) {
      const auto& e = r.effects[k];
      const double want = planted[k].second;
      sign_ok[k] += std::signbit(e.effect) == std::signbit(want);
      const double rel = std::fabs(e.effect - want) / std::fabs(want);
      worst_rel = std::max(worst_rel, rel);
      mag_ok[k] += rel <= 0.20;
      if (std::fabs(e.cohens_d) > largest) {
        largest = std::fabs(e.cohens_d);
        largest_name = e.factor;
      }
    }
    align_largest += largest_name == "alignment";
  }
  const double secs = seconds_since(t0);
  Outcome o;
  for (int k = 0; k < 3; ++k) {
    o.check(sign_ok[k] == 20, std::string(planted[k].first) + " sign " +
                                  std::to_string(sign_ok[k]) + "/20");
    o.check(mag_ok[k] == 20, std::string(planted[k].first) + " magnitude " +
                                 std::to_string(mag_ok[k]) + "/20");
  }
  o.check(align_largest == 20, "alignment largest |d| in " + std::to_string(align_largest) + "/20");
  o.check(secs < 600, "runtime " + fmt("%.1fs", secs));
  o.note("20/20 reps, worst relative error " + fmt("%.3f", worst_rel) + ", " +
         fmt("%.1fs", secs));
  return o;
}

Outcome mitigation_recovery() {
  Outcome o;
  experiments::MitigationConfig mc;
  std::vector<double> reductions;
  experiments::MitigationRow full;
  for (double intensity : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    mitigation::MitigationSpec m;
    m.intensity = intensity;
    const auto row = experiments::run_mitigation(mc, m);
    reductions.push_back(row.outcome.hacking_reduction_pct.value_or(std::nan("")));
    if (intensity == 1.0) full = row;
  }
  const double red = reductions.back(), perf = full.outcome.performance_impact_pct;
  o.check(std::fabs(red - 54.6) <= 5.0, "reduction " + fmt("%.2f", red));
  o.check(std::fabs(perf + 9.1) <= 2.0, "performance impact " + fmt("%.2f", perf));
  bool monotone = true;
  for (std::size_t i = 1; i < reductions.size(); ++i) monotone &= reductions[i] >= reductions[i - 1];
  o.check(monotone, "reduction not monotone in intensity");

  envgen::StreamConfig sc;
  sc.env = mc.env;
  sc.n_episodes = 300;
  sc.seed = 5;
  sc.injection = envgen::mixed_injection(0.2);
  mitigation::MitigationSpec zero;
  zero.intensity = 0.0;
  std::ostringstream plain, mitigated;
  write_episodes(plain, envgen::generate_stream(sc));
  write_episodes(mitigated, envgen::generate_stream(mitigation::apply_mitigation(sc, zero)));
  o.check(plain.str() == mitigated.str(), "intensity 0 log differs");
  o.note("reduction " + fmt("%.2f%%", red) + ", impact " + fmt("%.2f%%", perf) +
         ", monotone, intensity 0 byte-identical");
  return o;
}

Outcome calibration() {
  const auto& r = benchmark();
  Outcome o;
  o.check(r.metrics.brier < r.uncalibrated_brier, "Brier " + fmt("%.4f", r.metrics.brier) +
                                                      " vs " + fmt("%.4f", r.uncalibrated_brier));
  o.note("calibrated " + fmt("%.4f", r.metrics.brier) + " < uncalibrated " +
         fmt("%.4f", r.uncalibrated_brier));
  return o;
}

Outcome threshold_sweep() {
  const auto& r = benchmark();
  auto at = [&](double t) {
    const auto as = experiments::reassess(r.fit, r.signals, r.stream, [&](auto m) {
      m.risk_threshold = t;
      return m;
    });
    std::size_t flagged = 0, tp = 0;
    for (std::size_t i = 0; i < as.size(); ++i) {
      if (!as[i].flagged) continue;
      ++flagged;
      tp += r.labels[i];
    }
    return std::pair<std::size_t, double>(flagged, flagged ? double(tp) / flagged : 0.0);
  };
  Outcome o;
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  std::string counts;
  for (int k = 1; k <= 9; ++k) {
    const auto [n, prec] = at(k / 10.0);
    o.check(n <= prev, "flag count rises at " + fmt("%.1f", k / 10.0));
    prev = n;
    counts += " " + std::to_string(n);
  }
  const double p5 = at(0.5).second, p8 = at(0.8).second;
  o.check(p8 > p5, "precision@0.8 " + fmt("%.3f", p8) + " <= precision@0.5 " + fmt("%.3f", p5));
  o.note("flags" + counts + "; precision@0.5 " + fmt("%.3f", p5) + ", @0.8 " + fmt("%.3f", p8));
  return o;
}

Outcome complexity_contract() {
  // Detectors are fitted per length. Each episode's time is its minimum over
  // repeats, with the two lengths interleaved so background load hits both
  // alike; the per-length time is the mean over 50 episodes.
  constexpr int kRepeats = 15;
  constexpr std::size_t kEpisodes = 50;
  const std::size_t lengths[2] = {1000, 2000};
  detect::DetectorSet sets[2];
  std::vector<Episode> episodes[2];
  for (int li = 0; li < 2; ++li) {
    envgen::StreamConfig ref;
    ref.env = envgen::make_env(envgen::EnvFamily::kGridWorld, lengths[li]);
    ref.n_episodes = 40;
    ref.seed = 31;
    sets[li] = detect::fit_detectors(envgen::generate_stream(ref), {},
                                     envgen::wirehead_registry());
    envgen::StreamConfig sc = ref;
    sc.n_episodes = kEpisodes;
    sc.seed = 32;
    sc.injection = envgen::mixed_injection(0.2);
    episodes[li] = envgen::generate_stream(sc);
  }
  std::vector<std::array<double, kNumCategories>> best[2];
  for (auto& b : best) {
    b.resize(kEpisodes);
    for (auto& per : b) per.fill(std::numeric_limits<double>::infinity());
  }
  for (int rep = 0; rep < kRepeats; ++rep) {
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      for (std::size_t j = 0; j < kEpisodes; ++j) {
        for (int li = 0; li < 2; ++li) {
          const auto t0 = Clock::now();
          volatile double sink = detect::raw_score_only(sets[li], kAllCategories[k], episodes[li][j]);
          (void)sink;
          best[li][j][k] = std::min(best[li][j][k], seconds_since(t0));
        }
      }
    }
  }
  std::array<double, kNumCategories> secs[2] = {};
  for (int li = 0; li < 2; ++li) {
    for (const auto& per : best[li]) {
      for (std::size_t k = 0; k < kNumCategories; ++k) secs[li][k] += per[k] / kEpisodes;
    }
  }
  Outcome o;
  std::string ratios;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    const double ratio = secs[1][k] / secs[0][k];
    const bool spec = kAllCategories[k] == HackingCategory::kSpecificationGaming;
    const double limit = spec ? 2.5 : 2.2;
    const std::string name(to_string(kAllCategories[k]));
    o.check(ratio <= limit, name + " ratio " + fmt("%.2f", ratio));
    ratios += (ratios.empty() ? "" : ", ") + name + " " + fmt("%.2f", ratio);
  }
  o.note("L=2000/L=1000: " + ratios);
  return o;
}

Outcome sensitivity_sweep() {
  const auto& r = benchmark();
  const auto rows = experiments::sensitivity_grid(r, {0.2, 0.3, 0.4}, {0.3, 0.5, 0.7},
                                                  {0.05, 0.1, 0.15}, {1.5, 2.0, 2.5}, 1);
  double worst = 1.0;
  for (const auto& row : rows) worst = std::min(worst, row.metrics.f1);
  Outcome o;
  o.check(rows.size() == 81, "grid has " + std::to_string(rows.size()) + " points");
  o.check(worst >= 0.70, "min F1 " + fmt("%.3f", worst));
  o.note("81 grid points, min F1 " + fmt("%.3f", worst));
  return o;
}

// --- criterion 15 ----------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int rhd_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rhd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

// Primary outputs are everything except manifests and timing tables, which
// carry wall-clock times.
std::vector<std::pair<std::string, std::string>> outputs_in(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.find("manifest.json") != std::string::npos || name == "timing.csv") continue;
    out.emplace_back(fs::relative(entry.path(), dir).generic_string(), slurp(entry.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "rhd_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root / "inputs");
  auto cfg = [&](const std::string& name, const std::string& body) {
    std::ofstream(root / "inputs" / name) << "schema = 1\n" << body;
    return (root / "inputs" / name).string();
  };
  const std::string ref_cfg = cfg("ref.cfg", "episodes = 200\nseed = 3\ninjection_rate = 0\n");
  const std::string val_cfg = cfg("val.cfg", "episodes = 300\nseed = 4\n");
  const std::string exp_cfg = cfg(
      "exp.cfg",
      "episodes = 300\nseed = 6\nreference_episodes = 100\n"
      "factorial.seeds_per_cell = 3\nfactorial.episodes_per_run = 20\n"
      "mitigation.streams = 2\nmitigation.techniques = combined, adversarial_training\n"
      "mitigation.intensities = 0, 1\n"
      "sensitivity.tau_spec = 0.2, 0.4\nsensitivity.delta_rho = 0.5\n"
      "sensitivity.contamination = 0.1\nsensitivity.ppl_multiplier = 1.5, 2.5\n");

  // One full pass of every command into `dir`.
  auto pass = [&](const fs::path& dir, const std::string& jobs) {
    fs::create_directories(dir);
    const auto p = [&](const std::string& f) { return (dir / f).string(); };
    int failures = 0;
    failures += rhd_cli({"generate", "--config", ref_cfg, "--out", p("ref.jsonl")}) != 0;
    failures += rhd_cli({"generate", "--config", val_cfg, "--out", p("val.jsonl")}) != 0;
    failures += rhd_cli({"fit", "--log", p("ref.jsonl"), "--validation", p("val.jsonl"), "--out",
                         p("model.bundle"), "--folds", "3", "--adaptive-thresholds", "--jobs",
                         jobs}) != 0;
    failures += rhd_cli({"detect", "--model", p("model.bundle"), "--log", p("val.jsonl"), "--out",
                         p("assessments.jsonl"), "--jobs", jobs}) != 0;
    failures += rhd_cli({"detect", "--model", p("model.bundle"), "--log", p("val.jsonl"), "--out",
                         p("selective.jsonl"), "--selective", "--jobs", jobs}) != 0;
    failures += rhd_cli({"report", "--assessments", p("assessments.jsonl"), "--labels",
                         p("val.jsonl"), "--out-dir", p("report")}) != 0;
    for (const char* kind : {"benchmark", "ablation", "sensitivity", "factorial", "mitigation"}) {
      failures += rhd_cli({"experiment", kind, "--config", exp_cfg, "--out-dir",
                           p(std::string("exp_") + kind), "--jobs", jobs}) != 0;
    }
    return failures;
  };
  Outcome o;
  const int failures = pass(root / "a", "1") + pass(root / "b", "1") + pass(root / "c", "4");
  o.check(failures == 0, std::to_string(failures) + " commands failed");
  const auto a = outputs_in(root / "a"), b = outputs_in(root / "b"), c = outputs_in(root / "c");
  o.check(!a.empty(), "no outputs");
  auto compare = [&](const auto& x, const auto& y, const std::string& what) {
    if (x.size() != y.size()) {
      o.check(false, what + ": different file sets");
      return;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      o.check(x[i] == y[i], what + ": " + x[i].first + " differs");
    }
  };
  compare(a, b, "rerun");
  compare(a, c, "jobs 1 vs 4");
  o.note(std::to_string(a.size()) + " output files identical across rerun and --jobs 4");
  if (o.pass) fs::remove_all(root);
  return o;
}

}  // namespace
}  // namespace rhd

int main(int argc, char** argv) {
  using namespace rhd;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"kernel oracle equivalence", kernel_oracles},
      {"formula fidelity", formula_fidelity},
      {"planted-outlier detection", planted_outlier},
      {"synthetic benchmark", synthetic_benchmark},
      {"baseline gap", baseline_gap},
      {"ablation structure", ablation_structure},
      {"detection latency", detection_latency},
      {"consensus rule", consensus_rule},
      {"factorial recovery", factorial_recovery},
      {"mitigation recovery", mitigation_recovery},
      {"calibration", calibration},
      {"threshold monotonicity", threshold_sweep},
      {"complexity contract", complexity_contract},
      {"sensitivity sweep", sensitivity_sweep},
      {"determinism", cli_determinism},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0, ran = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed;
}
