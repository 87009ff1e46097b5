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

#include <ostream>

#include "CLI11.hpp"
#include "commands.h"

namespace rhd::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"rhd: reward hacking detection toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RHD_VERSION);

  std::size_t jobs = default_jobs();
  auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs", jobs, "Scoring worker threads (default $RHD_JOBS or 1)")
        ->check(CLI::PositiveNumber);
  };

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Generate a labeled synthetic episode log");
  g->add_option("--config", gen.config, "Run config file")->required();
  g->add_option("--out", gen.out, "Output episode log (.jsonl)")->required();

  FitOptions fit;
  std::uint64_t fit_seed = 0;
  auto* f = app.add_subcommand("fit", "Fit detectors on clean episodes");
  f->add_option("--log", fit.log, "Clean reference episode log")->required();
  f->add_option("--out", fit.out, "Output model bundle")->required();
  f->add_option("--config", fit.config, "Run config file (detector parameters)");
  f->add_option("--validation", fit.validation, "Labeled log for ensemble calibration");
  f->add_option("--folds", fit.folds, "Held-out folds (<2: single 80/20 split)");
  auto* seed_opt = f->add_option("--seed", fit_seed, "Split seed (default: config seed)");
  f->add_flag("--adaptive-thresholds", fit.adaptive_thresholds,
              "Per-environment threshold factors");
  add_jobs(f);

  DetectOptions det;
  auto* d = app.add_subcommand("detect", "Score episodes with a fitted bundle");
  d->add_option("--model", det.model, "Model bundle")->required();
  d->add_option("--log", det.log, "Episode log")->required();
  d->add_option("--out", det.out, "Output assessments (.jsonl)")->required();
  d->add_option("--risk-threshold", det.risk_threshold, "Ensemble flag threshold");
  d->add_flag("--selective", det.selective, "Skip expensive detectors on quiet episodes");
  add_jobs(d);

  ExperimentOptions exp;
  auto* e = app.add_subcommand("experiment", "Run an evaluation protocol");
  e->add_option("kind", exp.kind, "benchmark | factorial | ablation | mitigation | sensitivity")
      ->required();
  e->add_option("--config", exp.config, "Run config file")->required();
  e->add_option("--out-dir", exp.out_dir, "Report directory")->required();
  add_jobs(e);

  ReportOptions rep;
  auto* r = app.add_subcommand("report", "Metrics and plots from assessments");
  r->add_option("--assessments", rep.assessments, "Assessments file")->required();
  r->add_option("--labels", rep.labels, "Episode log with ground truth")->required();
  r->add_option("--out-dir", rep.out_dir, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return kExitConfig;
  }

  try {
    if (g->parsed()) {
      cmd_generate(gen, out);
    } else if (f->parsed()) {
      if (seed_opt->count() > 0) fit.seed = fit_seed;
      fit.jobs = jobs;
      cmd_fit(fit, out);
    } else if (d->parsed()) {
      det.jobs = jobs;
      cmd_detect(det, out);
    } else if (e->parsed()) {
      exp.jobs = jobs;
      cmd_experiment(exp, out);
    } else if (r->parsed()) {
      cmd_report(rep, out);
    }
  } catch (const Error& ex) {
    err << "rhd: " << error_code_name(ex.code()) << ": " << ex.what() << "\n";
    return exit_code(ex);
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "rhd: IoError: " << ex.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace rhd::cli
