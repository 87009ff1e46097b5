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

// The five rhd subcommands as plain functions, so tests can drive them
// in-process. Each returns normally on success and raises rhd::Error
// otherwise; exit_code() maps errors onto the documented exit codes.

#ifndef RHD_TOOLS_COMMANDS_H_
#define RHD_TOOLS_COMMANDS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rhd/error.h"

namespace rhd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitEmpty = 4;

int exit_code(const Error& e);

// Default worker count: $RHD_JOBS when it parses as a positive integer,
// else 1.
std::size_t default_jobs();

struct GenerateOptions {
  std::filesystem::path config;
  std::filesystem::path out;
};

struct FitOptions {
  std::filesystem::path log;  // clean reference episodes
  std::filesystem::path out;  // model bundle
  std::optional<std::filesystem::path> config;
  // Labeled episodes used to calibrate the ensemble.
  std::optional<std::filesystem::path> validation;
  // Held-out evaluation of the calibration: folds < 2 is a single seeded
  // 80/20 split, otherwise k-fold cross-fitting.
  std::size_t folds = 1;
  std::optional<std::uint64_t> seed;
  bool adaptive_thresholds = false;
  std::size_t jobs = 1;
};

struct DetectOptions {
  std::filesystem::path model;
  std::filesystem::path log;
  std::filesystem::path out;
  std::optional<double> risk_threshold;
  bool selective = false;
  std::size_t jobs = 1;
};

struct ExperimentOptions {
  std::string kind;  // benchmark, factorial, ablation, mitigation, sensitivity
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::size_t jobs = 1;
};

struct ReportOptions {
  std::filesystem::path assessments;
  std::filesystem::path labels;  // episode log with ground truth
  std::filesystem::path out_dir;
};

// Progress lines go to `log`.
void cmd_generate(const GenerateOptions& o, std::ostream& log);
void cmd_fit(const FitOptions& o, std::ostream& log);
void cmd_detect(const DetectOptions& o, std::ostream& log);
void cmd_experiment(const ExperimentOptions& o, std::ostream& log);
void cmd_report(const ReportOptions& o, std::ostream& log);

// Sidecar manifest path of an output file: the extension is replaced by
// ".manifest.json".
std::filesystem::path manifest_path(const std::filesystem::path& output);

// Full command line: parses argv with CLI11, dispatches, prints errors to
// `err` and returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rhd::cli

#endif  // RHD_TOOLS_COMMANDS_H_
