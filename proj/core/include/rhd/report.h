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

// CSV tables and self-contained SVG charts for experiment reports. Output is
// a pure function of the inputs: reals in CSV cells use the shortest
// round-trip form, SVG coordinates are printed with two decimals. Wall-clock
// quantities (overhead, seconds) never enter these tables; callers put them
// in the run manifest so reruns stay byte-identical.

#ifndef RHD_REPORT_H_
#define RHD_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "rhd/eval.h"
#include "rhd/experiments.h"

namespace rhd::report {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string to_string() const;
};

// Shortest round-trip decimal; empty for NaN.
std::string cell(double v);

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
  double stroke_width = 1.5;
  bool dashed = false;
  bool markers_only = false;
  std::string color;  // empty picks from the palette by position
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  std::vector<Series> series;
  bool diagonal = false;  // dotted y = x reference line
};

std::string render_svg(const Chart& chart);

// Tables.
CsvTable metrics_table(const std::vector<std::pair<std::string, eval::DetectionMetrics>>& rows);
CsvTable ablation_table(const std::vector<eval::AblationRow>& rows);
CsvTable effects_table(const std::vector<eval::EffectEstimate>& effects);
CsvTable factorial_cells_table(const std::vector<eval::FactorialRun>& runs);
CsvTable mitigation_table(const std::vector<experiments::MitigationRow>& rows);
CsvTable sensitivity_table(const std::vector<experiments::SensitivityRow>& rows);

// ROC curves of every detector's raw score plus the ensemble risk, the
// ensemble drawn thick and black. Detectors whose scores are all abstained
// or single-class label sets are omitted.
Chart roc_chart(const std::vector<RiskAssessment>& assessments, const std::vector<bool>& labels);

// Flag rate per bucket of `bucket` episodes, one series per stream.
Chart flag_rate_chart(const std::vector<std::vector<double>>& series, std::size_t bucket);

// Hacking reduction against performance impact per (technique, intensity),
// with the Pareto frontier dashed.
Chart pareto_chart(const std::vector<experiments::MitigationRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rhd::report

#endif  // RHD_REPORT_H_
