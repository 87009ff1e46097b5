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

#include "rhd/report.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "rhd/error.h"

namespace rhd::report {
namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

void metric_cells(const eval::DetectionMetrics& m, std::vector<std::string>& row) {
  row.push_back(cell(m.precision));
  row.push_back(cell(m.recall));
  row.push_back(cell(m.f1));
  row.push_back(cell(m.auc_roc));
  row.push_back(cell(m.detection_latency_episodes));
  row.push_back(cell(m.brier));
}

const std::vector<std::string> kMetricHeader = {"precision", "recall",  "f1",
                                                "auc_roc",   "latency", "brier"};

}  // namespace

std::string cell(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string CsvTable::to_string() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_escape(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string render_svg(const Chart& c) {
  constexpr double kW = 640, kH = 480, kLeft = 70, kRight = 190, kTop = 40, kBottom = 60;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  const double xspan = c.x_max > c.x_min ? c.x_max - c.x_min : 1.0;
  const double yspan = c.y_max > c.y_min ? c.y_max - c.y_min : 1.0;
  auto px = [&](double x) { return kLeft + pw * (std::clamp(x, c.x_min, c.x_min + xspan) - c.x_min) / xspan; };
  auto py = [&](double y) {
    return kTop + ph * (1.0 - (std::clamp(y, c.y_min, c.y_min + yspan) - c.y_min) / yspan);
  };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
                  "viewBox=\"0 0 640 480\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       xml_escape(c.title) + "</text>\n";
  s += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) +
       "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = c.x_min + xspan * i / 5.0;
    const double yv = c.y_min + yspan * i / 5.0;
    s += "<line x1=\"" + fmt(px(xv)) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" + fmt(px(xv)) +
         "\" y2=\"" + fmt(kTop + ph + 5) + "\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(kTop + ph + 19) +
         "\" text-anchor=\"middle\">" + tick_label(xv) + "</text>\n";
    s += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + fmt(py(yv)) + "\" x2=\"" + fmt(kLeft) +
         "\" y2=\"" + fmt(py(yv)) + "\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(py(yv) + 4) +
         "\" text-anchor=\"end\">" + tick_label(yv) + "</text>\n";
  }
  s += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kH - 15) +
       "\" text-anchor=\"middle\">" + xml_escape(c.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + fmt(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fmt(kTop + ph / 2) + ")\">" + xml_escape(c.y_label) + "</text>\n";
  if (c.diagonal) {
    s += "<line x1=\"" + fmt(px(c.x_min)) + "\" y1=\"" + fmt(py(c.y_min)) + "\" x2=\"" +
         fmt(px(c.x_max)) + "\" y2=\"" + fmt(py(c.y_max)) +
         "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n";
  }
  for (std::size_t i = 0; i < c.series.size(); ++i) {
    const Series& ser = c.series[i];
    const std::string color = ser.color.empty() ? kPalette[i % kPalette.size()] : ser.color;
    const std::size_t n = std::min(ser.xs.size(), ser.ys.size());
    if (ser.markers_only) {
      for (std::size_t k = 0; k < n; ++k) {
        s += "<circle cx=\"" + fmt(px(ser.xs[k])) + "\" cy=\"" + fmt(py(ser.ys[k])) +
             "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
      }
    } else if (n > 0) {
      s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
           fmt(ser.stroke_width) + "\"";
      if (ser.dashed) s += " stroke-dasharray=\"6,4\"";
      s += " points=\"";
      for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) s += ' ';
        s += fmt(px(ser.xs[k])) + "," + fmt(py(ser.ys[k]));
      }
      s += "\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
    const double lx = kLeft + pw + 12;
    if (ser.markers_only) {
      s += "<circle cx=\"" + fmt(lx + 10) + "\" cy=\"" + fmt(ly) + "\" r=\"3.5\" fill=\"" + color +
           "\"/>\n";
    } else {
      s += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 20) +
           "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"" +
           fmt(ser.stroke_width) + "\"" + (ser.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    }
    s += "<text x=\"" + fmt(lx + 26) + "\" y=\"" + fmt(ly + 4) + "\">" + xml_escape(ser.name) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

CsvTable metrics_table(const std::vector<std::pair<std::string, eval::DetectionMetrics>>& rows) {
  CsvTable t;
  t.header = {"configuration"};
  t.header.insert(t.header.end(), kMetricHeader.begin(), kMetricHeader.end());
  for (const auto& [name, m] : rows) {
    std::vector<std::string> row = {name};
    metric_cells(m, row);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable ablation_table(const std::vector<eval::AblationRow>& rows) {
  CsvTable t;
  t.header = {"configuration"};
  t.header.insert(t.header.end(), kMetricHeader.begin(), kMetricHeader.end());
  t.header.push_back("delta_f1");
  for (const auto& r : rows) {
    std::vector<std::string> row = {r.configuration};
    metric_cells(r.metrics, row);
    row.push_back(cell(r.delta_f1));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable effects_table(const std::vector<eval::EffectEstimate>& effects) {
  CsvTable t;
  t.header = {"factor", "effect", "cohens_d", "p_value"};
  for (const auto& e : effects) {
    t.rows.push_back({e.factor, cell(e.effect), cell(e.cohens_d), cell(e.p_value)});
  }
  return t;
}

CsvTable factorial_cells_table(const std::vector<eval::FactorialRun>& runs) {
  std::map<int, std::pair<double, std::size_t>> cells;
  for (const auto& r : runs) {
    const int key = (r.cell.dense ? 1 : 0) | (r.cell.high_alignment ? 2 : 0) | (r.cell.complex ? 4 : 0);
    cells[key].first += r.hacking_frequency;
    cells[key].second += 1;
  }
  CsvTable t;
  t.header = {"density", "alignment", "complexity", "runs", "mean_hacking_frequency"};
  for (const auto& [key, acc] : cells) {
    t.rows.push_back({key & 1 ? "dense" : "sparse", key & 2 ? "high" : "low",
                      key & 4 ? "complex" : "simple", std::to_string(acc.second),
                      cell(acc.first / static_cast<double>(acc.second))});
  }
  return t;
}

CsvTable mitigation_table(const std::vector<experiments::MitigationRow>& rows) {
  CsvTable t;
  t.header = {"technique",     "intensity",    "hacking_before",
              "hacking_after", "reduction_pct", "performance_impact_pct"};
  for (const auto& r : rows) {
    t.rows.push_back({std::string(mitigation::to_string(r.technique)), cell(r.intensity),
                      cell(r.before.hacking_frequency), cell(r.after.hacking_frequency),
                      r.outcome.hacking_reduction_pct ? cell(*r.outcome.hacking_reduction_pct)
                                                      : std::string("NA"),
                      cell(r.outcome.performance_impact_pct)});
  }
  return t;
}

CsvTable sensitivity_table(const std::vector<experiments::SensitivityRow>& rows) {
  CsvTable t;
  t.header = {"tau_spec", "delta_rho", "contamination", "ppl_multiplier"};
  t.header.insert(t.header.end(), kMetricHeader.begin(), kMetricHeader.end());
  for (const auto& r : rows) {
    std::vector<std::string> row = {cell(r.tau_spec), cell(r.delta_rho), cell(r.contamination),
                                    cell(r.ppl_multiplier)};
    metric_cells(r.metrics, row);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Chart roc_chart(const std::vector<RiskAssessment>& assessments, const std::vector<bool>& labels) {
  require(assessments.size() == labels.size(), ErrorCode::kInvalidInput,
          "roc_chart: assessments and labels differ in length");
  Chart c;
  c.title = "ROC by detector";
  c.x_label = "false positive rate";
  c.y_label = "true positive rate";
  c.diagonal = true;
  const auto pos = std::count(labels.begin(), labels.end(), true);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) return c;
  auto add = [&](const std::string& name, const std::vector<double>& scores) {
    Series s;
    s.name = name;
    for (const auto& p : eval::roc_curve(scores, labels)) {
      s.xs.push_back(p.fpr);
      s.ys.push_back(p.tpr);
    }
    c.series.push_back(std::move(s));
  };
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    std::vector<double> scores;
    bool any = false;
    for (const auto& a : assessments) {
      const DetectorSignal& sig = a.signals[k];
      any = any || !sig.abstained;
      scores.push_back(sig.abstained ? -1e300 : sig.raw_score);
    }
    if (any) add(std::string(to_string(kAllCategories[k])), scores);
  }
  std::vector<double> risk;
  for (const auto& a : assessments) risk.push_back(a.risk);
  add("ensemble", risk);
  c.series.back().stroke_width = 3.5;
  c.series.back().color = "#000000";
  return c;
}

Chart flag_rate_chart(const std::vector<std::vector<double>>& series, std::size_t bucket) {
  Chart c;
  c.title = "Ensemble flag rate over training";
  c.x_label = "episode";
  c.y_label = "flag rate";
  std::size_t longest = 1;
  for (std::size_t i = 0; i < series.size(); ++i) {
    Series s;
    s.name = "stream " + std::to_string(i);
    for (std::size_t b = 0; b < series[i].size(); ++b) {
      s.xs.push_back(static_cast<double>(b * bucket + bucket / 2));
      s.ys.push_back(series[i][b]);
    }
    longest = std::max(longest, series[i].size() * bucket);
    c.series.push_back(std::move(s));
  }
  c.x_max = static_cast<double>(longest);
  return c;
}

Chart pareto_chart(const std::vector<experiments::MitigationRow>& rows) {
  Chart c;
  c.title = "Mitigation trade-off";
  c.x_label = "performance cost (%)";
  c.y_label = "hacking reduction (%)";
  c.x_max = 1.0;
  c.y_max = 1.0;
  std::map<mitigation::Technique, Series> by_technique;
  std::vector<std::pair<double, double>> points;
  for (const auto& r : rows) {
    if (!r.outcome.hacking_reduction_pct) continue;
    const double cost = -r.outcome.performance_impact_pct;
    const double red = *r.outcome.hacking_reduction_pct;
    Series& s = by_technique[r.technique];
    s.name = std::string(mitigation::to_string(r.technique));
    s.markers_only = true;
    s.xs.push_back(cost);
    s.ys.push_back(red);
    points.emplace_back(cost, red);
    c.x_max = std::max(c.x_max, std::ceil(cost + 1.0));
    c.y_max = std::max(c.y_max, std::ceil((red + 5.0) / 10.0) * 10.0);
  }
  for (auto& [t, s] : by_technique) c.series.push_back(std::move(s));
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  Series frontier;
  frontier.name = "Pareto frontier";
  frontier.dashed = true;
  frontier.color = "#333333";
  double best = -1e300;
  for (const auto& [cost, red] : points) {
    if (red > best) {
      frontier.xs.push_back(cost);
      frontier.ys.push_back(red);
      best = red;
    }
  }
  c.series.push_back(std::move(frontier));
  return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace rhd::report
