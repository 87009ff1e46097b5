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

#include "rhd/assessment_io.h"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "rhd/error.h"

namespace rhd {
namespace {

using nlohmann::json;

const json& at(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    fail(ErrorCode::kParseError, std::string("assessment: missing field '") + field + "'");
  }
  return *it;
}

}  // namespace

std::string serialize_assessment(const RiskAssessment& a) {
  json signals = json::array();
  for (const DetectorSignal& s : a.signals) {
    signals.push_back({{"category", std::string(to_string(s.category))},
                       {"raw", s.raw_score},
                       {"confidence", s.calibrated_confidence},
                       {"flagged", s.flagged},
                       {"threshold", s.threshold_used},
                       {"abstained", s.abstained},
                       {"secondary", s.secondary_score},
                       {"warnings", s.warnings}});
  }
  const json j = {{"v", kAssessmentSchemaVersion},
                  {"id", a.episode_id},
                  {"index", a.episode_index},
                  {"risk", a.risk},
                  {"flagged", a.flagged},
                  {"consensus", a.consensus_count},
                  {"signals", std::move(signals)}};
  return j.dump();
}

RiskAssessment parse_assessment(std::string_view line) {
  try {
    const json j = json::parse(line);
    if (at(j, "v") != kAssessmentSchemaVersion) {
      fail(ErrorCode::kParseError, "assessment: unsupported version " + at(j, "v").dump());
    }
    RiskAssessment a;
    a.episode_id = at(j, "id").get<std::string>();
    a.episode_index = at(j, "index").get<std::int64_t>();
    a.risk = at(j, "risk").get<double>();
    a.flagged = at(j, "flagged").get<bool>();
    a.consensus_count = at(j, "consensus").get<int>();
    const json& signals = at(j, "signals");
    if (!signals.is_array() || signals.size() != kNumCategories) {
      fail(ErrorCode::kParseError, "assessment: expected 6 signals");
    }
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      const json& s = signals[k];
      DetectorSignal& d = a.signals[k];
      d.category = parse_category(at(s, "category").get<std::string>());
      if (d.category != kAllCategories[k]) {
        fail(ErrorCode::kParseError, "assessment: signals out of category order");
      }
      d.raw_score = at(s, "raw").get<double>();
      d.calibrated_confidence = at(s, "confidence").get<double>();
      d.flagged = at(s, "flagged").get<bool>();
      d.threshold_used = at(s, "threshold").get<double>();
      d.abstained = at(s, "abstained").get<bool>();
      d.secondary_score = at(s, "secondary").get<double>();
      d.warnings = at(s, "warnings").get<std::uint32_t>();
    }
    return a;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("assessment: ") + e.what());
  }
}

void write_assessments(std::ostream& out, const std::vector<RiskAssessment>& as) {
  for (const RiskAssessment& a : as) out << serialize_assessment(a) << '\n';
}

std::vector<RiskAssessment> read_assessments(std::istream& in) {
  std::vector<RiskAssessment> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(parse_assessment(line));
    } catch (const Error& e) {
      fail(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_assessment_file(const std::filesystem::path& path,
                           const std::vector<RiskAssessment>& as) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + path.string());
  write_assessments(out, as);
  require(static_cast<bool>(out), ErrorCode::kIoError, "write failed: " + path.string());
}

std::vector<RiskAssessment> read_assessment_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIoError, "cannot read " + path.string());
  return read_assessments(in);
}

}  // namespace rhd
