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

// Assessment files written by `rhd detect`: JSON Lines, one RiskAssessment
// per episode in stream order.
//
//   {"v":1,"id":"...","index":3,"risk":0.71,"flagged":true,"consensus":4,
//    "signals":[{"category":"specification_gaming","raw":0.9,"confidence":0.98,
//                "flagged":true,"threshold":0.3,"abstained":false,
//                "secondary":0,"warnings":0}, ...]}

#ifndef RHD_ASSESSMENT_IO_H_
#define RHD_ASSESSMENT_IO_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rhd/types.h"

namespace rhd {

inline constexpr int kAssessmentSchemaVersion = 1;

std::string serialize_assessment(const RiskAssessment& a);
RiskAssessment parse_assessment(std::string_view line);

void write_assessments(std::ostream& out, const std::vector<RiskAssessment>& as);
std::vector<RiskAssessment> read_assessments(std::istream& in);

void write_assessment_file(const std::filesystem::path& path,
                           const std::vector<RiskAssessment>& as);
std::vector<RiskAssessment> read_assessment_file(const std::filesystem::path& path);

}  // namespace rhd

#endif  // RHD_ASSESSMENT_IO_H_
