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

// Fitted-model bundle: a JSON Lines file with a header line, one line per
// detector in category order, the ensemble and optional per-environment
// threshold factors.
//
//   {"kind":"header","format":"rhd-model-bundle","v":1,"seed":...}
//   {"kind":"detector","category":"specification_gaming",...}
//   ...
//   {"kind":"ensemble",...}
//   {"kind":"threshold_factors","envs":{...}}
//
// Wireheading stores only its tolerance and threshold; the declared reward
// functions come from the environment catalog on load.

#ifndef RHD_BUNDLE_H_
#define RHD_BUNDLE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rhd/detectors.h"
#include "rhd/ensemble.h"

namespace rhd {

inline constexpr int kBundleSchemaVersion = 1;

struct ModelBundle {
  detect::DetectorSet detectors;
  ensemble::EnsembleModel ensemble;
  std::optional<detect::ThresholdFactors> factors;
  std::uint64_t seed = 0;
  std::size_t n_reference = 0;
  std::vector<std::string> warnings;
};

void write_bundle(std::ostream& out, const ModelBundle& bundle);
ModelBundle read_bundle(std::istream& in);

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace rhd

#endif  // RHD_BUNDLE_H_
