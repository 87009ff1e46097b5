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

// Episode logs are JSON Lines: one episode object per line, schema "v": 1.
//
//   {"v":1,"id":"...","env_id":"...","action_space":{"kind":"discrete","size":4},
//    "seed":7,"episode_index":0,
//    "steps":[{"t":0,"a":2,"obs":[0.1],"rp":1.25,"rt":1.0,"ck":"00ab..."}],
//    "label":{"is_hacking":true,"category":"reward_tampering",
//             "severity":"high","onset_step":12,"onset_pattern":"sudden_onset"},
//    "meta":{"key":"value"}}
//
// Keys are written in sorted order. Continuous actions are arrays
// ("a":[0.1,-0.3]). Checksums are 16 lowercase hex digits. Reals are written
// in shortest round-trip form. A line without "steps" but with
// "proxy_return" and "true_return" is imported as a single synthetic step. A
// missing "episode_index" defaults to the line's position in the file.

#ifndef RHD_EPISODE_IO_H_
#define RHD_EPISODE_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rhd/types.h"

namespace rhd {

inline constexpr int kEpisodeSchemaVersion = 1;

std::string serialize_episode(const Episode& e);
Episode parse_episode(std::string_view line, std::int64_t default_index = 0);

void write_episodes(std::ostream& out, const std::vector<Episode>& episodes);
std::vector<Episode> read_episodes(std::istream& in);

void write_episode_log(const std::filesystem::path& path,
                       const std::vector<Episode>& episodes);
std::vector<Episode> read_episode_log(const std::filesystem::path& path);

}  // namespace rhd

#endif  // RHD_EPISODE_IO_H_
