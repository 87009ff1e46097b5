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

#ifndef RHD_CHECKSUM_H_
#define RHD_CHECKSUM_H_

#include <cstdint>
#include <span>

#include "rhd/types.h"

namespace rhd {

// 64-bit FNV-1a over a byte span, starting from the standard offset basis.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

// Keyed reward checksum. The canonical byte encoding is:
//   t as little-endian u64,
//   the action (a discrete symbol as little-endian u64; a continuous vector as
//   the little-endian IEEE-754 bits of each component in order),
//   proxy_reward as little-endian IEEE-754 bits.
// The FNV-1a digest of those bytes is XOR-ed with the environment hash key.
std::uint64_t reward_checksum(std::int64_t t, const ActionValue& action,
                              double proxy_reward, std::uint64_t hash_key);

}  // namespace rhd

#endif  // RHD_CHECKSUM_H_
