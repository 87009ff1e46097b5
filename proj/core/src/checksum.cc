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

#include "rhd/checksum.h"

#include <bit>
#include <cstring>
#include <vector>

namespace rhd {
namespace {

constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t mix_u64(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= static_cast<std::uint8_t>(v >> (8 * i));
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = kFnvOffsetBasis;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t reward_checksum(std::int64_t t, const ActionValue& action,
                              double proxy_reward, std::uint64_t hash_key) {
  // Byte-at-a-time little-endian emission, independent of host endianness.
  std::uint64_t h = kFnvOffsetBasis;
  h = mix_u64(h, static_cast<std::uint64_t>(t));
  if (const auto* sym = std::get_if<std::int64_t>(&action)) {
    h = mix_u64(h, static_cast<std::uint64_t>(*sym));
  } else {
    for (double x : std::get<std::vector<double>>(action)) {
      h = mix_u64(h, std::bit_cast<std::uint64_t>(x));
    }
  }
  h = mix_u64(h, std::bit_cast<std::uint64_t>(proxy_reward));
  return h ^ hash_key;
}

}  // namespace rhd
