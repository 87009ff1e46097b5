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

#ifndef RHD_PRNG_H_
#define RHD_PRNG_H_

#include <cstddef>
#include <cstdint>
#include <span>

namespace rhd {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent seed for a numbered sub-stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return mix64(mix64(seed ^ mix64(a + 0x9e3779b97f4a7c15ULL)) ^
               (b * 0xd1b54a32d192ed03ULL));
}

// splitmix64 generator: state advances by the golden gamma and each output is
// the finalizer of the new state. Seed 0 yields 0xe220a8397b1dcdaf first.
// Integer and uniform outputs are identical on every platform; normal() goes
// through libm (log, sqrt, cos).
class Prng {
 public:
  using result_type = std::uint64_t;

  explicit Prng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }
  std::uint64_t operator()() { return next_u64(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (one draw per call, no cached pair).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Fisher-Yates shuffle of indices.
  void shuffle(std::span<std::size_t> items);

 private:
  std::uint64_t state_;
};

// Stateless standard-normal draw keyed by (seed, counter); used where a value
// must be recomputable without replaying a stream.
double keyed_normal(std::uint64_t seed, std::uint64_t counter);
double keyed_uniform(std::uint64_t seed, std::uint64_t counter);

}  // namespace rhd

#endif  // RHD_PRNG_H_
