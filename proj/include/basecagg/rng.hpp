// Copyright 2026 The BASecAgg Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BASECAGG_RNG_HPP_
#define BASECAGG_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace basecagg {

// splitmix64 finalizer; used to derive independent stream seeds.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(mix64(a) ^ b); }

inline uint64_t mix64(uint64_t a, uint64_t b, uint64_t c) {
  return mix64(mix64(a, b) ^ c);
}

// Seeded random stream. The engine (mt19937_64) is fully specified by the
// standard, and every sampling helper below is written against raw engine
// output instead of std distributions, whose algorithms are
// implementation-defined. Identical seeds therefore yield identical draws
// on every platform.
//
// Streams are split by key, not by engine state: fork(tag) derives the
// child seed from (key, tag), so the result does not depend on how many
// values the parent has already drawn.
class Rng {
 public:
  explicit Rng(uint64_t seed) : key_(seed), engine_(mix64(seed)) {}

  uint64_t key() const { return key_; }

  Rng fork(uint64_t tag) const { return Rng(mix64(key_, tag)); }
  Rng fork(uint64_t tag_a, uint64_t tag_b) const {
    return Rng(mix64(key_, tag_a, tag_b));
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, n). Rejection sampling keeps the result exact
  // and platform-independent.
  uint64_t uniform_below(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Inclusive range [lo, hi].
  uint64_t uniform_range(uint64_t lo, uint64_t hi) {
    return lo + uniform_below(hi - lo + 1);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    // Box-Muller; one value per call, no state carried across calls.
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    return mean + stddev * r * std::cos(two_pi * u2);
  }

 private:
  uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace basecagg

#endif  // BASECAGG_RNG_HPP_
