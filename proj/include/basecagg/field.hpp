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

#ifndef BASECAGG_FIELD_HPP_
#define BASECAGG_FIELD_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "basecagg/errors.hpp"
#include "basecagg/rng.hpp"

namespace basecagg {

// Elements of F_q are canonical residues in [0, q) stored as uint64_t; every
// operation below returns a canonical residue.
using FieldVector = std::vector<uint64_t>;

namespace detail {

inline uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline uint64_t powmod_u64(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mulmod_u64(result, base, m);
    base = mulmod_u64(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Deterministic Miller-Rabin; the base set {2,3,5,7} is exact for all
// n < 3,215,031,751, which covers every 32-bit modulus.
inline bool is_prime_u32(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL}) {
    uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace detail

// Arithmetic context for the prime field F_q. The modulus is a runtime
// parameter so tests can drop to tiny primes (q = 11) where exhaustive
// enumeration is feasible; the protocol default is the largest 32-bit prime.
// q is capped at 32 bits so products of residues fit in uint64_t.
class Field {
 public:
  static constexpr uint64_t kDefaultModulus = 4294967291ULL;  // 2^32 - 5

  explicit Field(uint64_t modulus = kDefaultModulus) : q_(modulus) {
    if (modulus < 2 || modulus > 0xFFFFFFFFULL ||
        !detail::is_prime_u32(modulus)) {
      throw InvalidParams("field modulus must be a prime below 2^32, got " +
                          std::to_string(modulus));
    }
  }

  uint64_t modulus() const { return q_; }

  // Split point of the signed embedding: values in [0, half) are
  // nonnegative, values in [half, q) represent negatives.
  uint64_t half() const { return (q_ - 1) / 2; }

  uint64_t add(uint64_t a, uint64_t b) const {
    uint64_t s = a + b;
    return s >= q_ ? s - q_ : s;
  }

  uint64_t sub(uint64_t a, uint64_t b) const {
    return a >= b ? a - b : a + q_ - b;
  }

  uint64_t neg(uint64_t a) const { return a == 0 ? 0 : q_ - a; }

  uint64_t mul(uint64_t a, uint64_t b) const {
    // a, b < 2^32 so the product fits in 64 bits.
    return (a * b) % q_;
  }

  uint64_t pow(uint64_t base, uint64_t exp) const {
    return detail::powmod_u64(base, exp, q_);
  }

  // Multiplicative inverse by extended Euclid.
  uint64_t inv(uint64_t a) const {
    if (a == 0) throw ZeroInverse();
    int64_t r0 = static_cast<int64_t>(q_), r1 = static_cast<int64_t>(a % q_);
    int64_t s0 = 0, s1 = 1;
    while (r1 != 0) {
      int64_t div = r0 / r1;
      int64_t tmp = r0 - div * r1;
      r0 = r1;
      r1 = tmp;
      tmp = s0 - div * s1;
      s0 = s1;
      s1 = tmp;
    }
    return s0 >= 0 ? static_cast<uint64_t>(s0)
                   : static_cast<uint64_t>(s0 + static_cast<int64_t>(q_));
  }

  uint64_t random_element(Rng& rng) const { return rng.uniform_below(q_); }

  FieldVector random_vector(size_t len, Rng& rng) const {
    FieldVector v(len);
    for (auto& e : v) e = random_element(rng);
    return v;
  }

  FieldVector add(const FieldVector& a, const FieldVector& b) const {
    require_same_length(a, b);
    FieldVector out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = add(a[i], b[i]);
    return out;
  }

  FieldVector sub(const FieldVector& a, const FieldVector& b) const {
    require_same_length(a, b);
    FieldVector out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = sub(a[i], b[i]);
    return out;
  }

  FieldVector scaled(uint64_t w, const FieldVector& v) const {
    FieldVector out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = mul(w, v[i]);
    return out;
  }

  // acc += w * v, elementwise.
  void add_scaled_in_place(FieldVector& acc, uint64_t w,
                           const FieldVector& v) const {
    require_same_length(acc, v);
    for (size_t i = 0; i < v.size(); ++i) acc[i] = add(acc[i], mul(w, v[i]));
  }

  static void require_same_length(const FieldVector& a, const FieldVector& b) {
    if (a.size() != b.size()) {
      throw DimensionMismatch("vector lengths differ: " +
                              std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
  }

 private:
  uint64_t q_;
};

}  // namespace basecagg

#endif  // BASECAGG_FIELD_HPP_
