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

#ifndef BASECAGG_QUANTIZE_HPP_
#define BASECAGG_QUANTIZE_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "basecagg/errors.hpp"
#include "basecagg/field.hpp"
#include "basecagg/rng.hpp"

namespace basecagg {

// Quantization levels: c_l scales local updates, c_g scales staleness
// weights. Larger values mean finer resolution but less headroom before
// field wrap-around.
struct QuantParams {
  uint64_t c_l = 1ULL << 16;
  uint64_t c_g = 1ULL << 6;
};

// Staleness compensation s(tau): s(0) = 1 and nonincreasing in tau.
struct StalenessFn {
  enum class Kind { kConstant, kPoly };
  Kind kind = Kind::kPoly;
  double alpha = 1.0;  // Poly exponent; ignored for Constant

  static StalenessFn Constant() { return {Kind::kConstant, 0.0}; }
  static StalenessFn Poly(double alpha) { return {Kind::kPoly, alpha}; }
};

inline double staleness_weight(const StalenessFn& fn, uint64_t tau) {
  switch (fn.kind) {
    case StalenessFn::Kind::kConstant:
      return 1.0;
    case StalenessFn::Kind::kPoly:
      return std::pow(1.0 + static_cast<double>(tau), -fn.alpha);
  }
  return 1.0;
}

// How signed integers behave at the edge of the field's signed window:
// kStrict raises OutOfRange, kWrap reduces mod q (two's-complement
// wrap-around, used only by the reduced-field experiments).
enum class WrapPolicy { kStrict, kWrap };

// Scaled stochastic rounding: the integer floor(c*x) + Bernoulli(frac),
// i.e. c * Q_c(x). Mathematical floor, so -1.2 rounds between -2 and -1;
// that is what keeps the expectation exactly c*x for negative inputs.
// A Bernoulli draw is consumed even when c*x is integral, so RNG stream
// positions do not depend on data values.
inline int64_t stochastic_round_scaled(double x, uint64_t c, Rng& rng) {
  const double cx = static_cast<double>(c) * x;
  if (!std::isfinite(cx)) throw NonFinite();
  const double fl = std::floor(cx);
  if (std::abs(fl) >= 0x1.0p62) {
    throw OutOfRange(static_cast<int64_t>(0x1.0p62), 0);
  }
  const double frac = cx - fl;
  const int64_t up = rng.bernoulli(frac) ? 1 : 0;
  return static_cast<int64_t>(fl) + up;
}

// Q_c(x): an integer multiple of 1/c, one of the two multiples bracketing
// x, with E[Q_c(x)] = x.
inline double stochastic_round(double x, uint64_t c, Rng& rng) {
  return static_cast<double>(stochastic_round_scaled(x, c, rng)) /
         static_cast<double>(c);
}

// Signed-to-field embedding: x for x >= 0, q + x for x < 0. The strict
// variant requires |x| < (q-1)/2 so the embedding is invertible.
inline uint64_t map_to_field(const Field& field, int64_t x,
                             size_t coord = 0) {
  const int64_t half = static_cast<int64_t>(field.half());
  if (x >= half || x <= -half) throw OutOfRange(x, coord);
  return x >= 0 ? static_cast<uint64_t>(x)
                : field.modulus() - static_cast<uint64_t>(-x);
}

inline uint64_t map_to_field_wrapping(const Field& field, int64_t x) {
  const int64_t q = static_cast<int64_t>(field.modulus());
  int64_t r = x % q;
  if (r < 0) r += q;
  return static_cast<uint64_t>(r);
}

// Inverse embedding: y for y < (q-1)/2, y - q otherwise.
inline int64_t demap_from_field(const Field& field, uint64_t y) {
  if (y < field.half()) return static_cast<int64_t>(y);
  return static_cast<int64_t>(y) - static_cast<int64_t>(field.modulus());
}

// Elementwise field image of c_l * Q_{c_l}(delta).
inline FieldVector quantize_update(const Field& field,
                                   const std::vector<double>& delta,
                                   const QuantParams& params, Rng& rng,
                                   WrapPolicy policy = WrapPolicy::kStrict) {
  FieldVector out(delta.size());
  for (size_t k = 0; k < delta.size(); ++k) {
    const int64_t v = stochastic_round_scaled(delta[k], params.c_l, rng);
    out[k] = policy == WrapPolicy::kStrict ? map_to_field(field, v, k)
                                           : map_to_field_wrapping(field, v);
  }
  return out;
}

// Field image of the integer staleness weight c_g * Q_{c_g}(s(tau)).
// s(tau) is in (0, 1], so the result lies in [0, c_g].
inline uint64_t quantized_staleness(const Field& field, const StalenessFn& fn,
                                    uint64_t tau, uint64_t c_g, Rng& rng) {
  const double s = staleness_weight(fn, tau);
  const int64_t v = stochastic_round_scaled(s, c_g, rng);
  return map_to_field(field, v);
}

// Final dequantization of a mask-free weighted aggregate. weight_sum is the
// field sum of the quantized staleness weights; it already carries the c_g
// factor, so the normalization is one division by c_l and one by the
// demapped weight sum.
inline std::vector<double> dequantize_aggregate(const Field& field,
                                                const FieldVector& agg,
                                                uint64_t weight_sum,
                                                const QuantParams& params) {
  const int64_t ws = demap_from_field(field, weight_sum);
  if (ws == 0) throw ZeroWeightSum();
  const double denom =
      static_cast<double>(params.c_l) * static_cast<double>(ws);
  std::vector<double> out(agg.size());
  for (size_t k = 0; k < agg.size(); ++k) {
    out[k] = static_cast<double>(demap_from_field(field, agg[k])) / denom;
  }
  return out;
}

// Wrap-around guard on a quantized update: a buffer of up to `buffer_size`
// such updates, each weighted by at most c_g, must still demap correctly,
// i.e. c_g * buffer_size * |v_k| < (q-1)/2 for every coordinate. The
// protocol assumes the field is large enough; this makes a violation loud
// instead of silent.
inline void check_aggregate_headroom(const Field& field,
                                     const FieldVector& quantized,
                                     uint64_t buffer_size, uint64_t c_g) {
  const unsigned __int128 half = field.half();
  for (size_t k = 0; k < quantized.size(); ++k) {
    const int64_t v = demap_from_field(field, quantized[k]);
    const unsigned __int128 mag =
        static_cast<unsigned __int128>(v < 0 ? -v : v) * buffer_size * c_g;
    if (mag >= half) throw OutOfRange(v, k);
  }
}

}  // namespace basecagg

#endif  // BASECAGG_QUANTIZE_HPP_
