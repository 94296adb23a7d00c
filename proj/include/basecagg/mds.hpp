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

#ifndef BASECAGG_MDS_HPP_
#define BASECAGG_MDS_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "basecagg/errors.hpp"
#include "basecagg/field.hpp"

namespace basecagg {

// (N, U) MDS code realized by a U x N Vandermonde matrix with evaluation
// points j in {1..N}: column j is (1, j, j^2, ..., j^{U-1}). Any U distinct
// columns are linearly independent, so any U shares determine the U
// partitions. Encoding and decoding act elementwise on vectors of equal
// length, i.e. on a whole block of coordinates at once.

// Share for evaluation point j (1-based, nonzero): sum_r partitions[r] * j^r.
inline FieldVector mds_encode(const Field& field,
                              const std::vector<FieldVector>& partitions,
                              uint64_t j) {
  if (partitions.empty()) throw InvalidParams("mds_encode: no partitions");
  if (j == 0) throw InvalidParams("mds_encode: evaluation point must be nonzero");
  const size_t len = partitions[0].size();
  for (const auto& p : partitions) {
    if (p.size() != len) {
      throw DimensionMismatch("mds_encode: partition lengths differ");
    }
  }
  // Horner over the polynomial with vector coefficients.
  FieldVector share = partitions.back();
  const uint64_t x = j % field.modulus();
  for (size_t r = partitions.size() - 1; r-- > 0;) {
    for (size_t k = 0; k < len; ++k) {
      share[k] = field.add(field.mul(share[k], x), partitions[r][k]);
    }
  }
  return share;
}

// Recovers the U partitions from U shares at distinct nonzero evaluation
// points, by exact Gaussian elimination on the U x U Vandermonde system.
// U is small here, so O(U^3 + U^2 * len) exact elimination beats any
// clever interpolation.
inline std::vector<FieldVector> mds_decode(
    const Field& field,
    const std::vector<std::pair<uint64_t, FieldVector>>& shares) {
  const size_t u = shares.size();
  if (u == 0) throw InvalidParams("mds_decode: no shares");
  const size_t len = shares[0].second.size();
  for (size_t s = 0; s < u; ++s) {
    if (shares[s].first == 0) {
      throw InvalidParams("mds_decode: evaluation point must be nonzero");
    }
    if (shares[s].second.size() != len) {
      throw DimensionMismatch("mds_decode: share lengths differ");
    }
    for (size_t t = s + 1; t < u; ++t) {
      if (shares[s].first == shares[t].first) {
        throw DuplicateIndex(shares[s].first);
      }
    }
  }

  // Augmented system [A | Y]: A[s][r] = j_s^r, Y[s] = share vector s.
  std::vector<std::vector<uint64_t>> a(u, std::vector<uint64_t>(u));
  std::vector<FieldVector> y(u);
  for (size_t s = 0; s < u; ++s) {
    const uint64_t x = shares[s].first % field.modulus();
    uint64_t p = 1;
    for (size_t r = 0; r < u; ++r) {
      a[s][r] = p;
      p = field.mul(p, x);
    }
    y[s] = shares[s].second;
  }

  // Forward elimination with exact pivots.
  for (size_t col = 0; col < u; ++col) {
    size_t pivot = col;
    while (pivot < u && a[pivot][col] == 0) ++pivot;
    if (pivot == u) {
      // Unreachable for distinct nonzero points; guards a corrupted call.
      throw InvalidParams("mds_decode: singular system");
    }
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      std::swap(y[pivot], y[col]);
    }
    const uint64_t inv_p = field.inv(a[col][col]);
    for (size_t r = col; r < u; ++r) a[col][r] = field.mul(a[col][r], inv_p);
    for (auto& e : y[col]) e = field.mul(e, inv_p);
    for (size_t row = 0; row < u; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const uint64_t factor = a[row][col];
      for (size_t r = col; r < u; ++r) {
        a[row][r] = field.sub(a[row][r], field.mul(factor, a[col][r]));
      }
      for (size_t k = 0; k < len; ++k) {
        y[row][k] = field.sub(y[row][k], field.mul(factor, y[col][k]));
      }
    }
  }
  return y;
}

}  // namespace basecagg

#endif  // BASECAGG_MDS_HPP_
