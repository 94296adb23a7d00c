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

#ifndef BASECAGG_MASKING_HPP_
#define BASECAGG_MASKING_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "basecagg/errors.hpp"
#include "basecagg/field.hpp"
#include "basecagg/mds.hpp"
#include "basecagg/rng.hpp"

namespace basecagg {

// Mask-sharing parameters. n users hold shares; any u of them can rebuild
// an aggregate mask; any t of them learn nothing. Requires
// n - dropout_bound >= u > t >= 0.
struct MaskParams {
  uint64_t n = 0;              // N: number of users / shares
  uint64_t u = 0;              // U: decoding threshold
  uint64_t t = 0;              // T: collusion tolerance
  uint64_t dropout_bound = 0;  // D: max dropouts per round
};

inline void validate_mask_params(const MaskParams& p) {
  if (p.u + p.dropout_bound > p.n) {
    throw InvalidParams("need N - D >= U: N=" + std::to_string(p.n) +
                        " D=" + std::to_string(p.dropout_bound) +
                        " U=" + std::to_string(p.u));
  }
  if (p.t >= p.u) {
    // u == t would leave no data sub-masks at all.
    throw InvalidParams("need U > T: U=" + std::to_string(p.u) +
                        " T=" + std::to_string(p.t));
  }
}

// Smallest multiple of (u - t) that is >= d; masks are padded to this
// length so they split into equal sub-masks.
inline uint64_t padded_dimension(uint64_t d, uint64_t u, uint64_t t) {
  const uint64_t chunks = (d + (u - t) - 1) / (u - t);
  return chunks * (u - t);
}

// A user's per-download mask along with its encoded shares.
//
// `mask` is uniform over F_q^{d_pad}; its first d coordinates blind the
// quantized update. The u partitions are the u-t sub-masks of `mask`
// followed by t fresh uniform noise blocks, and shares[j-1] is the MDS
// share destined for user j. Padding coordinates are uniform random, not
// zero, so they reveal nothing about where the real data ends.
struct MaskPackage {
  uint64_t owner = 0;  // user id in [1, N]; doubles as its evaluation point
  uint64_t round = 0;  // t_i: the round whose model this mask protects
  uint64_t dim = 0;    // d before padding
  FieldVector mask;
  std::vector<FieldVector> partitions;
  std::vector<FieldVector> shares;
};

// Deterministic package construction from explicit partitions (the first
// u-t of which define the mask). Used by tests that pin exact values and
// by generate_mask_package below.
inline MaskPackage make_mask_package(const Field& field, uint64_t owner,
                                     uint64_t round, uint64_t d,
                                     const MaskParams& params,
                                     std::vector<FieldVector> partitions) {
  validate_mask_params(params);
  if (d < 1) throw InvalidParams("mask dimension must be positive");
  if (owner < 1 || owner > params.n) {
    throw InvalidParams("owner id out of range");
  }
  if (partitions.size() != params.u) {
    throw InvalidParams("expected U partitions");
  }
  const uint64_t d_pad = padded_dimension(d, params.u, params.t);
  const uint64_t block = d_pad / (params.u - params.t);
  for (const auto& p : partitions) {
    if (p.size() != block) {
      throw DimensionMismatch("partition block length mismatch");
    }
  }

  MaskPackage pkg;
  pkg.owner = owner;
  pkg.round = round;
  pkg.dim = d;
  pkg.mask.reserve(d_pad);
  for (uint64_t k = 0; k < params.u - params.t; ++k) {
    pkg.mask.insert(pkg.mask.end(), partitions[k].begin(), partitions[k].end());
  }
  pkg.shares.reserve(params.n);
  for (uint64_t j = 1; j <= params.n; ++j) {
    pkg.shares.push_back(mds_encode(field, partitions, j));
  }
  pkg.partitions = std::move(partitions);
  return pkg;
}

// Fresh uniform mask for (owner, round): u-t data sub-masks plus t noise
// blocks, all drawn from `rng`.
inline MaskPackage generate_mask_package(const Field& field, uint64_t owner,
                                         uint64_t round, uint64_t d,
                                         const MaskParams& params, Rng& rng) {
  validate_mask_params(params);
  if (d < 1) throw InvalidParams("mask dimension must be positive");
  const uint64_t d_pad = padded_dimension(d, params.u, params.t);
  const uint64_t block = d_pad / (params.u - params.t);
  std::vector<FieldVector> partitions;
  partitions.reserve(params.u);
  for (uint64_t k = 0; k < params.u; ++k) {
    partitions.push_back(field.random_vector(block, rng));
  }
  return make_mask_package(field, owner, round, d, params, std::move(partitions));
}

// Per-user inventory of received encoded shares, keyed by (owner, round).
class ShareStore {
 public:
  void put(uint64_t owner, uint64_t round, FieldVector share) {
    shares_[Key{owner, round}] = std::move(share);
  }

  bool has(uint64_t owner, uint64_t round) const {
    return shares_.count(Key{owner, round}) > 0;
  }

  const FieldVector& get(uint64_t owner, uint64_t round) const {
    auto it = shares_.find(Key{owner, round});
    if (it == shares_.end()) throw MissingShare(owner, round);
    return it->second;
  }

  // Shares older than the staleness window can never be requested again.
  void evict_rounds_before(uint64_t cutoff_round) {
    for (auto it = shares_.begin(); it != shares_.end();) {
      it = it->first.second < cutoff_round ? shares_.erase(it) : ++it;
    }
  }

  size_t size() const { return shares_.size(); }

 private:
  using Key = std::pair<uint64_t, uint64_t>;  // (owner, round)
  std::map<Key, FieldVector> shares_;
};

// One buffered upload's identity inside a recovery round.
struct RecoveryMember {
  uint64_t owner = 0;
  uint64_t round = 0;  // t_i at which this member downloaded

  bool operator==(const RecoveryMember&) const = default;
};

// Broadcast when the buffer is full: which (owner, round) pairs to combine
// and with which realized staleness weights. The server draws the weights
// once so its normalization and every responder's aggregation use the same
// stochastic values.
struct RecoveryRequest {
  uint64_t round = 0;  // t
  std::vector<RecoveryMember> members;
  uint64_t c_g = 0;
  std::vector<uint64_t> weights;  // field images, aligned with members
};

// A responder's contribution: the weighted sum of its stored shares for
// exactly the requested (owner, round) pairs. Shares stamped with any
// other round must not be touched; combining a member with the wrong
// round index would break cancellation.
inline FieldVector aggregate_encoded_shares(
    const Field& field, const ShareStore& store,
    const std::vector<RecoveryMember>& members,
    const std::vector<uint64_t>& weights) {
  if (members.empty()) throw InvalidParams("empty recovery member set");
  if (members.size() != weights.size()) {
    throw DimensionMismatch("one weight per member required");
  }
  FieldVector acc(store.get(members[0].owner, members[0].round).size(), 0);
  for (size_t m = 0; m < members.size(); ++m) {
    const FieldVector& share = store.get(members[m].owner, members[m].round);
    field.add_scaled_in_place(acc, weights[m], share);
  }
  return acc;
}

// One-shot recovery: decode any u of the aggregated responses, drop the t
// noise blocks, and reassemble the weighted aggregate mask truncated to d.
inline FieldVector recover_aggregate_mask(
    const Field& field,
    const std::vector<std::pair<uint64_t, FieldVector>>& responses, uint64_t u,
    uint64_t t, uint64_t d) {
  if (responses.size() < u) throw InsufficientResponses(responses.size(), u);
  std::vector<std::pair<uint64_t, FieldVector>> subset(responses.begin(),
                                                       responses.begin() + u);
  auto partitions = mds_decode(field, subset);
  FieldVector out;
  out.reserve(d);
  for (uint64_t k = 0; k < u - t && out.size() < d; ++k) {
    for (uint64_t e : partitions[k]) {
      if (out.size() == d) break;
      out.push_back(e);
    }
  }
  if (out.size() != d) {
    throw DimensionMismatch("recovered mask shorter than model dimension");
  }
  return out;
}

}  // namespace basecagg

#endif  // BASECAGG_MASKING_HPP_
