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

// Release-gate property batteries. Each battery re-derives its expected
// values from first principles (exhaustive enumeration, 128-bit integer
// arithmetic, Monte Carlo statistics) rather than from the code under
// test, and reports a single pass/fail with a diagnostic.

#ifndef BASECAGG_VERIFY_HPP_
#define BASECAGG_VERIFY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "basecagg/field.hpp"
#include "basecagg/masking.hpp"
#include "basecagg/mds.hpp"
#include "basecagg/protocol.hpp"
#include "basecagg/quantize.hpp"
#include "basecagg/rng.hpp"

namespace basecagg {
namespace verify {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Collusion privacy by exhaustive tabulation at q=11, N=4, U=3, T=1, d=1:
// for every colluder and every value of the data sub-mask, the share's
// conditional distribution over the owner's remaining randomness is
// exactly uniform, so the mutual information between mask and share is
// exactly zero bits.
inline PropertyResult tiny_field_privacy() {
  PropertyResult result{"tiny-field-privacy", false, ""};
  Field f(11);
  MaskParams p{.n = 4, .u = 3, .t = 1, .dropout_bound = 1};
  double max_mi = 0.0;
  for (uint64_t j = 1; j <= p.n; ++j) {
    // joint[z0][share]: counts over uniform (z1, n0).
    std::array<std::array<uint64_t, 11>, 11> joint{};
    for (uint64_t z0 = 0; z0 < 11; ++z0) {
      for (uint64_t z1 = 0; z1 < 11; ++z1) {
        for (uint64_t n0 = 0; n0 < 11; ++n0) {
          auto pkg = make_mask_package(f, 1, 0, 1, p, {{z0}, {z1}, {n0}});
          ++joint[z0][pkg.shares[j - 1][0]];
        }
      }
    }
    // Exact uniformity of every conditional row.
    for (const auto& row : joint) {
      for (uint64_t c : row) {
        if (c != 11) {
          result.detail = "conditional share distribution is not uniform";
          return result;
        }
      }
    }
    // Mutual information from the tabulated joint (z0 uniform).
    double mi = 0.0;
    for (uint64_t z0 = 0; z0 < 11; ++z0) {
      for (uint64_t s = 0; s < 11; ++s) {
        const double pz = 1.0 / 11.0;
        const double pj = static_cast<double>(joint[z0][s]) / (11.0 * 121.0);
        const double ps = 1.0 / 11.0;  // uniform by the check above
        if (pj > 0) mi += pj * std::log2(pj / (pz * ps));
      }
    }
    max_mi = std::max(max_mi, std::abs(mi));
  }
  if (max_mi != 0.0) {
    result.detail = "mutual information " + std::to_string(max_mi) + " bits";
    return result;
  }
  result.passed = true;
  result.detail = "mutual information 0.0 bits by enumeration";
  return result;
}

// MDS battery: encode/decode round-trips and subset agreement, exhaustive
// over all U-subsets for N <= 6 and sampled at N=100, U=40; plus the
// coding/linearity commutation: cross-round weighted share aggregation
// decodes to the weighted mask sum bit-exactly.
inline PropertyResult mds_battery(uint64_t seed) {
  PropertyResult result{"mds-battery", false, ""};
  Rng rng(seed);

  Field tiny(11);
  for (uint64_t n = 2; n <= 6; ++n) {
    for (uint64_t u = 1; u <= n; ++u) {
      std::vector<FieldVector> parts;
      for (uint64_t r = 0; r < u; ++r) {
        parts.push_back(tiny.random_vector(2, rng));
      }
      std::vector<FieldVector> shares;
      for (uint64_t j = 1; j <= n; ++j) {
        shares.push_back(mds_encode(tiny, parts, j));
      }
      for (uint32_t bits = 0; bits < (1u << n); ++bits) {
        if (static_cast<uint64_t>(__builtin_popcount(bits)) != u) continue;
        std::vector<std::pair<uint64_t, FieldVector>> sub;
        for (uint64_t j = 0; j < n; ++j) {
          if (bits & (1u << j)) sub.emplace_back(j + 1, shares[j]);
        }
        if (mds_decode(tiny, sub) != parts) {
          result.detail = "subset decode mismatch at N=" + std::to_string(n) +
                          " U=" + std::to_string(u);
          return result;
        }
      }
    }
  }

  Field big;
  {
    const uint64_t n = 100, u = 40;
    std::vector<FieldVector> parts;
    for (uint64_t r = 0; r < u; ++r) parts.push_back(big.random_vector(2, rng));
    std::vector<FieldVector> shares;
    for (uint64_t j = 1; j <= n; ++j) {
      shares.push_back(mds_encode(big, parts, j));
    }
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<uint64_t> idx(n);
      for (uint64_t j = 0; j < n; ++j) idx[j] = j + 1;
      for (uint64_t i = 0; i < u; ++i) {
        std::swap(idx[i], idx[i + rng.uniform_below(n - i)]);
      }
      std::vector<std::pair<uint64_t, FieldVector>> sub;
      for (uint64_t i = 0; i < u; ++i) {
        sub.emplace_back(idx[i], shares[idx[i] - 1]);
      }
      if (mds_decode(big, sub) != parts) {
        result.detail = "sampled subset decode mismatch at N=100, U=40";
        return result;
      }
    }
  }

  // Cross-round aggregation: weighted sums of shares from packages with
  // different round stamps recover the weighted mask sum exactly.
  for (int trial = 0; trial < 10; ++trial) {
    MaskParams p{.n = 6, .u = 3, .t = 1, .dropout_bound = 2};
    const uint64_t d = 1 + rng.uniform_below(6);
    const uint64_t k = 1 + rng.uniform_below(4);
    std::vector<MaskPackage> pkgs;
    std::vector<RecoveryMember> members;
    std::vector<uint64_t> weights;
    for (uint64_t m = 0; m < k; ++m) {
      const uint64_t owner = 1 + rng.uniform_below(p.n);
      const uint64_t round = rng.uniform_below(8);
      bool duplicate = false;
      for (const auto& mem : members) {
        if (mem.owner == owner && mem.round == round) duplicate = true;
      }
      if (duplicate) continue;
      pkgs.push_back(generate_mask_package(big, owner, round, d, p, rng));
      members.push_back({owner, round});
      weights.push_back(big.random_element(rng));
    }
    std::vector<ShareStore> stores(p.n);
    for (const auto& pkg : pkgs) {
      for (uint64_t j = 1; j <= p.n; ++j) {
        stores[j - 1].put(pkg.owner, pkg.round, pkg.shares[j - 1]);
      }
    }
    std::vector<std::pair<uint64_t, FieldVector>> responses;
    for (uint64_t j = 1; j <= p.n; ++j) {
      responses.emplace_back(
          j, aggregate_encoded_shares(big, stores[j - 1], members, weights));
    }
    FieldVector expected(d, 0);
    for (size_t m = 0; m < pkgs.size(); ++m) {
      for (uint64_t c = 0; c < d; ++c) {
        expected[c] = big.add(expected[c], big.mul(weights[m], pkgs[m].mask[c]));
      }
    }
    if (recover_aggregate_mask(big, responses, p.u, p.t, d) != expected) {
      result.detail = "cross-round weighted aggregation mismatch";
      return result;
    }
  }

  result.passed = true;
  result.detail = "round trips, subset agreement, cross-round aggregation";
  return result;
}

// Stochastic rounding statistics: unbiasedness within 4 standard errors,
// the variance cap 1/(4c^2), and the exact conditional-variance curve
// (1/c^2)(1/4 - (cx - floor(cx) - 1/2)^2), each at M Monte Carlo draws.
inline PropertyResult quantization_battery(uint64_t seed, int draws) {
  PropertyResult result{"quantization-stats", false, ""};
  Rng rng(seed);
  const std::vector<uint64_t> levels{4, 1ULL << 6, 1ULL << 16};
  std::vector<double> spots(20);
  for (int i = 0; i < 20; ++i) spots[i] = -2.3 + 0.245 * i;

  for (uint64_t c : levels) {
    const double cap = 1.0 / (4.0 * static_cast<double>(c) *
                              static_cast<double>(c));
    for (double x : spots) {
      const double cx = static_cast<double>(c) * x;
      const double frac = cx - std::floor(cx);
      const double cond_var =
          (0.25 - (frac - 0.5) * (frac - 0.5)) /
          (static_cast<double>(c) * static_cast<double>(c));
      double sum = 0.0, sumsq = 0.0;
      for (int m = 0; m < draws; ++m) {
        const double e = stochastic_round(x, c, rng) - x;
        sum += e;
        sumsq += e * e;
      }
      const double mean_err = sum / draws;
      const double var =
          sumsq / draws - (sum / draws) * (sum / draws);
      const double mean_tol =
          4.0 * std::sqrt(std::max(cond_var, 1e-30) / draws);
      if (std::abs(mean_err) > std::max(mean_tol, 1e-12)) {
        result.detail = "bias " + std::to_string(mean_err) + " at x=" +
                        std::to_string(x) + " c=" + std::to_string(c);
        return result;
      }
      if (var > cap * 1.05) {
        result.detail = "variance exceeds 1/(4c^2) cap at x=" +
                        std::to_string(x) + " c=" + std::to_string(c);
        return result;
      }
      if (std::abs(var - cond_var) > 0.05 * cap) {
        result.detail = "conditional variance mismatch at x=" +
                        std::to_string(x) + " c=" + std::to_string(c);
        return result;
      }
    }
  }
  result.passed = true;
  result.detail = "unbiased, capped, conditional variance matched";
  return result;
}

// End-to-end exactness over randomized protocol rounds: drives the real
// Server/User machines with random admissible parameters, heterogeneous
// download rounds, and dropouts, then checks the dequantized aggregate
// against a 128-bit integer oracle fed identical rounding draws, and
// against the real-domain staleness-weighted average within 1e-12
// relative. `inject_fault` corrupts one recovery response, which must make
// the battery report failure (harness sanity hook).
inline PropertyResult exactness_battery(uint64_t seed, int num_rounds,
                                        bool inject_fault = false) {
  PropertyResult result{"end-to-end-exactness", false, ""};
  Rng rng(seed);
  int mismatches = 0;

  for (int round_idx = 0; round_idx < num_rounds; ++round_idx) {
    // Random admissible parameters: N <= 20, N - D >= U > T >= 0, K <= N.
    const uint64_t n = 2 + rng.uniform_below(19);         // [2, 20]
    const uint64_t u = 1 + rng.uniform_below(n);          // [1, N]
    const uint64_t t_priv = rng.uniform_below(u);         // [0, U)
    const uint64_t dmax = n - u;
    const uint64_t dropout = dmax == 0 ? 0 : rng.uniform_below(dmax + 1);
    const uint64_t k_buf = 1 + rng.uniform_below(n);      // [1, N]
    const uint64_t tau_max = rng.uniform_below(11);       // [0, 10]
    const uint64_t dim = 1 + rng.uniform_below(8);

    ProtocolParams params;
    params.mask = {.n = n, .u = u, .t = t_priv, .dropout_bound = dropout};
    params.buffer_size = k_buf;
    params.quant.c_l = 1ULL << (4 + rng.uniform_below(13));  // up to 2^16
    params.quant.c_g = 1 + rng.uniform_below(64);
    params.staleness = rng.bernoulli(0.5)
                           ? StalenessFn::Poly(0.25 * (1 + rng.uniform_below(8)))
                           : StalenessFn::Constant();
    params.tau_max = tau_max;

    Field field(params.field_modulus);
    Server server(params, std::vector<double>(dim, 0.0),
                  Rng(rng.next_u64()), /*start_round=*/tau_max);
    std::vector<User> users;
    for (uint64_t j = 1; j <= n; ++j) users.emplace_back(j);

    // Build the buffer: K members drawn without replacement from all
    // (owner, download round) pairs, so the same owner may appear again
    // with a distinct round.
    std::vector<RecoveryMember> pairs;
    pairs.reserve(n * (tau_max + 1));
    for (uint64_t owner = 1; owner <= n; ++owner) {
      for (uint64_t t_i = 0; t_i <= tau_max; ++t_i) {
        pairs.push_back({owner, t_i});
      }
    }
    for (uint64_t m = 0; m < k_buf; ++m) {
      std::swap(pairs[m], pairs[m + rng.uniform_below(pairs.size() - m)]);
    }
    std::vector<std::vector<int64_t>> plain;
    std::optional<RecoveryRequest> request;
    for (uint64_t m = 0; m < k_buf; ++m) {
      const uint64_t owner = pairs[m].owner;
      const uint64_t t_i = pairs[m].round;

      Rng mask_rng = rng.fork(round_idx, m);
      MaskPackage pkg = users[owner - 1].download(
          field, t_i, std::vector<double>(dim, 0.0), params.mask, mask_rng);
      for (User& usr : users) {
        usr.store().put(pkg.owner, pkg.round, pkg.shares[usr.id() - 1]);
      }
      std::vector<double> delta(dim);
      for (auto& v : delta) v = rng.normal(0.0, 0.5);
      Rng quant_rng(rng.next_u64());
      Rng mirror = quant_rng;
      MaskedUpdate up = users[owner - 1].upload(field, delta, params, quant_rng);
      std::vector<int64_t> ints(dim);
      for (uint64_t c = 0; c < dim; ++c) {
        ints[c] = stochastic_round_scaled(delta[c], params.quant.c_l, mirror);
      }
      plain.push_back(std::move(ints));
      request = server.receive(std::move(up));
    }
    if (!request) {
      result.detail = "buffer did not fill";
      return result;
    }

    // Dropouts: the first `dropout` users stay silent; the rest respond.
    std::vector<std::pair<uint64_t, FieldVector>> responses;
    for (uint64_t j = dropout + 1; j <= n; ++j) {
      responses.emplace_back(j, users[j - 1].respond(field, *request));
    }
    if (inject_fault && !responses.empty()) {
      responses[responses.size() / 2].second[0] ^= 1;
    }
    const std::vector<uint64_t> weights = request->weights;
    const std::vector<double> g = server.finalize(responses);

    // 128-bit oracle on the identical draws.
    __int128 wsum = 0;
    for (uint64_t w : weights) wsum += w;
    bool round_ok = true;
    for (uint64_t c = 0; c < dim; ++c) {
      if (wsum == 0) {
        // Zero-weight round: the protocol applies no update.
        if (g[c] != 0.0) round_ok = false;
        continue;
      }
      __int128 num = 0;
      for (uint64_t m = 0; m < k_buf; ++m) {
        num += static_cast<__int128>(weights[m]) * plain[m][c];
      }
      const double denom = static_cast<double>(params.quant.c_l) *
                           static_cast<double>(static_cast<int64_t>(wsum));
      if (g[c] != static_cast<double>(num) / denom) {
        round_ok = false;
        break;
      }
      // Real-domain staleness-weighted average of the quantized updates.
      double real_num = 0.0, real_den = 0.0, gross = 0.0;
      for (uint64_t m = 0; m < k_buf; ++m) {
        const double w = static_cast<double>(weights[m]) /
                         static_cast<double>(params.quant.c_g);
        const double term = w * static_cast<double>(plain[m][c]) /
                            static_cast<double>(params.quant.c_l);
        real_num += term;
        real_den += w;
        gross += std::abs(term);
      }
      const double real_g = real_num / real_den;
      // 1e-12 relative, plus machine noise on the cancellation scale of
      // the float-domain sum itself.
      const double tol = 1e-12 * std::max(std::abs(g[c]), std::abs(real_g)) +
                         4.0 * 0x1.0p-52 * gross / real_den;
      if (std::abs(g[c] - real_g) > tol) {
        round_ok = false;
        break;
      }
    }
    if (!round_ok) ++mismatches;
  }

  result.passed = mismatches == 0;
  result.detail = result.passed
                      ? std::to_string(num_rounds) + " rounds bit-exact"
                      : std::to_string(mismatches) + " mismatched rounds";
  return result;
}

inline std::vector<PropertyResult> run_all(uint64_t seed, bool inject_fault,
                                           int exactness_rounds = 300,
                                           int quant_draws = 20000) {
  return {tiny_field_privacy(), mds_battery(seed),
          quantization_battery(seed + 1, quant_draws),
          exactness_battery(seed + 2, exactness_rounds, inject_fault)};
}

}  // namespace verify
}  // namespace basecagg

#endif  // BASECAGG_VERIFY_HPP_
