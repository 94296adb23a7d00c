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

#include "basecagg/protocol.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "basecagg/field.hpp"
#include "basecagg/masking.hpp"
#include "basecagg/quantize.hpp"
#include "basecagg/rng.hpp"
#include "gtest/gtest.h"

namespace basecagg {
namespace {

ProtocolParams SmallParams() {
  ProtocolParams p;
  p.mask = {.n = 6, .u = 3, .t = 1, .dropout_bound = 2};
  p.buffer_size = 4;
  p.eta_l = 0.1;
  p.eta_g = 1.0;
  p.local_steps = 1;
  p.quant = {1ULL << 10, 64};
  p.staleness = StalenessFn::Poly(1.0);
  p.tau_max = 5;
  return p;
}

// Wires N users to a server and handles share fan-out and recovery.
struct Harness {
  explicit Harness(ProtocolParams params, std::vector<double> x0,
                   uint64_t seed)
      : params(std::move(params)),
        field(this->params.field_modulus),
        server(this->params, std::move(x0), Rng(mix64(seed, 0xfeed))),
        rng(seed) {
    for (uint64_t j = 1; j <= this->params.mask.n; ++j) users.emplace_back(j);
  }

  User& user(uint64_t id) { return users[id - 1]; }

  void download(uint64_t id) {
    Rng stream = rng.fork(0x5eed, mix64(id, server.round()));
    MaskPackage pkg = user(id).download(field, server.round(), server.model(),
                                        params.mask, stream);
    for (auto& u : users) u.store().put(pkg.owner, pkg.round, pkg.shares[u.id() - 1]);
  }

  // Trains with `grad`, uploads, and finalizes the round if the buffer
  // filled. Returns the request if one was emitted.
  std::optional<RecoveryRequest> step(uint64_t id, std::vector<double> delta) {
    Rng stream = rng.fork(0x9a5e, mix64(id, user(id).cached_round()));
    MaskedUpdate up = user(id).upload(field, delta, params, stream);
    return server.receive(std::move(up));
  }

  std::vector<double> finish(const RecoveryRequest& req, size_t responders) {
    std::vector<std::pair<uint64_t, FieldVector>> responses;
    for (uint64_t j = 1; j <= responders; ++j) {
      responses.emplace_back(j, users[j - 1].respond(field, req));
    }
    return server.finalize(responses);
  }

  ProtocolParams params;
  Field field;
  Server server;
  std::vector<User> users;
  Rng rng;
};

TEST(LocalTrainTest, ZeroGradientGivesZeroUpdate) {
  Field f;
  User u(1);
  Rng rng(1);
  MaskParams mp{.n = 2, .u = 1, .t = 0, .dropout_bound = 0};
  u.download(f, 0, {1.0, -2.0}, mp, rng);
  auto delta = u.local_train(
      [](const std::vector<double>& x) {
        return std::vector<double>(x.size(), 0.0);
      },
      0.1, 5);
  EXPECT_EQ(delta, (std::vector<double>{0.0, 0.0}));
}

TEST(LocalTrainTest, OneStepIsScaledGradient) {
  Field f;
  User u(1);
  Rng rng(2);
  MaskParams mp{.n = 2, .u = 1, .t = 0, .dropout_bound = 0};
  u.download(f, 0, {3.0}, mp, rng);
  auto delta = u.local_train(
      [](const std::vector<double>&) { return std::vector<double>{2.5}; },
      0.1, 1);
  EXPECT_DOUBLE_EQ(delta[0], 0.25);
}

TEST(LocalTrainTest, QuadraticTwoSteps) {
  // F(x) = x^2/2, grad = x, eta=0.1, E=2 from x=1: 1 -> 0.9 -> 0.81.
  Field f;
  User u(1);
  Rng rng(3);
  MaskParams mp{.n = 2, .u = 1, .t = 0, .dropout_bound = 0};
  u.download(f, 0, {1.0}, mp, rng);
  auto delta =
      u.local_train([](const std::vector<double>& x) { return x; }, 0.1, 2);
  EXPECT_NEAR(delta[0], 0.19, 1e-15);
}

TEST(UploadTest, ZeroUpdateUploadsBareMask) {
  Field f;
  User u(2);
  Rng rng(4);
  MaskParams mp{.n = 3, .u = 2, .t = 1, .dropout_bound = 1};
  ProtocolParams params = SmallParams();
  params.mask = mp;
  params.buffer_size = 1;
  MaskPackage pkg = u.download(f, 0, {0.0, 0.0, 0.0}, mp, rng);
  auto up = u.upload(f, {0.0, 0.0, 0.0}, params, rng);
  EXPECT_EQ(up.payload, FieldVector(pkg.mask.begin(), pkg.mask.begin() + 3));
  EXPECT_EQ(up.owner, 2u);
  EXPECT_EQ(up.download_round, 0u);
  // The cache is consumed: one upload per download.
  EXPECT_THROW(u.upload(f, {0.0, 0.0, 0.0}, params, rng), Error);
}

TEST(UploadTest, PayloadMinusMaskIsQuantizedUpdate) {
  Field f;
  User u(1);
  Rng base(5);
  MaskParams mp{.n = 3, .u = 2, .t = 1, .dropout_bound = 1};
  ProtocolParams params = SmallParams();
  params.mask = mp;
  const std::vector<double> delta{0.37, -1.25, 0.0};
  MaskPackage pkg = u.download(f, 0, {0., 0., 0.}, mp, base);
  Rng quant_stream(777);
  Rng mirror = quant_stream;
  auto up = u.upload(f, delta, params, quant_stream);
  FieldVector expect = quantize_update(f, delta, params.quant, mirror);
  FieldVector mask(pkg.mask.begin(), pkg.mask.begin() + 3);
  EXPECT_EQ(f.sub(up.payload, mask), expect);
}

// Exhaustive: for a fixed quantized update, the payload coordinate is
// uniform over F_11 as the mask coordinate sweeps the field.
TEST(UploadTest, PayloadMarginalIsUniform) {
  Field f(11);
  MaskParams mp{.n = 3, .u = 2, .t = 1, .dropout_bound = 1};
  for (uint64_t quantized : {0ULL, 3ULL, 10ULL}) {
    std::array<int, 11> counts{};
    for (uint64_t z = 0; z < 11; ++z) {
      auto pkg = make_mask_package(f, 1, 0, 1, mp, {{z}, {5}});
      ++counts[f.add(quantized, pkg.mask[0])];
    }
    for (int c : counts) EXPECT_EQ(c, 1);
  }
}

TEST(ServerTest, BufferSizeOneTriggersImmediately) {
  ProtocolParams p = SmallParams();
  p.buffer_size = 1;
  Harness h(p, {0.5, -0.5}, 100);
  h.download(1);
  auto req = h.step(1, {0.1, 0.1});
  ASSERT_TRUE(req.has_value());
  EXPECT_EQ(req->members.size(), 1u);
}

TEST(ServerTest, BufferFillsAtK) {
  ProtocolParams p = SmallParams();
  p.buffer_size = 4;
  Harness h(p, {0.0}, 101);
  for (uint64_t id = 1; id <= 3; ++id) {
    h.download(id);
    EXPECT_FALSE(h.step(id, {0.01}).has_value());
  }
  h.download(4);
  auto req = h.step(4, {0.01});
  ASSERT_TRUE(req.has_value());
  EXPECT_EQ(req->members.size(), 4u);
  EXPECT_EQ(h.server.buffered(), 4u);
  // While frozen, further receives are rejected.
  h.download(5);
  Rng s(9);
  auto up = h.user(5).upload(h.field, {0.01}, p, s);
  EXPECT_THROW(h.server.receive(up), Error);
}

TEST(ServerTest, BufferOfTenFillsOnTheTenthReceive) {
  ProtocolParams p = SmallParams();
  p.mask = {.n = 12, .u = 5, .t = 2, .dropout_bound = 3};
  p.buffer_size = 10;
  Harness h(p, {0.0}, 120);
  for (uint64_t id = 1; id <= 9; ++id) {
    h.download(id);
    EXPECT_FALSE(h.step(id, {0.001}).has_value());
  }
  h.download(10);
  auto req = h.step(10, {0.001});
  ASSERT_TRUE(req.has_value());
  EXPECT_EQ(req->members.size(), 10u);
}

TEST(ServerTest, RequestRecordsStalenessPerMember) {
  ProtocolParams p = SmallParams();
  p.buffer_size = 2;
  Harness h(p, {0.0}, 102);
  // Users 5 and 6 download at round 0; flush one round with users 1+2;
  // then 5 and 6 upload with staleness 1.
  h.download(5);
  h.download(6);
  h.download(1);
  h.download(2);
  h.step(1, {0.0});
  auto req0 = h.step(2, {0.0});
  ASSERT_TRUE(req0.has_value());
  h.finish(*req0, p.mask.n);
  EXPECT_EQ(h.server.round(), 1u);
  h.step(5, {0.0});
  auto req1 = h.step(6, {0.0});
  ASSERT_TRUE(req1.has_value());
  EXPECT_EQ(req1->round, 1u);
  for (const auto& m : req1->members) {
    EXPECT_EQ(m.round, 0u);  // downloaded at round 0, staleness 1
  }
  // Poly(1), tau=1: s = 1/2 exactly, so the weight is c_g/2 deterministically.
  for (uint64_t w : req1->weights) EXPECT_EQ(w, 32u);
}

TEST(ServerTest, RejectsStalenessBeyondTauMax) {
  ProtocolParams p = SmallParams();
  p.buffer_size = 2;
  p.tau_max = 0;
  Harness h(p, {0.0}, 103);
  h.download(3);  // downloads at round 0
  h.download(1);
  h.download(2);
  h.step(1, {0.0});
  auto req = h.step(2, {0.0});
  h.finish(*req, p.mask.n);
  // Round is now 1; user 3's cache is from round 0, tau = 1 > tau_max = 0.
  Rng s(11);
  auto up = h.user(3).upload(h.field, {0.0}, p, s);
  EXPECT_THROW(h.server.receive(up), InvalidParams);
}

TEST(ServerTest, AllZeroUpdatesLeaveModelUnchanged) {
  ProtocolParams p = SmallParams();
  p.buffer_size = 3;
  Harness h(p, {0.25, -1.5}, 104);
  const auto before = h.server.model();
  for (uint64_t id = 1; id <= 3; ++id) h.download(id);
  h.step(1, {0.0, 0.0});
  h.step(2, {0.0, 0.0});
  auto req = h.step(3, {0.0, 0.0});
  auto g = h.finish(*req, p.mask.n);
  EXPECT_EQ(g, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(h.server.model(), before);
}

TEST(ServerTest, SingleMemberReductionMatchesScalarComputation) {
  // K=1, tau=0, constant staleness: x' = x - eta_g * Q_{c_l}(delta).
  ProtocolParams p = SmallParams();
  p.buffer_size = 1;
  p.staleness = StalenessFn::Constant();
  p.eta_g = 0.75;
  Harness h(p, {1.0}, 105);
  h.download(1);
  // Mirror the quantization stream the harness uses for user 1, round 0.
  Rng mirror = h.rng.fork(0x9a5e, mix64(1, 0));
  const double delta = 0.378912;
  const int64_t scaled = stochastic_round_scaled(delta, p.quant.c_l, mirror);
  const double expected_q =
      static_cast<double>(scaled) / static_cast<double>(p.quant.c_l);
  auto req = h.step(1, {delta});
  auto g = h.finish(*req, p.mask.n);
  EXPECT_DOUBLE_EQ(g[0], expected_q);
  EXPECT_DOUBLE_EQ(h.server.model()[0], 1.0 - 0.75 * expected_q);
}

TEST(ServerTest, InsufficientResponsesRetainsBufferForRetry) {
  ProtocolParams p = SmallParams();
  p.buffer_size = 2;
  Harness h(p, {0.0}, 106);
  h.download(1);
  h.download(2);
  h.step(1, {0.5});
  auto req = h.step(2, {0.5});
  ASSERT_TRUE(req.has_value());
  EXPECT_THROW(h.finish(*req, p.mask.u - 1), InsufficientResponses);
  EXPECT_EQ(h.server.buffered(), 2u);
  EXPECT_TRUE(h.server.recovery_pending());
  EXPECT_EQ(h.server.round(), 0u);
  // Retry with a full responder set succeeds and advances the round.
  h.finish(h.server.pending_request(), p.mask.n);
  EXPECT_EQ(h.server.round(), 1u);
  EXPECT_EQ(h.server.buffered(), 0u);
}

TEST(ServerTest, WrapGuardRaisesAndWarnCounterCounts) {
  Field f(4194301);  // 2^22 - 3
  ProtocolParams p = SmallParams();
  p.field_modulus = 4194301;
  p.quant = {1ULL << 16, 4};
  p.buffer_size = 10;
  MaskParams mp{.n = 3, .u = 2, .t = 1, .dropout_bound = 1};
  p.mask = mp;

  User u(1);
  Rng rng(12);
  u.download(f, 0, {0.0}, mp, rng);
  // 2^16 * 3.0 * 10 * 4 is far beyond (q-1)/2.
  EXPECT_THROW(u.upload(f, {3.0}, p, rng), OutOfRange);

  p.wrap_guard = false;
  User v(2);
  v.download(f, 0, {0.0}, mp, rng);
  uint64_t warnings = 0;
  auto up = v.upload(f, {3.0}, p, rng, &warnings);
  EXPECT_EQ(warnings, 1u);
  EXPECT_EQ(up.payload.size(), 1u);
}

// End-to-end exactness: the recovered field aggregate matches a 128-bit
// plaintext oracle fed with identical rounding draws, across a buffer with
// heterogeneous download rounds.
TEST(ServerTest, FinalizeMatchesPlaintextOracleAcrossRounds) {
  ProtocolParams p = SmallParams();
  p.buffer_size = 4;
  const size_t dim = 3;
  Harness h(p, std::vector<double>(dim, 0.0), 107);
  Rng deltas(555);

  // Round 0: users 5 and 6 download now but upload next round.
  h.download(5);
  h.download(6);
  for (uint64_t id = 1; id <= 4; ++id) h.download(id);
  std::optional<RecoveryRequest> req;
  for (uint64_t id = 1; id <= 4; ++id) {
    std::vector<double> d(dim);
    for (auto& x : d) x = deltas.normal(0, 0.2);
    req = h.step(id, d);
  }
  h.finish(*req, p.mask.n);

  // Round 1: stale users 5, 6 (tau=1) plus fresh users 1, 2 (tau=0).
  h.download(1);
  h.download(2);
  std::vector<uint64_t> members{5, 6, 1, 2};
  std::vector<std::vector<int64_t>> plain;
  for (uint64_t id : members) {
    std::vector<double> d(dim);
    for (auto& x : d) x = deltas.normal(0, 0.2);
    // Mirror the quantization draws.
    Rng mirror = h.rng.fork(0x9a5e, mix64(id, h.user(id).cached_round()));
    std::vector<int64_t> ints(dim);
    for (size_t k = 0; k < dim; ++k) {
      ints[k] = stochastic_round_scaled(d[k], p.quant.c_l, mirror);
    }
    plain.push_back(ints);
    req = h.step(id, d);
  }
  ASSERT_TRUE(req.has_value());
  // Weights are part of the broadcast; the oracle reads them.
  const std::vector<uint64_t>& w = req->weights;
  auto g = h.finish(*req, p.mask.n);

  __int128 wsum = 0;
  for (uint64_t wi : w) wsum += wi;
  for (size_t k = 0; k < dim; ++k) {
    __int128 num = 0;
    for (size_t m = 0; m < members.size(); ++m) {
      num += static_cast<__int128>(w[m]) * plain[m][k];
    }
    const double expected = static_cast<double>(num) /
                            (static_cast<double>(p.quant.c_l) *
                             static_cast<double>(wsum));
    EXPECT_DOUBLE_EQ(g[k], expected) << "coordinate " << k;
  }
}

// Buffer discipline: a run of m uploads yields exactly floor(m / K)
// global updates.
TEST(ServerTest, ExactlyFloorUploadsOverKFlushes) {
  ProtocolParams p = SmallParams();
  p.buffer_size = 3;
  Harness h(p, {0.0}, 108);
  int flushes = 0;
  const int uploads = 11;
  for (int i = 0; i < uploads; ++i) {
    const uint64_t id = 1 + (i % p.mask.n);
    h.download(id);
    auto req = h.step(id, {0.001 * i});
    if (req) {
      h.finish(*req, p.mask.n);
      ++flushes;
    }
  }
  EXPECT_EQ(flushes, uploads / 3);
  EXPECT_EQ(h.server.round(), static_cast<uint64_t>(uploads / 3));
}

// The server's per-round view (payloads + aggregated shares) depends on
// the buffered updates only through their weighted aggregate: two update
// sets with equal aggregate induce identical view distributions.
// Exhaustive at q=11, N=3, U=2, T=1, K=2, d=1.
TEST(PrivacyTest, ViewDistributionDependsOnlyOnAggregate) {
  Field f(11);
  MaskParams mp{.n = 3, .u = 2, .t = 1, .dropout_bound = 1};

  using View = std::array<uint64_t, 7>;
  auto view_histogram = [&](uint64_t d1, uint64_t d2) {
    std::map<View, int> hist;
    for (uint64_t z1 = 0; z1 < 11; ++z1) {
      for (uint64_t n1 = 0; n1 < 11; ++n1) {
        for (uint64_t z2 = 0; z2 < 11; ++z2) {
          for (uint64_t n2 = 0; n2 < 11; ++n2) {
            auto p1 = make_mask_package(f, 1, 0, 1, mp, {{z1}, {n1}});
            auto p2 = make_mask_package(f, 2, 0, 1, mp, {{z2}, {n2}});
            // Payloads plus colluding user 3's received shares plus all
            // aggregated recovery responses with weights (1, 1).
            View v{};
            v[0] = f.add(d1, z1);
            v[1] = f.add(d2, z2);
            v[2] = p1.shares[2][0];
            v[3] = p2.shares[2][0];
            for (uint64_t j = 1; j <= 3; ++j) {
              v[3 + j] = f.add(p1.shares[j - 1][0], p2.shares[j - 1][0]);
            }
            ++hist[v];
          }
        }
      }
    }
    return hist;
  };

  // Equal aggregates (3 + 5 == 7 + 1 mod 11): identical distributions.
  EXPECT_EQ(view_histogram(3, 5), view_histogram(7, 1));
  EXPECT_EQ(view_histogram(0, 8), view_histogram(4, 4));
  // Different aggregates: distinguishable (sanity check of the harness).
  EXPECT_NE(view_histogram(3, 5), view_histogram(3, 6));
}

// Degenerate equivalence: with fine quantization, T=0, D=0, constant
// staleness, the secure trajectory tracks a real-domain buffered baseline
// to ~quantization precision on a quadratic problem.
TEST(ProtocolTest, DegenerateEquivalenceWithFloatBaseline) {
  ProtocolParams p;
  p.mask = {.n = 2, .u = 1, .t = 0, .dropout_bound = 0};
  p.buffer_size = 2;
  p.eta_l = 0.1;
  p.eta_g = 1.0;
  p.local_steps = 2;
  p.quant = {1ULL << 30, 1};
  p.staleness = StalenessFn::Constant();
  p.tau_max = 0;
  Harness h(p, {1.0, -0.8}, 109);

  std::vector<double> base_model{1.0, -0.8};
  auto grad = [](const std::vector<double>& x) { return x; };  // F = |x|^2/2
  for (int round = 0; round < 12; ++round) {
    std::optional<RecoveryRequest> req;
    std::vector<std::vector<double>> deltas;
    for (uint64_t id = 1; id <= 2; ++id) {
      h.download(id);
      auto delta = h.user(id).local_train(grad, p.eta_l, p.local_steps);
      deltas.push_back(delta);
      req = h.step(id, delta);
    }
    h.finish(*req, p.mask.n);
    // Float baseline on the same deltas (computed from the same model since
    // the secure path stays within 1e-9 of it).
    for (size_t k = 0; k < base_model.size(); ++k) {
      base_model[k] -= p.eta_g * (deltas[0][k] + deltas[1][k]) / 2.0;
    }
    for (size_t k = 0; k < base_model.size(); ++k) {
      const double scale = std::max(1e-6, std::abs(base_model[k]));
      EXPECT_LE(std::abs(h.server.model()[k] - base_model[k]) / scale, 1e-4);
    }
  }
}

}  // namespace
}  // namespace basecagg
