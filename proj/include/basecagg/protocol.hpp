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

#ifndef BASECAGG_PROTOCOL_HPP_
#define BASECAGG_PROTOCOL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "basecagg/errors.hpp"
#include "basecagg/field.hpp"
#include "basecagg/masking.hpp"
#include "basecagg/quantize.hpp"
#include "basecagg/rng.hpp"

namespace basecagg {

// Version of the simulator-internal message shapes (MaskedUpdate,
// RecoveryRequest, share fan-out); bump on any incompatible change so
// recorded manifests stay interpretable.
inline constexpr int kMessageSchemaVersion = 1;

struct ProtocolParams {
  MaskParams mask;                  // N, U, T, D
  uint64_t buffer_size = 10;        // K
  double eta_l = 0.01;
  double eta_g = 1.0;
  uint64_t local_steps = 1;         // E
  QuantParams quant;
  StalenessFn staleness;
  uint64_t tau_max = 10;
  uint64_t field_modulus = Field::kDefaultModulus;
  bool wrap_guard = true;           // off only for wrap-around experiments

  void validate() const {
    validate_mask_params(mask);
    if (buffer_size < 1 || buffer_size > mask.n) {
      throw InvalidParams("need 1 <= K <= N, got K=" +
                          std::to_string(buffer_size));
    }
    if (field_modulus <= mask.n) {
      throw InvalidParams("field modulus must exceed N");
    }
    if (eta_l <= 0 || eta_g <= 0) throw InvalidParams("learning rates must be positive");
    if (local_steps < 1) throw InvalidParams("need at least one local step");
    if (quant.c_l < 1 || quant.c_g < 1) {
      throw InvalidParams("quantization levels must be >= 1");
    }
  }
};

// The pair a user uploads: its blinded quantized update plus the round at
// which it downloaded the model it trained from.
struct MaskedUpdate {
  uint64_t owner = 0;
  uint64_t download_round = 0;  // t_i
  FieldVector payload;          // length d
};

// Counts coordinates whose weighted aggregate could exceed the signed
// window: c_g * buffer_size * |v_k| >= (q-1)/2.
inline uint64_t count_headroom_violations(const Field& field,
                                          const FieldVector& quantized,
                                          uint64_t buffer_size, uint64_t c_g) {
  const unsigned __int128 half = field.half();
  uint64_t violations = 0;
  for (uint64_t e : quantized) {
    const int64_t v = demap_from_field(field, e);
    const unsigned __int128 mag =
        static_cast<unsigned __int128>(v < 0 ? -v : v) * buffer_size * c_g;
    if (mag >= half) ++violations;
  }
  return violations;
}

// Per-user protocol state: the share inventory plus at most one cached
// download (model, round, mask). A cache is consumed by its upload, so a
// user uploads at most once per download.
class User {
 public:
  explicit User(uint64_t id) : id_(id) {}

  uint64_t id() const { return id_; }
  ShareStore& store() { return store_; }
  const ShareStore& store() const { return store_; }
  bool has_cache() const { return cache_.has_value(); }
  uint64_t cached_round() const { return require_cache().round; }
  const std::vector<double>& cached_model() const {
    return require_cache().model;
  }

  // Download the round-t model and build the mask package protecting the
  // eventual upload. The caller distributes the returned shares.
  MaskPackage download(const Field& field, uint64_t round,
                       std::vector<double> model, const MaskParams& params,
                       Rng& rng) {
    const uint64_t d = model.size();
    MaskPackage pkg = generate_mask_package(field, id_, round, d, params, rng);
    cache_ = Cache{round, std::move(model),
                   FieldVector(pkg.mask.begin(), pkg.mask.begin() + d)};
    return pkg;
  }

  // E steps of local SGD from the cached model; returns the update
  // x^(t_i) - x^(E). grad is called with the current iterate.
  template <typename GradFn>
  std::vector<double> local_train(GradFn&& grad, double eta_l,
                                  uint64_t steps) const {
    const Cache& cache = require_cache();
    std::vector<double> x = cache.model;
    for (uint64_t e = 0; e < steps; ++e) {
      const std::vector<double> g = grad(x);
      if (g.size() != x.size()) {
        throw DimensionMismatch("gradient dimension mismatch");
      }
      for (size_t k = 0; k < x.size(); ++k) x[k] -= eta_l * g[k];
    }
    std::vector<double> delta(x.size());
    for (size_t k = 0; k < x.size(); ++k) delta[k] = cache.model[k] - x[k];
    return delta;
  }

  // Quantize, blind with the cached mask, and emit the upload. Consumes
  // the cache. With the guard enabled a wrap-around hazard raises
  // OutOfRange; otherwise hazardous coordinates are counted into
  // *overflow_warnings and wrap silently.
  MaskedUpdate upload(const Field& field, const std::vector<double>& delta,
                      const ProtocolParams& params, Rng& rng,
                      uint64_t* overflow_warnings = nullptr) {
    const Cache& cache = require_cache();
    if (delta.size() != cache.mask_prefix.size()) {
      throw DimensionMismatch("update dimension mismatch");
    }
    const WrapPolicy policy =
        params.wrap_guard ? WrapPolicy::kStrict : WrapPolicy::kWrap;
    FieldVector quantized =
        quantize_update(field, delta, params.quant, rng, policy);
    if (params.wrap_guard) {
      check_aggregate_headroom(field, quantized, params.buffer_size,
                               params.quant.c_g);
    } else if (overflow_warnings != nullptr) {
      *overflow_warnings += count_headroom_violations(
          field, quantized, params.buffer_size, params.quant.c_g);
    }
    MaskedUpdate update;
    update.owner = id_;
    update.download_round = cache.round;
    update.payload = field.add(quantized, cache.mask_prefix);
    cache_.reset();
    return update;
  }

  // One-shot recovery contribution: the staleness-weighted sum of this
  // user's stored shares for the requested members.
  FieldVector respond(const Field& field, const RecoveryRequest& req) const {
    return aggregate_encoded_shares(field, store_, req.members, req.weights);
  }

  void evict_shares_before(uint64_t round) {
    store_.evict_rounds_before(round);
  }

 private:
  struct Cache {
    uint64_t round = 0;
    std::vector<double> model;
    FieldVector mask_prefix;  // first d coordinates of the mask
  };

  const Cache& require_cache() const {
    if (!cache_) throw Error("user " + std::to_string(id_) + " has no cached download");
    return *cache_;
  }

  uint64_t id_;
  ShareStore store_;
  std::optional<Cache> cache_;
};

// Server state machine: buffers masked uploads, and once K have arrived
// freezes the buffer, broadcasts the recovery request, and finishes the
// round when enough aggregated shares come back.
class Server {
 public:
  // start_round lets tests and drivers open the protocol mid-history so
  // buffered updates can carry nonzero staleness from the first flush.
  Server(ProtocolParams params, std::vector<double> init_model, Rng rng,
         uint64_t start_round = 0)
      : params_(params),
        field_(params_.field_modulus),
        model_(std::move(init_model)),
        round_(start_round),
        rng_(rng) {
    params_.validate();
    if (model_.empty()) throw InvalidParams("empty initial model");
  }

  const Field& field() const { return field_; }
  const ProtocolParams& params() const { return params_; }
  uint64_t round() const { return round_; }
  const std::vector<double>& model() const { return model_; }
  size_t buffered() const { return buffer_.size(); }
  bool recovery_pending() const { return request_.has_value(); }

  const RecoveryRequest& pending_request() const {
    if (!request_) throw Error("no recovery in progress");
    return *request_;
  }

  const std::vector<MaskedUpdate>& buffer() const { return buffer_; }

  // Accepts one upload. Returns the recovery request when this upload
  // filled the buffer; the buffer is frozen until finalize succeeds.
  std::optional<RecoveryRequest> receive(MaskedUpdate update) {
    if (request_) throw Error("buffer frozen while recovery is pending");
    if (update.payload.size() != model_.size()) {
      throw DimensionMismatch("payload dimension mismatch");
    }
    if (update.download_round > round_) {
      throw InvalidParams("upload from a future round");
    }
    if (round_ - update.download_round > params_.tau_max) {
      throw InvalidParams("staleness " +
                          std::to_string(round_ - update.download_round) +
                          " exceeds tau_max");
    }
    buffer_.push_back(std::move(update));
    if (buffer_.size() < params_.buffer_size) return std::nullopt;

    RecoveryRequest req;
    req.round = round_;
    req.c_g = params_.quant.c_g;
    Rng weight_rng = rng_.fork(round_);
    for (const MaskedUpdate& u : buffer_) {
      req.members.push_back({u.owner, u.download_round});
      req.weights.push_back(quantized_staleness(field_, params_.staleness,
                                                round_ - u.download_round,
                                                params_.quant.c_g,
                                                weight_rng));
    }
    request_ = req;
    return req;
  }

  // Applies the global update from >= U aggregated-share responses and
  // opens the next round. On InsufficientResponses the buffer and request
  // are retained so the caller can solicit a fresh responder set.
  std::vector<double> finalize(
      const std::vector<std::pair<uint64_t, FieldVector>>& responses) {
    const RecoveryRequest& req = pending_request();
    if (responses.size() < params_.mask.u) {
      throw InsufficientResponses(responses.size(), params_.mask.u);
    }
    // Weighted field sum of the buffered payloads, in arrival order.
    FieldVector acc(model_.size(), 0);
    for (size_t m = 0; m < buffer_.size(); ++m) {
      field_.add_scaled_in_place(acc, req.weights[m], buffer_[m].payload);
    }
    const FieldVector aggregate_mask = recover_aggregate_mask(
        field_, responses, params_.mask.u, params_.mask.t, model_.size());
    const FieldVector unmasked = field_.sub(acc, aggregate_mask);
    uint64_t weight_sum = 0;
    for (uint64_t w : req.weights) weight_sum = field_.add(weight_sum, w);
    // Every staleness weight can quantize to zero when c_g * s(tau) < 1
    // across the whole buffer. The weighted aggregate is then identically
    // zero and carries no information: the round applies no update.
    std::vector<double> g =
        demap_from_field(field_, weight_sum) == 0
            ? std::vector<double>(model_.size(), 0.0)
            : dequantize_aggregate(field_, unmasked, weight_sum,
                                   params_.quant);
    for (size_t k = 0; k < model_.size(); ++k) {
      model_[k] -= params_.eta_g * g[k];
    }
    ++round_;
    buffer_.clear();
    request_.reset();
    return g;
  }

 private:
  ProtocolParams params_;
  Field field_;
  std::vector<double> model_;
  uint64_t round_ = 0;
  std::vector<MaskedUpdate> buffer_;
  std::optional<RecoveryRequest> request_;
  Rng rng_;
};

}  // namespace basecagg

#endif  // BASECAGG_PROTOCOL_HPP_
