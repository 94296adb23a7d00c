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

#ifndef BASECAGG_SIM_HPP_
#define BASECAGG_SIM_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "basecagg/dataset.hpp"
#include "basecagg/errors.hpp"
#include "basecagg/metrics.hpp"
#include "basecagg/model.hpp"
#include "basecagg/protocol.hpp"
#include "basecagg/quantize.hpp"
#include "basecagg/rng.hpp"

namespace basecagg {

enum class Scheme { kBasecagg, kFedbuffFloat };

struct SyntheticSpec {
  uint64_t train_samples = 10000;
  uint64_t test_samples = 2000;
  uint64_t feature_dim = 20;
  double separation = 1.2;
};

struct DatasetSpec {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SyntheticSpec synthetic;
  std::string csv_path;        // csv only
  double test_fraction = 0.2;  // csv only
};

// Full experiment description. Virtual time advances in server rounds:
// each round the scheduler draws this round's K uploaders from the active
// cohort of C users, stamps each upload with a staleness drawn uniformly
// from [0, min(t, tau_max)] (the user trained on the model it downloaded
// that many rounds ago), injects up to D dropouts, and flushes the buffer.
// Every random stream is forked from the master seed by fixed tags, so a
// seed pins the entire run.
struct SimConfig {
  ProtocolParams protocol;
  uint64_t concurrency = 20;  // C: active training cohort size
  uint64_t rounds = 50;       // J: global rounds to execute
  uint64_t batch_size = 50;
  DatasetSpec dataset;
  ModelSpec model;
  uint64_t seed = 1;
  Scheme scheme = Scheme::kBasecagg;

  void validate() const {
    protocol.validate();
    if (concurrency > protocol.mask.n) {
      throw InvalidParams("concurrency C cannot exceed N");
    }
    // Even a worst-case dropout round must leave K eligible uploaders.
    if (concurrency < protocol.buffer_size + protocol.mask.dropout_bound) {
      throw InvalidParams("need C >= K + D so every round can fill the buffer");
    }
    if (rounds < 1) throw InvalidParams("need at least one round");
    if (batch_size < 1) throw InvalidParams("batch size must be positive");
  }
};

// Stream tags; fixed so tests can reproduce individual draws.
namespace stream {
constexpr uint64_t kData = 1;
constexpr uint64_t kPartition = 2;
constexpr uint64_t kInit = 3;
constexpr uint64_t kServer = 4;
constexpr uint64_t kCohort = 5;
constexpr uint64_t kDropout = 6;
constexpr uint64_t kSelect = 7;
constexpr uint64_t kStaleness = 8;
constexpr uint64_t kMask = 9;
constexpr uint64_t kTrain = 10;
constexpr uint64_t kQuant = 11;
}  // namespace stream

namespace detail {

// First k elements of a partial Fisher-Yates shuffle of pool.
inline std::vector<uint64_t> sample_distinct(std::vector<uint64_t> pool,
                                             size_t k, Rng& rng) {
  if (pool.size() < k) {
    throw InvalidParams("cannot sample " + std::to_string(k) + " from " +
                        std::to_string(pool.size()));
  }
  for (size_t i = 0; i < k && i + 1 < pool.size(); ++i) {
    const size_t j = i + rng.uniform_below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

struct LoadedData {
  Dataset train;
  Dataset test;
};

inline LoadedData load_data(const SimConfig& config, Rng& master) {
  Rng data_rng = master.fork(stream::kData);
  switch (config.dataset.kind) {
    case DatasetSpec::Kind::kSynthetic: {
      Rng train_rng = data_rng.fork(0);
      Rng test_rng = data_rng.fork(1);
      const SyntheticSpec& s = config.dataset.synthetic;
      return {make_synthetic(s.train_samples, s.feature_dim, s.separation,
                             train_rng),
              make_synthetic(s.test_samples, s.feature_dim, s.separation,
                             test_rng)};
    }
    case DatasetSpec::Kind::kCsv: {
      Dataset full = load_csv(config.dataset.csv_path);
      Rng split_rng = data_rng.fork(2);
      auto [train, test] =
          split_dataset(full, config.dataset.test_fraction, split_rng);
      return {std::move(train), std::move(test)};
    }
  }
  throw ConfigError("unknown dataset kind");
}

}  // namespace detail

// Executes a full experiment. The BASecAgg scheme and the real-domain
// buffered baseline share this scheduler and all of its random streams;
// they differ only in how an upload travels (quantized+masked through the
// field vs. plain doubles) and how the flush combines the buffer.
inline RunMetrics run(const SimConfig& config) {
  config.validate();
  const ProtocolParams& proto = config.protocol;
  const uint64_t n = proto.mask.n;
  const uint64_t k_buf = proto.buffer_size;
  const bool secure = config.scheme == Scheme::kBasecagg;

  Rng master(config.seed);
  detail::LoadedData data = detail::load_data(config, master);
  Rng part_rng = master.fork(stream::kPartition);
  const auto partitions = partition_iid(data.train.size(), n, part_rng);
  Model model(config.model, data.train.feature_dim);
  Rng init_rng = master.fork(stream::kInit);
  const std::vector<double> x0 = model.init_params(init_rng);

  // Secure-path actors.
  std::optional<Field> field;
  std::optional<Server> server;
  std::vector<User> users;
  if (secure) {
    field.emplace(proto.field_modulus);
    server.emplace(proto, x0, master.fork(stream::kServer));
    users.reserve(n);
    for (uint64_t j = 1; j <= n; ++j) users.emplace_back(j);
  }
  // Baseline state.
  std::vector<double> float_model = x0;

  // Model history for backdated downloads, keyed by round.
  std::map<uint64_t, std::vector<double>> history;
  history[0] = x0;

  // Active cohort and idle queue.
  std::vector<uint64_t> order(n);
  for (uint64_t j = 0; j < n; ++j) order[j] = j + 1;
  Rng cohort_rng = master.fork(stream::kCohort);
  order = detail::sample_distinct(std::move(order), n, cohort_rng);
  std::vector<uint64_t> cohort(order.begin(), order.begin() + config.concurrency);
  std::vector<uint64_t> idle(order.begin() + config.concurrency, order.end());

  RunMetrics metrics;
  metrics.staleness_histogram.assign(proto.tau_max + 1, 0);

  for (uint64_t t = 0; t < config.rounds; ++t) {
    RoundMetrics row;
    row.round = t;
    row.staleness_histogram.assign(proto.tau_max + 1, 0);

    // Dropouts: up to D users from the cohort sit this round out.
    Rng drop_rng = master.fork(stream::kDropout).fork(t);
    const uint64_t n_drop =
        proto.mask.dropout_bound == 0
            ? 0
            : drop_rng.uniform_below(proto.mask.dropout_bound + 1);
    std::vector<uint64_t> dropped =
        detail::sample_distinct(cohort, n_drop, drop_rng);
    std::sort(dropped.begin(), dropped.end());
    row.dropouts = n_drop;

    std::vector<uint64_t> eligible;
    for (uint64_t id : cohort) {
      if (!std::binary_search(dropped.begin(), dropped.end(), id)) {
        eligible.push_back(id);
      }
    }

    Rng select_rng = master.fork(stream::kSelect).fork(t);
    const std::vector<uint64_t> uploaders =
        detail::sample_distinct(eligible, k_buf, select_rng);

    // Baseline buffer for this round.
    std::vector<std::pair<std::vector<double>, uint64_t>> float_buffer;
    std::optional<RecoveryRequest> request;
    double staleness_sum = 0;

    try {
      for (uint64_t id : uploaders) {
        Rng stale_rng = master.fork(stream::kStaleness).fork(t, id);
        const uint64_t tau =
            stale_rng.uniform_below(std::min(t, proto.tau_max) + 1);
        const uint64_t t_i = t - tau;
        row.staleness_histogram[tau] += 1;
        staleness_sum += static_cast<double>(tau);

        // E local steps from the round-t_i model.
        const std::vector<double>& start = history.at(t_i);
        Rng train_rng = master.fork(stream::kTrain).fork(id, t);
        std::vector<double> x = start;
        for (uint64_t e = 0; e < proto.local_steps; ++e) {
          const auto batch =
              sample_minibatch(partitions[id - 1], config.batch_size, train_rng);
          const auto g = model.gradient(x, data.train, batch);
          for (size_t c = 0; c < x.size(); ++c) x[c] -= proto.eta_l * g[c];
        }
        std::vector<double> delta(x.size());
        for (size_t c = 0; c < x.size(); ++c) delta[c] = start[c] - x[c];

        if (secure) {
          // Fresh mask per upload; shares fan out to every user.
          Rng mask_rng = master.fork(stream::kMask).fork(id, t);
          MaskPackage pkg = users[id - 1].download(*field, t_i, start,
                                                   proto.mask, mask_rng);
          for (User& u : users) {
            u.store().put(pkg.owner, pkg.round, pkg.shares[u.id() - 1]);
          }
          Rng quant_rng = master.fork(stream::kQuant).fork(id, t);
          MaskedUpdate up = users[id - 1].upload(*field, delta, proto,
                                                 quant_rng,
                                                 &row.overflow_warnings);
          request = server->receive(std::move(up));
        } else {
          float_buffer.emplace_back(std::move(delta), tau);
        }
      }

      // Flush.
      if (secure) {
        if (!request) throw Error("buffer did not fill");
        std::vector<std::pair<uint64_t, FieldVector>> responses;
        for (uint64_t j = 1; j <= n; ++j) {
          if (std::binary_search(dropped.begin(), dropped.end(), j)) continue;
          responses.emplace_back(j, users[j - 1].respond(*field, *request));
        }
        row.recovery_responders = responses.size();
        server->finalize(responses);
        history[t + 1] = server->model();
      } else {
        row.recovery_responders = n - n_drop;
        double wsum = 0;
        for (const auto& [delta, tau] : float_buffer) {
          wsum += staleness_weight(proto.staleness, tau);
        }
        std::vector<double> g(float_model.size(), 0.0);
        for (const auto& [delta, tau] : float_buffer) {
          const double w = staleness_weight(proto.staleness, tau);
          for (size_t c = 0; c < g.size(); ++c) g[c] += w * delta[c];
        }
        for (size_t c = 0; c < float_model.size(); ++c) {
          float_model[c] -= proto.eta_g * g[c] / wsum;
        }
        history[t + 1] = float_model;
      }
    } catch (const Error& e) {
      metrics.abort_reason = e.what();
      break;
    }

    // Rotate the cohort: uploaders rest, idle users take their slots.
    {
      std::vector<uint64_t> sorted_up = uploaders;
      std::sort(sorted_up.begin(), sorted_up.end());
      std::vector<uint64_t> next_cohort;
      for (uint64_t id : cohort) {
        if (!std::binary_search(sorted_up.begin(), sorted_up.end(), id)) {
          next_cohort.push_back(id);
        }
      }
      for (uint64_t id : uploaders) idle.push_back(id);
      while (next_cohort.size() < config.concurrency) {
        next_cohort.push_back(idle.front());
        idle.erase(idle.begin());
      }
      cohort = std::move(next_cohort);
    }

    // Expire state that can no longer be requested.
    if (t + 1 > proto.tau_max) {
      const uint64_t cutoff = t + 1 - proto.tau_max;
      history.erase(history.begin(), history.lower_bound(cutoff));
      if (secure) {
        for (User& u : users) u.evict_shares_before(cutoff);
      }
    }

    const std::vector<double>& current =
        secure ? server->model() : float_model;
    row.wallclock_virtual = (t + 1) * k_buf;
    row.accuracy = model.accuracy(current, data.test);
    row.loss = model.loss(current, data.train);
    row.mean_staleness = staleness_sum / static_cast<double>(k_buf);
    for (size_t tau = 0; tau <= proto.tau_max; ++tau) {
      metrics.staleness_histogram[tau] += row.staleness_histogram[tau];
    }
    metrics.total_overflow_warnings += row.overflow_warnings;
    metrics.rounds.push_back(std::move(row));
  }
  return metrics;
}

// The buffered asynchronous baseline in the real domain: identical
// scheduler, staleness draws, minibatches, and dropout pattern; no
// quantization or masking.
inline RunMetrics run_baseline_fedbuff(SimConfig config) {
  config.scheme = Scheme::kFedbuffFloat;
  return run(config);
}

}  // namespace basecagg

#endif  // BASECAGG_SIM_HPP_
