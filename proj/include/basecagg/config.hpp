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

#ifndef BASECAGG_CONFIG_HPP_
#define BASECAGG_CONFIG_HPP_

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "basecagg/errors.hpp"
#include "basecagg/sim.hpp"
#include "json.hpp"

namespace basecagg {

// One sweep axis applied over a list of grid values.
struct SweepSpec {
  std::string axis;  // c_l | c_g | alpha | eta_l | eta_g
  std::vector<double> values;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

}  // namespace detail

inline Scheme parse_scheme(const std::string& name) {
  if (name == "basecagg") return Scheme::kBasecagg;
  if (name == "fedbuff-float") return Scheme::kFedbuffFloat;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected basecagg or fedbuff-float)");
}

inline std::string scheme_name(Scheme s) {
  return s == Scheme::kBasecagg ? "basecagg" : "fedbuff-float";
}

// Parses a config object. Every key is optional and falls back to the
// defaults below; unknown keys are errors so sweep-axis typos fail loudly.
inline SimConfig parse_config(const nlohmann::json& j) {
  using detail::get_or;
  using detail::require_keys;
  require_keys(j, {"scheme", "seed", "rounds", "users", "dropout_bound",
                   "privacy_threshold", "decode_threshold", "buffer_size",
                   "concurrency", "tau_max", "eta_l", "eta_g", "local_steps",
                   "batch_size", "c_l", "c_g", "field_modulus", "wrap_guard",
                   "staleness", "model", "dataset", "sweep"},
               "top level");
  SimConfig cfg;
  cfg.scheme = parse_scheme(get_or<std::string>(j, "scheme", "basecagg"));
  cfg.seed = get_or<uint64_t>(j, "seed", 1);
  cfg.rounds = get_or<uint64_t>(j, "rounds", 50);
  cfg.protocol.mask.n = get_or<uint64_t>(j, "users", 100);
  cfg.protocol.mask.dropout_bound = get_or<uint64_t>(j, "dropout_bound", 10);
  cfg.protocol.mask.t = get_or<uint64_t>(j, "privacy_threshold", 10);
  cfg.protocol.mask.u = get_or<uint64_t>(j, "decode_threshold", 50);
  cfg.protocol.buffer_size = get_or<uint64_t>(j, "buffer_size", 10);
  cfg.concurrency = get_or<uint64_t>(j, "concurrency", 20);
  cfg.protocol.tau_max = get_or<uint64_t>(j, "tau_max", 10);
  cfg.protocol.eta_l = get_or<double>(j, "eta_l", 0.01);
  cfg.protocol.eta_g = get_or<double>(j, "eta_g", 1.0);
  cfg.protocol.local_steps = get_or<uint64_t>(j, "local_steps", 1);
  cfg.batch_size = get_or<uint64_t>(j, "batch_size", 50);
  cfg.protocol.quant.c_l = get_or<uint64_t>(j, "c_l", 1ULL << 16);
  cfg.protocol.quant.c_g = get_or<uint64_t>(j, "c_g", 1ULL << 6);
  cfg.protocol.field_modulus =
      get_or<uint64_t>(j, "field_modulus", Field::kDefaultModulus);
  cfg.protocol.wrap_guard = get_or<bool>(j, "wrap_guard", true);

  if (j.contains("staleness")) {
    const auto& s = j.at("staleness");
    require_keys(s, {"kind", "alpha"}, "staleness");
    const std::string kind = detail::get_or<std::string>(s, "kind", "poly");
    if (kind == "constant") {
      cfg.protocol.staleness = StalenessFn::Constant();
    } else if (kind == "poly") {
      cfg.protocol.staleness =
          StalenessFn::Poly(detail::get_or<double>(s, "alpha", 1.0));
    } else {
      throw ConfigError("unknown staleness kind '" + kind + "'");
    }
  } else {
    cfg.protocol.staleness = StalenessFn::Poly(1.0);
  }

  if (j.contains("model")) {
    const auto& m = j.at("model");
    require_keys(m, {"kind", "hidden", "l2"}, "model");
    const std::string kind = detail::get_or<std::string>(m, "kind", "logreg");
    if (kind == "logreg") {
      cfg.model.kind = ModelKind::kLogReg;
    } else if (kind == "mlp") {
      cfg.model.kind = ModelKind::kMlp;
    } else {
      throw ConfigError("unknown model kind '" + kind + "'");
    }
    cfg.model.hidden = detail::get_or<uint64_t>(m, "hidden", 16);
    cfg.model.l2 = detail::get_or<double>(m, "l2", 5e-4);
  }

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    require_keys(d,
                 {"kind", "train_samples", "test_samples", "feature_dim",
                  "separation", "path", "test_fraction"},
                 "dataset");
    const std::string kind =
        detail::get_or<std::string>(d, "kind", "synthetic");
    if (kind == "synthetic") {
      cfg.dataset.kind = DatasetSpec::Kind::kSynthetic;
      cfg.dataset.synthetic.train_samples =
          detail::get_or<uint64_t>(d, "train_samples", 10000);
      cfg.dataset.synthetic.test_samples =
          detail::get_or<uint64_t>(d, "test_samples", 2000);
      cfg.dataset.synthetic.feature_dim =
          detail::get_or<uint64_t>(d, "feature_dim", 20);
      cfg.dataset.synthetic.separation =
          detail::get_or<double>(d, "separation", 1.2);
    } else if (kind == "csv") {
      cfg.dataset.kind = DatasetSpec::Kind::kCsv;
      cfg.dataset.csv_path = detail::get_or<std::string>(d, "path", "");
      cfg.dataset.test_fraction =
          detail::get_or<double>(d, "test_fraction", 0.2);
      if (cfg.dataset.csv_path.empty()) {
        throw ConfigError("csv dataset needs a 'path'");
      }
    } else {
      throw ConfigError("unknown dataset kind '" + kind + "'");
    }
  }
  return cfg;
}

inline std::optional<SweepSpec> parse_sweep(const nlohmann::json& j) {
  if (!j.contains("sweep")) return std::nullopt;
  const auto& s = j.at("sweep");
  detail::require_keys(s, {"axis", "values"}, "sweep");
  SweepSpec spec;
  spec.axis = detail::get_or<std::string>(s, "axis", "");
  static const std::set<std::string> kAxes{"c_l", "c_g", "alpha", "eta_l",
                                           "eta_g"};
  if (!kAxes.count(spec.axis)) {
    throw ConfigError("unknown sweep axis '" + spec.axis + "'");
  }
  if (!s.contains("values") || !s.at("values").is_array() ||
      s.at("values").empty()) {
    throw ConfigError("sweep needs a nonempty 'values' array");
  }
  for (const auto& v : s.at("values")) {
    if (!v.is_number()) throw ConfigError("sweep values must be numeric");
    spec.values.push_back(v.get<double>());
  }
  return spec;
}

inline void apply_sweep_value(SimConfig& cfg, const std::string& axis,
                              double value) {
  if (axis == "c_l") {
    if (value < 1) throw ConfigError("c_l must be >= 1");
    cfg.protocol.quant.c_l = static_cast<uint64_t>(value);
  } else if (axis == "c_g") {
    if (value < 1) throw ConfigError("c_g must be >= 1");
    cfg.protocol.quant.c_g = static_cast<uint64_t>(value);
  } else if (axis == "alpha") {
    cfg.protocol.staleness.kind = StalenessFn::Kind::kPoly;
    cfg.protocol.staleness.alpha = value;
  } else if (axis == "eta_l") {
    cfg.protocol.eta_l = value;
  } else if (axis == "eta_g") {
    cfg.protocol.eta_g = value;
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
}

// Fully resolved config, the manifest's core. parse_config of this value
// reproduces the run exactly.
inline nlohmann::json config_to_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["scheme"] = scheme_name(cfg.scheme);
  j["seed"] = cfg.seed;
  j["rounds"] = cfg.rounds;
  j["users"] = cfg.protocol.mask.n;
  j["dropout_bound"] = cfg.protocol.mask.dropout_bound;
  j["privacy_threshold"] = cfg.protocol.mask.t;
  j["decode_threshold"] = cfg.protocol.mask.u;
  j["buffer_size"] = cfg.protocol.buffer_size;
  j["concurrency"] = cfg.concurrency;
  j["tau_max"] = cfg.protocol.tau_max;
  j["eta_l"] = cfg.protocol.eta_l;
  j["eta_g"] = cfg.protocol.eta_g;
  j["local_steps"] = cfg.protocol.local_steps;
  j["batch_size"] = cfg.batch_size;
  j["c_l"] = cfg.protocol.quant.c_l;
  j["c_g"] = cfg.protocol.quant.c_g;
  j["field_modulus"] = cfg.protocol.field_modulus;
  j["wrap_guard"] = cfg.protocol.wrap_guard;
  j["staleness"] = {
      {"kind", cfg.protocol.staleness.kind == StalenessFn::Kind::kConstant
                   ? "constant"
                   : "poly"},
      {"alpha", cfg.protocol.staleness.alpha}};
  j["model"] = {
      {"kind", cfg.model.kind == ModelKind::kLogReg ? "logreg" : "mlp"},
      {"hidden", cfg.model.hidden},
      {"l2", cfg.model.l2}};
  if (cfg.dataset.kind == DatasetSpec::Kind::kSynthetic) {
    j["dataset"] = {{"kind", "synthetic"},
                    {"train_samples", cfg.dataset.synthetic.train_samples},
                    {"test_samples", cfg.dataset.synthetic.test_samples},
                    {"feature_dim", cfg.dataset.synthetic.feature_dim},
                    {"separation", cfg.dataset.synthetic.separation}};
  } else {
    j["dataset"] = {{"kind", "csv"},
                    {"path", cfg.dataset.csv_path},
                    {"test_fraction", cfg.dataset.test_fraction}};
  }
  return j;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Child seeds for sweep grid points: independent but reproducible.
inline uint64_t derive_sweep_seed(uint64_t master_seed, uint64_t grid_index) {
  return mix64(master_seed, 0x7377656570ULL, grid_index);
}

}  // namespace basecagg

#endif  // BASECAGG_CONFIG_HPP_
