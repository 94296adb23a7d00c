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

#ifndef BASECAGG_CLI_HPP_
#define BASECAGG_CLI_HPP_

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "basecagg/config.hpp"
#include "basecagg/metrics.hpp"
#include "basecagg/sim.hpp"
#include "basecagg/verify.hpp"

namespace basecagg {
namespace cli {

struct Options {
  std::string config_path;       // empty: built-in defaults
  std::string out_dir = "out";
  std::optional<uint64_t> seed;  // overrides the config seed
  std::optional<std::string> scheme;
  bool force = false;         // overwrite existing result files
  bool inject_fault = false;  // verify-only testing hook
};

namespace detail {

inline nlohmann::json load_or_default(const std::string& path) {
  return path.empty() ? nlohmann::json::object() : load_json_file(path);
}

inline SimConfig resolve_config(const Options& opts,
                                const nlohmann::json& raw) {
  SimConfig cfg = parse_config(raw);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.scheme) cfg.scheme = parse_scheme(*opts.scheme);
  return cfg;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw ConfigError("refusing to overwrite " + path.string() +
                      " (use --force)");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

// Metrics CSV plus the manifest that reproduces it byte-for-byte.
inline void write_run_artifacts(const std::filesystem::path& dir,
                                const SimConfig& cfg, const RunMetrics& m,
                                const std::string& command, bool force) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["schema_version"] = kMessageSchemaVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["metrics_csv"] = "metrics.csv";
  if (!m.abort_reason.empty()) manifest["abort_reason"] = m.abort_reason;
  write_file(dir / "metrics.csv", to_csv(m), force);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n", force);
}

}  // namespace detail

inline int cmd_run(const Options& opts) {
  try {
    const nlohmann::json raw = detail::load_or_default(opts.config_path);
    SimConfig cfg = detail::resolve_config(opts, raw);
    const RunMetrics m = run(cfg);
    detail::write_run_artifacts(opts.out_dir, cfg, m, "run", opts.force);
    std::cout << "run: scheme=" << scheme_name(cfg.scheme)
              << " seed=" << cfg.seed << " rounds=" << m.rounds.size()
              << " final_accuracy=" << format_double(m.final_accuracy())
              << "\n";
    if (!m.abort_reason.empty()) {
      std::cerr << "run aborted: " << m.abort_reason << "\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int cmd_sweep(const Options& opts) {
  try {
    const nlohmann::json raw = detail::load_or_default(opts.config_path);
    const SimConfig base = detail::resolve_config(opts, raw);
    const auto sweep = parse_sweep(raw);
    if (!sweep) throw ConfigError("config has no 'sweep' section");

    std::filesystem::create_directories(opts.out_dir);
    nlohmann::json manifest;
    manifest["command"] = "sweep";
    manifest["schema_version"] = kMessageSchemaVersion;
    manifest["config"] = config_to_json(base);
    manifest["sweep"] = {{"axis", sweep->axis}, {"values", sweep->values}};
    manifest["children"] = nlohmann::json::array();
    std::string summary =
        "index," + sweep->axis + ",seed,rounds,final_accuracy,final_loss,status\n";
    std::vector<std::string> failures;
    for (size_t i = 0; i < sweep->values.size(); ++i) {
      SimConfig child = base;
      apply_sweep_value(child, sweep->axis, sweep->values[i]);
      child.seed = derive_sweep_seed(base.seed, i);
      const std::filesystem::path dir =
          std::filesystem::path(opts.out_dir) /
          (sweep->axis + "_" + std::to_string(i));
      std::string status = "ok";
      RunMetrics m;
      try {
        m = run(child);
        if (!m.abort_reason.empty()) {
          status = "aborted: " + m.abort_reason;
        }
      } catch (const std::exception& e) {
        status = std::string("failed: ") + e.what();
      }
      detail::write_run_artifacts(dir, child, m, "sweep", opts.force);
      manifest["children"].push_back(
          {{"dir", dir.filename().string()}, {"seed", child.seed}});
      const double final_loss =
          m.rounds.empty() ? 0.0 : m.rounds.back().loss;
      summary += std::to_string(i) + "," +
                 format_double(sweep->values[i]) + "," +
                 std::to_string(child.seed) + "," +
                 std::to_string(m.rounds.size()) + "," +
                 format_double(m.final_accuracy()) + "," +
                 format_double(final_loss) + "," + status + "\n";
      if (status != "ok") {
        failures.push_back(sweep->axis + "=" +
                           format_double(sweep->values[i]) + " -> " + status);
      }
      std::cout << "sweep[" << i << "] " << sweep->axis << "="
                << format_double(sweep->values[i])
                << " final_accuracy=" << format_double(m.final_accuracy())
                << " (" << status << ")\n";
    }
    detail::write_file(std::filesystem::path(opts.out_dir) / "summary.csv",
                       summary, opts.force);
    detail::write_file(std::filesystem::path(opts.out_dir) / "manifest.json",
                       manifest.dump(2) + "\n", opts.force);
    if (!failures.empty()) {
      std::cerr << failures.size() << " grid point(s) failed:\n";
      for (const auto& f : failures) std::cerr << "  " << f << "\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int cmd_verify(const Options& opts) {
  try {
    const uint64_t seed = opts.seed.value_or(1);
    bool all_passed = true;
    for (const auto& result : verify::run_all(seed, opts.inject_fault)) {
      std::cout << (result.passed ? "[PASS] " : "[FAIL] ") << result.name
                << " - " << result.detail << "\n";
      all_passed = all_passed && result.passed;
    }
    return all_passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// Runs both schemes on one config and seed and reports the accuracy gap
// per round.
inline int cmd_compare(const Options& opts) {
  try {
    const nlohmann::json raw = detail::load_or_default(opts.config_path);
    SimConfig cfg = detail::resolve_config(opts, raw);

    cfg.scheme = Scheme::kBasecagg;
    const RunMetrics secure = run(cfg);
    detail::write_run_artifacts(
        std::filesystem::path(opts.out_dir) / "basecagg", cfg, secure,
        "compare", opts.force);
    cfg.scheme = Scheme::kFedbuffFloat;
    const RunMetrics baseline = run(cfg);
    detail::write_run_artifacts(
        std::filesystem::path(opts.out_dir) / "fedbuff-float", cfg, baseline,
        "compare", opts.force);

    std::string csv = "round,accuracy_basecagg,accuracy_fedbuff_float,delta\n";
    double max_gap = 0.0;
    const size_t rounds =
        std::min(secure.rounds.size(), baseline.rounds.size());
    for (size_t i = 0; i < rounds; ++i) {
      const double a = secure.rounds[i].accuracy;
      const double b = baseline.rounds[i].accuracy;
      max_gap = std::max(max_gap, std::abs(a - b));
      csv += std::to_string(secure.rounds[i].round) + ","
             + format_double(a) + "," + format_double(b) + ","
             + format_double(a - b) + "\n";
    }
    std::filesystem::create_directories(opts.out_dir);
    detail::write_file(std::filesystem::path(opts.out_dir) / "compare.csv",
                       csv, opts.force);
    nlohmann::json manifest;
    manifest["command"] = "compare";
    manifest["schema_version"] = kMessageSchemaVersion;
    cfg.scheme = Scheme::kBasecagg;
    manifest["config"] = config_to_json(cfg);
    manifest["children"] = {"basecagg", "fedbuff-float"};
    detail::write_file(std::filesystem::path(opts.out_dir) / "manifest.json",
                       manifest.dump(2) + "\n", opts.force);
    const double final_gap =
        rounds == 0 ? 0.0
                    : secure.rounds[rounds - 1].accuracy -
                          baseline.rounds[rounds - 1].accuracy;
    std::cout << "compare: rounds=" << rounds
              << " max_accuracy_gap=" << format_double(max_gap)
              << " final_gap=" << format_double(final_gap) << "\n";
    if (!secure.abort_reason.empty() || !baseline.abort_reason.empty()) {
      std::cerr << "one of the runs aborted\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cli
}  // namespace basecagg

#endif  // BASECAGG_CLI_HPP_
