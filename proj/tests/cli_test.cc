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

#include "basecagg/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "basecagg/config.hpp"
#include "basecagg/verify.hpp"
#include "gtest/gtest.h"
#include "json.hpp"

namespace basecagg {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

json SmallConfigJson() {
  return json{
      {"users", 12},
      {"dropout_bound", 2},
      {"privacy_threshold", 2},
      {"decode_threshold", 6},
      {"buffer_size", 3},
      {"concurrency", 6},
      {"tau_max", 3},
      {"rounds", 4},
      {"seed", 11},
      {"dataset",
       {{"kind", "synthetic"},
        {"train_samples", 240},
        {"test_samples", 80},
        {"feature_dim", 5},
        {"separation", 1.4}}}};
}

TEST(ConfigTest, DefaultsMatchDocumentedValues) {
  SimConfig cfg = parse_config(json::object());
  EXPECT_EQ(cfg.protocol.mask.n, 100u);
  EXPECT_EQ(cfg.protocol.mask.dropout_bound, 10u);
  EXPECT_EQ(cfg.protocol.mask.t, 10u);
  EXPECT_EQ(cfg.protocol.mask.u, 50u);
  EXPECT_EQ(cfg.protocol.buffer_size, 10u);
  EXPECT_EQ(cfg.concurrency, 20u);
  EXPECT_EQ(cfg.protocol.tau_max, 10u);
  EXPECT_DOUBLE_EQ(cfg.protocol.eta_l, 0.01);
  EXPECT_DOUBLE_EQ(cfg.protocol.eta_g, 1.0);
  EXPECT_EQ(cfg.protocol.quant.c_l, 1ULL << 16);
  EXPECT_EQ(cfg.protocol.quant.c_g, 1ULL << 6);
  EXPECT_EQ(cfg.protocol.field_modulus, 4294967291ULL);
  EXPECT_EQ(cfg.batch_size, 50u);
  EXPECT_EQ(cfg.protocol.staleness.kind, StalenessFn::Kind::kPoly);
  EXPECT_DOUBLE_EQ(cfg.protocol.staleness.alpha, 1.0);
  EXPECT_DOUBLE_EQ(cfg.model.l2, 5e-4);
  EXPECT_EQ(cfg.scheme, Scheme::kBasecagg);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(ConfigTest, UnknownKeysAreErrors) {
  EXPECT_THROW(parse_config(json{{"buffersize", 5}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"staleness", {{"kin", "poly"}}}}),
               ConfigError);
  EXPECT_THROW(parse_config(json{{"dataset", {{"kind", "synthetic"},
                                              {"samples", 10}}}}),
               ConfigError);
}

TEST(ConfigTest, BadValuesAreErrors) {
  EXPECT_THROW(parse_config(json{{"scheme", "both"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"seed", "abc"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"staleness", {{"kind", "hinge"}}}}),
               ConfigError);
  EXPECT_THROW(parse_config(json{{"dataset", {{"kind", "csv"}}}}),
               ConfigError);
}

TEST(ConfigTest, RoundTripThroughJson) {
  SimConfig cfg = parse_config(SmallConfigJson());
  const json dumped = config_to_json(cfg);
  SimConfig again = parse_config(dumped);
  EXPECT_EQ(config_to_json(again), dumped);
}

TEST(ConfigTest, SweepParsing) {
  json j = SmallConfigJson();
  EXPECT_FALSE(parse_sweep(j).has_value());
  j["sweep"] = {{"axis", "c_l"}, {"values", {16, 65536}}};
  auto sweep = parse_sweep(j);
  ASSERT_TRUE(sweep.has_value());
  EXPECT_EQ(sweep->axis, "c_l");
  EXPECT_EQ(sweep->values.size(), 2u);

  j["sweep"] = {{"axis", "banana"}, {"values", {1}}};
  EXPECT_THROW(parse_sweep(j), ConfigError);
  j["sweep"] = {{"axis", "c_l"}, {"values", json::array()}};
  EXPECT_THROW(parse_sweep(j), ConfigError);
}

TEST(ConfigTest, ApplySweepValueTouchesTheRightKnob) {
  SimConfig cfg = parse_config(SmallConfigJson());
  apply_sweep_value(cfg, "c_l", 1024);
  EXPECT_EQ(cfg.protocol.quant.c_l, 1024u);
  apply_sweep_value(cfg, "alpha", 0.5);
  EXPECT_DOUBLE_EQ(cfg.protocol.staleness.alpha, 0.5);
  apply_sweep_value(cfg, "eta_l", 0.003);
  EXPECT_DOUBLE_EQ(cfg.protocol.eta_l, 0.003);
  EXPECT_THROW(apply_sweep_value(cfg, "c_g", 0), ConfigError);
}

TEST(ConfigTest, SweepSeedsAreStableAndDistinct) {
  const uint64_t a0 = derive_sweep_seed(1, 0);
  EXPECT_EQ(a0, derive_sweep_seed(1, 0));
  EXPECT_NE(a0, derive_sweep_seed(1, 1));
  EXPECT_NE(a0, derive_sweep_seed(2, 0));
}

TEST(CliTest, RunWritesReproducibleArtifacts) {
  const fs::path base = fs::path(::testing::TempDir()) / "cli_run";
  fs::remove_all(base);
  const fs::path cfg_path = base;
  fs::create_directories(base);
  WriteFile(base / "cfg.json", SmallConfigJson().dump());

  cli::Options opts;
  opts.config_path = (base / "cfg.json").string();
  opts.out_dir = (base / "out_a").string();
  ASSERT_EQ(cli::cmd_run(opts), 0);
  opts.out_dir = (base / "out_b").string();
  ASSERT_EQ(cli::cmd_run(opts), 0);

  const std::string csv_a = ReadFile(base / "out_a" / "metrics.csv");
  const std::string csv_b = ReadFile(base / "out_b" / "metrics.csv");
  EXPECT_FALSE(csv_a.empty());
  EXPECT_EQ(csv_a, csv_b);

  // The manifest alone reproduces the CSV byte-for-byte.
  const json manifest = json::parse(ReadFile(base / "out_a" / "manifest.json"));
  SimConfig cfg = parse_config(manifest.at("config"));
  EXPECT_EQ(to_csv(run(cfg)), csv_a);
}

TEST(CliTest, RunRefusesToOverwriteWithoutForce) {
  const fs::path base = fs::path(::testing::TempDir()) / "cli_overwrite";
  fs::remove_all(base);
  fs::create_directories(base);
  WriteFile(base / "cfg.json", SmallConfigJson().dump());

  cli::Options opts;
  opts.config_path = (base / "cfg.json").string();
  opts.out_dir = (base / "out").string();
  ASSERT_EQ(cli::cmd_run(opts), 0);
  EXPECT_EQ(cli::cmd_run(opts), 1);  // refuses
  opts.force = true;
  EXPECT_EQ(cli::cmd_run(opts), 0);
}

TEST(CliTest, SeedAndSchemeOverridesApply) {
  const fs::path base = fs::path(::testing::TempDir()) / "cli_override";
  fs::remove_all(base);
  fs::create_directories(base);
  WriteFile(base / "cfg.json", SmallConfigJson().dump());

  cli::Options opts;
  opts.config_path = (base / "cfg.json").string();
  opts.out_dir = (base / "out").string();
  opts.seed = 424242;
  opts.scheme = "fedbuff-float";
  ASSERT_EQ(cli::cmd_run(opts), 0);
  const json manifest = json::parse(ReadFile(base / "out" / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("seed").get<uint64_t>(), 424242u);
  EXPECT_EQ(manifest.at("config").at("scheme").get<std::string>(),
            "fedbuff-float");
}

TEST(CliTest, SweepReportsPartialFailures) {
  // The second grid point trips the wrap-around guard in a reduced field
  // and aborts; the sweep must finish, mark it, and exit nonzero.
  json j = SmallConfigJson();
  j["field_modulus"] = 4194301;  // 2^22 - 3
  j["sweep"] = {{"axis", "c_l"}, {"values", {16, 1073741824}}};
  const fs::path base = fs::path(::testing::TempDir()) / "cli_sweep";
  fs::remove_all(base);
  fs::create_directories(base);
  WriteFile(base / "cfg.json", j.dump());

  cli::Options opts;
  opts.config_path = (base / "cfg.json").string();
  opts.out_dir = (base / "out").string();
  EXPECT_EQ(cli::cmd_sweep(opts), 1);
  const std::string summary = ReadFile(base / "out" / "summary.csv");
  EXPECT_NE(summary.find("ok"), std::string::npos);
  EXPECT_NE(summary.find("aborted"), std::string::npos);
  EXPECT_TRUE(fs::exists(base / "out" / "c_l_0" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(base / "out" / "c_l_1" / "manifest.json"));
}

TEST(CliTest, SweepWithoutSpecFails) {
  const fs::path base = fs::path(::testing::TempDir()) / "cli_nosweep";
  fs::remove_all(base);
  fs::create_directories(base);
  WriteFile(base / "cfg.json", SmallConfigJson().dump());
  cli::Options opts;
  opts.config_path = (base / "cfg.json").string();
  opts.out_dir = (base / "out").string();
  EXPECT_EQ(cli::cmd_sweep(opts), 1);
}

TEST(CliTest, CompareEmitsBothSchemes) {
  const fs::path base = fs::path(::testing::TempDir()) / "cli_compare";
  fs::remove_all(base);
  fs::create_directories(base);
  WriteFile(base / "cfg.json", SmallConfigJson().dump());
  cli::Options opts;
  opts.config_path = (base / "cfg.json").string();
  opts.out_dir = (base / "out").string();
  ASSERT_EQ(cli::cmd_compare(opts), 0);
  EXPECT_TRUE(fs::exists(base / "out" / "basecagg" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(base / "out" / "fedbuff-float" / "metrics.csv"));
  const std::string cmp = ReadFile(base / "out" / "compare.csv");
  EXPECT_NE(cmp.find("round,accuracy_basecagg"), std::string::npos);
}

TEST(ConfigTest, BundledConfigsParseAndValidate) {
  for (const char* name :
       {"default.json", "sweep_cl_reduced_field.json", "sweep_alpha.json",
        "mlp.json"}) {
    const fs::path path = fs::path(BASECAGG_SOURCE_DIR) / "configs" / name;
    ASSERT_TRUE(fs::exists(path)) << path;
    const json raw = load_json_file(path.string());
    SimConfig cfg = parse_config(raw);
    EXPECT_NO_THROW(cfg.validate()) << name;
    if (std::string(name).rfind("sweep", 0) == 0) {
      EXPECT_TRUE(parse_sweep(raw).has_value()) << name;
    }
  }
}

TEST(VerifyTest, BatteriesPassCleanAndFailOnInjectedFault) {
  auto clean = verify::run_all(17, /*inject_fault=*/false,
                               /*exactness_rounds=*/60, /*quant_draws=*/4000);
  for (const auto& r : clean) {
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }
  auto faulty = verify::run_all(17, /*inject_fault=*/true,
                                /*exactness_rounds=*/60, /*quant_draws=*/4000);
  bool exactness_failed = false;
  for (const auto& r : faulty) {
    if (r.name == "end-to-end-exactness") exactness_failed = !r.passed;
  }
  EXPECT_TRUE(exactness_failed) << "corrupted share went unnoticed";
}

}  // namespace
}  // namespace basecagg
