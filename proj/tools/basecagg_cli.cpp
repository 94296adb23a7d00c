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

#include <cstdint>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "basecagg/cli.hpp"

namespace {

void add_common(CLI::App* cmd, basecagg::cli::Options* opts,
                bool with_scheme = true) {
  cmd->add_option("--config", opts->config_path,
                  "JSON experiment config (defaults apply when omitted)");
  cmd->add_option("--out", opts->out_dir, "output directory");
  cmd->add_option("--seed", [opts](const CLI::results_t& res) {
    opts->seed = std::stoull(res[0]);
    return true;
  }, "override the config seed")->expected(1);
  if (with_scheme) {
    cmd->add_option("--scheme", [opts](const CLI::results_t& res) {
      opts->scheme = res[0];
      return true;
    }, "basecagg | fedbuff-float")->expected(1);
  }
  cmd->add_flag("--force", opts->force, "overwrite existing result files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Buffered asynchronous secure-aggregation simulator"};
  app.require_subcommand(1);

  basecagg::cli::Options run_opts;
  CLI::App* run_cmd =
      app.add_subcommand("run", "execute one experiment and emit metrics CSV");
  add_common(run_cmd, &run_opts);

  basecagg::cli::Options sweep_opts;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "run the config's sweep grid with derived child seeds");
  add_common(sweep_cmd, &sweep_opts);

  basecagg::cli::Options verify_opts;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "run the privacy/coding/quantization/exactness batteries");
  verify_cmd->add_option("--seed", [&verify_opts](const CLI::results_t& res) {
    verify_opts.seed = std::stoull(res[0]);
    return true;
  }, "battery seed")->expected(1);
  verify_cmd->add_flag("--inject-fault", verify_opts.inject_fault,
                       "corrupt one recovery share (harness self-check)");

  basecagg::cli::Options compare_opts;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "run both schemes on one config and report accuracy gaps");
  add_common(compare_cmd, &compare_opts, /*with_scheme=*/false);

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return basecagg::cli::cmd_run(run_opts);
  if (sweep_cmd->parsed()) return basecagg::cli::cmd_sweep(sweep_opts);
  if (verify_cmd->parsed()) return basecagg::cli::cmd_verify(verify_opts);
  if (compare_cmd->parsed()) return basecagg::cli::cmd_compare(compare_opts);
  return 1;
}
