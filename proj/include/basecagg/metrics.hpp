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

#ifndef BASECAGG_METRICS_HPP_
#define BASECAGG_METRICS_HPP_

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace basecagg {

// One row per global round, emitted at each buffer flush.
struct RoundMetrics {
  uint64_t round = 0;              // index of the round that just completed
  uint64_t wallclock_virtual = 0;  // cumulative delivered uploads
  double accuracy = 0.0;           // on the held-out test set
  double loss = 0.0;               // on the training set
  double mean_staleness = 0.0;
  uint64_t dropouts = 0;
  uint64_t overflow_warnings = 0;
  std::vector<uint64_t> staleness_histogram;  // counts for tau = 0..tau_max
  uint64_t recovery_responders = 0;
};

struct RunMetrics {
  std::vector<RoundMetrics> rounds;
  std::vector<uint64_t> staleness_histogram;  // aggregated over the run
  uint64_t total_overflow_warnings = 0;
  // Set when a run stopped early on a propagated protocol error.
  std::string abort_reason;

  double final_accuracy() const {
    return rounds.empty() ? 0.0 : rounds.back().accuracy;
  }
};

// Shortest round-trip decimal form, locale-independent.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline const char* kMetricsCsvHeader =
    "round,wallclock_virtual,accuracy,loss,mean_staleness,dropouts,"
    "overflow_warnings";

// Fixed column schema; identical runs must serialize to identical bytes.
inline std::string to_csv(const RunMetrics& metrics) {
  std::string out = kMetricsCsvHeader;
  out += '\n';
  for (const RoundMetrics& r : metrics.rounds) {
    out += std::to_string(r.round);
    out += ',';
    out += std::to_string(r.wallclock_virtual);
    out += ',';
    out += format_double(r.accuracy);
    out += ',';
    out += format_double(r.loss);
    out += ',';
    out += format_double(r.mean_staleness);
    out += ',';
    out += std::to_string(r.dropouts);
    out += ',';
    out += std::to_string(r.overflow_warnings);
    out += '\n';
  }
  return out;
}

}  // namespace basecagg

#endif  // BASECAGG_METRICS_HPP_
