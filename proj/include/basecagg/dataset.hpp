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

#ifndef BASECAGG_DATASET_HPP_
#define BASECAGG_DATASET_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "basecagg/errors.hpp"
#include "basecagg/rng.hpp"

namespace basecagg {

// Row-major sample matrix with binary labels.
struct Dataset {
  size_t feature_dim = 0;
  std::vector<double> features;  // size() * feature_dim
  std::vector<int> labels;       // 0 or 1

  size_t size() const { return labels.size(); }
  const double* row(size_t i) const { return features.data() + i * feature_dim; }

  void push_row(const std::vector<double>& x, int label) {
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
  }
};

// Two-class Gaussian mixture: class means at +mu and -mu where
// mu = (separation / sqrt(f)) * 1, unit noise. The optimal linear rule has
// error Phi(-separation), so `separation` dials task difficulty directly.
inline Dataset make_synthetic(size_t samples, size_t feature_dim,
                              double separation, Rng& rng) {
  if (samples == 0 || feature_dim == 0) {
    throw InvalidParams("synthetic dataset needs samples and features");
  }
  Dataset ds;
  ds.feature_dim = feature_dim;
  ds.features.reserve(samples * feature_dim);
  ds.labels.reserve(samples);
  const double mu = separation / std::sqrt(static_cast<double>(feature_dim));
  for (size_t i = 0; i < samples; ++i) {
    const int label = static_cast<int>(i % 2);  // exactly balanced
    const double sign = label == 1 ? 1.0 : -1.0;
    for (size_t k = 0; k < feature_dim; ++k) {
      ds.features.push_back(sign * mu + rng.normal());
    }
    ds.labels.push_back(label);
  }
  return ds;
}

// IID split: shuffle indices, then deal contiguous chunks whose sizes
// differ by at most one. Chunks are disjoint and cover every sample.
inline std::vector<std::vector<size_t>> partition_iid(size_t samples,
                                                      size_t num_users,
                                                      Rng& rng) {
  if (num_users == 0) throw InvalidParams("cannot partition to zero users");
  std::vector<size_t> idx(samples);
  for (size_t i = 0; i < samples; ++i) idx[i] = i;
  for (size_t i = 0; i + 1 < samples; ++i) {
    const size_t j = i + rng.uniform_below(samples - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::vector<size_t>> parts(num_users);
  const size_t base = samples / num_users;
  const size_t extra = samples % num_users;
  size_t at = 0;
  for (size_t u = 0; u < num_users; ++u) {
    const size_t take = base + (u < extra ? 1 : 0);
    parts[u].assign(idx.begin() + at, idx.begin() + at + take);
    at += take;
  }
  return parts;
}

// CSV layout: one sample per line, comma-separated; every column but the
// last is a feature, the last is the integer label (0 or 1). No header.
inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path);
  Dataset ds;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": bad numeric value '" + cell + "'");
      }
    }
    if (values.size() < 2) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": need at least one feature and a label");
    }
    const double raw_label = values.back();
    values.pop_back();
    if (raw_label != 0.0 && raw_label != 1.0) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": label must be 0 or 1");
    }
    if (ds.feature_dim == 0) {
      ds.feature_dim = values.size();
    } else if (values.size() != ds.feature_dim) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": inconsistent feature count");
    }
    ds.push_row(values, static_cast<int>(raw_label));
  }
  if (ds.size() == 0) throw ConfigError(path + ": empty dataset");
  return ds;
}

// Deterministic train/test split by shuffled indices.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                                 double test_fraction,
                                                 Rng& rng) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw InvalidParams("test fraction must be in (0, 1)");
  }
  std::vector<size_t> idx(ds.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (size_t i = 0; i + 1 < idx.size(); ++i) {
    const size_t j = i + rng.uniform_below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  const size_t test_count = static_cast<size_t>(
      std::max(1.0, std::floor(test_fraction * static_cast<double>(ds.size()))));
  if (test_count >= ds.size()) {
    throw InvalidParams("split leaves no training samples");
  }
  Dataset train, test;
  train.feature_dim = test.feature_dim = ds.feature_dim;
  for (size_t i = 0; i < idx.size(); ++i) {
    const size_t s = idx[i];
    std::vector<double> row(ds.row(s), ds.row(s) + ds.feature_dim);
    if (i < test_count) {
      test.push_row(row, ds.labels[s]);
    } else {
      train.push_row(row, ds.labels[s]);
    }
  }
  return {std::move(train), std::move(test)};
}

}  // namespace basecagg

#endif  // BASECAGG_DATASET_HPP_
