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

#ifndef BASECAGG_MODEL_HPP_
#define BASECAGG_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "basecagg/dataset.hpp"
#include "basecagg/errors.hpp"
#include "basecagg/rng.hpp"

namespace basecagg {

enum class ModelKind { kLogReg, kMlp };

struct ModelSpec {
  ModelKind kind = ModelKind::kLogReg;
  uint64_t hidden = 16;  // MLP hidden width
  double l2 = 5e-4;      // ridge penalty on all parameters
};

namespace detail {

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace detail

// Binary classifier with a flat parameter vector: either logistic
// regression (weights + bias) or a two-layer tanh MLP with a single
// output score. Loss is the logistic loss plus (l2/2)|params|^2; a sample
// is classified positive when its score is positive.
class Model {
 public:
  Model(ModelSpec spec, size_t feature_dim)
      : spec_(spec), feature_dim_(feature_dim) {
    if (feature_dim_ == 0) throw InvalidParams("feature dimension is zero");
    if (spec_.kind == ModelKind::kMlp && spec_.hidden == 0) {
      throw InvalidParams("MLP needs at least one hidden unit");
    }
  }

  const ModelSpec& spec() const { return spec_; }
  size_t feature_dim() const { return feature_dim_; }

  size_t dim() const {
    switch (spec_.kind) {
      case ModelKind::kLogReg:
        return feature_dim_ + 1;
      case ModelKind::kMlp:
        return spec_.hidden * feature_dim_ + 2 * spec_.hidden + 1;
    }
    return 0;
  }

  // Zero for logistic regression; small symmetric-breaking uniform values
  // for the MLP's first layer.
  std::vector<double> init_params(Rng& rng) const {
    std::vector<double> p(dim(), 0.0);
    if (spec_.kind == ModelKind::kMlp) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(feature_dim_));
      for (size_t k = 0; k < spec_.hidden * feature_dim_; ++k) {
        p[k] = (rng.next_double() - 0.5) * scale;
      }
      // Output weights start small but nonzero so gradients flow.
      const size_t w2_off = spec_.hidden * feature_dim_ + spec_.hidden;
      for (size_t h = 0; h < spec_.hidden; ++h) {
        p[w2_off + h] = (rng.next_double() - 0.5) * 0.2;
      }
    }
    return p;
  }

  double score(const std::vector<double>& params, const double* x) const {
    switch (spec_.kind) {
      case ModelKind::kLogReg: {
        double s = params[feature_dim_];
        for (size_t k = 0; k < feature_dim_; ++k) s += params[k] * x[k];
        return s;
      }
      case ModelKind::kMlp: {
        const size_t h_count = spec_.hidden;
        const size_t b1_off = h_count * feature_dim_;
        const size_t w2_off = b1_off + h_count;
        const size_t b2_off = w2_off + h_count;
        double s = params[b2_off];
        for (size_t h = 0; h < h_count; ++h) {
          double pre = params[b1_off + h];
          const double* row = params.data() + h * feature_dim_;
          for (size_t k = 0; k < feature_dim_; ++k) pre += row[k] * x[k];
          s += params[w2_off + h] * std::tanh(pre);
        }
        return s;
      }
    }
    return 0.0;
  }

  // Minibatch gradient: data term averaged over `batch` plus the l2 term.
  // An empty batch reduces to the l2 term alone.
  std::vector<double> gradient(const std::vector<double>& params,
                               const Dataset& data,
                               const std::vector<size_t>& batch) const {
    check(params, data);
    std::vector<double> g(params.size(), 0.0);
    if (!batch.empty()) {
      const double inv_b = 1.0 / static_cast<double>(batch.size());
      for (size_t idx : batch) {
        const double* x = data.row(idx);
        const double y = data.labels[idx] == 1 ? 1.0 : -1.0;
        accumulate_sample_grad(params, x, y, inv_b, g);
      }
    }
    for (size_t k = 0; k < params.size(); ++k) g[k] += spec_.l2 * params[k];
    return g;
  }

  double loss(const std::vector<double>& params, const Dataset& data) const {
    check(params, data);
    double total = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
      const double y = data.labels[i] == 1 ? 1.0 : -1.0;
      total += detail::softplus(-y * score(params, data.row(i)));
    }
    double reg = 0.0;
    for (double p : params) reg += p * p;
    return total / static_cast<double>(data.size()) + 0.5 * spec_.l2 * reg;
  }

  double accuracy(const std::vector<double>& params,
                  const Dataset& data) const {
    check(params, data);
    size_t correct = 0;
    for (size_t i = 0; i < data.size(); ++i) {
      const bool positive = score(params, data.row(i)) > 0;
      if (positive == (data.labels[i] == 1)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
  }

 private:
  void check(const std::vector<double>& params, const Dataset& data) const {
    if (params.size() != dim()) {
      throw DimensionMismatch("parameter vector has wrong length");
    }
    if (data.feature_dim != feature_dim_) {
      throw DimensionMismatch("dataset feature dimension mismatch");
    }
  }

  void accumulate_sample_grad(const std::vector<double>& params,
                              const double* x, double y, double weight,
                              std::vector<double>& g) const {
    // d/ds log(1 + exp(-y s)) = -y * sigmoid(-y s)
    const double s = score(params, x);
    const double coef = -y * detail::sigmoid(-y * s) * weight;
    switch (spec_.kind) {
      case ModelKind::kLogReg: {
        for (size_t k = 0; k < feature_dim_; ++k) g[k] += coef * x[k];
        g[feature_dim_] += coef;
        return;
      }
      case ModelKind::kMlp: {
        const size_t h_count = spec_.hidden;
        const size_t b1_off = h_count * feature_dim_;
        const size_t w2_off = b1_off + h_count;
        const size_t b2_off = w2_off + h_count;
        for (size_t h = 0; h < h_count; ++h) {
          double pre = params[b1_off + h];
          const double* row = params.data() + h * feature_dim_;
          for (size_t k = 0; k < feature_dim_; ++k) pre += row[k] * x[k];
          const double act = std::tanh(pre);
          g[w2_off + h] += coef * act;
          const double dpre = coef * params[w2_off + h] * (1.0 - act * act);
          double* grow = g.data() + h * feature_dim_;
          for (size_t k = 0; k < feature_dim_; ++k) grow[k] += dpre * x[k];
          g[b1_off + h] += dpre;
        }
        g[b2_off] += coef;
        return;
      }
    }
  }

  ModelSpec spec_;
  size_t feature_dim_;
};

// Minibatch index sampler: `size` distinct indices from the user's
// partition, or the whole partition when it is smaller.
inline std::vector<size_t> sample_minibatch(const std::vector<size_t>& pool,
                                            size_t size, Rng& rng) {
  if (pool.size() <= size) return pool;
  std::vector<size_t> shuffled = pool;
  for (size_t i = 0; i < size; ++i) {
    const size_t j = i + rng.uniform_below(shuffled.size() - i);
    std::swap(shuffled[i], shuffled[j]);
  }
  shuffled.resize(size);
  return shuffled;
}

}  // namespace basecagg

#endif  // BASECAGG_MODEL_HPP_
