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

#ifndef BASECAGG_ERRORS_HPP_
#define BASECAGG_ERRORS_HPP_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace basecagg {

// Base class for every error this library raises on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroInverse : Error {
  ZeroInverse() : Error("field inverse of zero") {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct DuplicateIndex : Error {
  explicit DuplicateIndex(uint64_t j)
      : Error("duplicate evaluation index " + std::to_string(j)) {}
};

// Signed value does not fit the two's-complement window of the field.
// `index` is the offending coordinate when the check was vector-valued.
struct OutOfRange : Error {
  OutOfRange(int64_t value, size_t index)
      : Error("value " + std::to_string(value) + " at coordinate " +
              std::to_string(index) + " exceeds the field's signed range"),
        value(value),
        index(index) {}
  int64_t value;
  size_t index;
};

struct NonFinite : Error {
  NonFinite() : Error("non-finite input to quantizer") {}
};

struct ZeroWeightSum : Error {
  ZeroWeightSum() : Error("aggregate weight sum is zero") {}
};

struct MissingShare : Error {
  MissingShare(uint64_t owner, uint64_t round)
      : Error("no stored share for owner " + std::to_string(owner) +
              " round " + std::to_string(round)),
        owner(owner),
        round(round) {}
  uint64_t owner;
  uint64_t round;
};

struct InsufficientResponses : Error {
  InsufficientResponses(size_t got, size_t need)
      : Error("recovery needs " + std::to_string(need) + " responses, got " +
              std::to_string(got)),
        got(got),
        need(need) {}
  size_t got;
  size_t need;
};

struct InvalidParams : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace basecagg

#endif  // BASECAGG_ERRORS_HPP_
