/* Copyright 2026 The attnshare Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace attnshare {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand extents do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value (window width, layer count, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Softmax mask with a row that allows nothing.
class InvalidMaskError : public Error {
 public:
  using Error::Error;
};

// A NaN or Inf appeared in the result of a public operation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Reuse requested but nothing has been stored for that slot.
class CacheMissError : public Error {
 public:
  using Error::Error;
};

// Reuse requested against a value from the wrong step.
class OrderingError : public Error {
 public:
  using Error::Error;
};

// Compression plan is infeasible or inconsistent with the model config.
class PlanError : public Error {
 public:
  using Error::Error;
};

// Cosine similarity of a zero-norm tensor.
class UndefinedSimilarityError : public Error {
 public:
  using Error::Error;
};

}  // namespace attnshare
