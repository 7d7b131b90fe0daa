/*
 * Copyright 2026 The offset-detect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace offset {

/// Root of every error raised by the library. Callers that only need to
/// distinguish "bad input" from "numeric blow-up" can catch the two
/// intermediate classes below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration or data (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IndexError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class MissingLabelsError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InsufficientDataError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnsupportedError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class EmptyClassError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Poison budget outside the attacker model (more than half the data).
class ThreatModelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Harness misuse, e.g. asking for detection metrics without ground truth.
class HarnessError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// File system or serialization failure (CLI exit code 3).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values during optimization (CLI exit code 4).
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t layer)
      : Error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}
  explicit NumericError(const std::string& what) : Error(what) {}

  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_ = 0;
};

}  // namespace offset
