// tinyasr/common.hpp

// Copyright 2026  tinyasr contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TINYASR_COMMON_HPP_
#define TINYASR_COMMON_HPP_

#include <limits>
#include <stdexcept>
#include <string>

namespace tinyasr {

// Process exit codes used by the CLI.
enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,    // bad invocation or bad configuration
  kExitData = 2,     // input data failed validation
  kExitNumeric = 3,  // numeric failure (NaN/Inf) during computation
};

// Caller violated an API contract (bad argument, mismatched shapes, ...).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// A configuration file could not be parsed or holds invalid settings.
class ConfigError : public UsageError {
 public:
  explicit ConfigError(const std::string& msg) : UsageError(msg) {}
};

// Input data (audio, alphabet, lexicon, manifest, ...) failed validation.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation produced NaN/Inf where a finite value is required.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace tinyasr

#endif  // TINYASR_COMMON_HPP_
