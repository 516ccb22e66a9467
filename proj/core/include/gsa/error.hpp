// Copyright 2026 The gsa-shapley Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsa {

// Base of every error raised by the library. The CLI maps ConfigError to exit
// code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A covariance/correlation matrix or marginal spec violates its invariants,
// or a conditioning block cannot be factorized.
class DistributionInvalid : public Error {
 public:
  using Error::Error;
};

// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A model produced a non-finite value.
class ModelEvaluationError : public Error {
 public:
  ModelEvaluationError(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// The external simulator failed: non-zero exit, malformed or missing output.
class ExternalModelError : public Error {
 public:
  ExternalModelError(const std::string& what, std::string captured_stderr)
      : Error(what), stderr_(std::move(captured_stderr)) {}
  const std::string& captured_stderr() const noexcept { return stderr_; }

 private:
  std::string stderr_;
};

// The output variance is zero (or negligible), so normalized indices are
// undefined.
class DegenerateOutput : public Error {
 public:
  using Error::Error;
};

// A requested size (d!, permutation count, subset enumeration) is out of range.
class SizeError : public Error {
 public:
  using Error::Error;
};

// The kriging covariance could not be factorized even with the nugget.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

// Every optimizer restart failed during kriging hyperparameter estimation.
class FitFailure : public Error {
 public:
  using Error::Error;
};

// Invalid configuration; the message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsa
