// Copyright 2026 The fairobd Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace fairobd {

// Base of every error raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector/matrix sizes disagree with the instance (N, M, T).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf inputs, exponential overflow, and similar.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain (p < 1, non-positive entropy input).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Frame size R does not divide the horizon.
class FrameSizeError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class EpisodeExhaustedError : public Error {
 public:
  using Error::Error;
};

// Configuration files and flags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Trace files: schema violations and misaligned series.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace fairobd
