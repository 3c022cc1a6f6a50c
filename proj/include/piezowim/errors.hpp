// Copyright 2026 The piezowim Authors
//
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

#pragma once

#include <stdexcept>
#include <string>

namespace piezowim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Boundary conditions leave the stiffness matrix singular.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Eigen-solve did not converge or failed its residual check.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Time integration produced non-physical energy growth.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Inverse problem target not bracketed by the search interval.
class NotBracketedError : public Error {
 public:
  using Error::Error;
};

/// Shunt voltage too small to resolve the pavement resistance.
class UnresolvableReadoutError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Output file could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace detail
}  // namespace piezowim
