// Copyright 2026 The pronlearn Authors.
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

#ifndef PRONLEARN_ERRORS_HPP_
#define PRONLEARN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pronlearn {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition or argument violation (exit code 2).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Two phoneme sequences or tables that cannot be compared.
class PhonesetMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// File or storage failure (exit code 3).
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, failed factorizations, lost positive definiteness
// (exit code 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericError {
 public:
  using NumericError::NumericError;
};

// No threshold reaches the requested precision (exit code 5).
class CalibrationInfeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace pronlearn

#endif  // PRONLEARN_ERRORS_HPP_
