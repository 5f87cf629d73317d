// Copyright 2026 The tgt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace tgt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up (row/column/length mismatch).
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A parameter violates its documented range.
class ParameterError : public Error {
  public:
    using Error::Error;
};

/// Malformed matrix/vector file or payload.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// An exhaustive search would exceed its configured work budget.
class BudgetError : public Error {
  public:
    using Error::Error;
};

/// A randomized construction failed verification on every attempt.
class ConstructionError : public Error {
  public:
    using Error::Error;
};

}  // namespace tgt
