// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace clmn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or dimensions of operands disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered, or a value outside its admissible range.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A required word or name could not be resolved.
class LookupError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace clmn
