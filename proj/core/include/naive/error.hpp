#pragma once

#include <stdexcept>
#include <string>

namespace naive {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value or bound falls outside its range, or ranges are incompatible.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A divisor's support reaches the excluded neighborhood of zero.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Evidence combination produced a zero normalizer.
class ContradictionError : public Error {
 public:
  using Error::Error;
};

/// A datum has no observation at the requested time.
class MissingDatumError : public Error {
 public:
  using Error::Error;
};

class UnknownVariableError : public Error {
 public:
  using Error::Error;
};

/// The requested time shape is not accepted by the variable or procedure.
class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

class RecursionLimitError : public Error {
 public:
  using Error::Error;
};

/// Malformed argument: bad weights, bad partitions, unparsable text.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace naive
