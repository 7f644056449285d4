#pragma once

#include <stdexcept>
#include <string>

namespace lsr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// A mode or option combination that cannot work (e.g. IDF scoring without a table).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Malformed input data: bad JSON lines, bad TREC lines, corrupt binary payloads.
class FormatError : public Error {
  public:
    using Error::Error;
};

class BadMagic : public FormatError {
  public:
    using FormatError::FormatError;
};

class UnsupportedVersion : public FormatError {
  public:
    using FormatError::FormatError;
};

class TruncatedFile : public FormatError {
  public:
    using FormatError::FormatError;
};

class ChecksumMismatch : public FormatError {
  public:
    using FormatError::FormatError;
};

/// A loss or gradient evaluation produced NaN or infinity.
class NumericError : public Error {
  public:
    using Error::Error;
};

}  // namespace lsr
