#pragma once

#include <stdexcept>
#include <string>

namespace hftp {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input and interchange problems.
class FormatError : public Error {
 public:
  using Error::Error;
};
class CorruptionError : public Error {
 public:
  using Error::Error;
};
class ValidationError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};

// Caller-side contract violations.
class BoundsError : public Error {
 public:
  using Error::Error;
};
class FrequencyGridError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class IncompleteDesignError : public Error {
 public:
  using Error::Error;
};

/// Statistical degeneracy: zero variance populations, undefined tests,
/// empty marginals.
class DegenerateError : public Error {
 public:
  using Error::Error;
};
class UndefinedTestError : public DegenerateError {
 public:
  using DegenerateError::DegenerateError;
};

}  // namespace hftp
