#ifndef OMNIRL_ERRORS_H_
#define OMNIRL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace omnirl {

// Each error kind maps onto one CLI exit code (see tools/omnirl_main.cc).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Bad arguments to a library call: out-of-range token ids, shape mismatches.
class InputError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "input"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

// Unreadable or version-mismatched files.
class FormatError : public IoError {
 public:
  using IoError::IoError;
  const char* kind() const noexcept override { return "format"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

// Remote judge transport or protocol failure.
class JudgeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "judge"; }
};

}  // namespace omnirl

#endif  // OMNIRL_ERRORS_H_
