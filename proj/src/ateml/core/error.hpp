#pragma once

#include <stdexcept>
#include <string>

namespace ateml {

enum class ErrorKind { invalid_argument, fit, numeric, io, internal };

// Every error raised by the library carries the module it came from so
// callers (the CLI in particular) can report provenance.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string detail_;
};

class InvalidArgument : public Error {
 public:
  InvalidArgument(std::string module, const std::string& message)
      : Error(ErrorKind::invalid_argument, std::move(module), message) {}
};

class FitError : public Error {
 public:
  FitError(std::string module, const std::string& message)
      : Error(ErrorKind::fit, std::move(module), message) {}
};

class NumericError : public Error {
 public:
  NumericError(std::string module, const std::string& message)
      : Error(ErrorKind::numeric, std::move(module), message) {}
};

class IoError : public Error {
 public:
  IoError(std::string module, const std::string& message)
      : Error(ErrorKind::io, std::move(module), message) {}
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace ateml
