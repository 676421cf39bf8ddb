#include "ateml/core/error.hpp"

namespace ateml {

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + message),
      kind_(kind),
      module_(std::move(module)),
      detail_(message) {}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::fit: return "fit_error";
    case ErrorKind::numeric: return "numeric_error";
    case ErrorKind::io: return "io_error";
    case ErrorKind::internal: return "internal_error";
  }
  return "internal_error";
}

}  // namespace ateml
