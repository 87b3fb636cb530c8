#include "aogalloc/error.hpp"

namespace aogalloc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::validation: return "validation";
    case ErrorKind::not_enabled: return "not_enabled";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::planning: return "planning";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::version_mismatch: return "version_mismatch";
  }
  return "unknown";
}

}  // namespace aogalloc
