#pragma once

#include <stdexcept>
#include <string>

namespace aogalloc {

enum class ErrorKind {
  invalid_argument,  // caller broke a precondition
  validation,        // a model, graph or file violates an invariant
  not_enabled,       // action cannot be applied in the current progress state
  not_found,         // unknown id (action, worker, session, joint)
  planning,          // no decomposition / un-costed graph
  parse,             // malformed input text
  io,                // filesystem failure
  version_mismatch,  // versioned schema with an unsupported `v`
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace aogalloc
