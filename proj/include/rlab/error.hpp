#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

enum class ErrorKind {
  dimension,
  reuse_violation,
  numeric,
  invalid_strategy,
  config,
  missing_artifact,
  budget_exceeded,
  training_divergence,
  domain,
  search_safeguard,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` tells callers (the CLI in
/// particular) which failure class occurred.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace rlab
