#pragma once

#include <stdexcept>
#include <string>

namespace srplan {

/// Failure categories. The CLI maps these onto its exit-code contract.
enum class ErrorKind {
  io,                // file missing or unreadable
  format,            // malformed file contents (bad header, truncated data, bad JSON)
  validation,        // well-formed input that breaks a domain invariant
  invalid_argument,  // caller passed parameters outside an operation's domain
  unavailable,       // (model, engine) pair has no latency
  no_formula,        // transformation has no closed-form reduction ratio
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace srplan
