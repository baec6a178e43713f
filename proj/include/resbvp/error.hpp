#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace resbvp {

enum class ErrorKind {
  Input,          // malformed problem data, bad arguments
  Parse,          // expression syntax
  Domain,         // expression evaluated outside its domain
  NotResonant,
  KernelTooLarge,
  SingularPhi,
  NotInImage,
  Degenerate,     // e.g. no time index carries a nonzero adjoint weight
  Inapplicable,   // the criterion does not apply to this problem
  NoConvergence,
  BoundarySignViolation,
  BisectionStall,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for errors caused by the caller's input rather than by numerics.
  bool is_input_error() const noexcept {
    return kind_ == ErrorKind::Input || kind_ == ErrorKind::Parse;
  }

 private:
  ErrorKind kind_;
};

/// Syntax error with the byte offset into the source text.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected, const std::string& what)
      : Error(ErrorKind::Parse, what), offset_(offset), expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

/// Evaluation outside the domain of ln, sqrt, division, or a non-finite result.
class DomainError : public Error {
 public:
  DomainError(std::string subexpression, const std::string& what)
      : Error(ErrorKind::Domain, what), subexpression_(std::move(subexpression)) {}

  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

}  // namespace resbvp
