#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixmap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A configuration contains an out-of-range state index.
class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

/// An exact computation would exceed the configured enumeration cap.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

/// Beliefs violate local consistency beyond tolerance.
class ConsistencyError : public Error {
 public:
  ConsistencyError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Beliefs assign zero mass where the model has positive probability.
class StructuralViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed UAI/query/evidence token stream.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t token_index)
      : Error(what + " (token " + std::to_string(token_index) + ")"),
        token_index_(token_index) {}
  std::size_t token_index() const { return token_index_; }

 private:
  std::size_t token_index_;
};

/// Well-formed tokens that describe an inconsistent model (e.g. table size mismatch).
class StructuralError : public Error {
 public:
  using Error::Error;
};

}  // namespace mixmap
