#pragma once

#include <stdexcept>
#include <string>

namespace decoh {

/// Invalid parameter or precondition violation. `key()` names the offending
/// parameter when one is known (e.g. "ensemble.sigma").
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what, std::string key = {})
      : std::invalid_argument(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Quadrature or fit failed to meet its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace decoh
