#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctm {

/// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed dataset, model or sweep file.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit FormatError(const std::string& what) : std::runtime_error(what), line_(0) {}

  /// 1-based line number, or 0 when the error is not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ctm
