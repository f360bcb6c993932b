#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confeval {

// Bad input data or arguments. The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed record in a line-delimited input file.
class RecordError : public InputError {
 public:
  RecordError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Operational failure (network, filesystem, remote service). Exit code 3.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace confeval
