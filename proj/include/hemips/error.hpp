#pragma once

#include <stdexcept>
#include <string>

namespace hemips {

/// Base of all library errors. `stage()` names the pipeline step that failed.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Bad caller input: sizes, ranges, malformed files. Maps to CLI exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Solver failures, degenerate geometry, non-convergence. Maps to exit code 1.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IndexError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace hemips
