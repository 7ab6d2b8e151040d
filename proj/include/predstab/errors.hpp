#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace predstab {

// Base class for all library failures. Messages are single-line and
// self-contained so the CLI can forward them verbatim.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed files, contract violations at the API surface.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

// An iterative fit ran out of iterations. Carries the per-iteration step
// sizes so the caller can see how the solve behaved.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, std::vector<double> trace)
      : Error(msg), iteration_trace(std::move(trace)) {}
  std::vector<double> iteration_trace;
};

// Maximum-likelihood logistic fit does not exist (quasi-)separated data.
class SeparationError : public Error {
 public:
  explicit SeparationError(const std::string& msg) : Error(msg) {}
};

}  // namespace predstab
