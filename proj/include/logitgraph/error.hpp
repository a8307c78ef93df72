#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace logitgraph {

/// Short %g rendering for error messages.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, out-of-range indices,
/// nonpositive parameters, violated representation invariants.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Raised while reading a file format. `path()` names the offending JSON
/// location (e.g. "payoffs[0]") and prefixes the message, so `what` reads as
/// a predicate: ParseError("payoffs[0]", "length 3 ≠ 4").
class ParseError : public InvalidInput {
 public:
  ParseError(std::string path, const std::string& what)
      : InvalidInput(path.empty() ? what : path + " " + what),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A point handed to a graph map does not satisfy its equilibrium equation.
class NotOnGraph : public InvalidInput {
 public:
  NotOnGraph(const std::string& what, double residual)
      : InvalidInput(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An iterative method stopped before reaching its tolerance. Carries the
/// best iterate seen (flattened) and its residual.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> best_iterate,
                     double residual)
      : Error(what), best_(std::move(best_iterate)), residual_(residual) {}

  const std::vector<double>& best_iterate() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> best_;
  double residual_;
};

/// A report invariant that must hold by construction was observed to fail.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace logitgraph
