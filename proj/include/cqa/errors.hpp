#pragma once

#include <stdexcept>
#include <string>

namespace cqa {

/// Malformed netlist / instance / spec text. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

/// A circuit invariant does not hold; the message names the offending wire or gate.
class StructureError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An enumeration-based operation was asked to scan more free wires than its cap allows.
class CapExceeded : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Eigensolver ran out of iterations; carries the best residual reached.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& msg, double residual)
        : std::runtime_error(msg), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

/// Time integration failed (step underflow, norm drift past the hard bound).
class EvolveError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Campaign rejection sampling exhausted its attempt budget.
class SamplingError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cqa
