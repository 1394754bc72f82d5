#pragma once

#include <stdexcept>
#include <string>

namespace rmtldp {

/// Input outside an operation's domain (bad arguments, invalid measures).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to converge or to bracket a root.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation refused because the model is degenerate (rate function is 0/inf).
class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmtldp
