#pragma once

#include <stdexcept>
#include <string>

namespace stateid {

/// Malformed or out-of-contract input: bad dimensions, non-Hermitian data,
/// eps outside [0, 1/2), unparsable files. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solve did not reach an Optimal status. Carries the status name.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::string status)
      : std::runtime_error(what + " (status " + status + ")"), status_(std::move(status)) {}
  const std::string& status() const noexcept { return status_; }

 private:
  std::string status_;
};

}  // namespace stateid
