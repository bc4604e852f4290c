#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace distinctbo {

// Invalid user-supplied configuration (CLI exit code 2, HTTP 400).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data. `line` is 1-based, 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Operation not allowed in the current session state.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ranking response refers to a query that is not pending.
class StaleQueryError : public StateError {
 public:
  using StateError::StateError;
};

// Ranking response is not a valid permutation of the candidates.
class InvalidRankingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure (factorization, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace distinctbo
