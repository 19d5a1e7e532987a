#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace evstudy {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (bad rows, duplicate dates, gaps).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid study configuration; detected before any computation runs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Not enough observations around the event to build the requested windows.
class InsufficientDataError : public Error {
 public:
  InsufficientDataError(const std::string& what, std::size_t missing)
      : Error(what), missing_(missing) {}
  std::size_t missing() const noexcept { return missing_; }

 private:
  std::size_t missing_;
};

// Design matrix without full column rank.
class RankDeficientError : public Error {
 public:
  explicit RankDeficientError(std::string column)
      : Error("design matrix is rank deficient: column '" + column +
              "' is linearly dependent on the preceding columns"),
        column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

}  // namespace evstudy
