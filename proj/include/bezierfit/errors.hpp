#pragma once

#include <stdexcept>
#include <string>

namespace bezierfit {

/// Normal equations are not (numerically) positive definite.
class SingularDesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stratified sample lacks a skeleton level the fit needs.
class InsufficientStrataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver stopped at max_iter above the gradient tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double gradient_norm)
      : std::runtime_error(what), gradient_norm_(gradient_norm) {}

  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  double gradient_norm_;
};

/// Experiment or command-line configuration is invalid.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed CSV / JSON input. Row and column are 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    if (row == 0 && column == 0) return what;
    return what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")";
  }
  std::size_t row_;
  std::size_t column_;
};

}  // namespace bezierfit
