#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace kfp {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using SparseMatrixC = Eigen::SparseMatrix<Complex>;
using SparseMatrixR = Eigen::SparseMatrix<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Base class for all errors raised by the library. `module()` names the
/// subsystem that detected the problem so that front ends can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Syntax error in an expression; `offset()` is the byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error("expr-field", what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Reference to a coordinate that does not exist in the declared dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the domain of an elementary function (sqrt(-1), log(0), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A precondition on operator or basis arguments was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace kfp
