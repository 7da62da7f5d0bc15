#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ipmlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numerical kernel failed (non-convergence, non-finite values, ...).
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// xᵀMx was meaningfully negative.
class NotPositiveDefiniteError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Cholesky factorization broke down at `pivot`.
class FactorizationError : public NumericalError {
 public:
  FactorizationError(const std::string& what, std::ptrdiff_t pivot)
      : NumericalError(what), pivot_(pivot) {}
  std::ptrdiff_t pivot() const { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

/// A proposed iterate has x_i <= 0 or s_i <= 0.
class LeftInteriorError : public NumericalError {
 public:
  LeftInteriorError(const std::string& what, std::ptrdiff_t index)
      : NumericalError(what), index_(index) {}
  std::ptrdiff_t index() const { return index_; }

 private:
  std::ptrdiff_t index_;
};

/// Constraint matrix is not of full row rank.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, double ratio)
      : Error(what), ratio_(ratio) {}
  /// σ_min / σ_max observed.
  double ratio() const { return ratio_; }

 private:
  double ratio_;
};

/// The requested sketch has more columns than the matrix has rows.
class SketchTooWideError : public Error {
 public:
  SketchTooWideError(const std::string& what, std::size_t cols, std::size_t n)
      : Error(what), cols_(cols), n_(n) {}
  std::size_t requested_cols() const { return cols_; }
  std::size_t n() const { return n_; }

 private:
  std::size_t cols_;
  std::size_t n_;
};

/// An iterative solver hit its cap before reaching the target.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : NumericalError(what, history.empty() ? 0.0 : history.back()),
        history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// (Δy, v) handed to the corrected step do not satisfy the modified system.
class InconsistentPairError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Driver start point is infeasible or outside N₂(0.25).
class InvalidStartError : public Error {
 public:
  using Error::Error;
};

/// Reduction found a different rank than the one requested.
class RankMismatchError : public Error {
 public:
  RankMismatchError(const std::string& what, std::ptrdiff_t expected,
                    std::ptrdiff_t found)
      : Error(what), expected_(expected), found_(found) {}
  std::ptrdiff_t expected() const { return expected_; }
  std::ptrdiff_t found() const { return found_; }

 private:
  std::ptrdiff_t expected_;
  std::ptrdiff_t found_;
};

/// Parameter outside its documented range.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace ipmlab
