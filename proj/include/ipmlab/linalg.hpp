#pragma once

// Dense primitives shared by the rest of the library. Everything is templated
// on the scalar type and accepts any Eigen expression as input.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SVD>

#include "ipmlab/errors.hpp"

namespace ipmlab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Row-major dense storage used for A, W-products and factors.
template <typename Scalar>
using DenseMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

/// Thin SVD M = U diag(σ) Vᵀ with r = min(rows, cols) singular triplets.
template <typename Scalar>
struct ThinSvd {
  DenseMatrix<Scalar> u;   // rows × r, orthonormal columns
  Vector<Scalar> sigma;    // r values, nonincreasing
  DenseMatrix<Scalar> vt;  // r × cols, orthonormal rows

  Index rows() const { return u.rows(); }
  Index cols() const { return vt.cols(); }
  Index size() const { return sigma.size(); }

  Scalar sigma_max() const { return sigma.size() ? sigma(0) : Scalar(0); }
  Scalar sigma_min() const {
    return sigma.size() ? sigma(sigma.size() - 1) : Scalar(0);
  }

  /// Number of singular values above rel_tol·σ₁.
  Index rank(Scalar rel_tol) const {
    Index r = 0;
    const Scalar cutoff = rel_tol * sigma_max();
    for (Index i = 0; i < sigma.size(); ++i)
      if (sigma(i) > cutoff) ++r;
    return r;
  }
};

namespace detail {

inline std::string shape(Index r, Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

}  // namespace detail

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().allFinite();
}

/// Element-wise product u∘v.
template <typename DerivedU, typename DerivedV>
Vector<typename DerivedU::Scalar> hadamard(const Eigen::MatrixBase<DerivedU>& u,
                                           const Eigen::MatrixBase<DerivedV>& v) {
  if (u.size() != v.size())
    throw DimensionError("hadamard: length mismatch " +
                         std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  return u.cwiseProduct(v);
}

/// √(xᵀMx) for symmetric positive definite M. Values of xᵀMx in
/// [-1e-12, 0) are treated as rounding noise and clamp to zero.
template <typename DerivedX, typename DerivedM>
typename DerivedX::Scalar energy_norm(const Eigen::MatrixBase<DerivedX>& x,
                                      const Eigen::MatrixBase<DerivedM>& m) {
  using Scalar = typename DerivedX::Scalar;
  if (m.rows() != m.cols() || m.cols() != x.size())
    throw DimensionError("energy_norm: matrix " +
                         detail::shape(m.rows(), m.cols()) +
                         " does not match vector of length " +
                         std::to_string(x.size()));
  const Scalar q = x.dot(m * x);
  if (q < Scalar(-1e-12))
    throw NotPositiveDefiniteError("energy_norm: xᵀMx is negative",
                                   static_cast<double>(q));
  return q <= Scalar(0) ? Scalar(0) : std::sqrt(q);
}

/// Thin SVD. Backed by Eigen's divide-and-conquer SVD, with a reconstruction
/// check on the result.
template <typename Derived>
ThinSvd<typename Derived::Scalar> thin_svd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!m.allFinite()) throw NumericalError("thin_svd: non-finite input");

  ThinSvd<Scalar> out;
  const Index r = std::min(m.rows(), m.cols());
  if (r == 0) {
    out.u.resize(m.rows(), 0);
    out.vt.resize(0, m.cols());
    return out;
  }

  const ColMajor work = m;
  Eigen::BDCSVD<ColMajor> svd(work, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("thin_svd: SVD kernel did not converge");

  out.u = svd.matrixU();
  out.sigma = svd.singularValues();
  out.vt = svd.matrixV().transpose();

  const Scalar scale = std::max(out.sigma_max(), Scalar(1e-300));
  const Scalar err =
      (work - out.u * out.sigma.asDiagonal() * out.vt).norm() / scale;
  if (!(err <= Scalar(1e-8)))
    throw NumericalError("thin_svd: reconstruction error too large",
                         static_cast<double>(err));
  return out;
}

/// Spectral norm ‖M‖₂.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.size() == 0) return Scalar(0);
  const ColMajor work = m;
  Eigen::JacobiSVD<ColMajor> svd(work);
  return svd.singularValues()(0);
}

/// Cholesky factorization of a symmetric positive definite matrix. Only the
/// lower triangle is read.
template <typename Scalar>
class SpdFactor {
 public:
  template <typename Derived>
  explicit SpdFactor(const Eigen::MatrixBase<Derived>& m) : matrix_(m) {
    if (m.rows() != m.cols())
      throw DimensionError("solve_spd: matrix is " +
                           detail::shape(m.rows(), m.cols()));
    if (!matrix_.allFinite())
      throw FactorizationError("solve_spd: non-finite matrix", -1);
    llt_.compute(matrix_);
    if (llt_.info() != Eigen::Success) {
      const std::ptrdiff_t pivot = failing_pivot();
      throw FactorizationError(
          "solve_spd: Cholesky breakdown at pivot " + std::to_string(pivot),
          pivot);
    }
  }

  Index size() const { return matrix_.rows(); }

  /// Solves M·x = rhs with up to two steps of iterative refinement.
  template <typename Derived>
  Vector<Scalar> solve(const Eigen::MatrixBase<Derived>& rhs) const {
    if (rhs.size() != matrix_.rows())
      throw DimensionError("solve_spd: rhs length " +
                           std::to_string(rhs.size()) + " for matrix " +
                           detail::shape(matrix_.rows(), matrix_.cols()));
    Vector<Scalar> x = llt_.solve(rhs);
    const Scalar tol = Scalar(1e-14) * (Scalar(1) + rhs.norm());
    for (int pass = 0; pass < 2; ++pass) {
      Vector<Scalar> r = rhs - lower_matvec(x);
      if (r.norm() <= tol) break;
      x += llt_.solve(r);
    }
    return x;
  }

  /// √(zᵀ M⁻¹ z), i.e. the energy norm of M⁻¹z under M.
  template <typename Derived>
  Scalar inverse_energy_norm(const Eigen::MatrixBase<Derived>& z) const {
    const Vector<Scalar> w = llt_.matrixL().solve(z);
    return w.norm();
  }

  const DenseMatrix<Scalar>& matrix() const { return matrix_; }

 private:
  Vector<Scalar> lower_matvec(const Vector<Scalar>& x) const {
    return matrix_.template selfadjointView<Eigen::Lower>() * x;
  }

  // Replays the unblocked factorization to find the first non-positive pivot.
  std::ptrdiff_t failing_pivot() const {
    const Index n = matrix_.rows();
    DenseMatrix<Scalar> l = DenseMatrix<Scalar>::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
      Scalar d = matrix_(j, j) - l.row(j).head(j).squaredNorm();
      if (!(d > Scalar(0))) return static_cast<std::ptrdiff_t>(j);
      l(j, j) = std::sqrt(d);
      for (Index i = j + 1; i < n; ++i)
        l(i, j) = (matrix_(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) /
                  l(j, j);
    }
    return static_cast<std::ptrdiff_t>(n - 1);
  }

  DenseMatrix<Scalar> matrix_;
  Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt_;
};

/// One-shot SPD solve.
template <typename DerivedM, typename DerivedB>
Vector<typename DerivedM::Scalar> solve_spd(const Eigen::MatrixBase<DerivedM>& m,
                                            const Eigen::MatrixBase<DerivedB>& rhs) {
  return SpdFactor<typename DerivedM::Scalar>(m).solve(rhs);
}

/// V Σ⁺ Uᵀ rhs, dropping singular values at or below rank_tol·σ₁.
template <typename Scalar, typename Derived>
Vector<Scalar> pinv_apply(const ThinSvd<Scalar>& svd,
                          const Eigen::MatrixBase<Derived>& rhs,
                          Scalar rank_tol = Scalar(1e-12)) {
  if (rhs.size() != svd.rows())
    throw DimensionError("pinv_apply: rhs length " +
                         std::to_string(rhs.size()) + " for SVD with " +
                         std::to_string(svd.rows()) + " rows");
  Vector<Scalar> coeff = svd.u.transpose() * rhs;
  const Scalar cutoff = rank_tol * svd.sigma_max();
  for (Index i = 0; i < coeff.size(); ++i)
    coeff(i) = svd.sigma(i) > cutoff ? coeff(i) / svd.sigma(i) : Scalar(0);
  return svd.vt.transpose() * coeff;
}

}  // namespace ipmlab
