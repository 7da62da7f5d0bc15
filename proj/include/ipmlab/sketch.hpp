#pragma once

// Sparse oblivious sketch W (n × w): each row holds s nonzeros ±1/√s in
// distinct, uniformly sampled columns. W is kept as index/sign lists.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ipmlab/linalg.hpp"
#include "ipmlab/rng.hpp"

namespace ipmlab {

template <typename Scalar>
struct SketchMatrix {
  Index n_rows = 0;
  Index n_cols = 0;
  Index per_row = 0;  // s
  Scalar scale = 0;
  std::uint64_t seed = 0;
  bool identity = false;
  std::vector<Index> cols;         // n_rows·per_row column indices
  std::vector<std::int8_t> signs;  // matching ±1

  Index col(Index row, Index k) const { return cols[row * per_row + k]; }
  Scalar value(Index row, Index k) const {
    return signs[row * per_row + k] > 0 ? scale : -scale;
  }
};

struct SketchSize {
  Index w = 0;
  Index s = 0;
};

struct SketchOptions {
  Index cols_override = 0;  // 0 means use the formula
  double c_w = 1.0;
  double c_s = 1.0;
};

/// w = ceil(c_w·(m/ζ²)·ln(m/η)), s = ceil(c_s·(1/ζ)·ln(m/η)), s clamped to w.
inline SketchSize sketch_size(Index m, double zeta, double eta,
                              const SketchOptions& opt = {}) {
  if (!(zeta > 0 && zeta < 1))
    throw InvalidArgumentError("zeta must lie in (0, 1)");
  if (!(eta > 0 && eta < 1)) throw InvalidArgumentError("eta must lie in (0, 1)");
  if (m < 1) throw InvalidArgumentError("sketch needs m >= 1");
  const double lg = std::max(std::log(static_cast<double>(m) / eta), 1.0);
  SketchSize out;
  out.w = opt.cols_override > 0
              ? opt.cols_override
              : static_cast<Index>(
                    std::ceil(opt.c_w * (static_cast<double>(m) / (zeta * zeta)) * lg));
  out.s = static_cast<Index>(std::ceil(opt.c_s * lg / zeta));
  out.s = std::clamp<Index>(out.s, 1, out.w);
  return out;
}

template <typename Scalar = double>
SketchMatrix<Scalar> identity_sketch(Index n) {
  SketchMatrix<Scalar> w;
  w.n_rows = w.n_cols = n;
  w.per_row = 1;
  w.scale = 1;
  w.identity = true;
  w.cols.resize(static_cast<std::size_t>(n));
  w.signs.assign(static_cast<std::size_t>(n), 1);
  for (Index i = 0; i < n; ++i) w.cols[static_cast<std::size_t>(i)] = i;
  return w;
}

/// Draws W. Throws SketchTooWideError when w > n; callers fall back to
/// identity_sketch(n).
template <typename Scalar = double>
SketchMatrix<Scalar> build_sketch(Index n, Index m, double zeta, double eta,
                                  std::uint64_t seed,
                                  const SketchOptions& opt = {}) {
  const SketchSize sz = sketch_size(m, zeta, eta, opt);
  if (sz.w > n)
    throw SketchTooWideError("sketch needs " + std::to_string(sz.w) +
                                 " columns but n = " + std::to_string(n),
                             static_cast<std::size_t>(sz.w),
                             static_cast<std::size_t>(n));
  SketchMatrix<Scalar> w;
  w.n_rows = n;
  w.n_cols = sz.w;
  w.per_row = sz.s;
  w.scale = Scalar(1) / std::sqrt(static_cast<Scalar>(sz.s));
  w.seed = seed;
  w.cols.reserve(static_cast<std::size_t>(n * sz.s));
  w.signs.reserve(static_cast<std::size_t>(n * sz.s));

  Rng rng(seed);
  std::vector<Index> picked;
  for (Index i = 0; i < n; ++i) {
    // Floyd's sampling of s distinct columns out of w.
    picked.clear();
    for (Index j = sz.w - sz.s; j < sz.w; ++j) {
      const Index t = static_cast<Index>(rng.below(static_cast<std::uint64_t>(j + 1)));
      if (std::find(picked.begin(), picked.end(), t) == picked.end())
        picked.push_back(t);
      else
        picked.push_back(j);
    }
    std::sort(picked.begin(), picked.end());
    for (Index c : picked) {
      w.cols.push_back(c);
      w.signs.push_back(rng.coin() ? 1 : -1);
    }
  }
  return w;
}

/// M·W for M with n columns; touches each column of M s times.
template <typename Scalar, typename Derived>
DenseMatrix<Scalar> apply_right(const Eigen::MatrixBase<Derived>& mat,
                                const SketchMatrix<Scalar>& w) {
  if (mat.cols() != w.n_rows)
    throw DimensionError("apply_right: matrix has " +
                         std::to_string(mat.cols()) + " columns, sketch has " +
                         std::to_string(w.n_rows) + " rows");
  if (w.identity) return mat;
  using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  ColMajor src = mat;
  ColMajor out = ColMajor::Zero(mat.rows(), w.n_cols);
  for (Index i = 0; i < w.n_rows; ++i)
    for (Index k = 0; k < w.per_row; ++k)
      out.col(w.col(i, k)) += w.value(i, k) * src.col(i);
  return out;
}

/// W·z for z of length w.
template <typename Scalar, typename Derived>
Vector<Scalar> apply(const SketchMatrix<Scalar>& w,
                     const Eigen::MatrixBase<Derived>& z) {
  if (z.size() != w.n_cols)
    throw DimensionError("apply: vector length " + std::to_string(z.size()) +
                         ", sketch has " + std::to_string(w.n_cols) + " columns");
  Vector<Scalar> out = Vector<Scalar>::Zero(w.n_rows);
  for (Index i = 0; i < w.n_rows; ++i)
    for (Index k = 0; k < w.per_row; ++k) out(i) += w.value(i, k) * z(w.col(i, k));
  return out;
}

/// Wᵀ·a for a of length n.
template <typename Scalar, typename Derived>
Vector<Scalar> apply_transpose(const SketchMatrix<Scalar>& w,
                               const Eigen::MatrixBase<Derived>& a) {
  if (a.size() != w.n_rows)
    throw DimensionError("apply_transpose: vector length " +
                         std::to_string(a.size()) + ", sketch has " +
                         std::to_string(w.n_rows) + " rows");
  Vector<Scalar> out = Vector<Scalar>::Zero(w.n_cols);
  for (Index i = 0; i < w.n_rows; ++i)
    for (Index k = 0; k < w.per_row; ++k) out(w.col(i, k)) += w.value(i, k) * a(i);
  return out;
}

/// ‖VWWᵀVᵀ − I_m‖₂ where Vᵀ holds the right singular vectors of AD (m × n).
template <typename Scalar, typename Derived>
Scalar embedding_check(const SketchMatrix<Scalar>& w,
                       const Eigen::MatrixBase<Derived>& ad) {
  const auto svd = thin_svd(ad);
  const Index m = ad.rows();
  if (svd.size() < m || svd.rank(Scalar(1e-12)) < m)
    throw RankDeficientError(
        "embedding_check: AD is not of full row rank",
        svd.sigma_max() > 0
            ? static_cast<double>(svd.sigma_min() / svd.sigma_max())
            : 0.0);
  const DenseMatrix<Scalar> vw = apply_right(svd.vt, w);
  DenseMatrix<Scalar> g = vw * vw.transpose();
  g -= DenseMatrix<Scalar>::Identity(m, m);
  if (w.identity) return g.cwiseAbs().maxCoeff() <= Scalar(1e-12) ? Scalar(0)
                                                                  : spectral_norm(g);
  return spectral_norm(g);
}

}  // namespace ipmlab
