#pragma once

// Reductions to a short-and-fat, full-row-rank constraint matrix:
//  * dual split for tall A of full column rank,
//  * range finder plus row selection for exactly low-rank A.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/QR>

#include "ipmlab/lp_model.hpp"
#include "ipmlab/rng.hpp"

namespace ipmlab {

enum class ReductionKind { dual_split, low_rank };

template <typename Scalar>
struct ReductionRecord {
  ReductionKind kind = ReductionKind::dual_split;
  std::optional<DenseMatrix<Scalar>> z;
  std::vector<Index> kept_rows;
  Index original_m = 0;
  Index original_n = 0;
};

/// Mapped-back solution of the original LP.
template <typename Scalar>
struct MappedSolution {
  Vector<Scalar> x;
  Vector<Scalar> y;
  Vector<Scalar> s;
};

/// For A (m×n, m > n, rank n): the LP  min (−b, b, 0)ᵀȳ  s.t.  [Aᵀ −Aᵀ I]ȳ = c,
/// ȳ = (y⁺, y⁻, s) ≥ 0, whose solution gives a dual solution of the original.
template <typename Scalar>
std::pair<LinearProgram<Scalar>, ReductionRecord<Scalar>> dual_reformulate(
    const LinearProgram<Scalar>& lp) {
  validate(lp, false);
  const Index m = lp.m(), n = lp.n();
  if (m <= n)
    throw InvalidArgumentError("dual_reformulate expects m > n, got " +
                               detail::shape(m, n));
  const auto svd = thin_svd(lp.a);
  const Scalar ratio =
      svd.sigma_max() > 0 ? svd.sigma_min() / svd.sigma_max() : Scalar(0);
  if (!(ratio > Scalar(kRankTolerance)))
    throw RankDeficientError(
        "A is not of full column rank; use low_rank_reduce",
        static_cast<double>(ratio));

  LinearProgram<Scalar> out;
  out.a = DenseMatrix<Scalar>::Zero(n, 2 * m + n);
  out.a.leftCols(m) = lp.a.transpose();
  out.a.middleCols(m, m) = -lp.a.transpose();
  out.a.rightCols(n) = DenseMatrix<Scalar>::Identity(n, n);
  out.b = lp.c;
  out.c = Vector<Scalar>::Zero(2 * m + n);
  out.c.head(m) = -lp.b;
  out.c.segment(m, m) = lp.b;

  ReductionRecord<Scalar> rec;
  rec.kind = ReductionKind::dual_split;
  rec.original_m = m;
  rec.original_n = n;
  return {std::move(out), std::move(rec)};
}

/// Interior start for a dual-split LP built from a dual-feasible (y, s) and a
/// primal-feasible x > 0 of the original with x∘s = μ1. The split is
/// y⁺ = shift + max(y, 0), y⁻ = shift + max(−y, 0). The reduced dual slack on
/// the y± blocks would be zero, so the cost on those blocks is raised by
/// μ/y± to make the start exactly central. Returns the adjusted LP and start.
template <typename Scalar>
std::pair<LinearProgram<Scalar>, PrimalDualPoint<Scalar>> dual_split_start(
    const LinearProgram<Scalar>& reduced, const ReductionRecord<Scalar>& rec,
    const Vector<Scalar>& x, const Vector<Scalar>& y, const Vector<Scalar>& s,
    Scalar shift) {
  const Index m = rec.original_m, n = rec.original_n;
  if (rec.kind != ReductionKind::dual_split || reduced.n() != 2 * m + n ||
      x.size() != n || s.size() != n || y.size() != m)
    throw DimensionError("dual_split_start: shapes do not match the record");
  if (!(shift > 0)) throw InvalidArgumentError("shift must be positive");
  const Scalar mu = x.dot(s) / Scalar(n);

  PrimalDualPoint<Scalar> pt;
  pt.x.resize(2 * m + n);
  pt.x.head(m) = y.cwiseMax(Scalar(0)).array() + shift;
  pt.x.segment(m, m) = (-y).cwiseMax(Scalar(0)).array() + shift;
  pt.x.tail(n) = s;
  pt.y = -x;
  pt.s.resize(2 * m + n);
  pt.s.head(2 * m) = pt.x.head(2 * m).cwiseInverse() * mu;
  pt.s.tail(n) = x;

  LinearProgram<Scalar> adjusted = reduced;
  adjusted.c.head(2 * m) += pt.s.head(2 * m);
  return {std::move(adjusted), std::move(pt)};
}

/// Recovers the original solution from a solution of the reduced LP:
/// dual split gives y = y⁺ − y⁻, s from the third block and x = −ȳ_dual;
/// low rank keeps x and s and reports the reduced y.
template <typename Scalar>
MappedSolution<Scalar> map_back(const ReductionRecord<Scalar>& rec,
                                const PrimalDualPoint<Scalar>& reduced) {
  MappedSolution<Scalar> out;
  if (rec.kind == ReductionKind::dual_split) {
    const Index m = rec.original_m, n = rec.original_n;
    if (reduced.x.size() != 2 * m + n || reduced.y.size() != n)
      throw DimensionError("map_back: reduced point does not match the record");
    out.y = reduced.x.head(m) - reduced.x.segment(m, m);
    out.s = reduced.x.tail(n);
    out.x = -reduced.y;
  } else {
    out.x = reduced.x;
    out.y = reduced.y;
    out.s = reduced.s;
  }
  return out;
}

/// Orthonormal Z (m × min(m, ell+2)) spanning the range of A·G for a
/// Gaussian test matrix G.
template <typename Scalar>
DenseMatrix<Scalar> randomized_range_finder(const DenseMatrix<Scalar>& a,
                                            Index ell, std::uint64_t seed) {
  if (ell < 1 || ell > std::min(a.rows(), a.cols()))
    throw InvalidArgumentError("ell must lie in [1, min(m, n)]");
  const Index cols = std::min<Index>(a.rows(), ell + 2);
  Rng rng(seed, "range-finder");
  DenseMatrix<Scalar> g(a.cols(), cols);
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < cols; ++j) g(i, j) = static_cast<Scalar>(rng.normal());
  using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const ColMajor y = a * g;
  Eigen::HouseholderQR<ColMajor> qr(y);
  const ColMajor q = qr.householderQ() * ColMajor::Identity(a.rows(), cols);
  return q;
}

/// Indices of linearly independent rows of B found by Gaussian elimination
/// with partial pivoting; pivots at or below 1e-10·max row norm are rejected.
template <typename Scalar>
std::vector<Index> independent_rows(const DenseMatrix<Scalar>& b) {
  DenseMatrix<Scalar> w = b;
  Scalar max_row = 0;
  for (Index i = 0; i < b.rows(); ++i) max_row = std::max(max_row, b.row(i).norm());
  const Scalar thr = Scalar(1e-10) * max_row;
  std::vector<bool> used(static_cast<std::size_t>(b.rows()), false);
  std::vector<Index> kept;
  for (Index j = 0; j < b.cols() && static_cast<Index>(kept.size()) < b.rows(); ++j) {
    Index piv = -1;
    Scalar best = thr;
    for (Index i = 0; i < w.rows(); ++i)
      if (!used[static_cast<std::size_t>(i)] && std::abs(w(i, j)) > best) {
        best = std::abs(w(i, j));
        piv = i;
      }
    if (piv < 0) continue;
    used[static_cast<std::size_t>(piv)] = true;
    kept.push_back(piv);
    for (Index i = 0; i < w.rows(); ++i)
      if (!used[static_cast<std::size_t>(i)])
        w.row(i) -= (w(i, j) / w(piv, j)) * w.row(piv);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// For A of rank exactly k: min cᵀx s.t. (ZᵀA)_K x = (Zᵀb)_K, x ≥ 0, where K
/// selects k independent rows of ZᵀA.
template <typename Scalar>
std::pair<LinearProgram<Scalar>, ReductionRecord<Scalar>> low_rank_reduce(
    const LinearProgram<Scalar>& lp, Index k, std::uint64_t seed) {
  validate(lp, false);
  if (k < 1 || k > std::min(lp.m(), lp.n()))
    throw RankMismatchError("rank k must lie in [1, min(m, n)]", k, -1);
  DenseMatrix<Scalar> z = randomized_range_finder(lp.a, k, seed);
  const DenseMatrix<Scalar> za = z.transpose() * lp.a;
  const Scalar anorm = spectral_norm(lp.a);
  const Scalar resid = spectral_norm(DenseMatrix<Scalar>(lp.a - z * za));
  if (resid > Scalar(1e-8) * anorm)
    throw RankMismatchError("A has rank above k: range residual " +
                                std::to_string(static_cast<double>(resid / anorm)),
                            k, -1);
  const std::vector<Index> kept = independent_rows(za);
  if (static_cast<Index>(kept.size()) != k)
    throw RankMismatchError("found " + std::to_string(kept.size()) +
                                " independent rows, expected " + std::to_string(k),
                            k, static_cast<Index>(kept.size()));
  const Vector<Scalar> zb = z.transpose() * lp.b;

  LinearProgram<Scalar> out;
  out.a.resize(k, lp.n());
  out.b.resize(k);
  for (Index i = 0; i < k; ++i) {
    out.a.row(i) = za.row(kept[static_cast<std::size_t>(i)]);
    out.b(i) = zb(kept[static_cast<std::size_t>(i)]);
  }
  out.c = lp.c;

  ReductionRecord<Scalar> rec;
  rec.kind = ReductionKind::low_rank;
  rec.z = std::move(z);
  rec.kept_rows = kept;
  rec.original_m = lp.m();
  rec.original_n = lp.n();
  return {std::move(out), std::move(rec)};
}

/// Start for a low-rank reduced LP from a start of the original: x and s are
/// kept, y solves the least-squares problem  min ‖Ãᵀỹ − (c − s)‖.
template <typename Scalar>
PrimalDualPoint<Scalar> low_rank_start(const LinearProgram<Scalar>& reduced,
                                       const PrimalDualPoint<Scalar>& original) {
  using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  PrimalDualPoint<Scalar> pt;
  pt.x = original.x;
  pt.s = original.s;
  const ColMajor at = reduced.a.transpose();
  pt.y = at.colPivHouseholderQr().solve(reduced.c - original.s);
  return pt;
}

}  // namespace ipmlab
