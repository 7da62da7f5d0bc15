#pragma once

// Standard-form LP  min cᵀx  s.t.  Ax = b, x ≥ 0  and its primal-dual iterates.

#include <string>

#include "ipmlab/linalg.hpp"

namespace ipmlab {

template <typename Scalar>
struct LinearProgram {
  DenseMatrix<Scalar> a;
  Vector<Scalar> b;
  Vector<Scalar> c;

  Index m() const { return a.rows(); }
  Index n() const { return a.cols(); }
};

template <typename Scalar>
struct PrimalDualPoint {
  Vector<Scalar> x;
  Vector<Scalar> y;
  Vector<Scalar> s;

  Index n() const { return x.size(); }
};

template <typename Scalar>
struct Residuals {
  Scalar primal_infeasibility = 0;  // ‖Ax − b‖
  Scalar dual_infeasibility = 0;    // ‖Aᵀy + s − c‖
  Scalar duality_measure = 0;       // μ
};

template <typename Scalar>
struct NeighborhoodResult {
  bool member = false;
  Scalar distance = 0;  // ‖x∘s − μ1‖
};

/// Relative threshold on σ_m/σ₁ below which A counts as rank deficient.
inline constexpr double kRankTolerance = 1e-8;

/// Shape and finiteness checks. With check_rank, also requires m ≤ n and
/// σ_m(A)/σ₁(A) > 1e-8, reporting RankDeficientError otherwise.
template <typename Scalar>
void validate(const LinearProgram<Scalar>& lp, bool check_rank = true) {
  if (lp.b.size() != lp.m())
    throw DimensionError("b has length " + std::to_string(lp.b.size()) +
                         ", expected m = " + std::to_string(lp.m()));
  if (lp.c.size() != lp.n())
    throw DimensionError("c has length " + std::to_string(lp.c.size()) +
                         ", expected n = " + std::to_string(lp.n()));
  if (!lp.a.allFinite() || !lp.b.allFinite() || !lp.c.allFinite())
    throw NumericalError("LP data contains non-finite entries");
  if (!check_rank) return;
  if (lp.m() > lp.n())
    throw RankDeficientError(
        "A has more rows than columns; use the dual reduction", 0.0);
  const auto svd = thin_svd(lp.a);
  const Scalar ratio =
      svd.sigma_max() > 0 ? svd.sigma_min() / svd.sigma_max() : Scalar(0);
  if (!(ratio > Scalar(kRankTolerance)))
    throw RankDeficientError(
        "A is not of full row rank (sigma_min/sigma_max = " +
            std::to_string(static_cast<double>(ratio)) +
            "); use the low-rank reduction",
        static_cast<double>(ratio));
}

template <typename Scalar>
void check_dimensions(const LinearProgram<Scalar>& lp,
                      const PrimalDualPoint<Scalar>& p) {
  if (p.x.size() != lp.n() || p.s.size() != lp.n() || p.y.size() != lp.m())
    throw DimensionError("point (x " + std::to_string(p.x.size()) + ", y " +
                         std::to_string(p.y.size()) + ", s " +
                         std::to_string(p.s.size()) + ") does not match LP " +
                         detail::shape(lp.m(), lp.n()));
}

/// Index of the first x_i ≤ 0 or s_i ≤ 0 (or non-finite entry), −1 if none.
template <typename Scalar>
Index first_non_interior(const PrimalDualPoint<Scalar>& p) {
  for (Index i = 0; i < p.x.size(); ++i)
    if (!(p.x(i) > 0) || !(p.s(i) > 0) || !std::isfinite(p.x(i)) ||
        !std::isfinite(p.s(i)))
      return i;
  return -1;
}

template <typename Scalar>
void require_interior(const PrimalDualPoint<Scalar>& p) {
  const Index i = first_non_interior(p);
  if (i >= 0)
    throw LeftInteriorError("left_interior: x_" + std::to_string(i) + " = " +
                                std::to_string(static_cast<double>(p.x(i))) +
                                ", s_" + std::to_string(i) + " = " +
                                std::to_string(static_cast<double>(p.s(i))),
                            i);
}

template <typename Scalar>
Scalar duality_measure(const PrimalDualPoint<Scalar>& p) {
  return p.x.dot(p.s) / static_cast<Scalar>(p.x.size());
}

template <typename Scalar>
NeighborhoodResult<Scalar> neighborhood_check(const PrimalDualPoint<Scalar>& p,
                                              Scalar theta) {
  const Scalar mu = duality_measure(p);
  NeighborhoodResult<Scalar> out;
  out.distance = (hadamard(p.x, p.s).array() - mu).matrix().norm();
  out.member = out.distance <= theta * mu && first_non_interior(p) < 0;
  return out;
}

template <typename Scalar>
Residuals<Scalar> residuals(const LinearProgram<Scalar>& lp,
                            const PrimalDualPoint<Scalar>& p) {
  check_dimensions(lp, p);
  Residuals<Scalar> r;
  r.primal_infeasibility = (lp.a * p.x - lp.b).norm();
  r.dual_infeasibility = (lp.a.transpose() * p.y + p.s - lp.c).norm();
  r.duality_measure = duality_measure(p);
  return r;
}

}  // namespace ipmlab
