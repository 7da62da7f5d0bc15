#pragma once

// Normal equations  AD²Aᵀ Δy = p,  D² = XS⁻¹,  p = −σμAS⁻¹1 + Ax,  and the
// conversion of a dual step into a full (Δx, Δy, Δs).

#include <algorithm>
#include <cmath>
#include <optional>

#include "ipmlab/lp_model.hpp"

namespace ipmlab {

template <typename Scalar>
struct StepDirection {
  Vector<Scalar> dx;
  Vector<Scalar> dy;
  Vector<Scalar> ds;
  Scalar sigma = 0;
  std::optional<Vector<Scalar>> correction;
  Scalar residual_norm = 0;  // ‖AD²Aᵀdy − p‖, with p the uncorrected rhs
};

/// 1/s with s floored at 1e-300.
template <typename Scalar>
Vector<Scalar> inverse_s(const PrimalDualPoint<Scalar>& p) {
  return p.s.array().max(Scalar(1e-300)).inverse().matrix();
}

/// Diagonal of D² = XS⁻¹.
template <typename Scalar>
Vector<Scalar> scaling_d2(const PrimalDualPoint<Scalar>& p) {
  return p.x.cwiseProduct(inverse_s(p));
}

/// True when some s_i < 1e-14·max(s).
template <typename Scalar>
bool near_boundary(const PrimalDualPoint<Scalar>& p) {
  if (p.s.size() == 0) return false;
  return p.s.minCoeff() < Scalar(1e-14) * p.s.maxCoeff();
}

/// A·diag(d2)·Aᵀ·v without forming the n×n diagonal.
template <typename Scalar, typename Derived>
Vector<Scalar> normal_matvec(const DenseMatrix<Scalar>& a,
                             const Vector<Scalar>& d2,
                             const Eigen::MatrixBase<Derived>& v) {
  Vector<Scalar> t = a.transpose() * v;
  t.array() *= d2.array();
  return a * t;
}

template <typename Scalar>
Vector<Scalar> build_p(const LinearProgram<Scalar>& lp,
                       const PrimalDualPoint<Scalar>& pt, Scalar sigma) {
  check_dimensions(lp, pt);
  const Scalar mu = duality_measure(pt);
  Vector<Scalar> t = pt.x - (sigma * mu) * inverse_s(pt);
  return lp.a * t;
}

template <typename Scalar>
DenseMatrix<Scalar> build_normal_matrix(const LinearProgram<Scalar>& lp,
                                        const PrimalDualPoint<Scalar>& pt) {
  check_dimensions(lp, pt);
  const Vector<Scalar> d = scaling_d2(pt).cwiseSqrt();
  const DenseMatrix<Scalar> ad = lp.a * d.asDiagonal();
  DenseMatrix<Scalar> m = ad * ad.transpose();
  // Exact symmetry keeps downstream Cholesky and CG well defined.
  m = (Scalar(0.5) * (m + m.transpose())).eval();
  return m;
}

namespace detail {

template <typename Scalar>
StepDirection<Scalar> complete(const LinearProgram<Scalar>& lp,
                               const PrimalDualPoint<Scalar>& pt, Scalar sigma,
                               const Vector<Scalar>& dy,
                               const Vector<Scalar>* v) {
  check_dimensions(lp, pt);
  if (dy.size() != lp.m())
    throw DimensionError("dy has length " + std::to_string(dy.size()) +
                         ", expected " + std::to_string(lp.m()));
  const Scalar mu = duality_measure(pt);
  const Vector<Scalar> sinv = inverse_s(pt);
  const Vector<Scalar> d2 = pt.x.cwiseProduct(sinv);

  StepDirection<Scalar> st;
  st.sigma = sigma;
  st.dy = dy;
  st.ds = -(lp.a.transpose() * dy);
  st.dx = -pt.x + (sigma * mu) * sinv - d2.cwiseProduct(st.ds);
  if (v) st.dx -= sinv.cwiseProduct(*v);
  const Vector<Scalar> p = build_p(lp, pt, sigma);
  st.residual_norm = (normal_matvec(lp.a, d2, dy) - p).norm();
  return st;
}

}  // namespace detail

/// Step from an inexact dy without correction; dx absorbs the residual.
template <typename Scalar>
StepDirection<Scalar> complete_step_uncorrected(
    const LinearProgram<Scalar>& lp, const PrimalDualPoint<Scalar>& pt,
    Scalar sigma, const Vector<Scalar>& dy) {
  return detail::complete<Scalar>(lp, pt, sigma, dy, nullptr);
}

/// Step from a pair (dy, v) solving AD²Aᵀdy = p + AS⁻¹v; then A·dx = 0.
template <typename Scalar>
StepDirection<Scalar> complete_step_corrected(const LinearProgram<Scalar>& lp,
                                              const PrimalDualPoint<Scalar>& pt,
                                              Scalar sigma,
                                              const Vector<Scalar>& dy,
                                              const Vector<Scalar>& v) {
  if (v.size() != lp.n())
    throw DimensionError("v has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(lp.n()));
  check_dimensions(lp, pt);
  const Vector<Scalar> sinv = inverse_s(pt);
  const Vector<Scalar> d2 = pt.x.cwiseProduct(sinv);
  const Vector<Scalar> p = build_p(lp, pt, sigma);
  const Vector<Scalar> r = normal_matvec(lp.a, d2, dy) - p -
                           lp.a * sinv.cwiseProduct(v);
  if (!(r.norm() <= Scalar(1e-6) * (Scalar(1) + p.norm())))
    throw InconsistentPairError(
        "(dy, v) does not satisfy the corrected normal equations",
        static_cast<double>(r.norm()));
  auto st = detail::complete<Scalar>(lp, pt, sigma, dy, &v);
  st.correction = v;
  return st;
}

/// Exact step through a Cholesky solve of the normal equations.
template <typename Scalar>
StepDirection<Scalar> exact_step(const LinearProgram<Scalar>& lp,
                                 const PrimalDualPoint<Scalar>& pt,
                                 Scalar sigma) {
  const SpdFactor<Scalar> factor(build_normal_matrix(lp, pt));
  return complete_step_uncorrected(lp, pt, sigma,
                                   factor.solve(build_p(lp, pt, sigma)));
}

/// pt + α·step, rejecting points outside the strict interior.
template <typename Scalar>
PrimalDualPoint<Scalar> advance(const PrimalDualPoint<Scalar>& pt,
                                const StepDirection<Scalar>& st, Scalar alpha) {
  PrimalDualPoint<Scalar> out{pt.x + alpha * st.dx, pt.y + alpha * st.dy,
                              pt.s + alpha * st.ds};
  require_interior(out);
  return out;
}

/// μ(α) = (x + αΔx)ᵀ(s + αΔs)/n, without an interior check.
template <typename Scalar>
Scalar mu_after(const PrimalDualPoint<Scalar>& pt,
                const StepDirection<Scalar>& st, Scalar alpha) {
  return (pt.x + alpha * st.dx).dot(pt.s + alpha * st.ds) /
         static_cast<Scalar>(pt.x.size());
}

/// ‖Δx∘Δs‖.
template <typename Scalar>
Scalar cross_norm(const StepDirection<Scalar>& st) {
  return hadamard(st.dx, st.ds).norm();
}

/// ‖(AD)†f‖ = √(fᵀ(AD²Aᵀ)⁻¹f), given a factorization of AD²Aᵀ.
template <typename Scalar, typename Derived>
Scalar ad_pinv_norm(const SpdFactor<Scalar>& normal,
                    const Eigen::MatrixBase<Derived>& f) {
  return normal.inverse_energy_norm(f);
}

// Bounds on ‖Δx∘Δs‖ and on the post-step distance to the central path.

/// Exact steps from N₂(θ).
template <typename Scalar>
Scalar cross_bound_exact(Scalar theta, Scalar sigma, Index n, Scalar mu) {
  const Scalar g = theta * theta + Scalar(n) * (1 - sigma) * (1 - sigma);
  return g / (std::pow(Scalar(2), Scalar(1.5)) * (1 - theta)) * mu;
}

/// Corrected steps; scaled_v = ‖(XS)^{-1/2}v‖.
template <typename Scalar>
Scalar cross_bound_corrected(Scalar theta, Scalar sigma, Index n, Scalar mu,
                             Scalar scaled_v) {
  const Scalar g = theta * theta + Scalar(n) * (1 - sigma) * (1 - sigma);
  return cross_bound_exact(theta, sigma, n, mu) +
         3 * std::sqrt(g * mu / (1 - theta)) * scaled_v +
         2 * scaled_v * scaled_v;
}

/// Uncorrected steps; pinv_f = ‖(AD)†f‖.
template <typename Scalar>
Scalar cross_bound_uncorrected(Scalar theta, Scalar sigma, Index n, Scalar mu,
                               Scalar pinv_f) {
  const Scalar g = theta * theta + Scalar(n) * (1 - sigma) * (1 - sigma);
  return cross_bound_exact(theta, sigma, n, mu) +
         2 * std::sqrt(g * mu / (1 - theta)) * pinv_f + pinv_f * pinv_f;
}

/// Distance bound after a corrected step of length α.
template <typename Scalar>
Scalar neighborhood_bound_corrected(Scalar alpha, Scalar distance,
                                    Scalar cross, Scalar v_norm) {
  return (1 - alpha) * distance + alpha * alpha * cross + 2 * alpha * v_norm;
}

/// Distance bound after an uncorrected step of length α.
template <typename Scalar>
Scalar neighborhood_bound_uncorrected(Scalar alpha, Scalar distance,
                                      Scalar cross, Scalar pinv_f) {
  return (1 - alpha) * distance + alpha * alpha * cross +
         alpha * alpha * pinv_f * pinv_f;
}

/// ‖Q^{-1/2}p‖ bound for points in N₂(θ) when the sketch embeds.
template <typename Scalar>
Scalar preconditioned_rhs_bound(Scalar sigma, Scalar theta, Index n,
                                Scalar mu) {
  const Scalar nm = Scalar(2) * Scalar(n) * mu;
  return sigma * std::sqrt(nm / (1 - theta)) + std::sqrt(nm);
}

}  // namespace ipmlab
