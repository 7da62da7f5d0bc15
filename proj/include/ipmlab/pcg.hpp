#pragma once

// Sketched preconditioner Q^{-1/2} = U diag(1/σ(ADW)) Uᵀ and conjugate
// gradient on  Q^{-1/2} AD²Aᵀ Q^{-1/2} z = Q^{-1/2} p,  dy = Q^{-1/2} z.
// Also the Solve / Solve^v wrappers and the perturbation variant of Solve^v.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ipmlab/normal_eq.hpp"
#include "ipmlab/rng.hpp"
#include "ipmlab/sketch.hpp"

namespace ipmlab {

struct PcgOptions {
  double zeta = 0.5;
  double eta = 0.2;
  Index sketch_cols = 0;  // 0: size from the formula
  double c_w = 1.0;
  double c_s = 1.0;
  bool identity_sketch = false;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // index of this call within the run
  Index max_iters = 0;       // 0: derived cap
};

template <typename Scalar>
struct Preconditioner {
  DenseMatrix<Scalar> u_q;        // m × m
  Vector<Scalar> inv_sqrt_sigma;  // 1/σ_i(ADW)
  SketchMatrix<Scalar> source_sketch;
  ThinSvd<Scalar> adw_svd;
  bool fell_back_to_identity = false;
  int resketches = 0;

  Index m() const { return u_q.rows(); }

  template <typename Derived>
  Vector<Scalar> apply_inv_sqrt(const Eigen::MatrixBase<Derived>& v) const {
    Vector<Scalar> t = u_q.transpose() * v;
    t.array() *= inv_sqrt_sigma.array();
    return u_q * t;
  }

  template <typename Derived>
  Vector<Scalar> apply_sqrt(const Eigen::MatrixBase<Derived>& v) const {
    Vector<Scalar> t = u_q.transpose() * v;
    t.array() *= adw_svd.sigma.array();
    return u_q * t;
  }

  /// σ_max(Q^{1/2}) = σ₁(ADW).
  Scalar sqrt_sigma_max() const { return adw_svd.sigma_max(); }
};

template <typename Scalar>
struct SolveReport {
  Vector<Scalar> dy;
  std::optional<Vector<Scalar>> v;
  Index inner_iterations = 0;
  Index matvecs = 0;                     // products with AD²Aᵀ
  Scalar preconditioned_residual = 0;    // ‖Q^{-1/2}(AD²Aᵀdy − p)‖
  Scalar plain_residual = 0;             // ‖AD²Aᵀdy − p‖
  Scalar preconditioned_rhs = 0;         // ‖Q^{-1/2}p‖
  std::vector<Scalar> history;           // preconditioned residual per iteration
  std::chrono::duration<double> wall_time{};
  bool sketch_fallback = false;
  int resketches = 0;
  int restarts = 0;
};

/// Builds Q^{-1/2} from a fresh sketch of AD. If rank(ADW) < m the sketch is
/// redrawn from the next seed, up to three times.
template <typename Scalar>
Preconditioner<Scalar> build_preconditioner(const LinearProgram<Scalar>& lp,
                                            const PrimalDualPoint<Scalar>& pt,
                                            const PcgOptions& opt) {
  check_dimensions(lp, pt);
  const Index m = lp.m(), n = lp.n();
  const Vector<Scalar> d = scaling_d2(pt).cwiseSqrt();
  const DenseMatrix<Scalar> ad = lp.a * d.asDiagonal();

  Preconditioner<Scalar> pc;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    if (opt.identity_sketch) {
      pc.source_sketch = identity_sketch<Scalar>(n);
    } else {
      SketchOptions so;
      so.cols_override = opt.sketch_cols;
      so.c_w = opt.c_w;
      so.c_s = opt.c_s;
      const std::uint64_t seed =
          stream_seed(opt.seed, "sketch", opt.stream * 4 + static_cast<std::uint64_t>(attempt));
      try {
        pc.source_sketch = build_sketch<Scalar>(n, m, opt.zeta, opt.eta, seed, so);
      } catch (const SketchTooWideError&) {
        pc.source_sketch = identity_sketch<Scalar>(n);
        pc.fell_back_to_identity = true;
      }
    }
    pc.adw_svd = thin_svd(apply_right(ad, pc.source_sketch));
    if (pc.adw_svd.size() == m && pc.adw_svd.rank(Scalar(1e-12)) == m) {
      pc.u_q = pc.adw_svd.u;
      pc.inv_sqrt_sigma = pc.adw_svd.sigma.cwiseInverse();
      pc.resketches = attempt;
      return pc;
    }
    if (pc.source_sketch.identity) break;
  }
  const Scalar ratio = pc.adw_svd.sigma_max() > 0
                           ? pc.adw_svd.sigma_min() / pc.adw_svd.sigma_max()
                           : Scalar(0);
  throw RankDeficientError("build_preconditioner: rank(ADW) < m after resketching",
                           static_cast<double>(ratio));
}

/// CG state on the preconditioned system. Each step costs one product with
/// AD²Aᵀ and two with Q^{-1/2}.
template <typename Scalar>
class PcgIteration {
 public:
  PcgIteration(const Preconditioner<Scalar>& pc, const DenseMatrix<Scalar>& a,
               Vector<Scalar> d2, const Vector<Scalar>& rhs)
      : pc_(pc), a_(a), d2_(std::move(d2)), rhs_(rhs) {
    if (rhs.size() != a.rows() || pc.m() != a.rows())
      throw DimensionError("pcg: rhs/preconditioner size does not match A");
    g_ = pc_.apply_inv_sqrt(rhs_);
    z_ = Vector<Scalar>::Zero(g_.size());
    r_ = g_;
    dir_ = r_;
    rr_ = r_.squaredNorm();
    history_.push_back(std::sqrt(rr_));
  }

  Scalar rhs_norm() const { return history_.front(); }
  Scalar residual_norm() const { return std::sqrt(rr_); }
  const Vector<Scalar>& residual() const { return r_; }
  Index iterations() const { return iterations_; }
  Index matvecs() const { return matvecs_; }
  int restarts() const { return restarts_; }
  const std::vector<Scalar>& history() const { return history_; }

  Vector<Scalar> dy() const { return pc_.apply_inv_sqrt(z_); }

  /// AD²Aᵀdy − rhs, recomputed from scratch.
  Vector<Scalar> plain_residual() {
    ++matvecs_;
    return normal_matvec(a_, d2_, dy()) - rhs_;
  }

  /// Replaces the recursive residual by the true one and restarts the
  /// search direction from it.
  void refresh() {
    r_ = -pc_.apply_inv_sqrt(plain_residual());
    dir_ = r_;
    rr_ = r_.squaredNorm();
    history_.back() = std::sqrt(rr_);
  }

  void step() {
    if (rr_ == Scalar(0)) return;
    Vector<Scalar> bp = apply_b(dir_);
    Scalar curv = dir_.dot(bp);
    if (!(curv > Scalar(0)) || !std::isfinite(curv)) {
      if (restarted_on_breakdown_)
        throw NumericalError("pcg: nonpositive curvature after restart",
                             static_cast<double>(residual_norm()));
      restarted_on_breakdown_ = true;
      ++restarts_;
      refresh();
      if (rr_ == Scalar(0)) return;
      bp = apply_b(dir_);
      curv = dir_.dot(bp);
      if (!(curv > Scalar(0)) || !std::isfinite(curv))
        throw NumericalError("pcg: nonpositive curvature after restart",
                             static_cast<double>(residual_norm()));
    }
    const Scalar alpha = rr_ / curv;
    z_ += alpha * dir_;
    r_ -= alpha * bp;
    const Scalar rr_new = r_.squaredNorm();
    dir_ = r_ + (rr_new / rr_) * dir_;
    rr_ = rr_new;
    ++iterations_;
    history_.push_back(std::sqrt(rr_));
  }

 private:
  Vector<Scalar> apply_b(const Vector<Scalar>& v) {
    ++matvecs_;
    return pc_.apply_inv_sqrt(normal_matvec(a_, d2_, pc_.apply_inv_sqrt(v)));
  }

  const Preconditioner<Scalar>& pc_;
  const DenseMatrix<Scalar>& a_;
  Vector<Scalar> d2_;
  Vector<Scalar> rhs_;
  Vector<Scalar> g_, z_, r_, dir_;
  Scalar rr_ = 0;
  Index iterations_ = 0;
  Index matvecs_ = 0;
  int restarts_ = 0;
  bool restarted_on_breakdown_ = false;
  std::vector<Scalar> history_;
};

namespace detail {

template <typename Scalar>
void fill_report(SolveReport<Scalar>& rep, PcgIteration<Scalar>& it,
                 const Vector<Scalar>& plain) {
  rep.dy = it.dy();
  rep.inner_iterations = it.iterations();
  rep.matvecs = it.matvecs();
  rep.preconditioned_residual = it.residual_norm();
  rep.plain_residual = plain.norm();
  rep.preconditioned_rhs = it.rhs_norm();
  rep.history = it.history();
  rep.restarts = it.restarts();
}

// Runs CG until done(it) holds for the true residual. The recursive residual
// is used between checks; a failed check refreshes it and continues.
template <typename Scalar, typename Done>
Vector<Scalar> run_until(PcgIteration<Scalar>& it, Index max_iters,
                         Done&& done) {
  for (;;) {
    while (!done.recursive(it)) {
      if (it.iterations() >= max_iters)
        throw ConvergenceError(
            "pcg: iteration cap " + std::to_string(max_iters) + " reached",
            std::vector<double>(it.history().begin(), it.history().end()));
      it.step();
    }
    Vector<Scalar> plain = it.plain_residual();
    if (done.exact(it, plain)) return plain;
    if (it.iterations() >= max_iters)
      throw ConvergenceError(
          "pcg: iteration cap " + std::to_string(max_iters) + " reached",
          std::vector<double>(it.history().begin(), it.history().end()));
    it.refresh();
    if (done.recursive(it)) it.step();
  }
}

}  // namespace detail

/// Default inner cap 10·ceil(log(δ/(C√(nμ))) / log ζ), with C√(nμ) the
/// preconditioned-rhs bound at θ = 0.5; at least 10.
template <typename Scalar>
Index default_inner_cap(Scalar delta, Scalar sigma, Index n, Scalar mu,
                        double zeta) {
  const Scalar scale = preconditioned_rhs_bound(sigma, Scalar(0.5), n, mu);
  if (!(delta > 0) || !(scale > 0)) return 10;
  const double t = std::ceil(std::log(static_cast<double>(delta / scale)) /
                             std::log(zeta));
  return static_cast<Index>(10 * std::max(t, 1.0));
}

namespace detail {

// Stop rule on the preconditioned residual norm.
template <typename Scalar>
struct ResidualBelow {
  const Preconditioner<Scalar>* pc;
  Scalar goal;
  bool recursive(const PcgIteration<Scalar>& i) const {
    return i.residual_norm() <= goal;
  }
  bool exact(const PcgIteration<Scalar>&, const Vector<Scalar>& plain) const {
    return pc->apply_inv_sqrt(plain).norm() <= goal;
  }
};

// Stop rule on ‖v‖. From the preconditioned residual r, f = −Q^{1/2}r and
// (ADW)†Q^{1/2} = V_{ADW}U_Qᵀ, so ‖v‖ = ‖(XS)^{1/2} W V_{ADW} U_Qᵀ r‖.
template <typename Scalar>
struct CorrectionBelow {
  const Preconditioner<Scalar>* pc;
  const PrimalDualPoint<Scalar>* pt;
  Vector<Scalar> sqrt_xs;
  Scalar delta;
  Vector<Scalar> v;

  bool recursive(const PcgIteration<Scalar>& i) const {
    const Vector<Scalar> u =
        pc->adw_svd.vt.transpose() * (pc->u_q.transpose() * i.residual());
    return apply(pc->source_sketch, u).cwiseProduct(sqrt_xs).norm() <= delta;
  }
  bool exact(const PcgIteration<Scalar>&, const Vector<Scalar>& plain);
};

}  // namespace detail

/// v = (XS)^{1/2} W (ADW)† f for a residual f = AD²Aᵀdy − p, so that
/// AS⁻¹v = f whenever ADW has full row rank.
template <typename Scalar>
Vector<Scalar> correction_vector(const Preconditioner<Scalar>& pc,
                                 const PrimalDualPoint<Scalar>& pt,
                                 const Vector<Scalar>& f) {
  Vector<Scalar> v = apply(pc.source_sketch, pinv_apply(pc.adw_svd, f));
  v.array() *= pt.x.cwiseProduct(pt.s).cwiseSqrt().array();
  return v;
}

template <typename Scalar>
bool detail::CorrectionBelow<Scalar>::exact(const PcgIteration<Scalar>&,
                                            const Vector<Scalar>& plain) {
  v = correction_vector(*pc, *pt, plain);
  return v.norm() <= delta;
}

/// CG to a relative target: ‖Q^{-1/2}(AD²Aᵀdy − rhs)‖ ≤ target·‖Q^{-1/2}rhs‖.
template <typename Scalar>
SolveReport<Scalar> pcg_solve(const Preconditioner<Scalar>& pc,
                              const LinearProgram<Scalar>& lp,
                              const PrimalDualPoint<Scalar>& pt,
                              const Vector<Scalar>& rhs, Scalar target,
                              Index max_iters) {
  const auto t0 = std::chrono::steady_clock::now();
  PcgIteration<Scalar> it(pc, lp.a, scaling_d2(pt), rhs);
  detail::ResidualBelow<Scalar> done{&pc, target * it.rhs_norm()};
  const Vector<Scalar> plain = detail::run_until(it, max_iters, done);
  SolveReport<Scalar> rep;
  detail::fill_report(rep, it, plain);
  rep.preconditioned_residual = pc.apply_inv_sqrt(plain).norm();
  rep.sketch_fallback = pc.fell_back_to_identity;
  rep.resketches = pc.resketches;
  rep.wall_time = std::chrono::steady_clock::now() - t0;
  return rep;
}

/// Inexact solve of AD²Aᵀdy = p(σ) to tolerance δ in both the energy norm of
/// the error and the ℓ₂ residual. Stops once the preconditioned residual is
/// at most min(δ/√(1+ζ/2), δ/σ_max(Q^{1/2})).
template <typename Scalar>
SolveReport<Scalar> solve(const LinearProgram<Scalar>& lp,
                          const PrimalDualPoint<Scalar>& pt, Scalar sigma,
                          Scalar delta, const PcgOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Preconditioner<Scalar> pc = build_preconditioner(lp, pt, opt);
  const Vector<Scalar> p = build_p(lp, pt, sigma);
  const Scalar zeta = static_cast<Scalar>(opt.zeta);
  const Scalar tau = std::min(delta / std::sqrt(1 + zeta / 2),
                              delta / pc.sqrt_sigma_max());
  const Index cap =
      opt.max_iters > 0
          ? opt.max_iters
          : default_inner_cap(delta, sigma, lp.n(), duality_measure(pt), opt.zeta);

  PcgIteration<Scalar> it(pc, lp.a, scaling_d2(pt), p);
  detail::ResidualBelow<Scalar> done{&pc, tau};
  const Vector<Scalar> plain = detail::run_until(it, cap, done);
  SolveReport<Scalar> rep;
  detail::fill_report(rep, it, plain);
  rep.preconditioned_residual = pc.apply_inv_sqrt(plain).norm();
  rep.sketch_fallback = pc.fell_back_to_identity;
  rep.resketches = pc.resketches;
  rep.wall_time = std::chrono::steady_clock::now() - t0;
  return rep;
}

/// Inexact solve returning (dy, v) with AD²Aᵀdy = p + AS⁻¹v and ‖v‖ ≤ δ.
template <typename Scalar>
SolveReport<Scalar> solve_v(const LinearProgram<Scalar>& lp,
                            const PrimalDualPoint<Scalar>& pt, Scalar sigma,
                            Scalar delta, const PcgOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Preconditioner<Scalar> pc = build_preconditioner(lp, pt, opt);
  const Vector<Scalar> p = build_p(lp, pt, sigma);
  const Index cap =
      opt.max_iters > 0
          ? opt.max_iters
          : default_inner_cap(delta, sigma, lp.n(), duality_measure(pt), opt.zeta);

  PcgIteration<Scalar> it(pc, lp.a, scaling_d2(pt), p);
  detail::CorrectionBelow<Scalar> done{
      &pc, &pt, pt.x.cwiseProduct(pt.s).cwiseSqrt(), delta, {}};
  const Vector<Scalar> plain = detail::run_until(it, cap, done);
  SolveReport<Scalar> rep;
  detail::fill_report(rep, it, plain);
  rep.v = done.v.size() ? done.v : correction_vector(pc, pt, plain);
  rep.preconditioned_residual = pc.apply_inv_sqrt(plain).norm();
  rep.sketch_fallback = pc.fell_back_to_identity;
  rep.resketches = pc.resketches;
  rep.wall_time = std::chrono::steady_clock::now() - t0;
  return rep;
}

/// Solve^v by perturbation: v uniform on the sphere of radius δ, then an
/// exact solve of AD²Aᵀdy = p + AS⁻¹v.
template <typename Scalar>
SolveReport<Scalar> perturbation_solve_v(const LinearProgram<Scalar>& lp,
                                         const PrimalDualPoint<Scalar>& pt,
                                         Scalar sigma, Scalar delta,
                                         std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  check_dimensions(lp, pt);
  Vector<Scalar> v = Vector<Scalar>::Zero(lp.n());
  if (delta > 0) {
    Rng rng(seed);
    Scalar norm = 0;
    while (norm == Scalar(0)) {
      for (Index i = 0; i < v.size(); ++i) v(i) = static_cast<Scalar>(rng.normal());
      norm = v.norm();
    }
    v *= delta / norm;
  }
  const SpdFactor<Scalar> factor(build_normal_matrix(lp, pt));
  const Vector<Scalar> p = build_p(lp, pt, sigma);
  const Vector<Scalar> rhs = p + lp.a * inverse_s(pt).cwiseProduct(v);

  SolveReport<Scalar> rep;
  rep.dy = factor.solve(rhs);
  rep.v = v;
  rep.matvecs = 1;
  const Vector<Scalar> f = factor.matrix() * rep.dy - p;
  rep.plain_residual = f.norm();
  rep.wall_time = std::chrono::steady_clock::now() - t0;
  return rep;
}

/// Exact direct solve wrapped as a report (v = 0 when requested).
template <typename Scalar>
SolveReport<Scalar> direct_solve(const LinearProgram<Scalar>& lp,
                                 const PrimalDualPoint<Scalar>& pt,
                                 Scalar sigma, bool with_v) {
  const auto t0 = std::chrono::steady_clock::now();
  const SpdFactor<Scalar> factor(build_normal_matrix(lp, pt));
  const Vector<Scalar> p = build_p(lp, pt, sigma);
  SolveReport<Scalar> rep;
  rep.dy = factor.solve(p);
  if (with_v) rep.v = Vector<Scalar>::Zero(lp.n());
  rep.matvecs = 1;
  rep.plain_residual = (factor.matrix() * rep.dy - p).norm();
  rep.wall_time = std::chrono::steady_clock::now() - t0;
  return rep;
}

}  // namespace ipmlab
