#pragma once

// Predictor-corrector drivers: error-adjusted (corrected), uncorrected, and
// the exact baseline. All three share one loop; they differ in how the
// normal equations are solved and how Δx is completed.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ipmlab/pcg.hpp"

namespace ipmlab {

enum class Mode { corrected, uncorrected, exact };
enum class SolverKind { pcg, direct, perturb };

/// Duality-decrease constant of the corrected method.
inline constexpr double kCorrectedC0 = 0.14;

/// Duality-decrease constant of the uncorrected method, √0.14 − 1/256.
inline double uncorrected_c0() { return std::sqrt(0.14) - 1.0 / 256.0; }

struct IpmConfig {
  double epsilon = 0.1;
  Mode mode = Mode::corrected;
  SolverKind solver = SolverKind::pcg;
  double zeta = 0.5;
  double eta = 0.2;
  Index sketch_cols = 0;
  double c_w = 1.0;
  double c_s = 1.0;
  Index max_outer = 0;  // 0: default_max_outer
  Index max_inner = 0;  // 0: derived per call
  std::uint64_t seed = 0;
  std::optional<double> delta;  // solver tolerance override
  int max_backtracks = 6;
  bool verify_with_direct = false;  // enables ‖(AD)†f‖ monitors for pcg
};

struct IterationRecord {
  Index k = 0;
  double mu = 0;  // at the start of the iteration
  double alpha = 0;
  int backtracks = 0;
  double tolerance = 0;

  Index predictor_inner = 0;
  Index corrector_inner = 0;
  Index predictor_matvecs = 0;
  Index corrector_matvecs = 0;
  double predictor_v_norm = 0;  // ‖v‖, or ‖f‖ when uncorrected
  double corrector_v_norm = 0;
  double predictor_pinv_f = std::numeric_limits<double>::quiet_NaN();
  double corrector_pinv_f = std::numeric_limits<double>::quiet_NaN();

  double predictor_cross = 0;
  double predictor_cross_bound = std::numeric_limits<double>::quiet_NaN();
  double corrector_cross = 0;
  double corrector_cross_bound = std::numeric_limits<double>::quiet_NaN();
  double predictor_distance_bound = std::numeric_limits<double>::quiet_NaN();
  double corrector_distance_bound = std::numeric_limits<double>::quiet_NaN();
  double mu_identity_error = 0;  // largest deviation from the μ̃ identity

  double predictor_mu = 0;
  double predictor_distance = 0;
  bool predictor_member = false;        // accepted predictor iterate in N₂(0.5)
  bool predictor_member_first = false;  // the unbacktracked proposal was
  double mu_next = 0;
  double corrector_distance = 0;
  bool corrector_member = false;  // in N₂(0.25)

  bool tolerances_hold = true;  // solver met its tolerance and lemma conditions
  bool near_boundary = false;
  bool recurrence_holds = true;  // corrected driver only
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  std::vector<std::string> events;  // backtracks and monitor violations
  Index monitor_violations = 0;
};

template <typename Scalar>
struct SolveOutcome {
  PrimalDualPoint<Scalar> point;
  Residuals<Scalar> residuals;
  IterationTrace trace;
  bool converged = false;
  Index outer_iterations = 0;
  double tolerance = 0;  // solver tolerance used
};

/// α = min{1/2, √(μ/(16‖Δx∘Δs‖))}; 1/2 when the cross term vanishes.
template <typename Scalar>
Scalar predictor_step_size(Scalar mu, Scalar cross_norm) {
  if (!(cross_norm > 0)) return Scalar(0.5);
  return std::min(Scalar(0.5), std::sqrt(mu / (16 * cross_norm)));
}

/// ε·c1/(c0/√n) + (1 − c0/√n)^k·μ0, an upper bound on μ_k under the
/// recurrence μ_{k+1} ≤ (1 − c0/√n)μ_k + c1·ε.
inline double recurrence_bound(double mu0, Index n, double c0, double c1,
                               double eps, Index k) {
  const double rate = c0 / std::sqrt(static_cast<double>(n));
  if (!(c0 > 0 && c0 < 1)) throw InvalidArgumentError("c0 must lie in (0, 1)");
  if (!(c1 >= 0 && c1 < rate))
    throw InvalidArgumentError("c1 must lie in [0, c0/sqrt(n))");
  if (n < 1 || k < 0) throw InvalidArgumentError("n >= 1 and k >= 0 required");
  return eps * (c1 / rate) + std::pow(1 - rate, static_cast<double>(k)) * mu0;
}

/// Iterations after which recurrence_bound drops to 2ε: (√n/c0)·ln(μ0/ε).
inline Index recurrence_iterations(double mu0, Index n, double c0, double eps) {
  const double lg = std::log(mu0 / eps);
  return lg <= 0 ? 0
                 : static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n)) / c0 * lg));
}

/// δ = min{√ε/2⁶, εC₀/(2√n·log(μ0/ε))} with the log floored at 1.
inline double uncorrected_tolerance(double eps, Index n, double mu0) {
  const double lg = std::max(std::log(mu0 / eps), 1.0);
  return std::min(std::sqrt(eps) / 64.0,
                  eps * uncorrected_c0() /
                      (2.0 * std::sqrt(static_cast<double>(n)) * lg));
}

/// ceil(3·(√n/0.14)·ln(μ0/ε)) + 10.
inline Index default_max_outer(Index n, double mu0, double eps) {
  const double lg = std::max(std::log(mu0 / eps), 0.0);
  return static_cast<Index>(
             std::ceil(3.0 * std::sqrt(static_cast<double>(n)) / kCorrectedC0 * lg)) +
         10;
}

namespace detail {

template <typename Scalar>
struct Driver {
  const LinearProgram<Scalar>& lp;
  const IpmConfig& cfg;
  Mode mode;
  SolverKind solver;
  Scalar tol;
  IterationTrace trace;

  bool corrected() const { return mode == Mode::corrected; }

  void event(std::string s) { trace.events.push_back(std::move(s)); }
  void violation(const std::string& s) {
    ++trace.monitor_violations;
    event("monitor: " + s);
  }

  SolveReport<Scalar> call(const PrimalDualPoint<Scalar>& pt, Scalar sigma,
                           std::uint64_t stream) {
    switch (solver) {
      case SolverKind::direct:
        return direct_solve(lp, pt, sigma, corrected());
      case SolverKind::perturb:
        return perturbation_solve_v(lp, pt, sigma, tol,
                                    stream_seed(cfg.seed, "perturb-v", stream));
      case SolverKind::pcg: {
        PcgOptions o;
        o.zeta = cfg.zeta;
        o.eta = cfg.eta;
        o.sketch_cols = cfg.sketch_cols;
        o.c_w = cfg.c_w;
        o.c_s = cfg.c_s;
        o.seed = cfg.seed;
        o.stream = stream;
        o.max_iters = cfg.max_inner;
        return corrected() ? solve_v(lp, pt, sigma, tol, o)
                           : solve(lp, pt, sigma, tol, o);
      }
    }
    throw InvalidArgumentError("unknown solver");
  }

  StepDirection<Scalar> complete(const PrimalDualPoint<Scalar>& pt,
                                 Scalar sigma, const SolveReport<Scalar>& rep) {
    if (corrected())
      return complete_step_corrected(lp, pt, sigma, rep.dy, *rep.v);
    return complete_step_uncorrected(lp, pt, sigma, rep.dy);
  }

  // ‖(AD)†f‖ where available, NaN otherwise.
  Scalar pinv_f(const PrimalDualPoint<Scalar>& pt, Scalar sigma,
                const StepDirection<Scalar>& st) {
    if (mode == Mode::corrected) return std::numeric_limits<Scalar>::quiet_NaN();
    if (mode == Mode::uncorrected && solver == SolverKind::pcg &&
        !cfg.verify_with_direct)
      return std::numeric_limits<Scalar>::quiet_NaN();
    const SpdFactor<Scalar> factor(build_normal_matrix(lp, pt));
    const Vector<Scalar> f = build_p(lp, pt, sigma) - factor.matrix() * st.dy;
    return ad_pinv_norm(factor, f);
  }

  // Cross-term and μ̃ monitors for one step from pt.
  void monitor_step(const PrimalDualPoint<Scalar>& pt,
                    const StepDirection<Scalar>& st, Scalar alpha, Scalar pf,
                    double& cross_out, double& bound_out, double& dist_bound,
                    IterationRecord& rec, const char* label) {
    const Scalar mu = duality_measure(pt);
    const Index n = pt.n();
    const Scalar dist = neighborhood_check(pt, Scalar(0)).distance;
    const Scalar theta = dist / mu;
    const Scalar cross = cross_norm(st);
    cross_out = static_cast<double>(cross);
    const Scalar slack = Scalar(1e-9) * (Scalar(1) + cross);

    if (theta < Scalar(1)) {
      Scalar bound = std::numeric_limits<Scalar>::quiet_NaN();
      if (corrected()) {
        const Vector<Scalar>& v = *st.correction;
        const Scalar scaled =
            v.cwiseQuotient(pt.x.cwiseProduct(pt.s).cwiseSqrt()).norm();
        bound = cross_bound_corrected(theta, st.sigma, n, mu, scaled);
      } else if (mode == Mode::exact) {
        bound = cross_bound_exact(theta, st.sigma, n, mu);
      } else if (std::isfinite(pf)) {
        bound = cross_bound_uncorrected(theta, st.sigma, n, mu, pf);
      }
      bound_out = static_cast<double>(bound);
      if (std::isfinite(bound) && cross > bound + slack)
        violation(std::string(label) + " cross term " + std::to_string(cross) +
                  " exceeds bound " + std::to_string(bound));
    }

    // Neighborhood bound and μ̃ identities at the accepted α.
    const Scalar mu_a = mu_after(pt, st, alpha);
    if (corrected()) {
      const Vector<Scalar>& v = *st.correction;
      dist_bound = static_cast<double>(
          neighborhood_bound_corrected(alpha, dist, cross, v.norm()));
      const Scalar predicted = (1 - alpha * (1 - st.sigma)) * mu -
                               alpha / Scalar(n) * v.sum();
      const Scalar err = std::abs(mu_a - predicted) / mu;
      rec.mu_identity_error =
          std::max(rec.mu_identity_error, static_cast<double>(err));
      if (err > Scalar(1e-9))
        violation(std::string(label) + " mu identity off by " + std::to_string(err));
    } else if (std::isfinite(pf)) {
      dist_bound = static_cast<double>(
          neighborhood_bound_uncorrected(alpha, dist, cross, pf));
      // μ(α) − μ̃(α) = −(α²/n)‖(AD)†f‖², with μ(α) = (1 − α + ασ)μ.
      const Scalar exact_mu = (1 - alpha + alpha * st.sigma) * mu;
      const Scalar err = std::abs((exact_mu - mu_a) +
                                  alpha * alpha / Scalar(n) * pf * pf) /
                         mu;
      rec.mu_identity_error =
          std::max(rec.mu_identity_error, static_cast<double>(err));
      if (err > Scalar(1e-9))
        violation(std::string(label) + " mu identity off by " + std::to_string(err));
      if (mu_a < exact_mu - Scalar(1e-12) * mu)
        violation(std::string(label) + " inexact mu below exact mu");
    }
  }
};

}  // namespace detail

/// Shared predictor-corrector loop. `mode` chooses the step completion and
/// `solver` the linear solver; Mode::exact always uses direct solves.
template <typename Scalar>
SolveOutcome<Scalar> run_driver(const LinearProgram<Scalar>& lp,
                                const PrimalDualPoint<Scalar>& start,
                                const IpmConfig& cfg, Mode mode) {
  if (!(cfg.epsilon > 0)) throw InvalidArgumentError("epsilon must be positive");
  if (cfg.max_outer < 0) throw InvalidArgumentError("max_outer must be >= 1");
  validate(lp, false);
  check_dimensions(lp, start);
  if (first_non_interior(start) >= 0)
    throw InvalidStartError("start point is not strictly interior");
  const auto nb0 = neighborhood_check(start, Scalar(0.25));
  if (!nb0.member)
    throw InvalidStartError("start point is outside N2(0.25): distance " +
                            std::to_string(static_cast<double>(nb0.distance)) +
                            ", mu " +
                            std::to_string(static_cast<double>(duality_measure(start))));
  const Residuals<Scalar> r0 = residuals(lp, start);
  if (r0.primal_infeasibility > Scalar(1e-8) * (1 + lp.b.norm()) ||
      r0.dual_infeasibility > Scalar(1e-8) * (1 + lp.c.norm()))
    throw InvalidStartError("start point is not primal-dual feasible");

  SolverKind solver = mode == Mode::exact ? SolverKind::direct : cfg.solver;
  if (mode == Mode::uncorrected && solver == SolverKind::perturb)
    throw InvalidArgumentError("the perturbation solver needs the corrected mode");

  const Index n = lp.n();
  const double mu0 = static_cast<double>(r0.duality_measure);
  const double eps = cfg.epsilon;
  double tol = 0;
  if (mode == Mode::corrected) tol = eps / 128.0;
  if (mode == Mode::uncorrected) tol = uncorrected_tolerance(eps, n, mu0);
  if (cfg.delta && mode != Mode::exact) tol = *cfg.delta;
  const Index max_outer = cfg.max_outer > 0 ? cfg.max_outer
                                            : default_max_outer(n, mu0, eps);

  detail::Driver<Scalar> d{lp, cfg, mode, solver, static_cast<Scalar>(tol), {}};
  SolveOutcome<Scalar> out;
  out.tolerance = tol;
  PrimalDualPoint<Scalar> pt = start;
  const double c0 = mode == Mode::corrected ? kCorrectedC0 : uncorrected_c0();
  const Scalar sqrt_n = std::sqrt(static_cast<Scalar>(n));

  Index k = 0;
  while (static_cast<double>(duality_measure(pt)) > 2 * eps) {
    if (k >= max_outer) break;
    IterationRecord rec;
    rec.k = k;
    const Scalar mu = duality_measure(pt);
    rec.mu = static_cast<double>(mu);
    rec.tolerance = tol;
    rec.near_boundary = near_boundary(pt);

    // Predictor, σ = 0.
    const SolveReport<Scalar> pr = d.call(pt, Scalar(0), 2 * static_cast<std::uint64_t>(k));
    const StepDirection<Scalar> ps = d.complete(pt, Scalar(0), pr);
    rec.predictor_inner = pr.inner_iterations;
    rec.predictor_matvecs = pr.matvecs;
    rec.predictor_v_norm = static_cast<double>(d.corrected() ? pr.v->norm() : pr.plain_residual);
    const Scalar pf_pred = d.pinv_f(pt, Scalar(0), ps);
    rec.predictor_pinv_f = static_cast<double>(pf_pred);

    Scalar alpha = predictor_step_size(mu, cross_norm(ps));
    PrimalDualPoint<Scalar> trial{pt.x + alpha * ps.dx, pt.y + alpha * ps.dy,
                                  pt.s + alpha * ps.ds};
    rec.predictor_member_first = neighborhood_check(trial, Scalar(0.5)).member;
    bool member = rec.predictor_member_first;
    while (!member && rec.backtracks < cfg.max_backtracks) {
      alpha /= 2;
      ++rec.backtracks;
      trial = {pt.x + alpha * ps.dx, pt.y + alpha * ps.dy, pt.s + alpha * ps.ds};
      member = neighborhood_check(trial, Scalar(0.5)).member;
      d.event("k=" + std::to_string(k) + ": predictor backtrack to alpha=" +
              std::to_string(static_cast<double>(alpha)));
    }
    d.monitor_step(pt, ps, alpha, pf_pred, rec.predictor_cross,
                   rec.predictor_cross_bound, rec.predictor_distance_bound, rec,
                   "predictor");
    const PrimalDualPoint<Scalar> mid = advance(pt, ps, alpha);
    rec.alpha = static_cast<double>(alpha);
    const auto nb_mid = neighborhood_check(mid, Scalar(0.5));
    const Scalar mu_mid = duality_measure(mid);
    rec.predictor_mu = static_cast<double>(mu_mid);
    rec.predictor_distance = static_cast<double>(nb_mid.distance);
    rec.predictor_member = nb_mid.member;
    if (!nb_mid.member)
      d.violation("k=" + std::to_string(k) + ": predictor iterate outside N2(0.5)");
    if (std::isfinite(rec.predictor_distance_bound) &&
        rec.predictor_distance > rec.predictor_distance_bound * (1 + 1e-9) + 1e-12 * rec.mu)
      d.violation("k=" + std::to_string(k) + ": predictor distance above bound");

    // Corrector, σ = 1, α = 1.
    const SolveReport<Scalar> cr = d.call(mid, Scalar(1), 2 * static_cast<std::uint64_t>(k) + 1);
    const StepDirection<Scalar> cs = d.complete(mid, Scalar(1), cr);
    rec.corrector_inner = cr.inner_iterations;
    rec.corrector_matvecs = cr.matvecs;
    rec.corrector_v_norm = static_cast<double>(d.corrected() ? cr.v->norm() : cr.plain_residual);
    const Scalar pf_corr = d.pinv_f(mid, Scalar(1), cs);
    rec.corrector_pinv_f = static_cast<double>(pf_corr);
    d.monitor_step(mid, cs, Scalar(1), pf_corr, rec.corrector_cross,
                   rec.corrector_cross_bound, rec.corrector_distance_bound, rec,
                   "corrector");
    PrimalDualPoint<Scalar> next = advance(mid, cs, Scalar(1));
    const auto nb_next = neighborhood_check(next, Scalar(0.25));
    const Scalar mu_next = duality_measure(next);
    rec.mu_next = static_cast<double>(mu_next);
    rec.corrector_distance = static_cast<double>(nb_next.distance);
    rec.corrector_member = nb_next.member;
    if (!nb_next.member)
      d.violation("k=" + std::to_string(k) + ": corrector iterate outside N2(0.25)");
    if (std::isfinite(rec.corrector_distance_bound) &&
        rec.corrector_distance > rec.corrector_distance_bound * (1 + 1e-9) + 1e-12 * rec.mu)
      d.violation("k=" + std::to_string(k) + ": corrector distance above bound");
    if (!(mu_next > 0) || !std::isfinite(static_cast<double>(mu_next)))
      throw NumericalError("duality measure is no longer positive and finite",
                           static_cast<double>(mu_next));

    // Whether the lemma preconditions on the solver error held.
    switch (mode) {
      case Mode::corrected:
        rec.tolerances_hold = rec.predictor_v_norm <= tol * (1 + 1e-9) &&
                              rec.corrector_v_norm <= tol * (1 + 1e-9) &&
                              rec.predictor_v_norm <= rec.mu / 32 &&
                              rec.corrector_v_norm <= rec.predictor_mu / 128;
        break;
      case Mode::uncorrected: {
        bool ok = rec.predictor_v_norm <= tol * (1 + 1e-9) &&
                  rec.corrector_v_norm <= tol * (1 + 1e-9);
        if (std::isfinite(rec.predictor_pinv_f))
          ok = ok && rec.predictor_pinv_f <= std::sqrt(rec.mu) / 64 &&
               rec.corrector_pinv_f <= std::sqrt(rec.predictor_mu) / 64;
        rec.tolerances_hold = ok;
        break;
      }
      case Mode::exact:
        rec.tolerances_hold = true;
        break;
    }

    // μ_{k+1} ≤ (1 − C₀/√n)μ_k + tol/√n.
    if (mode == Mode::corrected) {
      rec.recurrence_holds =
          rec.mu_next <= (1 - c0 / static_cast<double>(sqrt_n)) * rec.mu +
                             tol / static_cast<double>(sqrt_n) + 1e-12 * rec.mu;
      if (!rec.recurrence_holds)
        d.violation("k=" + std::to_string(k) + ": duality decrease recurrence");
    }

    const Residuals<Scalar> rk = residuals(lp, next);
    rec.primal_infeasibility = static_cast<double>(rk.primal_infeasibility);
    rec.dual_infeasibility = static_cast<double>(rk.dual_infeasibility);
    d.trace.records.push_back(rec);
    pt = std::move(next);
    ++k;
  }

  out.point = pt;
  out.residuals = residuals(lp, pt);
  out.converged = static_cast<double>(out.residuals.duality_measure) <= 2 * eps;
  out.outer_iterations = k;
  out.trace = std::move(d.trace);
  return out;
}

template <typename Scalar>
SolveOutcome<Scalar> run_corrected(const LinearProgram<Scalar>& lp,
                                   const PrimalDualPoint<Scalar>& start,
                                   const IpmConfig& cfg) {
  return run_driver(lp, start, cfg, Mode::corrected);
}

template <typename Scalar>
SolveOutcome<Scalar> run_uncorrected(const LinearProgram<Scalar>& lp,
                                     const PrimalDualPoint<Scalar>& start,
                                     const IpmConfig& cfg) {
  return run_driver(lp, start, cfg, Mode::uncorrected);
}

template <typename Scalar>
SolveOutcome<Scalar> run_exact(const LinearProgram<Scalar>& lp,
                               const PrimalDualPoint<Scalar>& start,
                               const IpmConfig& cfg) {
  return run_driver(lp, start, cfg, Mode::exact);
}

template <typename Scalar>
SolveOutcome<Scalar> run(const LinearProgram<Scalar>& lp,
                         const PrimalDualPoint<Scalar>& start,
                         const IpmConfig& cfg) {
  return run_driver(lp, start, cfg, cfg.mode);
}

/// Damped exact centering steps (σ = 1, fraction to boundary 0.9) from a
/// feasible interior point until it lies in N₂(θ). Feasibility and μ are
/// preserved. Throws InvalidStartError after max_steps.
template <typename Scalar>
PrimalDualPoint<Scalar> center(const LinearProgram<Scalar>& lp,
                               PrimalDualPoint<Scalar> pt, Scalar theta = Scalar(0.25),
                               int max_steps = 200) {
  require_interior(pt);
  for (int it = 0; it < max_steps; ++it) {
    if (neighborhood_check(pt, theta).member) return pt;
    const auto st = exact_step(lp, pt, Scalar(1));
    Scalar alpha = 1;
    for (Index j = 0; j < pt.n(); ++j) {
      if (st.dx(j) < 0) alpha = std::min(alpha, Scalar(-0.9) * pt.x(j) / st.dx(j));
      if (st.ds(j) < 0) alpha = std::min(alpha, Scalar(-0.9) * pt.s(j) / st.ds(j));
    }
    pt = advance(pt, st, alpha);
  }
  if (neighborhood_check(pt, theta).member) return pt;
  throw InvalidStartError("centering did not reach the neighborhood");
}

}  // namespace ipmlab
