#pragma once

// Synthetic LP generator and the batch experiments on outer-iteration scaling.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ipmlab/ipm.hpp"

namespace ipmlab {

template <typename Scalar>
struct SyntheticInstance {
  LinearProgram<Scalar> lp;
  PrimalDualPoint<Scalar> start;
};

/// A, y0 uniform on [−10, 10], x0 uniform on (0, 10], s0 = 20/x0,
/// b = A·x0, c = Aᵀy0 + s0. The start is exactly feasible and central with
/// μ0 = 20.
template <typename Scalar = double>
SyntheticInstance<Scalar> generate_synthetic_lp(Index m, Index n,
                                                std::uint64_t seed) {
  if (m < 1 || n < 1) throw InvalidArgumentError("m and n must be positive");
  if (m > n)
    throw InvalidArgumentError("m > n: generate the tall LP and use the dual reduction");
  Rng rng(seed, "instance");
  SyntheticInstance<Scalar> out;
  auto& lp = out.lp;
  auto& pt = out.start;
  lp.a.resize(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) lp.a(i, j) = static_cast<Scalar>(rng.uniform(-10, 10));
  pt.x.resize(n);
  for (Index j = 0; j < n; ++j) {
    double u;
    do u = 10.0 * (1.0 - rng.uniform());  // (0, 10]
    while (u <= 0.0);
    pt.x(j) = static_cast<Scalar>(u);
  }
  pt.y.resize(m);
  for (Index i = 0; i < m; ++i) pt.y(i) = static_cast<Scalar>(rng.uniform(-10, 10));
  pt.s = (Scalar(20) * pt.x.cwiseInverse()).eval();
  lp.b = lp.a * pt.x;
  lp.c = lp.a.transpose() * pt.y + pt.s;
  return out;
}

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double pearson_r = 0;
  bool degenerate = false;  // ys constant: r undefined, reported as 0
};

/// Ordinary least squares of ys on xs plus Pearson correlation.
FitResult fit_linearity(const std::vector<double>& xs, const std::vector<double>& ys);

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

enum class Regressor { sqrt_n, log_inv_eps };

struct ExperimentPlan {
  int figure = 1;
  Index m = 20;
  std::vector<Index> n_grid;      // swept when regressor is sqrt_n
  std::vector<double> eps_grid;   // swept when regressor is log_inv_eps
  Index n_fixed = 70;
  double eps_fixed = 0.1;
  Regressor regressor = Regressor::sqrt_n;
  Index repetitions = 60;
  IpmConfig config;               // epsilon and seed are set per trial
  std::optional<double> delta;    // fixed solver tolerance
  bool delta_equals_eps = false;
  std::uint64_t seed_base = 0;
  unsigned threads = 0;           // 0: hardware, capped by IPM_LAB_THREADS
  bool keep_traces = false;
  std::string output_path;
};

/// Plan with the figure-caption defaults: figures 1 and 3 sweep n at m = 20,
/// ε = 0.1, δ = 0.001; figures 2 and 4 sweep ε at m = 30, n = 70, δ = ε.
/// Figures 1–2 use the perturbation solver, 3–4 PCG with w = 60, ζ = 0.5.
ExperimentPlan plan_for_figure(int figure, Index repetitions, std::uint64_t seed_base);

struct TrialResult {
  double regressor = 0;
  Index n = 0;
  Index m = 0;
  double eps = 0;
  std::uint64_t seed = 0;
  Index outer_iters = 0;
  double primal_infeas = 0;
  double dual_infeas = 0;
  double mean_inner_iters = 0;
  double final_mu = 0;
  double tolerance = 0;
  bool converged = false;
  std::string error;
  std::optional<IterationTrace> trace;
};

struct GridSummary {
  double regressor = 0;
  Index n = 0;
  double eps = 0;
  double median = 0;
  double q10 = 0;
  double q90 = 0;
  double mean_primal_infeas = 0;
  double mean_inner_iters = 0;
  Index failures = 0;
  Index trials = 0;
  bool flagged = false;  // more than 10% of trials failed
};

struct ExperimentResult {
  std::vector<TrialResult> trials;
  std::vector<GridSummary> grid;
  FitResult fit;
  bool flagged = false;
};

/// Worker count: `requested` (or the hardware count when 0), capped by the
/// IPM_LAB_THREADS environment variable.
unsigned experiment_threads(unsigned requested);

/// Runs one trial: generate the instance for `seed` and solve it.
TrialResult run_trial(const ExperimentPlan& plan, Index n, double eps,
                      std::uint64_t seed);

/// Runs every (grid point, repetition) pair with seeds seed_base + trial
/// index, then aggregates per grid point and fits medians on the regressor.
ExperimentResult run_experiment(const ExperimentPlan& plan);

}  // namespace ipmlab
