#include "ipmlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

namespace ipmlab {

FitResult fit_linearity(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw DimensionError("fit_linearity: xs and ys differ in length");
  if (xs.size() < 3) throw InvalidArgumentError("fit_linearity needs at least 3 points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 1e-300 * std::max(1.0, mx * mx)))
    throw InvalidArgumentError("fit_linearity: regressor values are constant");
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.slope = 0.0;
    fit.intercept = my;
    fit.pearson_r = 0.0;
    fit.degenerate = true;
  } else {
    fit.pearson_r = sxy / std::sqrt(sxx * syy);
  }
  return fit;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgumentError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return values[lo] + t * (values[hi] - values[lo]);
}

ExperimentPlan plan_for_figure(int figure, Index repetitions, std::uint64_t seed_base) {
  ExperimentPlan plan;
  plan.figure = figure;
  plan.repetitions = repetitions;
  plan.seed_base = seed_base;
  plan.config.mode = Mode::corrected;
  switch (figure) {
    case 1:
    case 3:
      plan.m = 20;
      plan.n_grid = {40, 80, 160, 320, 640};
      plan.eps_fixed = 0.1;
      plan.regressor = Regressor::sqrt_n;
      plan.delta = 0.001;
      break;
    case 2:
    case 4:
      plan.m = 30;
      plan.n_fixed = 70;
      plan.eps_grid = {1e-1, 1e-2, 1e-3, 1e-4};
      plan.regressor = Regressor::log_inv_eps;
      plan.delta_equals_eps = true;
      break;
    default:
      throw InvalidArgumentError("figure must be 1, 2, 3 or 4");
  }
  if (figure <= 2) {
    plan.config.solver = SolverKind::perturb;
  } else {
    plan.config.solver = SolverKind::pcg;
    plan.config.sketch_cols = 60;
    plan.config.zeta = 0.5;
  }
  return plan;
}

unsigned experiment_threads(unsigned requested) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("IPM_LAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) t = std::min(t, static_cast<unsigned>(cap));
  }
  return std::max(1u, t);
}

TrialResult run_trial(const ExperimentPlan& plan, Index n, double eps,
                      std::uint64_t seed) {
  TrialResult tr;
  tr.n = n;
  tr.m = plan.m;
  tr.eps = eps;
  tr.seed = seed;
  tr.regressor = plan.regressor == Regressor::sqrt_n ? std::sqrt(static_cast<double>(n))
                                                     : std::log(1.0 / eps);
  IpmConfig cfg = plan.config;
  cfg.epsilon = eps;
  cfg.seed = seed;
  if (plan.delta_equals_eps)
    cfg.delta = eps;
  else if (plan.delta)
    cfg.delta = plan.delta;
  try {
    const auto inst = generate_synthetic_lp<double>(plan.m, n, seed);
    auto out = run(inst.lp, inst.start, cfg);
    tr.outer_iters = out.outer_iterations;
    tr.primal_infeas = out.residuals.primal_infeasibility;
    tr.dual_infeas = out.residuals.dual_infeasibility;
    tr.final_mu = out.residuals.duality_measure;
    tr.tolerance = out.tolerance;
    tr.converged = out.converged;
    double inner = 0;
    for (const auto& r : out.trace.records)
      inner += static_cast<double>(r.predictor_inner + r.corrector_inner);
    const auto calls = 2 * out.trace.records.size();
    tr.mean_inner_iters = calls ? inner / static_cast<double>(calls) : 0.0;
    if (!out.converged) tr.error = "iteration limit reached";
    if (plan.keep_traces) tr.trace = std::move(out.trace);
  } catch (const std::exception& e) {
    tr.converged = false;
    tr.error = e.what();
  }
  return tr;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  if (plan.repetitions < 1) throw InvalidArgumentError("repetitions must be >= 1");
  struct Point {
    Index n;
    double eps;
  };
  std::vector<Point> points;
  if (plan.regressor == Regressor::sqrt_n) {
    for (Index n : plan.n_grid) {
      if (n < 1) throw InvalidArgumentError("n grid entries must be positive");
      points.push_back({n, plan.eps_fixed});
    }
  } else {
    for (double e : plan.eps_grid) {
      if (!(e > 0)) throw InvalidArgumentError("eps grid entries must be positive");
      points.push_back({plan.n_fixed, e});
    }
  }
  if (points.empty()) throw InvalidArgumentError("experiment grid is empty");

  const std::size_t reps = static_cast<std::size_t>(plan.repetitions);
  const std::size_t total = points.size() * reps;
  ExperimentResult res;
  res.trials.resize(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const Point& p = points[i / reps];
      const std::uint64_t seed = plan.seed_base + static_cast<std::uint64_t>(i % reps);
      res.trials[i] = run_trial(plan, p.n, p.eps, seed);
    }
  };
  const unsigned threads =
      std::min<unsigned>(experiment_threads(plan.threads), static_cast<unsigned>(total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> xs, ys;
  for (std::size_t g = 0; g < points.size(); ++g) {
    GridSummary s;
    s.n = points[g].n;
    s.eps = points[g].eps;
    s.trials = plan.repetitions;
    std::vector<double> iters;
    double primal = 0, inner = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const TrialResult& t = res.trials[g * reps + r];
      s.regressor = t.regressor;
      if (!t.converged) {
        ++s.failures;
        continue;
      }
      iters.push_back(static_cast<double>(t.outer_iters));
      primal += t.primal_infeas;
      inner += t.mean_inner_iters;
    }
    if (!iters.empty()) {
      s.median = quantile(iters, 0.5);
      s.q10 = quantile(iters, 0.1);
      s.q90 = quantile(iters, 0.9);
      s.mean_primal_infeas = primal / static_cast<double>(iters.size());
      s.mean_inner_iters = inner / static_cast<double>(iters.size());
      xs.push_back(s.regressor);
      ys.push_back(s.median);
    }
    s.flagged = static_cast<double>(s.failures) > 0.1 * static_cast<double>(s.trials);
    res.flagged = res.flagged || s.flagged;
    res.grid.push_back(s);
  }
  if (xs.size() >= 3) {
    try {
      res.fit = fit_linearity(xs, ys);
    } catch (const InvalidArgumentError&) {
      res.fit.degenerate = true;
      res.flagged = true;
    }
  } else {
    res.fit.degenerate = true;
  }
  return res;
}

}  // namespace ipmlab
