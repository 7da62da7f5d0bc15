#include <cstdlib>

#include "doctest.h"
#include "support.hpp"

using namespace ipmlab;
using namespace testing_support;

TEST_CASE("generated start is feasible and exactly central with mu0 = 20") {
  for (std::uint64_t seed : {0ull, 1ull, 123ull}) {
    const auto inst = generate_synthetic_lp<double>(20, 100, seed);
    const auto r = residuals(inst.lp, inst.start);
    CHECK(r.primal_infeasibility <= 1e-12 * inst.lp.b.norm());
    CHECK(r.dual_infeasibility <= 1e-12 * inst.lp.c.norm());
    CHECK(r.duality_measure == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(neighborhood_check(inst.start, 0.0).distance <= 1e-12);
    CHECK(inst.start.x.minCoeff() > 0);
    CHECK(inst.start.x.maxCoeff() <= 10);
    CHECK(inst.lp.a.cwiseAbs().maxCoeff() <= 10);
    CHECK(inst.start.y.cwiseAbs().maxCoeff() <= 10);
  }
}

TEST_CASE("generator is deterministic and refuses tall shapes") {
  const auto a = generate_synthetic_lp<double>(5, 9, 4);
  const auto b = generate_synthetic_lp<double>(5, 9, 4);
  const auto c = generate_synthetic_lp<double>(5, 9, 5);
  CHECK((a.lp.a - b.lp.a).norm() == 0.0);
  CHECK((a.start.x - b.start.x).norm() == 0.0);
  CHECK((a.lp.a - c.lp.a).norm() > 0.0);
  CHECK_THROWS_AS(generate_synthetic_lp<double>(9, 5, 1), InvalidArgumentError);
}

TEST_CASE("fit_linearity") {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto exact = fit_linearity(xs, {3, 5, 7, 9});
  CHECK(exact.slope == doctest::Approx(2));
  CHECK(exact.intercept == doctest::Approx(1));
  CHECK(exact.pearson_r == doctest::Approx(1));
  CHECK_FALSE(exact.degenerate);

  const auto flat = fit_linearity(xs, {4, 4, 4, 4});
  CHECK(flat.degenerate);
  CHECK(flat.slope == 0);
  CHECK(flat.pearson_r == 0);

  // sxy = 4, sxx = syy = 5
  CHECK(fit_linearity(xs, {1, 3, 2, 4}).pearson_r == doctest::Approx(0.8));
  CHECK_THROWS_AS(fit_linearity({1, 1, 1}, {1, 2, 3}), InvalidArgumentError);
  CHECK_THROWS_AS(fit_linearity({1, 2}, {1, 2}), InvalidArgumentError);
  CHECK_THROWS_AS(fit_linearity({1, 2, 3}, {1, 2}), DimensionError);
}

TEST_CASE("quantiles interpolate between order statistics") {
  const std::vector<double> v{5, 1, 4, 2, 3};
  CHECK(quantile(v, 0.5) == 3);
  CHECK(quantile(v, 0.0) == 1);
  CHECK(quantile(v, 1.0) == 5);
  CHECK(quantile(v, 0.1) == doctest::Approx(1.4));
  CHECK(quantile({7}, 0.9) == 7);
  CHECK_THROWS_AS(quantile({}, 0.5), InvalidArgumentError);
}

TEST_CASE("figure plans carry the caption parameters") {
  const auto p1 = plan_for_figure(1, 60, 0);
  CHECK(p1.m == 20);
  CHECK(p1.eps_fixed == 0.1);
  REQUIRE(p1.delta.has_value());
  CHECK(*p1.delta == 0.001);
  CHECK(p1.config.solver == SolverKind::perturb);
  CHECK(p1.n_grid == std::vector<Index>{40, 80, 160, 320, 640});
  CHECK(p1.repetitions == 60);

  const auto p2 = plan_for_figure(2, 60, 0);
  CHECK(p2.m == 30);
  CHECK(p2.n_fixed == 70);
  CHECK(p2.delta_equals_eps);
  CHECK(p2.eps_grid == std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4});

  const auto p3 = plan_for_figure(3, 60, 0);
  CHECK(p3.config.solver == SolverKind::pcg);
  CHECK(p3.config.sketch_cols == 60);
  CHECK(p3.config.zeta == 0.5);
  CHECK(plan_for_figure(4, 60, 0).regressor == Regressor::log_inv_eps);
  CHECK_THROWS_AS(plan_for_figure(5, 1, 0), InvalidArgumentError);
}

TEST_CASE("single point, single repetition plan reports that run") {
  ExperimentPlan plan = plan_for_figure(1, 1, 11);
  plan.n_grid = {60};
  const auto res = run_experiment(plan);
  REQUIRE(res.trials.size() == 1);
  REQUIRE(res.grid.size() == 1);
  CHECK(res.trials[0].converged);
  CHECK(res.grid[0].median == static_cast<double>(res.trials[0].outer_iters));
  CHECK(res.fit.degenerate);
  CHECK(res.trials[0].seed == 11);
}

TEST_CASE("trial seeds follow seed_base plus repetition index") {
  ExperimentPlan plan = plan_for_figure(2, 3, 100);
  plan.eps_grid = {0.1, 0.05, 0.02};
  plan.threads = 2;
  const auto res = run_experiment(plan);
  REQUIRE(res.trials.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) CHECK(res.trials[i].seed == 100 + i % 3);
  for (const auto& g : res.grid) {
    CHECK(g.q10 <= g.median);
    CHECK(g.median <= g.q90);
  }
  const auto again = run_experiment(plan);
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(again.trials[i].outer_iters == res.trials[i].outer_iters);
}

TEST_CASE("failures are recorded and flag the grid point") {
  ExperimentPlan plan = plan_for_figure(1, 2, 0);
  plan.n_grid = {40, 80, 160};
  plan.config.max_outer = 1;
  const auto res = run_experiment(plan);
  CHECK(res.flagged);
  for (const auto& t : res.trials) {
    CHECK_FALSE(t.converged);
    CHECK_FALSE(t.error.empty());
  }
  for (const auto& g : res.grid) CHECK(g.flagged);
}

TEST_CASE("IPM_LAB_THREADS caps the worker count") {
  setenv("IPM_LAB_THREADS", "1", 1);
  CHECK(experiment_threads(8) == 1);
  setenv("IPM_LAB_THREADS", "junk", 1);
  CHECK(experiment_threads(3) == 3);
  unsetenv("IPM_LAB_THREADS");
  CHECK(experiment_threads(2) == 2);
}
