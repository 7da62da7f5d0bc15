#include "doctest.h"
#include "support.hpp"

using namespace ipmlab;
using namespace testing_support;

namespace {

PcgOptions sketch_opts(Index cols, std::uint64_t seed) {
  PcgOptions o;
  o.sketch_cols = cols;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("pcg_solve at a tight target matches the direct solve") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_synthetic_lp<double>(10, 200, seed);
    const auto pc = build_preconditioner(inst.lp, inst.start, sketch_opts(60, seed));
    const Vector<double> p = build_p(inst.lp, inst.start, 0.0);
    const auto rep = pcg_solve(pc, inst.lp, inst.start, p, 1e-12, 500);
    const Vector<double> ref = ge_solve(build_normal_matrix(inst.lp, inst.start), p);
    CHECK((rep.dy - ref).norm() <= 1e-8 * ref.norm());
    CHECK(rep.inner_iterations < 60);
  }
}

TEST_CASE("exact preconditioner converges in one iteration") {
  const auto inst = generate_synthetic_lp<double>(8, 40, 3);
  PcgOptions o;
  o.identity_sketch = true;
  const auto pc = build_preconditioner(inst.lp, inst.start, o);
  const Vector<double> p = build_p(inst.lp, inst.start, 1.0);
  const auto rep = pcg_solve(pc, inst.lp, inst.start, p, 1e-10, 10);
  CHECK(rep.inner_iterations == 1);
}

TEST_CASE("preconditioner square roots are inverse to each other") {
  const auto inst = generate_synthetic_lp<double>(6, 120, 1);
  const auto pc = build_preconditioner(inst.lp, inst.start, sketch_opts(50, 1));
  Rng rng(2);
  const Vector<double> v = random_vector(6, rng);
  CHECK((pc.apply_sqrt(pc.apply_inv_sqrt(v)) - v).norm() <= 1e-10 * v.norm());
  // Q = (ADW)(ADW)ᵀ, so ‖Q^{1/2}v‖² = vᵀQv.
  const DenseMatrix<double> ad =
      inst.lp.a * scaling_d2(inst.start).cwiseSqrt().asDiagonal();
  const DenseMatrix<double> adw = apply_right(ad, pc.source_sketch);
  CHECK(pc.apply_sqrt(v).squaredNorm() ==
        doctest::Approx(v.dot(adw * (adw.transpose() * v))).epsilon(1e-10));
}

TEST_CASE("Solve meets its stopping rule and the plain-residual tolerance") {
  const auto inst = generate_synthetic_lp<double>(20, 300, 5);
  for (double delta : {1e-2, 1e-4}) {
    const auto rep = solve(inst.lp, inst.start, 0.0, delta, sketch_opts(60, 5));
    CHECK(rep.preconditioned_residual <= delta / std::sqrt(1.25) * (1 + 1e-12));
    CHECK(rep.plain_residual <= delta * (1 + 1e-9));
  }
}

TEST_CASE("Solve^v returns a consistent pair with a small v") {
  const auto inst = generate_synthetic_lp<double>(20, 300, 6);
  const double delta = 1e-3;
  const auto rep = solve_v(inst.lp, inst.start, 1.0, delta, sketch_opts(60, 6));
  REQUIRE(rep.v.has_value());
  CHECK(rep.v->norm() <= delta);
  const Vector<double> lhs =
      normal_matvec(inst.lp.a, scaling_d2(inst.start), rep.dy);
  const Vector<double> rhs =
      build_p(inst.lp, inst.start, 1.0) + inst.lp.a * rep.v->cwiseQuotient(inst.start.s);
  CHECK((lhs - rhs).norm() <= 1e-9 * (1 + rhs.norm()));
}

TEST_CASE("correction vector is zero for an exact solve") {
  const auto inst = generate_synthetic_lp<double>(5, 50, 2);
  const auto pc = build_preconditioner(inst.lp, inst.start, sketch_opts(30, 2));
  CHECK(correction_vector(pc, inst.start, Vector<double>(Vector<double>::Zero(5))).norm() == 0.0);
}

TEST_CASE("sketch wider than n falls back to the identity") {
  const auto inst = generate_synthetic_lp<double>(20, 40, 1);
  const auto pc = build_preconditioner(inst.lp, inst.start, PcgOptions{});
  CHECK(pc.fell_back_to_identity);
  CHECK(pc.source_sketch.identity);
}

TEST_CASE("inner cap raises ConvergenceError with history") {
  const auto inst = generate_synthetic_lp<double>(20, 300, 9);
  PcgOptions o = sketch_opts(25, 9);
  o.max_iters = 1;
  try {
    solve(inst.lp, inst.start, 0.0, 1e-10, o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.history().size() >= 2);
  }
}

TEST_CASE("default inner cap") {
  // δ/scale with scale = √(2nμ) at σ = 0: 1e-3/√(2·100·1) → ⌈log(7.07e-5)/log 0.5⌉ = 14
  CHECK(default_inner_cap(1e-3, 0.0, 100, 1.0, 0.5) == 140);
  CHECK(default_inner_cap(100.0, 0.0, 1, 1.0, 0.5) == 10);
  CHECK(default_inner_cap(0.0, 0.0, 10, 1.0, 0.5) == 10);
}

TEST_CASE("perturbation Solve^v draws v of norm delta and solves exactly") {
  const auto inst = generate_synthetic_lp<double>(6, 30, 4);
  const auto rep = perturbation_solve_v(inst.lp, inst.start, 0.0, 0.01, 77);
  REQUIRE(rep.v.has_value());
  CHECK(rep.v->norm() == doctest::Approx(0.01).epsilon(1e-12));
  const Vector<double> rhs =
      build_p(inst.lp, inst.start, 0.0) + inst.lp.a * rep.v->cwiseQuotient(inst.start.s);
  const Vector<double> ref = ge_solve(build_normal_matrix(inst.lp, inst.start), rhs);
  CHECK((rep.dy - ref).norm() <= 1e-10 * ref.norm());
  const auto again = perturbation_solve_v(inst.lp, inst.start, 0.0, 0.01, 77);
  CHECK((*again.v - *rep.v).norm() == 0.0);
}
