#include "doctest.h"
#include "support.hpp"

using namespace ipmlab;
using namespace testing_support;

namespace {

LinearProgram<double> small_lp() {
  LinearProgram<double> lp;
  lp.a.resize(2, 3);
  lp.a << 1, 1, 1, 1, -1, 0;
  lp.b.resize(2);
  lp.b << 3, 0;
  lp.c.resize(3);
  lp.c << 1, 2, 3;
  return lp;
}

}  // namespace

TEST_CASE("validate accepts a full-rank short-and-fat LP") {
  CHECK_NOTHROW(validate(small_lp()));
}

TEST_CASE("validate rejects tall and rank-deficient A with a routing message") {
  LinearProgram<double> tall;
  tall.a = DenseMatrix<double>::Ones(3, 2);
  tall.a(0, 0) = 2;
  tall.b = Vector<double>::Zero(3);
  tall.c = Vector<double>::Zero(2);
  try {
    validate(tall);
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    CHECK(std::string(e.what()).find("dual") != std::string::npos);
  }

  LinearProgram<double> dup = small_lp();
  dup.a.row(1) = 2 * dup.a.row(0);
  try {
    validate(dup);
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    CHECK(std::string(e.what()).find("low-rank") != std::string::npos);
    CHECK(e.ratio() <= 1e-8);
  }
  CHECK_NOTHROW(validate(dup, false));
}

TEST_CASE("validate checks shapes and finiteness") {
  auto lp = small_lp();
  lp.b.resize(3);
  CHECK_THROWS_AS(validate(lp), DimensionError);
  lp = small_lp();
  lp.c(1) = INFINITY;
  CHECK_THROWS_AS(validate(lp), NumericalError);
}

TEST_CASE("neighborhood distance by hand") {
  PrimalDualPoint<double> p;
  p.x.resize(2);
  p.s.resize(2);
  p.y = Vector<double>::Zero(2);
  p.x << 1, 2;
  p.s << 3, 1;  // x∘s = (3, 2), μ = 2.5, distance = √0.5
  CHECK(duality_measure(p) == 2.5);
  const auto nb = neighborhood_check(p, 0.25);
  CHECK(nb.distance == doctest::Approx(std::sqrt(0.5)));
  CHECK_FALSE(nb.member);
  CHECK(neighborhood_check(p, 0.5).member);
  p.s(0) = 0;
  CHECK_FALSE(neighborhood_check(p, 10.0).member);
}

TEST_CASE("interior checks name the offending index") {
  PrimalDualPoint<double> p;
  p.x = Vector<double>::Ones(4);
  p.s = Vector<double>::Ones(4);
  p.y = Vector<double>::Zero(1);
  CHECK(first_non_interior(p) == -1);
  p.s(2) = -1e-3;
  CHECK(first_non_interior(p) == 2);
  try {
    require_interior(p);
    FAIL("expected LeftInteriorError");
  } catch (const LeftInteriorError& e) {
    CHECK(e.index() == 2);
    CHECK(std::string(e.what()).rfind("left_interior", 0) == 0);
  }
  p.s(2) = 1;
  p.x(0) = std::nan("");
  CHECK(first_non_interior(p) == 0);
}

TEST_CASE("residuals of a hand-built point") {
  const auto lp = small_lp();
  PrimalDualPoint<double> p;
  p.x = Vector<double>::Ones(3);
  p.y = Vector<double>::Zero(2);
  p.s = lp.c;
  const auto r = residuals(lp, p);
  CHECK(r.primal_infeasibility == doctest::Approx(0.0));
  CHECK(r.dual_infeasibility == doctest::Approx(0.0));
  CHECK(r.duality_measure == doctest::Approx(2.0));
  p.x(0) = 2;  // Ax − b = (1, 1)
  CHECK(residuals(lp, p).primal_infeasibility == doctest::Approx(std::sqrt(2.0)));
  p.y = Vector<double>::Zero(1);
  CHECK_THROWS_AS(residuals(lp, p), DimensionError);
}
