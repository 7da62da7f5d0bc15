#include "doctest.h"
#include "support.hpp"

using namespace ipmlab;
using namespace testing_support;

TEST_CASE("hadamard multiplies entrywise and checks lengths") {
  Vector<double> u(3), v(3);
  u << 1, -2, 3;
  v << 4, 5, -6;
  const Vector<double> h = hadamard(u, v);
  CHECK(h(0) == 4);
  CHECK(h(1) == -10);
  CHECK(h(2) == -18);
  CHECK_THROWS_AS(hadamard(u, Vector<double>(2)), DimensionError);
}

TEST_CASE("thin_svd reconstructs and matches power iteration") {
  Rng rng(7, "linalg");
  for (Index r : {3, 5, 8}) {
    const DenseMatrix<double> m = random_matrix(r, 11, rng);
    const auto svd = thin_svd(m);
    CHECK(svd.size() == r);
    const DenseMatrix<double> back = svd.u * svd.sigma.asDiagonal() * svd.vt;
    CHECK((back - m).norm() <= 1e-12 * m.norm());
    CHECK((svd.u.transpose() * svd.u - DenseMatrix<double>::Identity(r, r)).norm() < 1e-12);
    CHECK((svd.vt * svd.vt.transpose() - DenseMatrix<double>::Identity(r, r)).norm() < 1e-12);
    for (Index i = 1; i < r; ++i) CHECK(svd.sigma(i) <= svd.sigma(i - 1));
    CHECK(svd.sigma_max() == doctest::Approx(power_norm(m)).epsilon(1e-9));
    CHECK(spectral_norm(m) == doctest::Approx(power_norm(m)).epsilon(1e-9));
  }
}

TEST_CASE("thin_svd rejects non-finite input") {
  DenseMatrix<double> m = DenseMatrix<double>::Ones(2, 3);
  m(1, 2) = std::nan("");
  CHECK_THROWS_AS(thin_svd(m), NumericalError);
}

TEST_CASE("spectral norm of a diagonal matrix") {
  DenseMatrix<double> d = DenseMatrix<double>::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = -5;
  d(2, 2) = 1;
  CHECK(spectral_norm(d) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("SpdFactor agrees with Gaussian elimination") {
  Rng rng(11, "linalg");
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix<double> b = random_matrix(6, 9, rng);
    const DenseMatrix<double> m = b * b.transpose();
    const Vector<double> rhs = random_vector(6, rng);
    const SpdFactor<double> f(m);
    const Vector<double> x = f.solve(rhs);
    const Vector<double> ref = ge_solve(m, rhs);
    CHECK((x - ref).norm() <= 1e-10 * (1 + ref.norm()));
    CHECK(f.inverse_energy_norm(rhs) ==
          doctest::Approx(std::sqrt(rhs.dot(ref))).epsilon(1e-10));
    CHECK((solve_spd(m, rhs) - ref).norm() <= 1e-10 * (1 + ref.norm()));
  }
}

TEST_CASE("SpdFactor reports the failing pivot of an indefinite matrix") {
  DenseMatrix<double> m = DenseMatrix<double>::Identity(3, 3);
  m(2, 2) = -1;
  try {
    SpdFactor<double> f(m);
    FAIL("expected a factorization error");
  } catch (const FactorizationError& e) {
    CHECK(e.pivot() == 2);
  }
  CHECK_THROWS_AS(SpdFactor<double>(DenseMatrix<double>::Ones(2, 3)), DimensionError);
}

TEST_CASE("energy norm") {
  DenseMatrix<double> m(2, 2);
  m << 2, 1, 1, 3;
  Vector<double> x(2);
  x << 1, -1;
  CHECK(energy_norm(x, m) == doctest::Approx(std::sqrt(3.0)));
  DenseMatrix<double> neg = -DenseMatrix<double>::Identity(2, 2);
  CHECK_THROWS_AS(energy_norm(x, neg), NotPositiveDefiniteError);
  CHECK(energy_norm(Vector<double>::Zero(2), m) == 0.0);
}

TEST_CASE("pinv_apply gives the least-norm solution") {
  Rng rng(3, "linalg");
  const DenseMatrix<double> a = random_matrix(4, 10, rng);
  const Vector<double> b = random_vector(4, rng);
  const Vector<double> x = pinv_apply(thin_svd(a), b);
  const Vector<double> ref = a.transpose() * ge_solve(a * a.transpose(), b);
  CHECK((x - ref).norm() <= 1e-10 * ref.norm());
  CHECK_THROWS_AS(pinv_apply(thin_svd(a), Vector<double>(3)), DimensionError);
}

TEST_CASE("pinv_apply drops null directions") {
  DenseMatrix<double> a = DenseMatrix<double>::Zero(2, 3);
  a(0, 0) = 2;
  Vector<double> b(2);
  b << 4, 7;
  const Vector<double> x = pinv_apply(thin_svd(a), b);
  CHECK(x(0) == doctest::Approx(2.0));
  CHECK(x(1) == 0.0);
  CHECK(x(2) == 0.0);
}
