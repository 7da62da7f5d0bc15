#pragma once

// Shared fixtures and independent oracles for the tests. The oracles avoid
// the library kernels: plain Gaussian elimination, power iteration and the
// full Newton block system.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <unistd.h>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "ipmlab/harness.hpp"
#include "ipmlab/reductions.hpp"

namespace testing_support {

using ipmlab::DenseMatrix;
using ipmlab::Index;
using ipmlab::LinearProgram;
using ipmlab::PrimalDualPoint;
using ipmlab::Rng;
using ipmlab::Vector;

inline DenseMatrix<double> random_matrix(Index r, Index c, Rng& rng) {
  DenseMatrix<double> m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-1, 1);
  return m;
}

inline Vector<double> random_vector(Index n, Rng& rng, double lo = -1, double hi = 1) {
  Vector<double> v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

/// Gaussian elimination with partial pivoting on a copy of m.
inline Vector<double> ge_solve(DenseMatrix<double> m, Vector<double> b) {
  const Index n = m.rows();
  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    for (Index i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    if (piv != k) {
      m.row(k).swap(m.row(piv));
      std::swap(b(k), b(piv));
    }
    for (Index i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      for (Index j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      b(i) -= f * b(k);
    }
  }
  Vector<double> x(n);
  for (Index i = n - 1; i >= 0; --i) {
    double s = b(i);
    for (Index j = i + 1; j < n; ++j) s -= m(i, j) * x(j);
    x(i) = s / m(i, i);
  }
  return x;
}

/// Largest singular value by power iteration on MᵀM.
inline double power_norm(const DenseMatrix<double>& m, int iters = 2000) {
  Vector<double> v = Vector<double>::Ones(m.cols()).normalized();
  double lambda = 0;
  for (int t = 0; t < iters; ++t) {
    Vector<double> w = m.transpose() * (m * v);
    const double nw = w.norm();
    if (nw == 0) return 0;
    lambda = nw;
    v = w / nw;
  }
  return std::sqrt(lambda);
}

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
inline double symmetric_power_norm(const DenseMatrix<double>& m, int iters = 3000) {
  Vector<double> v = Vector<double>::Ones(m.cols());
  for (Index i = 0; i < v.size(); ++i) v(i) += 0.01 * static_cast<double>(i);
  v.normalize();
  double lambda = 0;
  for (int t = 0; t < iters; ++t) {
    Vector<double> w = m * v;
    const double nw = w.norm();
    if (nw == 0) return 0;
    lambda = nw;
    v = w / nw;
  }
  return lambda;
}

/// Exact Newton direction from the full (2n+m) block system
///   A dx = 0,  Aᵀdy + ds = 0,  S dx + X ds = σμ1 − x∘s.
struct KktStep {
  Vector<double> dx, dy, ds;
};

inline KktStep kkt_oracle(const LinearProgram<double>& lp, const PrimalDualPoint<double>& pt,
                          double sigma) {
  const Index m = lp.m(), n = lp.n(), N = 2 * n + m;
  DenseMatrix<double> k = DenseMatrix<double>::Zero(N, N);
  Vector<double> rhs = Vector<double>::Zero(N);
  const double mu = pt.x.dot(pt.s) / static_cast<double>(n);
  k.block(0, 0, m, n) = lp.a;
  k.block(m, n, n, m) = lp.a.transpose();
  k.block(m, n + m, n, n) = DenseMatrix<double>::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    k(m + n + i, i) = pt.s(i);
    k(m + n + i, n + m + i) = pt.x(i);
    rhs(m + n + i) = sigma * mu - pt.x(i) * pt.s(i);
  }
  const Vector<double> sol = ge_solve(k, rhs);
  return {sol.head(n), sol.segment(n, m), sol.tail(n)};
}

/// Feasible LP and point with ‖x∘s − μ1‖ = θμ exactly: x∘s = μ(1 + θu) for
/// a mean-zero unit vector u, A random, b = Ax, c = Aᵀy + s.
inline std::pair<LinearProgram<double>, PrimalDualPoint<double>> instance_at_distance(
    Index m, Index n, double theta, std::uint64_t seed, double mu = 1.0) {
  Rng rng(seed, "test-instance");
  LinearProgram<double> lp;
  lp.a = random_matrix(m, n, rng);
  PrimalDualPoint<double> pt;
  pt.x = random_vector(n, rng, 0.2, 5.0);
  pt.y = random_vector(m, rng);
  Vector<double> u = random_vector(n, rng);
  u.array() -= u.mean();
  if (u.norm() > 0) u.normalize();
  Vector<double> w = (mu * (1.0 + theta * u.array())).matrix();
  pt.s = w.cwiseQuotient(pt.x);
  lp.b = lp.a * pt.x;
  lp.c = lp.a.transpose() * pt.y + pt.s;
  return {std::move(lp), std::move(pt)};
}

/// Rank-2 LP (4×8) with a planted optimal vertex. x0 > 0 is random with
/// b = Ax0; the vertex x* uses two columns, s* vanishes on them and c =
/// Aᵀy* + s*, so x* is optimal with objective cᵀx*. The start is centred
/// from a feasible interior point near (x0, y*, s*).
struct PlantedLowRank {
  LinearProgram<double> lp;
  PrimalDualPoint<double> start;
  Vector<double> x_star;
  double objective = 0;
};

inline PlantedLowRank planted_low_rank(std::uint64_t seed) {
  Rng rng(seed, "planted");
  const Index m = 4, n = 8;
  PlantedLowRank out;
  for (;;) {
    const DenseMatrix<double> b = random_matrix(m, 2, rng);
    const DenseMatrix<double> c = random_matrix(2, n, rng);
    out.lp.a = b * c;
    const Vector<double> x0 = random_vector(n, rng, 0.5, 2.0);
    out.lp.b = out.lp.a * x0;
    // Search a feasible basis among column pairs of C: C_B x_B = C x0, x_B ≥ 0.
    const Vector<double> cx0 = c * x0;
    Index bi = -1, bj = -1;
    Vector<double> xb;
    for (Index i = 0; i < n && bi < 0; ++i)
      for (Index j = i + 1; j < n && bi < 0; ++j) {
        DenseMatrix<double> cb(2, 2);
        cb.col(0) = c.col(i);
        cb.col(1) = c.col(j);
        if (std::abs(cb.determinant()) < 1e-3) continue;
        const Vector<double> t = ge_solve(cb, cx0);
        if (t.minCoeff() > 1e-3) {
          bi = i;
          bj = j;
          xb = t;
        }
      }
    if (bi < 0) continue;
    out.x_star = Vector<double>::Zero(n);
    out.x_star(bi) = xb(0);
    out.x_star(bj) = xb(1);
    const Vector<double> y_star = random_vector(m, rng);
    Vector<double> s_star = random_vector(n, rng, 0.5, 2.0);
    s_star(bi) = 0;
    s_star(bj) = 0;
    out.lp.c = out.lp.a.transpose() * y_star + s_star;
    out.objective = out.lp.c.dot(out.x_star);

    // Interior dual point: shift y* along a direction with A_Bᵀd = 1.
    DenseMatrix<double> ab(m, 2);
    ab.col(0) = out.lp.a.col(bi);
    ab.col(1) = out.lp.a.col(bj);
    const Vector<double> d = ab * ge_solve(ab.transpose() * ab, Vector<double>::Ones(2));
    double t = 0.5;
    Vector<double> s0 = s_star + t * (out.lp.a.transpose() * d);
    while (s0.minCoeff() <= 0 && t > 1e-6) {
      t /= 2;
      s0 = s_star + t * (out.lp.a.transpose() * d);
    }
    if (s0.minCoeff() <= 0) continue;
    PrimalDualPoint<double> pt{x0, y_star - t * d, s0};
    try {
      out.start = ipmlab::center(out.lp, pt);
    } catch (const ipmlab::Error&) {
      continue;
    }
    return out;
  }
}

/// Minimum of cᵀx over vertices of {Ax = b, x ≥ 0}. A has rank 2, so every
/// vertex has at most two nonzeros and trying all column pairs suffices.
inline double enumerate_vertices(const LinearProgram<double>& lp) {
  double best = INFINITY;
  const Index n = lp.n();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      DenseMatrix<double> ab(lp.m(), 2);
      ab.col(0) = lp.a.col(i);
      ab.col(1) = lp.a.col(j);
      const DenseMatrix<double> g = ab.transpose() * ab;
      if (std::abs(g.determinant()) < 1e-10 * g.norm() * g.norm()) continue;
      const Vector<double> t = ge_solve(g, ab.transpose() * lp.b);
      if ((ab * t - lp.b).norm() > 1e-8 * (1 + lp.b.norm())) continue;
      if (t.minCoeff() < -1e-12) continue;
      best = std::min(best, lp.c(i) * t(0) + lp.c(j) * t(1));
    }
  return best;
}

/// Tall LP (m > n) with b = Ax0 for x0 > 0, c = Aᵀy0 + s0, x0∘s0 = μ1.
struct TallInstance {
  LinearProgram<double> lp;
  PrimalDualPoint<double> start;
};

inline TallInstance tall_instance(Index m, Index n, std::uint64_t seed, double mu = 1.0) {
  Rng rng(seed, "tall");
  TallInstance out;
  out.lp.a = random_matrix(m, n, rng);
  out.start.x = random_vector(n, rng, 0.5, 2.0);
  out.start.y = random_vector(m, rng);
  out.start.s = (mu * out.start.x.cwiseInverse()).eval();
  out.lp.b = out.lp.a * out.start.x;
  out.lp.c = out.lp.a.transpose() * out.start.y + out.start.s;
  return out;
}

/// Temporary directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("ipmlab_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testing_support
