#pragma once

// Small analytic problems: quadratics, the two-dimensional partly smooth
// example, a rank-deficient least-squares problem with a non-isolated
// solution set, and the chained Rosenbrock function.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "leapssn/problem.hpp"

namespace leapssn {

/// f(x) = 1/2 x'Qx - b'x with symmetric Q, Euclidean metric, optional psi.
inline CompositeProblem quadratic(Matrix Q, Vector b, NonsmoothPart psi = NonsmoothPart::zero()) {
  require(Q.rows() == Q.cols() && Q.rows() == b.size() && b.size() > 0, "quadratic: shape mismatch");
  require(Q.isApprox(Q.transpose(), 1e-12), "quadratic: Q must be symmetric");
  const Index n = b.size();
  CompositeProblem p;
  p.name = "quadratic";
  p.dim = n;
  const LinearOperator H = LinearOperator::dense(Q);
  p.smooth.value = [Q, b](const Vector& x) { return 0.5 * x.dot(Q * x) - b.dot(x); };
  p.smooth.gradient = [Q, b](const Vector& x) -> Vector { return Q * x - b; };
  p.smooth.decrease = [Q, b](const Vector& x, const Vector& y) {
    const Vector d = x - y;
    return 0.5 * d.dot(Q * (x + y)) - b.dot(d);
  };
  p.smooth.newton_derivative = [H](const Vector&) { return H; };
  p.metric = MetricOperator::identity(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q);
  const double lmin = eig.eigenvalues().minCoeff();
  p.newton_psd = lmin >= 0.0;
  p.convex = p.newton_psd;
  p.constants.L = 0.0;
  if (psi.is_zero() && lmin > 0.0) {
    KnownOptimum opt;
    opt.x = Q.ldlt().solve(b);
    opt.F = 0.5 * opt.x.dot(Q * opt.x) - b.dot(opt.x);
    p.known_optimum = opt;
    p.constants.mu_pl = lmin;
  }
  p.nonsmooth = std::move(psi);
  p.box = TestBox{Vector::Zero(n), 10.0};
  return p;
}

/// f = 1/2 ||x||^2 in n dimensions.
inline CompositeProblem half_norm_squared(Index n) {
  CompositeProblem p = quadratic(Matrix::Identity(n, n), Vector::Zero(n));
  p.name = "half_norm_squared";
  return p;
}

/// Diameter of {F <= F(x0)} for a strictly convex quadratic with psi == 0.
inline double quadratic_sublevel_diameter(const Matrix& Q, const Vector& b, const Vector& x0) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q);
  const double lmin = eig.eigenvalues().minCoeff();
  require(lmin > 0.0, "quadratic_sublevel_diameter: Q must be positive definite");
  const Vector xs = Q.ldlt().solve(b);
  const double gap = 0.5 * (x0 - xs).dot(Q * (x0 - xs));
  return 2.0 * std::sqrt(2.0 * gap / lmin);
}

/// f(x) = ||x||^2 + max(0, x1)^2, psi(x) = |x1|. Unique minimiser at the
/// origin with 0 in the relative interior of dF(0) = [-1, 1] x {0}.
inline CompositeProblem partial_smooth_2d() {
  CompositeProblem p;
  p.name = "partial_smooth_2d";
  p.dim = 2;
  p.smooth.value = [](const Vector& x) {
    const double a = std::max(0.0, x[0]);
    return x.squaredNorm() + a * a;
  };
  p.smooth.gradient = [](const Vector& x) -> Vector {
    return Vector{{2.0 * x[0] + 2.0 * std::max(0.0, x[0]), 2.0 * x[1]}};
  };
  p.smooth.newton_derivative = [](const Vector& x) {
    Matrix H = Matrix::Zero(2, 2);
    H(0, 0) = 2.0 + (x[0] >= 0.0 ? 2.0 : 0.0);
    H(1, 1) = 2.0;
    return LinearOperator::dense(std::move(H));
  };
  p.nonsmooth = NonsmoothPart::weighted_l1(Vector{{1.0, 0.0}});
  p.metric = MetricOperator::identity(2);
  p.known_optimum = KnownOptimum{Vector::Zero(2), 0.0};
  p.constants.L = 2.0;
  p.constants.mu_pl = 2.0;
  p.convex = true;
  p.newton_psd = true;
  p.box = TestBox{Vector::Zero(2), 10.0};
  p.kink_pair = [](const Vector& x, SplitMix64& rng) {
    Vector y = x;
    const double s = rng.uniform(0.05, 2.0);
    y[0] = x[0] != 0.0 ? -s * x[0] : -s * 1e-3;
    return std::pair<Vector, Vector>{x, y};
  };
  return p;
}

/// f(x) = 1/2 ||B(x - xbar)||^2 with rank(B) = rank < n. The solution set
/// xbar + ker(B) is an affine subspace of dimension n - rank.
inline CompositeProblem rank_deficient_ls(Index n, Index rank, std::uint64_t seed) {
  require(rank >= 1 && rank < n, "rank_deficient_ls: need 1 <= rank < n");
  SplitMix64 rng(seed);
  Matrix U(n, rank);
  Matrix V(rank, n);
  for (Index j = 0; j < rank; ++j)
    for (Index i = 0; i < n; ++i) U(i, j) = rng.normal();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < rank; ++i) V(i, j) = rng.normal();
  const Matrix B = (U * V) / std::sqrt(static_cast<double>(n));
  const Vector xbar = rng.normal_vector(n);
  const Matrix BtB = B.transpose() * B;

  // Range of B^T from the SVD of B; the PL constant is the smallest nonzero
  // squared singular value.
  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeFullV);
  const Matrix Vr = svd.matrixV().leftCols(rank);
  const double sigma_min = svd.singularValues()[rank - 1];

  CompositeProblem p;
  p.name = "rank_deficient_ls";
  p.dim = n;
  p.smooth.value = [B, xbar](const Vector& x) { return 0.5 * (B * (x - xbar)).squaredNorm(); };
  p.smooth.gradient = [BtB, xbar](const Vector& x) -> Vector { return BtB * (x - xbar); };
  p.smooth.decrease = [B, xbar](const Vector& x, const Vector& y) {
    return 0.5 * (B * (x - y)).dot(B * (x + y - 2.0 * xbar));
  };
  const LinearOperator H = LinearOperator::dense(BtB);
  p.smooth.newton_derivative = [H](const Vector&) { return H; };
  p.metric = MetricOperator::identity(n);
  p.known_optimum = KnownOptimum{xbar, 0.0};
  p.constants.L = 0.0;
  p.constants.mu_pl = sigma_min * sigma_min;
  p.convex = true;
  p.newton_psd = true;
  p.box = TestBox{xbar, 2.0};
  p.project_to_solution_set = [Vr, xbar](const Vector& x) -> Vector {
    const Vector e = x - xbar;
    return x - Vr * (Vr.transpose() * e);
  };
  return p;
}

/// Chained Rosenbrock, sum over pairs (x_{2i}, x_{2i+1}) of
/// 100 (x_{2i+1} - x_{2i}^2)^2 + (1 - x_{2i})^2. Exact (indefinite) Hessian.
inline CompositeProblem smooth_nonconvex(Index n) {
  require(n >= 2 && n % 2 == 0, "smooth_nonconvex: n must be even and >= 2");
  CompositeProblem p;
  p.name = "smooth_nonconvex";
  p.dim = n;
  p.smooth.value = [n](const Vector& x) {
    double f = 0.0;
    for (Index i = 0; i + 1 < n; i += 2) {
      const double a = x[i + 1] - x[i] * x[i];
      const double c = 1.0 - x[i];
      f += 100.0 * a * a + c * c;
    }
    return f;
  };
  p.smooth.gradient = [n](const Vector& x) -> Vector {
    Vector g(n);
    for (Index i = 0; i + 1 < n; i += 2) {
      const double a = x[i + 1] - x[i] * x[i];
      g[i] = -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
      g[i + 1] = 200.0 * a;
    }
    return g;
  };
  p.smooth.newton_derivative = [n](const Vector& x) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(2 * n));
    for (Index i = 0; i + 1 < n; i += 2) {
      t.emplace_back(i, i, 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0);
      t.emplace_back(i, i + 1, -400.0 * x[i]);
      t.emplace_back(i + 1, i, -400.0 * x[i]);
      t.emplace_back(i + 1, i + 1, 200.0);
    }
    SparseMatrix H(n, n);
    H.setFromTriplets(t.begin(), t.end());
    return LinearOperator::sparse(std::move(H));
  };
  p.metric = MetricOperator::identity(n);
  p.known_optimum = KnownOptimum{Vector::Ones(n), 0.0};
  p.box = TestBox{Vector::Constant(n, 0.5), 1.0};
  return p;
}

}  // namespace leapssn
