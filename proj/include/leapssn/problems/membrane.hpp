#pragma once

// Moreau-Yosida penalised obstacle membrane on the unit square.
//
// Unknowns u on the (n-2)^2 interior nodes, h = 1/(n-1), A the 5-point
// Laplacian with stencil (4, -1) and zero Dirichlet data, b = h^2 g_load:
//
//   f(u) = 1/2 <Au, u> - <b, u> + gamma h^2/2 sum_i max(0, phi_i - u_i)^2
//
// measured in the energy metric R = A.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "leapssn/problem.hpp"

namespace leapssn {

/// Grid functions are indexed over interior nodes, row-major, node (i, j) at
/// ((i+1) h, (j+1) h).
struct MembraneSpec {
  int n = 33;
  double gamma = 1e2;
  Vector obstacle;
  Vector load;

  Index interior() const { return static_cast<Index>(n - 2) * (n - 2); }
  double h() const { return 1.0 / (n - 1); }

  void validate() const {
    require(n >= 3, "MembraneSpec: n must be >= 3");
    require(gamma >= 0.0 && std::isfinite(gamma), "MembraneSpec: gamma must be nonnegative");
    require(obstacle.size() == interior() && load.size() == interior(), "MembraneSpec: grid functions have wrong size");
    require(obstacle.allFinite() && load.allFinite(), "MembraneSpec: grid functions must be finite");
  }

  /// Samples g(x, y) at the interior nodes.
  static Vector sample(int n, const std::function<double(double, double)>& g) {
    const int m = n - 2;
    const double h = 1.0 / (n - 1);
    Vector v(static_cast<Index>(m) * m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) v[static_cast<Index>(j) * m + i] = g((i + 1) * h, (j + 1) * h);
    return v;
  }
};

inline SparseMatrix membrane_laplacian(int n) {
  const int m = n - 2;
  std::vector<Eigen::Triplet<double>> t;
  auto id = [m](int i, int j) { return static_cast<Index>(j) * m + i; };
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const Index c = id(i, j);
      t.emplace_back(c, c, 4.0);
      if (i > 0) t.emplace_back(c, id(i - 1, j), -1.0);
      if (i + 1 < m) t.emplace_back(c, id(i + 1, j), -1.0);
      if (j > 0) t.emplace_back(c, id(i, j - 1), -1.0);
      if (j + 1 < m) t.emplace_back(c, id(i, j + 1), -1.0);
    }
  }
  SparseMatrix A(static_cast<Index>(m) * m, static_cast<Index>(m) * m);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

/// Smallest eigenvalue of the (4, -1) Laplacian on an (n-2)^2 interior grid.
inline double membrane_laplacian_min_eigenvalue(int n) {
  constexpr double kPi = 3.14159265358979323846;
  return 4.0 * (1.0 - std::cos(kPi / (n - 1)));
}

/// Bound on ||f'(y) - f'(x) - H(x)(y-x)||_* / ||y-x|| in the A-metric.
inline double membrane_remainder_bound(const MembraneSpec& s) {
  return s.gamma * s.h() * s.h() / membrane_laplacian_min_eigenvalue(s.n);
}

/// Default instance: uniform downward load against a curved obstacle
/// below the membrane.
inline MembraneSpec membrane_default_spec(int n, double gamma) {
  constexpr double kPi = 3.14159265358979323846;
  MembraneSpec s;
  s.n = n;
  s.gamma = gamma;
  s.load = MembraneSpec::sample(n, [](double, double) { return -10.0; });
  s.obstacle = MembraneSpec::sample(n, [kPi](double x, double y) {
    return -0.35 - 0.1 * std::sin(kPi * x) * std::sin(kPi * y);
  });
  return s;
}

inline CompositeProblem membrane_problem(const MembraneSpec& s) {
  s.validate();
  const Index dim = s.interior();
  const double h2 = s.h() * s.h();
  const double gamma = s.gamma;
  const SparseMatrix A = membrane_laplacian(s.n);
  const Vector b = h2 * s.load;
  const Vector phi = s.obstacle;

  CompositeProblem p;
  p.name = "membrane";
  p.dim = dim;
  p.smooth.value = [A, b, phi, gamma, h2](const Vector& u) {
    const double pen = (phi - u).cwiseMax(0.0).squaredNorm();
    return 0.5 * u.dot(A * u) - b.dot(u) + 0.5 * gamma * h2 * pen;
  };
  p.smooth.gradient = [A, b, phi, gamma, h2](const Vector& u) -> Vector {
    return A * u - b - gamma * h2 * (phi - u).cwiseMax(0.0);
  };
  p.smooth.decrease = [A, b, phi, gamma, h2](const Vector& u1, const Vector& u2) {
    const Vector du = u1 - u2;
    double pen = 0.0;
    for (Index i = 0; i < du.size(); ++i) pen += hinge_sq_difference(phi[i] - u1[i], phi[i] - u2[i], -du[i]);
    return 0.5 * du.dot(A * (u1 + u2)) - b.dot(du) + 0.5 * gamma * h2 * pen;
  };
  p.smooth.newton_derivative = [A, phi, gamma, h2](const Vector& u) {
    SparseMatrix H = A;
    for (Index i = 0; i < u.size(); ++i)
      if (phi[i] - u[i] >= 0.0) H.coeffRef(i, i) += gamma * h2;
    return LinearOperator::sparse(std::move(H));
  };
  p.metric = MetricOperator::from_operator(LinearOperator::sparse(A));
  p.convex = true;
  p.newton_psd = true;
  p.constants.L = membrane_remainder_bound(s);
  p.box = TestBox{Vector::Zero(dim), 1.0};
  const int m = s.n - 2;
  p.kink_pair = [phi, m](const Vector&, SplitMix64& rng) {
    // Opposite sides of the obstacle along the lowest Laplacian mode, where
    // the energy-metric remainder ratio is largest.
    constexpr double kPi = 3.14159265358979323846;
    Vector v(phi.size());
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        v[static_cast<Index>(j) * m + i] = std::sin(kPi * (i + 1) / (m + 1)) * std::sin(kPi * (j + 1) / (m + 1));
    const double above = rng.uniform(1e-3, 0.5);
    const double below = rng.uniform(1e-3, 0.5);
    return std::pair<Vector, Vector>{phi + above * v, phi - below * v};
  };
  return p;
}

}  // namespace leapssn
