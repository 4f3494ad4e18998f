#pragma once

// Predual of TV denoising on a staggered grid over the unit square.
//
// p = (p1, p2) with p1 on interior vertical faces ((W-1) x H values) and p2
// on interior horizontal faces (W x (H-1) values); boundary fluxes are zero.
// With h = 1/W and D the cell-centred divergence,
//
//   f(p) = h^2/2 ||Dp + omega||^2
//        + gamma h^2/2 sum_i [max(0, p_i - delta)^2 + min(0, p_i + delta)^2]
//        + eps ||G p||^2
//
// where G takes differences between neighbouring faces of the same family.
// The restored image is u = Dp + omega.

#include <cmath>
#include <utility>
#include <vector>

#include "leapssn/problem.hpp"
#include "leapssn/problems/image.hpp"

namespace leapssn {

struct TvGrid {
  int width = 0;
  int height = 0;
  Index faces_x() const { return static_cast<Index>(width - 1) * height; }
  Index faces_y() const { return static_cast<Index>(width) * (height - 1); }
  Index unknowns() const { return faces_x() + faces_y(); }
  Index cells() const { return static_cast<Index>(width) * height; }
  double h() const { return 1.0 / width; }
  /// Face between cells (i, j) and (i+1, j).
  Index fx(int i, int j) const { return static_cast<Index>(j) * (width - 1) + i; }
  /// Face between cells (i, j) and (i, j+1).
  Index fy(int i, int j) const { return faces_x() + static_cast<Index>(j) * width + i; }
  Index cell(int i, int j) const { return static_cast<Index>(j) * width + i; }
};

/// Cell-centred divergence, cells x faces, scaled by 1/h.
inline SparseMatrix tv_divergence(const TvGrid& g) {
  std::vector<Eigen::Triplet<double>> t;
  const double s = 1.0 / g.h();
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const Index c = g.cell(i, j);
      if (i < g.width - 1) t.emplace_back(c, g.fx(i, j), s);
      if (i > 0) t.emplace_back(c, g.fx(i - 1, j), -s);
      if (j < g.height - 1) t.emplace_back(c, g.fy(i, j), s);
      if (j > 0) t.emplace_back(c, g.fy(i, j - 1), -s);
    }
  }
  SparseMatrix D(g.cells(), g.unknowns());
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

/// Unscaled differences between adjacent faces of the same family.
inline SparseMatrix tv_face_gradient(const TvGrid& g) {
  std::vector<Eigen::Triplet<double>> t;
  Index row = 0;
  auto diff = [&](Index a, Index b) {
    t.emplace_back(row, a, 1.0);
    t.emplace_back(row, b, -1.0);
    ++row;
  };
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width - 1; ++i) {
      if (i + 1 < g.width - 1) diff(g.fx(i + 1, j), g.fx(i, j));
      if (j + 1 < g.height) diff(g.fx(i, j + 1), g.fx(i, j));
    }
  for (int j = 0; j < g.height - 1; ++j)
    for (int i = 0; i < g.width; ++i) {
      if (i + 1 < g.width) diff(g.fy(i + 1, j), g.fy(i, j));
      if (j + 1 < g.height - 1) diff(g.fy(i, j + 1), g.fy(i, j));
    }
  SparseMatrix G(row, g.unknowns());
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

inline constexpr double kTvMetricShift = 1e-8;

inline CompositeProblem tv_dual_problem(const GridImage& omega, double delta, double gamma, double eps) {
  require(delta > 0.0 && gamma > 0.0 && eps > 0.0, "tv_dual_problem: delta, gamma, eps must be positive");
  require(omega.width >= 2 && omega.height >= 2, "tv_dual_problem: image must be at least 2x2");
  const TvGrid grid{omega.width, omega.height};
  const Index n = grid.unknowns();
  const double h2 = grid.h() * grid.h();
  const SparseMatrix D = tv_divergence(grid);
  const SparseMatrix G = tv_face_gradient(grid);
  const SparseMatrix DtD = (D.transpose() * D).pruned();
  const SparseMatrix GtG = (G.transpose() * G).pruned();
  const SparseMatrix base = (h2 * DtD + 2.0 * eps * GtG).pruned();
  const Vector w = omega.pixels;

  CompositeProblem p;
  p.name = "tv";
  p.dim = n;
  p.smooth.value = [D, G, w, h2, gamma, delta, eps](const Vector& q) {
    const Vector u = D * q + w;
    double pen = 0.0;
    for (Index i = 0; i < q.size(); ++i) {
      const double a = std::max(0.0, q[i] - delta);
      const double b = std::min(0.0, q[i] + delta);
      pen += a * a + b * b;
    }
    return 0.5 * h2 * u.squaredNorm() + 0.5 * gamma * h2 * pen + eps * (G * q).squaredNorm();
  };
  p.smooth.gradient = [D, GtG, w, h2, gamma, delta, eps](const Vector& q) -> Vector {
    Vector g = h2 * (D.transpose() * (D * q + w)) + 2.0 * eps * (GtG * q);
    for (Index i = 0; i < q.size(); ++i)
      g[i] += gamma * h2 * (std::max(0.0, q[i] - delta) + std::min(0.0, q[i] + delta));
    return g;
  };
  p.smooth.decrease = [D, G, w, h2, gamma, delta, eps](const Vector& q1, const Vector& q2) {
    const Vector dq = q1 - q2;
    const Vector Ddq = D * dq;
    double pen = 0.0;
    for (Index i = 0; i < dq.size(); ++i) {
      pen += hinge_sq_difference(q1[i] - delta, q2[i] - delta, dq[i]);
      pen += hinge_sq_difference(-q1[i] - delta, -q2[i] - delta, -dq[i]);
    }
    return 0.5 * h2 * Ddq.dot(D * (q1 + q2) + 2.0 * w) + 0.5 * gamma * h2 * pen + eps * (G * dq).dot(G * (q1 + q2));
  };
  p.smooth.newton_derivative = [base, h2, gamma, delta](const Vector& q) {
    SparseMatrix H = base;
    for (Index i = 0; i < q.size(); ++i) {
      const bool active = (q[i] - delta >= 0.0) || (-q[i] - delta >= 0.0);
      if (active) H.coeffRef(i, i) += gamma * h2;
    }
    return LinearOperator::sparse(std::move(H));
  };
  SparseMatrix R = (h2 * DtD + eps * GtG).pruned();
  for (Index i = 0; i < n; ++i) R.coeffRef(i, i) += kTvMetricShift;
  p.metric = MetricOperator::from_operator(LinearOperator::sparse(std::move(R)));
  p.convex = true;
  p.newton_psd = true;
  p.box = TestBox{Vector::Zero(n), 100.0 * delta};
  p.kink_pair = [delta](const Vector& x, SplitMix64& rng) {
    Vector y = x;
    for (Index i = 0; i < x.size(); ++i) {
      const double s = rng.uniform(0.1, 2.0);
      const double c = x[i] >= 0.0 ? delta : -delta;
      y[i] = c - s * (x[i] - c);
    }
    return std::pair<Vector, Vector>{x, y};
  };
  return p;
}

/// u = Dp + omega.
inline GridImage tv_reconstruct(const GridImage& omega, const Vector& p) {
  const TvGrid grid{omega.width, omega.height};
  require(p.size() == grid.unknowns(), "tv_reconstruct: dimension mismatch");
  return GridImage(omega.width, omega.height, tv_divergence(grid) * p + omega.pixels);
}

}  // namespace leapssn
