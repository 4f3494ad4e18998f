#pragma once

// Named problem instances with their default starting points and solver
// settings, shared by the command-line tool and the acceptance runs.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "leapssn/driver.hpp"
#include "leapssn/problems/analytic.hpp"
#include "leapssn/problems/image.hpp"
#include "leapssn/problems/membrane.hpp"
#include "leapssn/problems/svm.hpp"
#include "leapssn/problems/tv.hpp"

namespace leapssn {

/// Unset fields take the per-problem default.
struct SuiteParams {
  std::optional<long> n;
  std::optional<long> rank;
  std::optional<long> ell;
  std::optional<double> gamma;
  std::optional<double> sigma;
  std::optional<double> delta;
  std::optional<double> eps;
  std::optional<double> separation;
  std::uint64_t seed = 1;
  /// Overrides synthetic data when set (SVM text file or PGM image).
  std::optional<std::string> data_path;
};

struct SuiteInstance {
  CompositeProblem problem;
  Vector x0;
  SolverConfig config;
  /// Clean and noisy images for TV instances.
  std::optional<GridImage> clean;
  std::optional<GridImage> noisy;
  std::string description;
};

inline const std::vector<std::string>& suite_problem_names() {
  static const std::vector<std::string> names{"quadratic",  "partial_smooth_2d", "rank_deficient_ls",
                                              "rosenbrock", "svm",               "membrane",
                                              "tv"};
  return names;
}

inline bool is_suite_problem(const std::string& name) {
  for (const auto& n : suite_problem_names())
    if (n == name) return true;
  return false;
}

namespace detail {

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

/// Seeded SPD quadratic 1/2 x'Qx - b'x with eigenvalues in [1, 100].
inline SuiteInstance make_quadratic_instance(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix M(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) M(i, j) = rng.normal();
  const Eigen::HouseholderQR<Matrix> qr(M);
  const Matrix Qo = qr.householderQ();
  Vector ev(n);
  for (Index i = 0; i < n; ++i) ev[i] = n > 1 ? std::pow(100.0, static_cast<double>(i) / (n - 1)) : 1.0;
  Matrix Q = Qo * ev.asDiagonal() * Qo.transpose();
  Q = 0.5 * (Q + Q.transpose()).eval();
  const Vector b = rng.normal_vector(n);
  SuiteInstance inst;
  inst.problem = quadratic(Q, b);
  inst.x0 = Vector::Zero(n);
  inst.problem.constants.D0 = quadratic_sublevel_diameter(Q, b, inst.x0);
  inst.description = "SPD quadratic, n=" + std::to_string(n);
  return inst;
}

inline SuiteInstance make_instance(const std::string& name, const SuiteParams& prm) {
  SuiteInstance inst;
  if (name == "quadratic") {
    inst = make_quadratic_instance(prm.n.value_or(10), prm.seed);
  } else if (name == "partial_smooth_2d") {
    inst.problem = partial_smooth_2d();
    inst.x0 = Vector::Ones(2);
    inst.description = "two-dimensional partly smooth example";
  } else if (name == "rank_deficient_ls") {
    const long n = prm.n.value_or(20);
    const long r = prm.rank.value_or(12);
    inst.problem = rank_deficient_ls(n, r, prm.seed);
    inst.x0 = Vector::Zero(n);
    inst.description = "rank-deficient least squares, n=" + std::to_string(n) + ", rank=" + std::to_string(r);
  } else if (name == "rosenbrock") {
    const long n = prm.n.value_or(10);
    inst.problem = smooth_nonconvex(n);
    inst.x0 = Vector::Zero(n);
    inst.description = "chained Rosenbrock, n=" + std::to_string(n);
  } else if (name == "svm") {
    const double gamma = prm.gamma.value_or(1.0);
    SvmData d;
    if (prm.data_path) {
      d = read_svm_text(*prm.data_path, gamma);
    } else {
      d = svm_synthetic(prm.n.value_or(2), prm.ell.value_or(10000), prm.seed, prm.separation.value_or(2.0), gamma);
    }
    const Index n = d.features();
    inst.problem = svm_problem(d);
    inst.x0 = Vector::Constant(n + 1, 0.5);
    inst.config.alpha = 0.1;
    inst.config.beta = 0.1;
    inst.config.Lambda0 = 3.0 * gamma * d.points.norm();
    inst.config.grad_tol = 1e-6;
    inst.description = "L2-loss SVM, n=" + std::to_string(n) + ", ell=" + std::to_string(d.samples()) +
                       ", gamma=" + detail::fmt_g(gamma);
  } else if (name == "membrane") {
    const int n = static_cast<int>(prm.n.value_or(65));
    const double gamma = prm.gamma.value_or(1e2);
    const MembraneSpec spec = membrane_default_spec(n, gamma);
    inst.problem = membrane_problem(spec);
    inst.x0 = Vector::Zero(spec.interior());
    inst.description = "obstacle membrane, n=" + std::to_string(n) + ", gamma=" + detail::fmt_g(gamma);
  } else if (name == "tv") {
    const double gamma = prm.gamma.value_or(1e4);
    const double delta = prm.delta.value_or(1e-4);
    const double eps = prm.eps.value_or(0.1);
    const double sigma = prm.sigma.value_or(0.06);
    if (prm.data_path) {
      inst.noisy = read_pgm(*prm.data_path);
    } else {
      const int size = static_cast<int>(prm.n.value_or(64));
      inst.clean = shepp_logan(size, size);
      inst.noisy = add_gaussian_noise(*inst.clean, sigma, prm.seed);
    }
    inst.problem = tv_dual_problem(*inst.noisy, delta, gamma, eps);
    inst.x0 = Vector::Constant(inst.problem.dim, delta);
    inst.config.alpha = 1e-4;
    inst.config.beta = 1e-4;
    inst.config.Lambda0 = 64.0;
    inst.description = "TV restoration " + std::to_string(inst.noisy->width) + "x" +
                       std::to_string(inst.noisy->height) + ", gamma=" + detail::fmt_g(gamma);
  } else {
    throw ContractViolation("unknown problem '" + name + "'");
  }
  return inst;
}

}  // namespace leapssn
