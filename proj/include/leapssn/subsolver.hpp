#pragma once

// The regularised proximal Newton step
//
//   x+ = argmin_y  f(x) + <f'(x), y-x> + 1/2 <H(x)(y-x), y-x> + lam/2 ||y-x||^2 + psi(y)
//
// solved by one SPD solve when psi == 0 and by a monotone accelerated
// proximal-gradient loop otherwise.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "leapssn/problem.hpp"

namespace leapssn {

struct SubproblemResult {
  Vector x_plus;
  /// Element of d psi(x+).
  Vector psi_sub;
  /// f'(x+) + psi_sub, an element of dF(x+).
  Vector F_sub;
  double model_value_at_xplus = 0.0;
  /// Dual norm of the model's first-order residual at x+.
  double stationarity_residual = 0.0;
  int linear_solve_count = 0;
  int inner_iterations = 0;
  bool computable = false;
  std::string diagnostics;
};

/// f, f', H frozen at the base point x. Reused across all lambda trials of
/// one outer iteration.
class NewtonModel {
 public:
  NewtonModel(const CompositeProblem& p, Vector x) : problem_(&p), x_(std::move(x)) {
    require(x_.size() == p.dim, "NewtonModel: dimension mismatch");
    if (!x_.allFinite()) throw NumericalError("NewtonModel: non-finite base point");
    f_ = p.smooth.value(x_);
    psi_ = p.nonsmooth.value(x_);
    grad_ = p.smooth.gradient(x_);
    if (!std::isfinite(f_) || !grad_.allFinite()) throw NumericalError("NewtonModel: non-finite f or f' at base point");
    hess_ = p.smooth.newton_derivative(x_);
    require(hess_.dim() == p.dim, "NewtonModel: H(x) has wrong dimension");
    if (p.dim <= kDenseSolveLimit) {
      hess_dense_ = hess_.to_dense();
      if (!p.metric.is_identity()) metric_dense_ = p.metric.op().to_dense();
    }
  }

  const CompositeProblem& problem() const { return *problem_; }
  const Vector& x() const { return x_; }
  double f() const { return f_; }
  double F() const { return f_ + psi_; }
  const Vector& gradient() const { return grad_; }
  const LinearOperator& hessian() const { return hess_; }

  Vector hessian_apply(const Vector& v) const {
    if (hess_dense_) return (*hess_dense_) * v;
    return hess_.apply(v);
  }

  /// F~(y; x, lam)
  double value(const Vector& y, double lam) const {
    const Vector d = y - x_;
    const double psi = problem_->nonsmooth.value(y);
    if (!std::isfinite(psi)) return kInfinity;
    return f_ + grad_.dot(d) + 0.5 * d.dot(hessian_apply(d)) + 0.5 * lam * inner(d, d, problem_->metric) + psi;
  }

  /// H(x) + lam R, materialised densely for small problems.
  LinearOperator regularised(double lam) const {
    const MetricOperator& R = problem_->metric;
    if (hess_dense_) {
      Matrix m = *hess_dense_;
      if (R.is_identity()) {
        m.diagonal().array() += lam;
      } else {
        m += lam * (*metric_dense_);
      }
      return LinearOperator::dense(std::move(m));
    }
    return combine(1.0, hess_, lam, R.op());
  }

 private:
  const CompositeProblem* problem_;
  Vector x_;
  double f_ = 0.0;
  double psi_ = 0.0;
  Vector grad_;
  LinearOperator hess_;
  std::optional<Matrix> hess_dense_;
  std::optional<Matrix> metric_dense_;
};

/// Slack allowed on the model nonincrease test.
inline double model_slack(double F) { return 1e-12 * (1.0 + std::abs(F)); }

/// Relative tolerance for CG solves of H + lam R.
inline constexpr double kNewtonCgTol = 1e-10;

inline double model_value(const Vector& y, const Vector& x, double lam, const CompositeProblem& p) {
  return NewtonModel(p, x).value(y, lam);
}

/// Solves (H(x) + lam R) d = -f'(x). An operator that is not positive
/// definite is reported through `computable = false`, not an exception.
inline SubproblemResult smooth_step(const NewtonModel& model, double lam) {
  const CompositeProblem& p = model.problem();
  require(p.nonsmooth.is_zero(), "smooth_step: psi must be identically zero");
  require(lam >= 0.0 && std::isfinite(lam), "smooth_step: lambda must be finite and nonnegative");

  SubproblemResult res;
  res.linear_solve_count = 1;
  const LinearOperator system = model.regularised(lam);
  SpdSolve sol = solve_spd(system, -model.gradient(), kNewtonCgTol);
  if (!sol.ok) {
    res.diagnostics = sol.indefinite ? "H + lambda R is not positive definite" : "linear solve did not converge";
    return res;
  }
  const Vector& d = sol.x;
  res.x_plus = model.x() + d;
  res.psi_sub = Vector::Zero(p.dim);
  res.F_sub = p.smooth.gradient(res.x_plus);
  if (!res.F_sub.allFinite()) {
    res.diagnostics = "f' is not finite at the candidate";
    return res;
  }
  res.model_value_at_xplus = model.value(res.x_plus, lam);
  const Vector first_order = model.gradient() + system.apply(d);
  res.stationarity_residual = dual_norm(first_order, p.metric);
  if (!(res.model_value_at_xplus <= model.F() + model_slack(model.F()))) {
    res.diagnostics = "model value increased";
    return res;
  }
  res.computable = true;
  return res;
}

inline SubproblemResult smooth_step(const Vector& x, double lam, const CompositeProblem& p) {
  return smooth_step(NewtonModel(p, x), lam);
}

struct CompositeOptions {
  double inner_tol = 1e-10;
  int max_inner = 10000;
  int power_iterations = 30;
  double power_inflation = 1.1;
};

/// Estimate of ||H||_op from a fixed seeded start vector.
inline double operator_norm_estimate(const NewtonModel& model, int iterations) {
  SplitMix64 rng(0x5EEDF00DULL);
  Vector v = rng.normal_vector(model.x().size());
  v.normalize();
  double est = 0.0;
  for (int i = 0; i < iterations; ++i) {
    Vector w = model.hessian_apply(v);
    est = w.norm();
    if (est == 0.0) return 0.0;
    v = w / est;
  }
  return est;
}

/// Monotone FISTA on the model, warm-started at x. Requires the identity
/// metric. psi_sub is the subgradient implied by the final prox application,
/// so F_sub is an exact element of dF(x+) even when the loop stops early.
inline SubproblemResult composite_step(const NewtonModel& model, double lam, const CompositeOptions& opts = {}) {
  const CompositeProblem& p = model.problem();
  require(p.metric.is_identity(), "composite_step: requires the identity metric");
  require(lam > 0.0 && std::isfinite(lam), "composite_step: lambda must be positive");
  require(opts.inner_tol > 0.0, "composite_step: inner_tol must be positive");

  const Vector& x = model.x();
  const Vector& g = model.gradient();
  const MetricOperator& R = p.metric;

  // Smooth part of the model without the constant f(x).
  auto grad_q = [&](const Vector& y) -> Vector {
    const Vector d = y - x;
    return g + model.hessian_apply(d) + lam * d;
  };
  auto q = [&](const Vector& y) -> double {
    const Vector d = y - x;
    return g.dot(d) + 0.5 * d.dot(model.hessian_apply(d)) + 0.5 * lam * d.squaredNorm();
  };

  SubproblemResult res;
  res.linear_solve_count = 1;

  double lipschitz = opts.power_inflation * operator_norm_estimate(model, opts.power_iterations) + lam;
  double step = 1.0 / lipschitz;

  const double psi_x = p.nonsmooth.value(x);
  const double phi_x = psi_x;  // model minus f(x), at y = x

  // Stationarity of a prox output y = prox(z) with s = (z - y)/t in d psi(y).
  auto finish = [&](const Vector& y, const Vector& s, double phi) {
    res.x_plus = y;
    res.psi_sub = s;
    res.F_sub = p.smooth.gradient(y) + s;
    res.model_value_at_xplus = model.f() + phi;
    res.stationarity_residual = (grad_q(y) + s).norm();
    res.computable = res.F_sub.allFinite();
    if (!res.computable) res.diagnostics = "subgradient not finite at the candidate";
  };

  Vector z = x - step * g;
  Vector y_first = p.nonsmooth.prox(z, step, R);
  const double r0 = (x - y_first).norm() / step;
  if (r0 == 0.0) {
    finish(x, (z - x) / step, phi_x);
    return res;
  }

  const double xnorm = x.norm();
  const double tol_spec = opts.inner_tol * std::min(std::max(1.0, xnorm), r0);

  Vector y = x;
  double phi_y = phi_x;
  Vector w = x;
  double theta = 1.0;
  constexpr double kUnbounded = -1e18;

  for (int it = 0; it < opts.max_inner; ++it) {
    res.inner_iterations = it + 1;
    const Vector gw = grad_q(w);
    z = w - step * gw;
    Vector y_new = p.nonsmooth.prox(z, step, R);
    const double phi_new = q(y_new) + p.nonsmooth.value(y_new);
    if (!std::isfinite(phi_new) && phi_new != kInfinity) {
      res.diagnostics = "model value not finite";
      return res;
    }
    if (phi_new < kUnbounded) {
      res.diagnostics = "model unbounded below";
      return res;
    }
    if (phi_new > phi_y) {
      if ((w - y).squaredNorm() > 0.0) {
        w = y;  // momentum restart
        theta = 1.0;
        continue;
      }
      // Plain prox-gradient step from y. Only a failed descent inequality
      // means the Lipschitz estimate is too small; otherwise the increase is
      // rounding noise and the residual test below decides.
      const Vector d = y_new - w;
      const double qw = q(w);
      const double upper = qw + gw.dot(d) + 0.5 * lipschitz * d.squaredNorm();
      if (q(y_new) > upper + 1e-14 * (1.0 + std::abs(qw))) {
        lipschitz *= 2.0;
        step = 1.0 / lipschitz;
        continue;
      }
    }
    const Vector s = (z - y_new) / step;
    const Vector gy = grad_q(y_new);
    const double residual = (gy + s).norm();
    const double floor = 16.0 * std::numeric_limits<double>::epsilon() * lipschitz *
                         std::max({xnorm, y_new.norm(), std::numeric_limits<double>::min()});
    if (residual <= std::max(tol_spec, floor)) {
      finish(y_new, s, phi_new);
      res.stationarity_residual = residual;
      return res;
    }
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    w = y_new + ((theta - 1.0) / theta_next) * (y_new - y);
    theta = theta_next;
    y = std::move(y_new);
    phi_y = phi_new;
  }
  res.diagnostics = "inner iteration budget exhausted";
  return res;
}

inline SubproblemResult composite_step(const Vector& x, double lam, const CompositeProblem& p, double inner_tol = 1e-10) {
  CompositeOptions opts;
  opts.inner_tol = inner_tol;
  return composite_step(NewtonModel(p, x), lam, opts);
}

/// Dispatches on psi: the single-solve path when psi == 0, FISTA otherwise.
inline SubproblemResult newton_step(const NewtonModel& model, double lam, const CompositeOptions& opts = {}) {
  if (model.problem().nonsmooth.is_zero()) return smooth_step(model, lam);
  return composite_step(model, lam, opts);
}

}  // namespace leapssn
