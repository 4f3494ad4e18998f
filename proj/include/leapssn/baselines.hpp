#pragma once

// Unregularised Newton baselines for psi == 0 problems: no globalisation,
// Armijo backtracking on f, and a dyadic residual-norm linesearch.

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "leapssn/driver.hpp"

namespace leapssn {

enum class BaselineKind { plain, backtracking, l2_linesearch };

inline std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::plain: return "plain";
    case BaselineKind::backtracking: return "backtracking";
    case BaselineKind::l2_linesearch: return "l2";
  }
  return "unknown";
}

struct BaselineConfig {
  BaselineKind kind = BaselineKind::plain;
  double grad_tol = 1e-8;
  long max_linear_solves = 200;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_halvings = 40;

  void validate() const {
    require(grad_tol > 0.0, "BaselineConfig: grad_tol must be positive");
    require(max_linear_solves >= 1, "BaselineConfig: max_linear_solves must be >= 1");
    require(armijo_c > 0.0 && armijo_c < 1.0, "BaselineConfig: armijo_c must lie in (0, 1)");
    require(shrink > 0.0 && shrink < 1.0, "BaselineConfig: shrink must lie in (0, 1)");
    require(max_halvings >= 0, "BaselineConfig: max_halvings must be >= 0");
  }
};

/// Same Trace layout as the main solver; lambda fields are zero and j_k
/// counts linesearch reductions.
inline Trace baseline_run(const CompositeProblem& p, const Vector& x0, const BaselineConfig& cfg) {
  cfg.validate();
  require(p.nonsmooth.is_zero(), "baseline_run: psi must be identically zero");
  require(x0.size() == p.dim, "baseline_run: x0 has wrong dimension");

  Trace trace;
  Vector x = x0;
  double F = objective(p, x);
  Vector grad = p.smooth.gradient(x);
  double gnorm = dual_norm(grad, p.metric);
  trace.initial_F = F;
  trace.initial_grad_dual_norm = gnorm;
  trace.iterates.push_back(x);
  trace.subgradients.push_back(grad);
  long solves = 0;

  auto finish = [&](Status s, std::string why) {
    trace.status = s;
    trace.final_x = x;
    trace.final_grad = grad;
    trace.total_linear_solves = solves;
    trace.diagnostics = std::move(why);
    return trace;
  };

  for (int k = 0;; ++k) {
    if (solves >= cfg.max_linear_solves) return finish(Status::solve_budget, "linear solve budget exhausted");
    const NewtonModel model(p, x);
    SubproblemResult newton = smooth_step(model, 0.0);
    ++solves;
    if (!newton.computable) return finish(Status::subproblem_failure_persistent, newton.diagnostics);
    const Vector d = newton.x_plus - x;

    double t = 1.0;
    int reductions = 0;
    Vector x_next;
    switch (cfg.kind) {
      case BaselineKind::plain:
        x_next = newton.x_plus;
        break;
      case BaselineKind::backtracking: {
        const double slope = grad.dot(d);
        bool found = false;
        for (; reductions <= cfg.max_halvings; ++reductions) {
          Vector trial = x + t * d;
          if (objective(p, trial) <= F + cfg.armijo_c * t * slope) {
            x_next = std::move(trial);
            found = true;
            break;
          }
          t *= cfg.shrink;
        }
        if (!found) return finish(Status::subproblem_failure_persistent, "Armijo linesearch failed");
        break;
      }
      case BaselineKind::l2_linesearch: {
        // First candidate with a strict residual decrease, else the best one.
        double best_norm = std::numeric_limits<double>::infinity();
        double best_t = 1.0;
        int best_reductions = 0;
        for (int i = 0; i <= cfg.max_halvings; ++i) {
          const double res = dual_norm(p.smooth.gradient(x + t * d), p.metric);
          if (res < best_norm) {
            best_norm = res;
            best_t = t;
            best_reductions = i;
          }
          if (res < gnorm) break;
          t *= cfg.shrink;
        }
        reductions = best_reductions;
        x_next = x + best_t * d;
        break;
      }
    }
    if (!x_next.allFinite()) return finish(Status::subproblem_failure_persistent, "iterate diverged");

    IterationRecord rec;
    rec.k = k;
    rec.j_k = reductions;
    rec.step_norm = primal_norm(x_next - x, p.metric);
    x = std::move(x_next);
    F = objective(p, x);
    grad = p.smooth.gradient(x);
    gnorm = dual_norm(grad, p.metric);
    if (!std::isfinite(F) || !std::isfinite(gnorm)) return finish(Status::subproblem_failure_persistent, "iterate diverged");
    rec.F = F;
    rec.grad_dual_norm = gnorm;
    rec.cumulative_linear_solves = solves;
    trace.records.push_back(rec);
    trace.iterates.push_back(x);
    trace.subgradients.push_back(grad);
    if (gnorm <= cfg.grad_tol) return finish(Status::converged, "");
  }
}

}  // namespace leapssn
