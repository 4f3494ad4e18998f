#pragma once

// Adaptive Levenberg-Marquardt proximal semismooth Newton outer loop.
//
// Each outer iteration k tries lam = 2^j * Lambda_k for j = 0, 1, ... until
// the candidate x+ satisfies
//
//   <F'(x+), x_k - x+>  >=  (alpha / lam) ||F'(x+)||_*^2
//   F(x_k) - F(x+)      >=  beta * lam * ||x+ - x_k||^2
//
// then sets lam_k = lam and Lambda_{k+1} = lam_k / 2.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "leapssn/subsolver.hpp"

namespace leapssn {

struct SolverConfig {
  double alpha = 0.5;
  double beta = 0.25;
  double m = 2.0;
  double Lambda0 = 1.0;
  double grad_tol = 1e-8;
  int max_outer = 1000;
  int max_inner_trials = 60;
  long max_linear_solves = 100000;
  double inner_tol = 1e-10;
  int max_inner_iterations = 10000;

  /// Throws ContractViolation on out-of-range parameters.
  void validate() const {
    require(m >= 1.0 && std::isfinite(m), "SolverConfig: m must be >= 1");
    require(alpha > 0.0 && alpha <= 0.5, "SolverConfig: alpha must lie in (0, 1/2]");
    require(beta > 0.0 && beta <= (m - 1.0) / (2.0 * m), "SolverConfig: beta must lie in (0, (m-1)/(2m)]");
    require(Lambda0 > 0.0 && std::isfinite(Lambda0), "SolverConfig: Lambda0 must be positive");
    require(grad_tol > 0.0, "SolverConfig: grad_tol must be positive");
    require(max_outer >= 1, "SolverConfig: max_outer must be >= 1");
    require(max_inner_trials >= 1, "SolverConfig: max_inner_trials must be >= 1");
    require(max_linear_solves >= 1, "SolverConfig: max_linear_solves must be >= 1");
    require(inner_tol > 0.0, "SolverConfig: inner_tol must be positive");
  }
};

/// One accepted iteration x_k -> x_{k+1}. F and grad_dual_norm are taken at
/// the new iterate x_{k+1}; step_norm is ||x_{k+1} - x_k||.
struct IterationRecord {
  int k = 0;
  int j_k = 0;
  double lambda_k = 0.0;
  double Lambda_k = 0.0;
  double F = 0.0;
  double grad_dual_norm = 0.0;
  double step_norm = 0.0;
  long cumulative_linear_solves = 0;
};

enum class Status { converged, outer_budget, inner_budget, solve_budget, subproblem_failure_persistent };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::outer_budget: return "outer_budget";
    case Status::inner_budget: return "inner_budget";
    case Status::solve_budget: return "solve_budget";
    case Status::subproblem_failure_persistent: return "subproblem_failure_persistent";
  }
  return "unknown";
}

struct Trace {
  std::vector<IterationRecord> records;
  /// x_0, x_1, ..., x_K (one more than records).
  std::vector<Vector> iterates;
  /// F'(x_0), F'(x_1), ...; entry 0 is the reporting subgradient at x_0.
  std::vector<Vector> subgradients;
  double initial_F = 0.0;
  double initial_grad_dual_norm = 0.0;
  double initial_Lambda = 0.0;
  Vector final_x;
  Vector final_grad;
  Status status = Status::outer_budget;
  long total_linear_solves = 0;
  std::string diagnostics;

  bool converged() const { return status == Status::converged; }
};

struct Acceptance {
  bool cond1 = false;
  bool cond2 = false;
  bool both() const { return cond1 && cond2; }
};

/// Evaluates both acceptance inequalities (non-strict) for a computable
/// candidate.
inline Acceptance accept(const Vector& x_k, const SubproblemResult& result, double lam, const SolverConfig& cfg,
                         const CompositeProblem& p) {
  require(result.computable, "accept: candidate is not computable");
  const Vector step_back = x_k - result.x_plus;
  const double pairing = result.F_sub.dot(step_back);
  const double g_plus = dual_norm(result.F_sub, p.metric);
  const double r = primal_norm(step_back, p.metric);
  const double decrease = objective_decrease(p, x_k, result.x_plus);
  Acceptance a;
  a.cond1 = pairing >= (cfg.alpha / lam) * g_plus * g_plus;
  a.cond2 = decrease >= cfg.beta * lam * r * r;
  return a;
}

/// Runs the method from x0. `initial_psi_sub`, when given, must lie in
/// d psi(x0); it only affects the reported ||F'(x0)||.
inline Trace run(const CompositeProblem& p, const Vector& x0, const SolverConfig& cfg,
                 std::optional<Vector> initial_psi_sub = std::nullopt) {
  cfg.validate();
  require(x0.size() == p.dim, "run: x0 has wrong dimension");
  const double F0 = objective(p, x0);
  require(std::isfinite(F0), "run: F(x0) must be finite");

  CompositeOptions inner_opts;
  inner_opts.inner_tol = cfg.inner_tol;
  inner_opts.max_inner = cfg.max_inner_iterations;

  Trace trace;
  Vector x = x0;
  double F = F0;
  const Vector g0 = p.smooth.gradient(x0);
  const Vector psi0 = initial_psi_sub ? *initial_psi_sub : p.nonsmooth.subgradient(x0, g0);
  Vector Fprime = g0 + psi0;
  trace.initial_F = F0;
  trace.initial_grad_dual_norm = dual_norm(Fprime, p.metric);
  trace.initial_Lambda = cfg.Lambda0;
  trace.iterates.push_back(x);
  trace.subgradients.push_back(Fprime);

  double Lambda = cfg.Lambda0;
  long solves = 0;

  auto finish = [&](Status s) {
    trace.status = s;
    trace.final_x = x;
    trace.final_grad = Fprime;
    trace.total_linear_solves = solves;
    return trace;
  };

  for (int k = 0; k < cfg.max_outer; ++k) {
    const NewtonModel model(p, x);
    bool accepted = false;
    bool any_computable = false;
    double lam = Lambda;
    int j = 0;
    for (; j < cfg.max_inner_trials; ++j) {
      if (solves >= cfg.max_linear_solves) {
        trace.diagnostics = "linear solve budget exhausted";
        return finish(Status::solve_budget);
      }
      lam = std::ldexp(Lambda, j);
      SubproblemResult cand = newton_step(model, lam, inner_opts);
      solves += cand.linear_solve_count;
      if (!cand.computable) {
        trace.diagnostics = cand.diagnostics;
        continue;
      }
      any_computable = true;
      if (!accept(x, cand, lam, cfg, p).both()) continue;

      IterationRecord rec;
      rec.k = k;
      rec.j_k = j;
      rec.lambda_k = lam;
      rec.Lambda_k = Lambda;
      rec.step_norm = primal_norm(cand.x_plus - x, p.metric);
      x = std::move(cand.x_plus);
      F = objective(p, x);
      Fprime = std::move(cand.F_sub);
      rec.F = F;
      rec.grad_dual_norm = dual_norm(Fprime, p.metric);
      rec.cumulative_linear_solves = solves;
      trace.records.push_back(rec);
      trace.iterates.push_back(x);
      trace.subgradients.push_back(Fprime);
      Lambda = lam / 2.0;
      accepted = true;
      break;
    }
    if (!accepted) {
      if (!any_computable) return finish(Status::subproblem_failure_persistent);
      trace.diagnostics = "no trial lambda accepted within the trial cap";
      return finish(Status::inner_budget);
    }
    if (trace.records.back().grad_dual_norm <= cfg.grad_tol) {
      trace.diagnostics.clear();
      return finish(Status::converged);
    }
  }
  trace.diagnostics = "outer iteration budget exhausted";
  return finish(Status::outer_budget);
}

}  // namespace leapssn
