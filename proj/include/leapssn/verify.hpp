#pragma once

// Checks of solver traces and problem data against the convergence theory:
// finite-difference derivative checks, sampling of the Newton remainder
// constant L, per-step inequality audits, rate envelopes, superlinear
// detection, a Dennis-More-type ratio, and manifold identification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leapssn/driver.hpp"

namespace leapssn {

struct Violation {
  int k = 0;
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Optional fields are empty when the check does not apply (missing
/// constants or a trace too short to judge).
struct RateReport {
  bool monotone_ok = true;
  bool acceptance_ok = true;
  bool lambda_bound_ok = true;
  bool step_count_ok = true;
  std::optional<bool> step_length_ok;
  std::optional<bool> sublinear_envelope_ok;
  std::optional<bool> pl_linear_envelope_ok;
  std::optional<bool> convex_envelope_ok;
  std::optional<bool> superlinear_detected;
  std::optional<bool> lambda_to_zero;
  double L_hat = 0.0;
  double lambda_bar = 0.0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

inline constexpr double kAuditSlack = 1e-8;
inline constexpr double kLhatInflation = 1.05;

// ---------------------------------------------------------------------------
// Derivative checks

/// Max relative error between central differences of f and f'. Per
/// coordinate when dim <= 200, else along 50 seeded unit directions.
inline double grad_check(const CompositeProblem& p, const std::vector<Vector>& points, std::uint64_t seed = 17) {
  double worst = 0.0;
  SplitMix64 rng(seed);
  for (const Vector& x : points) {
    require(x.size() == p.dim, "grad_check: point has wrong dimension");
    const Vector g = p.smooth.gradient(x);
    const double h = 1e-6 * (1.0 + x.norm());
    auto central = [&](const Vector& v) {
      return (p.smooth.value(x + h * v) - p.smooth.value(x - h * v)) / (2.0 * h);
    };
    double err = 0.0;
    double scale = 0.0;
    if (p.dim <= 200) {
      Vector e = Vector::Zero(p.dim);
      for (Index i = 0; i < p.dim; ++i) {
        e[i] = 1.0;
        err = std::max(err, std::abs(central(e) - g[i]));
        e[i] = 0.0;
      }
      scale = g.cwiseAbs().maxCoeff();
    } else {
      for (int d = 0; d < 50; ++d) {
        Vector v = rng.normal_vector(p.dim);
        v.normalize();
        err = std::max(err, std::abs(central(v) - g.dot(v)));
      }
      scale = g.norm();
    }
    worst = std::max(worst, err / std::max(scale, 1e-8));
  }
  return worst;
}

/// Seeded points uniformly distributed in the problem's test box.
inline std::vector<Vector> sample_box_points(const CompositeProblem& p, int count, std::uint64_t seed,
                                             std::optional<double> radius = std::nullopt) {
  SplitMix64 rng(seed);
  const Vector c = p.box ? p.box->center : Vector::Zero(p.dim);
  const double r = radius.value_or(p.box ? p.box->radius : 1.0);
  std::vector<Vector> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pts.push_back(c + rng.uniform_vector(p.dim, -r, r));
  return pts;
}

/// max |H - H^T| relative to max |H| over the given points.
inline double hessian_asymmetry(const CompositeProblem& p, const std::vector<Vector>& points) {
  double worst = 0.0;
  for (const Vector& x : points) {
    const LinearOperator H = p.smooth.newton_derivative(x);
    if (p.dim <= kDenseSolveLimit) {
      const Matrix M = H.to_dense();
      const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
      worst = std::max(worst, (M - M.transpose()).cwiseAbs().maxCoeff() / scale);
    } else {
      // <Hu, v> - <u, Hv> on random vectors.
      SplitMix64 rng(0xA5A5ULL);
      for (int t = 0; t < 5; ++t) {
        const Vector u = rng.normal_vector(p.dim);
        const Vector v = rng.normal_vector(p.dim);
        const Vector Hu = H.apply(u);
        const Vector Hv = H.apply(v);
        const double scale = std::max(Hu.norm() * v.norm(), 1e-300);
        worst = std::max(worst, std::abs(Hu.dot(v) - u.dot(Hv)) / scale);
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Remainder constant

/// ||f'(y) - f'(x) - H(x)(y - x)||_* / ||y - x||, or 0 when y == x.
inline double remainder_ratio(const CompositeProblem& p, const Vector& x, const Vector& y) {
  const Vector d = y - x;
  const double dn = primal_norm(d, p.metric);
  if (dn == 0.0) return 0.0;
  const LinearOperator H = p.smooth.newton_derivative(x);
  const Vector r = p.smooth.gradient(y) - p.smooth.gradient(x) - H.apply(d);
  return dual_norm(r, p.metric) / dn;
}

/// Largest sampled remainder ratio. Each pair draws x, y uniformly in the
/// box of the given radius around the problem's box centre, plus a close
/// partner of x and, when the problem provides one, a pair straddling an
/// active-set switch. Both orientations are evaluated. The first k pairs do
/// not depend on the total count.
inline double remainder_constant_sample(const CompositeProblem& p, double box_radius, int pairs, std::uint64_t seed) {
  require(pairs >= 1, "remainder_constant_sample: pairs must be >= 1");
  require(box_radius > 0.0, "remainder_constant_sample: box radius must be positive");
  SplitMix64 rng(seed);
  const Vector c = p.box ? p.box->center : Vector::Zero(p.dim);
  double L = 0.0;
  auto both = [&](const Vector& a, const Vector& b) {
    L = std::max({L, remainder_ratio(p, a, b), remainder_ratio(p, b, a)});
  };
  for (int i = 0; i < pairs; ++i) {
    const Vector x = c + rng.uniform_vector(p.dim, -box_radius, box_radius);
    const Vector y = c + rng.uniform_vector(p.dim, -box_radius, box_radius);
    both(x, y);
    const double s = std::pow(10.0, rng.uniform(-6.0, -1.0)) * box_radius;
    both(x, x + rng.uniform_vector(p.dim, -s, s));
    if (p.kink_pair) {
      const auto [a, b] = p.kink_pair(x, rng);
      both(a, b);
    }
  }
  return L;
}

// ---------------------------------------------------------------------------
// Trace audit

namespace detail {

/// lhs <= rhs up to 1e-8 relative slack and an absolute floor.
inline bool within(double lhs, double rhs, double floor = 0.0) {
  return lhs <= rhs + kAuditSlack * std::max(std::abs(rhs), floor);
}

inline void record(RateReport& rep, bool& flag, int k, const char* name, double lhs, double rhs, bool ok) {
  if (ok) return;
  flag = false;
  rep.violations.push_back(Violation{k, name, lhs, rhs});
}

}  // namespace detail

inline double lambda_bar(const SolverConfig& cfg, double L_hat) {
  return std::max(2.0 * cfg.m * kLhatInflation * L_hat, cfg.Lambda0);
}

/// Audits a trace from `run` against the per-step inequalities and global
/// envelopes; see RateReport for the individual checks.
inline RateReport audit_trace(const Trace& t, const CompositeProblem& p, const SolverConfig& cfg, double L_hat) {
  RateReport rep;
  rep.L_hat = L_hat;
  const double lbar = lambda_bar(cfg, L_hat);
  rep.lambda_bar = lbar;
  const std::size_t K = t.records.size();
  require(t.iterates.size() == K + 1 && t.subgradients.size() == K + 1, "audit_trace: trace arrays are inconsistent");

  std::vector<double> F(K + 1);
  for (std::size_t i = 0; i <= K; ++i) F[i] = objective(p, t.iterates[i]);
  const double Fscale = std::max(1.0, std::abs(F[0]));

  double sum_j = 0.0;
  bool step_len_flag = true;
  bool step_len_applies = false;
  for (std::size_t i = 0; i < K; ++i) {
    const IterationRecord& r = t.records[i];
    const int k = r.k;
    const Vector& xk = t.iterates[i];
    const Vector& xn = t.iterates[i + 1];
    const Vector& gn = t.subgradients[i + 1];
    const double lam = r.lambda_k;

    // (a) monotone objective
    detail::record(rep, rep.monotone_ok, k, "monotone_F", F[i + 1], F[i], detail::within(F[i + 1], F[i], Fscale * 1e-8));

    // (g) both acceptance inequalities from the stored iterates
    const double gdual = dual_norm(gn, p.metric);
    const double pairing = gn.dot(xk - xn);
    const double rhs1 = (cfg.alpha / lam) * gdual * gdual;
    detail::record(rep, rep.acceptance_ok, k, "acceptance_cond1", rhs1, pairing, detail::within(rhs1, pairing));
    const double rk = primal_norm(xn - xk, p.metric);
    const double rhs2 = cfg.beta * lam * rk * rk;
    const double dec = objective_decrease(p, xk, xn);
    detail::record(rep, rep.acceptance_ok, k, "acceptance_cond2", rhs2, dec, detail::within(rhs2, dec));
    // g_{k+1} <= lam_k r_k / alpha follows from cond1 and Cauchy-Schwarz.
    detail::record(rep, rep.acceptance_ok, k, "g_next_leq_lambda_r_over_alpha", gdual, lam * rk / cfg.alpha,
                   detail::within(gdual, lam * rk / cfg.alpha));

    // (b) lambda cap
    detail::record(rep, rep.lambda_bound_ok, k, "lambda_bound", lam, lbar, detail::within(lam, lbar));

    // (c) rejected trials so far against k + 1 + log2 max{1/2, m L / Lambda0}, plus one
    sum_j += r.j_k;
    const double jbound = k + 2.0 + std::log2(std::max(0.5, cfg.m * kLhatInflation * L_hat / cfg.Lambda0));
    detail::record(rep, rep.step_count_ok, k, "newton_step_count", sum_j, jbound, detail::within(sum_j, jbound));

    // step length ||x_{k+1} - x_k|| <= ||F'(x_k)||_* / lam_k when H >= 0
    if (p.newton_psd) {
      step_len_applies = true;
      const double gk = dual_norm(t.subgradients[i], p.metric);
      detail::record(rep, step_len_flag, k, "step_length", rk, gk / lam, detail::within(rk, gk / lam, 1e-300));
    }
  }
  if (step_len_applies) rep.step_length_ok = step_len_flag;

  const std::optional<double> Fstar =
      p.known_optimum ? std::optional<double>(p.known_optimum->F) : std::nullopt;

  // (d) nonconvex sublinear envelope on min_{i<=k-1} g_{i+1}
  if (Fstar && K > 0) {
    bool flag = true;
    double running_min = kInfinity;
    const double gap0 = std::max(0.0, F[0] - *Fstar);
    for (std::size_t k = 1; k <= K; ++k) {
      running_min = std::min(running_min, t.records[k - 1].grad_dual_norm);
      const double bound = std::sqrt(lbar * gap0 / (cfg.beta * cfg.alpha * cfg.alpha * static_cast<double>(k)));
      detail::record(rep, flag, static_cast<int>(k), "sublinear_envelope", running_min, bound,
                     detail::within(running_min, bound));
    }
    rep.sublinear_envelope_ok = flag;
  }

  // (e) PL linear envelope
  if (Fstar && p.constants.mu_pl) {
    bool flag = true;
    const double mu = *p.constants.mu_pl;
    const double c = 2.0 * cfg.beta * cfg.alpha * cfg.alpha * mu;
    const double gap0 = F[0] - *Fstar;
    for (std::size_t k = 0; k <= K; ++k) {
      const double bound = std::exp(-c / (c + lbar) * static_cast<double>(k)) * gap0;
      detail::record(rep, flag, static_cast<int>(k), "pl_linear_envelope", F[k] - *Fstar, bound,
                     detail::within(F[k] - *Fstar, bound, Fscale * 1e-8));
    }
    rep.pl_linear_envelope_ok = flag;
  }

  // (f) convex envelope g0 D0 exp(-k/4) + 2 D0^2 lbar / (alpha k)
  if (Fstar && p.convex && p.constants.D0) {
    bool flag = true;
    const double D0 = *p.constants.D0;
    const double g0 = t.initial_grad_dual_norm;
    for (std::size_t k = 1; k <= K; ++k) {
      const double kd = static_cast<double>(k);
      const double bound = g0 * D0 * std::exp(-kd / 4.0) + 2.0 * D0 * D0 * lbar / (cfg.alpha * kd);
      detail::record(rep, flag, static_cast<int>(k), "convex_envelope", F[k] - *Fstar, bound,
                     detail::within(F[k] - *Fstar, bound, Fscale * 1e-8));
    }
    rep.convex_envelope_ok = flag;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Local behaviour

struct SuperlinearResult {
  bool applicable = false;
  bool lambda_to_zero = false;
  bool superlinear = false;
};

/// Looks at the last `window` accepted steps: lambda must fall by a factor
/// of at least 2 per step on average and end below Lambda0 / 2^(window-1);
/// the gradient ratios g_{k+1}/g_k must be strictly decreasing and end at or
/// below 0.1.
inline SuperlinearResult superlinear_check(const Trace& t, int window = 5) {
  require(window >= 3, "superlinear_check: window must be >= 3");
  SuperlinearResult res;
  const std::size_t w = static_cast<std::size_t>(window);
  if (t.records.size() < w) return res;
  res.applicable = true;

  const std::size_t K = t.records.size();
  const double lam_first = t.records[K - w].lambda_k;
  const double lam_last = t.records[K - 1].lambda_k;
  const double avg_factor = std::pow(lam_first / lam_last, 1.0 / static_cast<double>(window - 1));
  res.lambda_to_zero = avg_factor >= 2.0 && lam_last <= std::ldexp(t.initial_Lambda, -(window - 1));

  std::vector<double> g;
  g.push_back(t.initial_grad_dual_norm);
  for (const auto& r : t.records) g.push_back(r.grad_dual_norm);
  std::vector<double> ratios;
  for (std::size_t i = g.size() - w; i < g.size(); ++i) ratios.push_back(g[i - 1] > 0.0 ? g[i] / g[i - 1] : 0.0);
  bool decreasing = true;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (!(ratios[i] < ratios[i - 1])) decreasing = false;
  res.superlinear = decreasing && ratios.back() <= 0.1;
  return res;
}

inline void attach_superlinear(RateReport& rep, const Trace& t, int window = 5) {
  const SuperlinearResult s = superlinear_check(t, window);
  if (!s.applicable) return;
  rep.lambda_to_zero = s.lambda_to_zero;
  rep.superlinear_detected = s.superlinear;
  const int k = t.records.back().k;
  if (!s.lambda_to_zero) rep.violations.push_back(Violation{k, "lambda_to_zero", 0.0, 0.0});
  if (!s.superlinear) rep.violations.push_back(Violation{k, "superlinear", 0.0, 0.0});
}

/// ||(H(x+) - H(x_k))(x+ - x*)||_* / ||x+ - x_k|| with x+ = x+(lam_k/2, x_k),
/// over the second half of the accepted iterates. x* is the known optimum,
/// or the projection of the final iterate onto the solution set when the
/// problem provides one. Empty when neither is available.
inline std::optional<std::vector<double>> dm_condition_sample(const Trace& t, const CompositeProblem& p,
                                                              const CompositeOptions& opts = {}) {
  Vector xstar;
  if (p.project_to_solution_set) {
    xstar = p.project_to_solution_set(t.final_x);
  } else if (p.known_optimum) {
    xstar = p.known_optimum->x;
  } else {
    return std::nullopt;
  }
  std::vector<double> out;
  const std::size_t K = t.records.size();
  for (std::size_t i = K / 2; i < K; ++i) {
    const Vector& xk = t.iterates[i];
    const NewtonModel model(p, xk);
    const SubproblemResult s = newton_step(model, t.records[i].lambda_k / 2.0, opts);
    if (!s.computable) continue;
    const double denom = primal_norm(s.x_plus - xk, p.metric);
    if (denom == 0.0) {
      out.push_back(0.0);
      continue;
    }
    const LinearOperator Hp = p.smooth.newton_derivative(s.x_plus);
    const Vector e = s.x_plus - xstar;
    const Vector diff = Hp.apply(e) - model.hessian_apply(e);
    out.push_back(dual_norm(diff, p.metric) / denom);
  }
  return out;
}

/// First k with x_k[coord] == 0 exactly and every later iterate also zero
/// there.
inline std::optional<int> manifold_check(const Trace& t, Index coord = 0) {
  std::optional<int> first;
  for (std::size_t i = 0; i < t.iterates.size(); ++i) {
    require(coord < t.iterates[i].size(), "manifold_check: coordinate out of range");
    if (t.iterates[i][coord] == 0.0) {
      if (!first) first = static_cast<int>(i);
    } else {
      first.reset();
    }
  }
  return first;
}

// ---------------------------------------------------------------------------
// Sampled subproblem inequalities

/// ||x+ - x|| - ||f'(x) + psi_sub||_* / lam; nonpositive when the
/// step-length bound holds.
inline double step_length_excess(const CompositeProblem& p, const Vector& x, const Vector& psi_sub, double lam,
                                 const CompositeOptions& opts = {}) {
  const NewtonModel model(p, x);
  const SubproblemResult s = newton_step(model, lam, opts);
  require(s.computable, "step_length_excess: step not computable");
  const double step = primal_norm(s.x_plus - x, p.metric);
  const double bound = dual_norm(model.gradient() + psi_sub, p.metric) / lam;
  return step - bound;
}

/// ||x+(lam) - x+(lam')|| - ((lam' - lam)/lam') ||x - x+(lam)||; nonpositive
/// when the sensitivity inequality holds.
inline double lambda_sensitivity_excess(const CompositeProblem& p, const Vector& x, double lam, double lam_prime,
                                        const CompositeOptions& opts = {}) {
  require(0.0 < lam && lam <= lam_prime, "lambda_sensitivity_excess: need 0 < lam <= lam'");
  const NewtonModel model(p, x);
  const SubproblemResult a = newton_step(model, lam, opts);
  const SubproblemResult b = newton_step(model, lam_prime, opts);
  require(a.computable && b.computable, "lambda_sensitivity_excess: step not computable");
  const double lhs = primal_norm(a.x_plus - b.x_plus, p.metric);
  const double rhs = (lam_prime - lam) / lam_prime * primal_norm(x - a.x_plus, p.metric);
  return lhs - rhs;
}

}  // namespace leapssn
