// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "leapssn/leapssn.hpp"

using namespace leapssn;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double box_radius(const CompositeProblem& p) { return p.box ? p.box->radius : 1.0; }

double estimate_L(const CompositeProblem& p) { return remainder_constant_sample(p, box_radius(p), 20, 99); }

std::string first_violation(const RateReport& r) {
  if (r.violations.empty()) return "none";
  const Violation& v = r.violations.front();
  return v.inequality + " at k=" + std::to_string(v.k) + " (" + fmt("%.3e", v.lhs) + " vs " + fmt("%.3e", v.rhs) +
         ")";
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream d;
  for (const std::string& name : suite_problem_names()) {
    const SuiteInstance inst = make_instance(name, SuiteParams{});
    const Trace t = run(inst.problem, inst.x0, inst.config);
    const RateReport r = audit_trace(t, inst.problem, inst.config, estimate_L(inst.problem));
    const bool good = t.converged() && r.violations.empty();
    ok = ok && good;
    d << name << "=" << (good ? "ok" : std::string(to_string(t.status)) + "/" + first_violation(r)) << " ";
  }
  const double s = seconds_since(t0);
  d << "time=" << fmt("%.1f", s) << "s (limit 60)";
  return {ok && s <= 60.0, d.str()};
}

Verdict criterion2() {
  const auto t0 = Clock::now();
  const SuiteInstance inst = make_instance("rosenbrock", SuiteParams{});
  const CompositeProblem& p = inst.problem;
  const Trace t = run(p, Vector::Zero(10), inst.config);
  const RateReport r = audit_trace(t, p, inst.config, estimate_L(p));
  const bool env = r.sublinear_envelope_ok.value_or(false);
  std::ostringstream d;
  const double s = seconds_since(t0);
  d << "status=" << to_string(t.status) << " iterations=" << t.records.size() << " L_hat=" << fmt("%.4g", r.L_hat)
    << " envelope=" << (env ? "holds" : "violated") << " first_violation=" << first_violation(r)
    << " time=" << fmt("%.2f", s) << "s";
  return {t.converged() && env && r.violations.empty(), d.str()};
}

Verdict criterion3() {
  const auto t0 = Clock::now();
  SuiteParams prm;
  prm.n = 20;
  prm.rank = 12;
  prm.seed = 1;
  SuiteInstance inst = make_instance("rank_deficient_ls", prm);
  CompositeProblem& p = inst.problem;

  // Smallest nonzero eigenvalue of the constant Hessian.
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(p.smooth.newton_derivative(inst.x0).to_dense());
  const Vector ev = eig.eigenvalues();
  const double cutoff = 1e-10 * ev.maxCoeff();
  double mu = kInfinity;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cutoff) mu = std::min(mu, ev[i]);
  p.constants.mu_pl = mu;

  const Trace t = run(p, inst.x0, inst.config);
  RateReport r = audit_trace(t, p, inst.config, estimate_L(p));
  const SuperlinearResult sl = superlinear_check(t);
  const bool a = r.pl_linear_envelope_ok.value_or(false) && r.violations.empty();
  const bool b = sl.lambda_to_zero && sl.superlinear;

  // Distance to the solution set over the last five steps.
  std::vector<double> dist;
  for (const Vector& x : t.iterates) dist.push_back((x - p.project_to_solution_set(x)).norm());
  bool c = dist.size() >= 6;
  std::vector<double> ratios;
  if (c) {
    for (std::size_t i = dist.size() - 5; i < dist.size(); ++i)
      ratios.push_back(dist[i - 1] > 0.0 ? dist[i] / dist[i - 1] : 0.0);
    for (std::size_t i = 1; i < ratios.size(); ++i)
      if (!(ratios[i] < ratios[i - 1] || (ratios[i] == 0.0 && ratios[i - 1] == 0.0))) c = false;
    c = c && ratios.back() <= 0.1;
  }
  const double s = seconds_since(t0);
  std::ostringstream d;
  d << "mu=" << fmt("%.4g", mu) << " (a) PL envelope " << (a ? "holds" : "fails: " + first_violation(r))
    << "; (b) lambda_to_zero=" << sl.lambda_to_zero << " superlinear=" << sl.superlinear << "; (c) ratios=";
  for (double v : ratios) d << fmt("%.2e", v) << " ";
  d << "; time=" << fmt("%.2f", s) << "s (limit 5)";
  return {t.converged() && a && b && c && s <= 5.0, d.str()};
}

Verdict criterion4() {
  const auto t0 = Clock::now();
  const CompositeProblem p = partial_smooth_2d();
  SolverConfig cfg;
  cfg.grad_tol = 1e-10;
  Vector x0(2);
  x0 << 1.0, 1.0;
  const Trace t = run(p, x0, cfg);
  const double g = t.records.empty() ? t.initial_grad_dual_norm : t.records.back().grad_dual_norm;
  const double dist = t.final_x.norm();
  const auto idx = manifold_check(t, 0);
  const SuperlinearResult sl = superlinear_check(t);
  const auto dm = dm_condition_sample(t, p);
  const bool dm_ok = dm && !dm->empty() && dm->back() <= 1e-8;
  const double s = seconds_since(t0);
  std::ostringstream d;
  d << "status=" << to_string(t.status) << " grad=" << fmt("%.2e", g) << " |x|=" << fmt("%.2e", dist)
    << " manifold_index=" << (idx ? std::to_string(*idx) : "none") << " lambda_to_zero=" << sl.lambda_to_zero
    << " superlinear=" << sl.superlinear << " dm_last=" << (dm && !dm->empty() ? fmt("%.2e", dm->back()) : "n/a")
    << " time=" << fmt("%.3f", s) << "s (limit 1)";
  const bool ok = t.converged() && g <= 1e-10 && dist <= 1e-9 && idx.has_value() && sl.lambda_to_zero &&
                  sl.superlinear && dm_ok && s <= 1.0;
  return {ok, d.str()};
}

Verdict criterion5() {
  const auto t0 = Clock::now();
  const std::vector<double> gammas{1e2, 1e3, 1e4, 1e5, 1e6};
  std::vector<long> counts;
  std::vector<bool> plain_failed;
  bool all_conv = true;
  std::ostringstream d;
  for (double gamma : gammas) {
    SuiteParams prm;
    prm.n = 65;
    prm.gamma = gamma;
    SuiteInstance inst = make_instance("membrane", prm);
    inst.config.grad_tol = 1e-8;
    inst.config.max_linear_solves = 300;
    const Trace t = run(inst.problem, inst.x0, inst.config);
    all_conv = all_conv && t.converged();
    counts.push_back(t.total_linear_solves);

    BaselineConfig bc;
    bc.kind = BaselineKind::plain;
    bc.grad_tol = 1e-8;
    bc.max_linear_solves = 300;
    const Trace b = baseline_run(inst.problem, inst.x0, bc);
    plain_failed.push_back(!b.converged());
    d << "g=" << fmt("%.0e", gamma) << ": leapssn " << (t.converged() ? std::to_string(t.total_linear_solves) : "-")
      << ", plain " << (b.converged() ? std::to_string(b.total_linear_solves) : std::string(to_string(b.status)))
      << "; ";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < counts.size(); ++i) monotone = monotone && counts[i] >= counts[i - 1];
  const bool plain_pattern = plain_failed[3] && plain_failed[4];
  const double s = seconds_since(t0);
  d << "all_converge=" << all_conv << " nondecreasing=" << monotone << " plain_fails_two_largest=" << plain_pattern
    << " time=" << fmt("%.1f", s) << "s (limit 120)";
  return {all_conv && monotone && plain_pattern && s <= 120.0, d.str()};
}

Verdict criterion6() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream d;
  for (double gamma : {1e4, 1e5}) {
    SuiteParams prm;
    prm.n = 64;
    prm.sigma = 0.06;
    prm.delta = 1e-4;
    prm.eps = 1e-1;
    prm.gamma = gamma;
    SuiteInstance inst = make_instance("tv", prm);
    inst.config.max_linear_solves = 200;
    const Trace t = run(inst.problem, inst.x0, inst.config);
    const double pn = psnr(*inst.noisy, *inst.clean);
    const double pr = psnr(tv_reconstruct(*inst.noisy, t.final_x), *inst.clean);
    const bool good = t.converged() && pr >= pn + 3.0;
    ok = ok && good;
    d << "g=" << fmt("%.0e", gamma) << ": " << to_string(t.status) << " solves=" << t.total_linear_solves
      << " psnr " << fmt("%.2f", pn) << " -> " << fmt("%.2f", pr) << "; ";
  }
  const double s = seconds_since(t0);
  d << "time=" << fmt("%.1f", s) << "s (limit 120)";
  return {ok && s <= 120.0, d.str()};
}

Verdict criterion7() {
  const auto t0 = Clock::now();
  const std::vector<double> gammas{1e-4, 1e-2, 1.0, 1e2, 1e4};
  bool ok = true;
  std::ostringstream d;
  for (long n : {2L, 20L, 200L}) {
    long prev = 0;
    d << "n=" << n << ":";
    for (double gamma : gammas) {
      SuiteParams prm;
      prm.n = n;
      prm.ell = 10000;
      prm.gamma = gamma;
      SuiteInstance inst = make_instance("svm", prm);
      inst.config.max_linear_solves = 130;
      const Trace t = run(inst.problem, inst.x0, inst.config);
      const bool good = t.converged() && t.total_linear_solves >= prev;
      ok = ok && good;
      prev = t.total_linear_solves;
      d << " " << (t.converged() ? std::to_string(t.total_linear_solves) : "-");
    }
    d << "; ";
  }
  const double s = seconds_since(t0);
  d << "time=" << fmt("%.1f", s) << "s (limit 300)";
  return {ok && s <= 300.0, d.str()};
}

// Nested grid search for the model minimiser. Each level keeps a window of
// several grid spacings around the best point.
Vector grid_minimiser(const CompositeProblem& p, const Vector& x, double lam, Vector center, double radius) {
  const Index dim = p.dim;
  const int pts = dim <= 2 ? 41 : 21;
  while (radius > 1e-10) {
    const double h = 2.0 * radius / (pts - 1);
    Vector best = center;
    double best_val = model_value(center, x, lam, p);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    Vector y(dim);
    for (;;) {
      for (Index i = 0; i < dim; ++i) y[i] = center[i] - radius + h * idx[static_cast<std::size_t>(i)];
      const double v = model_value(y, x, lam, p);
      if (v < best_val) {
        best_val = v;
        best = y;
      }
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == pts) idx[k++] = 0;
      if (k == idx.size()) break;
    }
    center = best;
    radius = 4.0 * h;
  }
  return center;
}

Verdict criterion8() {
  const auto t0 = Clock::now();
  SplitMix64 rng(2024);
  double worst_grid = 0.0;
  double worst_smooth = 0.0;
  int smooth_cases = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const Index dim = 1 + static_cast<Index>(rng.next() % 3);
    Matrix B(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j) B(i, j) = rng.normal();
    if (dim > 1 && inst % 4 == 0) B.row(0).setZero();
    const Matrix Q = B.transpose() * B;
    const Vector b = rng.normal_vector(dim);
    const bool with_l1 = inst % 2 == 1;
    Vector w = Vector::Zero(dim);
    w[0] = rng.uniform(0.1, 2.0);
    const CompositeProblem p = quadratic(Q, b, with_l1 ? NonsmoothPart::weighted_l1(w) : NonsmoothPart::zero());
    const Vector x = rng.uniform_vector(dim, -2.0, 2.0);
    const double lam = rng.uniform(0.5, 2.0);

    const SubproblemResult c = composite_step(x, lam, p);
    if (!c.computable) return {false, "composite_step not computable on instance " + std::to_string(inst)};
    const Vector g = p.smooth.gradient(x);
    const double R = 2.0 * (g.norm() + w[0]) / lam + 1.0;
    const Vector ref = grid_minimiser(p, x, lam, x, R);
    worst_grid = std::max(worst_grid, (c.x_plus - ref).norm());
    if (!with_l1) {
      const SubproblemResult s = smooth_step(x, lam, p);
      if (!s.computable) return {false, "smooth_step not computable on instance " + std::to_string(inst)};
      worst_smooth = std::max(worst_smooth, (c.x_plus - s.x_plus).norm());
      ++smooth_cases;
    }
  }
  const double s = seconds_since(t0);
  std::ostringstream d;
  d << "50 instances: max |composite - grid|=" << fmt("%.2e", worst_grid) << " (tol 1e-6), max |composite - smooth|="
    << fmt("%.2e", worst_smooth) << " over " << smooth_cases << " smooth cases (tol 1e-8), time=" << fmt("%.2f", s)
    << "s (limit 30)";
  return {worst_grid <= 1e-6 && worst_smooth <= 1e-8 && s <= 30.0, d.str()};
}

Verdict criterion9() {
  const auto t0 = Clock::now();
  double worst_grad = 0.0;
  double worst_sym = 0.0;
  std::string worst_grad_name;
  for (const std::string& name : suite_problem_names()) {
    const SuiteInstance inst = make_instance(name, SuiteParams{});
    const auto pts = sample_box_points(inst.problem, 20, 5);
    const double gc = grad_check(inst.problem, pts);
    if (gc > worst_grad) {
      worst_grad = gc;
      worst_grad_name = name;
    }
    worst_sym = std::max(worst_sym, hessian_asymmetry(inst.problem, pts));
  }

  double worst_len = -kInfinity;
  double worst_sens = -kInfinity;
  for (const std::string& name : {std::string("quadratic"), std::string("partial_smooth_2d")}) {
    const CompositeProblem p = make_instance(name, SuiteParams{}).problem;
    SplitMix64 rng(11);
    for (const Vector& x : sample_box_points(p, 50, 13)) {
      const double lam = rng.uniform(0.05, 5.0);
      const double lam2 = lam * rng.uniform(1.0, 8.0);
      const Vector xi = p.nonsmooth.subgradient(x, p.smooth.gradient(x));
      worst_len = std::max(worst_len, step_length_excess(p, x, xi, lam));
      worst_sens = std::max(worst_sens, lambda_sensitivity_excess(p, x, lam, lam2));
    }
  }
  const double s = seconds_since(t0);
  std::ostringstream d;
  d << "grad_check max=" << fmt("%.2e", worst_grad) << " (" << worst_grad_name << ", tol 1e-5) symmetry max="
    << fmt("%.2e", worst_sym) << " (tol 1e-9) step_length excess max=" << fmt("%.2e", worst_len)
    << " sensitivity excess max=" << fmt("%.2e", worst_sens) << " (slack 1e-8) time=" << fmt("%.1f", s)
    << "s (limit 30)";
  const bool ok = worst_grad <= 1e-5 && worst_sym <= 1e-9 && worst_len <= 1e-8 && worst_sens <= 1e-8 && s <= 30.0;
  return {ok, d.str()};
}

Verdict criterion10() {
  bool ok = true;
  std::ostringstream d;
  auto twice = [&](const std::string& label, const std::function<Trace()>& f) {
    const Trace a = f();
    const Trace b = f();
    const bool same = a.total_linear_solves == b.total_linear_solves && trace_csv(a) == trace_csv(b);
    ok = ok && same;
    d << label << "=" << (same ? "identical" : "differs") << " ";
  };
  for (const std::string& name : suite_problem_names()) {
    twice(name, [&] {
      const SuiteInstance inst = make_instance(name, SuiteParams{});
      return run(inst.problem, inst.x0, inst.config);
    });
  }
  twice("membrane_plain", [] {
    SuiteParams prm;
    prm.gamma = 1e4;
    const SuiteInstance inst = make_instance("membrane", prm);
    BaselineConfig bc;
    bc.kind = BaselineKind::plain;
    return baseline_run(inst.problem, inst.x0, bc);
  });
  twice("svm_n20_seed7", [] {
    SuiteParams prm;
    prm.n = 20;
    prm.seed = 7;
    const SuiteInstance inst = make_instance("svm", prm);
    return run(inst.problem, inst.x0, inst.config);
  });
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("CRITERION %zu: %s - %s\n", i + 1, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
