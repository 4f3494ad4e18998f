// Command-line front end: run, compare, verify, gen-data.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "leapssn/leapssn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace leapssn;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitViolations = 4;
constexpr double kGradCheckTol = 1e-5;
constexpr double kSymmetryTol = 1e-9;

const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  converged (verify: no violations)\n"
    "  1  usage or I/O error\n"
    "  2  iteration, trial or linear-solve budget exhausted\n"
    "  3  persistent subproblem failure\n"
    "  4  verify found violations\n";

struct Options {
  std::string problem;
  std::string solver = "leapssn";
  std::optional<double> gamma;
  std::optional<long> n;
  std::optional<long> rank;
  std::optional<long> ell;
  std::optional<double> sigma;
  std::optional<double> delta;
  std::optional<double> eps;
  std::optional<double> separation;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::optional<long> budget;
  std::optional<int> max_outer;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> m;
  std::optional<double> lambda0;
  std::string x0 = "preset";
  std::string out = "out";
  std::optional<std::string> data;
  std::vector<double> sweep;
  std::vector<std::string> solvers;
  std::vector<long> ns;
  int pairs = 20;
  bool corrupt_gradient = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_solver(const std::string& s) {
  return s == "leapssn" || s == "plain" || s == "backtracking" || s == "l2";
}

SuiteParams suite_params(const Options& o) {
  SuiteParams prm;
  prm.n = o.n;
  prm.rank = o.rank;
  prm.ell = o.ell;
  prm.gamma = o.gamma;
  prm.sigma = o.sigma;
  prm.delta = o.delta;
  prm.eps = o.eps;
  prm.separation = o.separation;
  prm.seed = o.seed;
  prm.data_path = o.data;
  return prm;
}

void check_problem(const Options& o) {
  if (o.problem.empty()) throw UsageError("--problem is required");
  if (!is_suite_problem(o.problem)) throw UsageError("unknown problem '" + o.problem + "'");
}

void check_solver(const std::string& s) {
  if (!is_solver(s)) throw UsageError("unknown solver '" + s + "' (expected leapssn, plain, backtracking or l2)");
}

SolverConfig solver_config(const SuiteInstance& inst, const Options& o) {
  SolverConfig c = inst.config;
  if (o.tol) c.grad_tol = *o.tol;
  if (o.budget) c.max_linear_solves = *o.budget;
  if (o.max_outer) c.max_outer = *o.max_outer;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.beta) c.beta = *o.beta;
  if (o.m) c.m = *o.m;
  if (o.lambda0) c.Lambda0 = *o.lambda0;
  c.validate();
  return c;
}

BaselineConfig baseline_config(const SuiteInstance& inst, const Options& o, const std::string& solver) {
  BaselineConfig c;
  c.kind = solver == "plain" ? BaselineKind::plain
           : solver == "backtracking" ? BaselineKind::backtracking
                                      : BaselineKind::l2_linesearch;
  c.grad_tol = o.tol.value_or(inst.config.grad_tol);
  if (o.budget) c.max_linear_solves = *o.budget;
  c.validate();
  return c;
}

Vector starting_point(const SuiteInstance& inst, const std::string& source) {
  const Index n = inst.problem.dim;
  if (source == "preset") return inst.x0;
  if (source == "zeros") return Vector::Zero(n);
  if (source == "ones") return Vector::Ones(n);
  std::ifstream in(source);
  if (!in) throw IoError("cannot open starting point file " + source);
  std::vector<double> v;
  double t = 0.0;
  while (in >> t) v.push_back(t);
  if (!in.eof()) throw IoError("starting point file " + source + ": malformed number");
  if (static_cast<Index>(v.size()) != n)
    throw IoError("starting point file " + source + ": expected " + std::to_string(n) + " values, got " +
                  std::to_string(v.size()));
  return Eigen::Map<const Vector>(v.data(), n);
}

struct RunOutcome {
  Trace trace;
  double seconds = 0.0;
};

RunOutcome solve(const SuiteInstance& inst, const Options& o, const std::string& solver, const Vector& x0) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome r;
  if (solver == "leapssn") {
    r.trace = run(inst.problem, x0, solver_config(inst, o));
  } else {
    if (!inst.problem.nonsmooth.is_zero())
      throw UsageError("solver '" + solver + "' needs a problem without a nonsmooth part");
    r.trace = baseline_run(inst.problem, x0, baseline_config(inst, o, solver));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

fs::path prepare_out(const Options& o) {
  const fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double final_F(const Trace& t) { return t.records.empty() ? t.initial_F : t.records.back().F; }

double final_g(const Trace& t) {
  return t.records.empty() ? t.initial_grad_dual_norm : t.records.back().grad_dual_norm;
}

int cmd_run(const Options& o) {
  check_problem(o);
  check_solver(o.solver);
  const SuiteInstance inst = make_instance(o.problem, suite_params(o));
  const Vector x0 = starting_point(inst, o.x0);
  const RunOutcome r = solve(inst, o, o.solver, x0);
  const Trace& t = r.trace;

  const fs::path dir = prepare_out(o);
  write_text(dir / "trace.csv", trace_csv(t));
  json s;
  s["problem"] = o.problem;
  s["description"] = inst.description;
  s["solver"] = o.solver;
  s["seed"] = o.seed;
  s["status"] = std::string(to_string(t.status));
  s["exit_code"] = exit_code(t.status);
  s["iterations"] = t.records.size();
  s["linear_solves"] = t.total_linear_solves;
  s["final_F"] = finite_or_null(final_F(t));
  s["final_grad_dual_norm"] = finite_or_null(final_g(t));
  s["wall_time_s"] = r.seconds;
  if (!t.diagnostics.empty()) s["diagnostics"] = t.diagnostics;
  if (o.problem == "tv") {
    const GridImage restored = tv_reconstruct(*inst.noisy, t.final_x);
    write_pgm((dir / "restored.pgm").string(), restored);
    if (inst.clean) {
      s["psnr_noisy"] = finite_or_null(psnr(*inst.noisy, *inst.clean));
      s["psnr_restored"] = finite_or_null(psnr(restored, *inst.clean));
    }
  }
  write_text(dir / "summary.json", s.dump(2) + "\n");
  std::cout << o.problem << " / " << o.solver << ": " << to_string(t.status) << ", " << t.records.size()
            << " iterations, " << t.total_linear_solves << " linear solves, |F'| = " << final_g(t) << "\n";
  return exit_code(t.status);
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

int cmd_compare(const Options& o) {
  check_problem(o);
  if (o.sweep.empty()) throw UsageError("--sweep needs at least one gamma value");
  for (double g : o.sweep)
    if (!(g > 0.0 && std::isfinite(g))) throw UsageError("--sweep values must be positive and finite");
  const std::vector<std::string> solvers = o.solvers.empty() ? std::vector<std::string>{"leapssn"} : o.solvers;
  for (const auto& s : solvers) check_solver(s);
  Options base = o;
  if (!base.budget) base.budget = 300;

  // Columns: every solver, or solver x n when --ns is given.
  struct Column {
    std::string label;
    std::string solver;
    std::optional<long> n;
  };
  std::vector<Column> cols;
  for (const auto& s : solvers) {
    if (o.ns.empty()) {
      cols.push_back({s, s, std::nullopt});
    } else {
      for (long n : o.ns) cols.push_back({s + ":n=" + std::to_string(n), s, n});
    }
  }

  std::vector<std::vector<std::string>> table;
  for (double gamma : o.sweep) {
    std::vector<std::string> row{fmt_g(gamma)};
    for (const Column& c : cols) {
      Options cell = base;
      cell.gamma = gamma;
      if (c.n) cell.n = *c.n;
      const SuiteInstance inst = make_instance(o.problem, suite_params(cell));
      const RunOutcome r = solve(inst, cell, c.solver, starting_point(inst, cell.x0));
      row.push_back(r.trace.converged() ? std::to_string(r.trace.total_linear_solves) : "-");
    }
    table.push_back(std::move(row));
  }

  std::vector<std::string> header{"gamma"};
  for (const Column& c : cols) header.push_back(c.label);
  std::ostringstream csv;
  for (std::size_t i = 0; i < header.size(); ++i) csv << (i ? "," : "") << header[i];
  csv << '\n';
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << row[i];
    csv << '\n';
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    width[i] = header[i].size();
    for (const auto& row : table) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream txt;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      txt << (i ? "  " : "");
      txt << std::string(width[i] - cells[i].size(), ' ') << cells[i];
    }
    txt << '\n';
  };
  line(header);
  for (const auto& row : table) line(row);

  const fs::path dir = prepare_out(o);
  write_text(dir / "compare.csv", csv.str());
  write_text(dir / "compare.txt", txt.str());
  std::cout << txt.str();
  return 0;
}

json violations_json(const std::vector<Violation>& v) {
  json a = json::array();
  for (const auto& x : v)
    a.push_back({{"k", x.k}, {"inequality", x.inequality}, {"lhs", finite_or_null(x.lhs)},
                 {"rhs", finite_or_null(x.rhs)}});
  return a;
}

json optional_bool(const std::optional<bool>& b) { return b ? json(*b) : json("not applicable"); }

int cmd_verify(const Options& o) {
  check_problem(o);
  SuiteInstance inst = make_instance(o.problem, suite_params(o));
  CompositeProblem& p = inst.problem;
  if (o.corrupt_gradient) {
    // Test fixture: a gradient that disagrees with f in its first entry.
    auto g = p.smooth.gradient;
    p.smooth.gradient = [g](const Vector& x) -> Vector {
      Vector v = g(x);
      v[0] += 1e-3 * (1.0 + std::abs(v[0]));
      return v;
    };
  }
  const SolverConfig cfg = solver_config(inst, o);
  const double radius = p.box ? p.box->radius : 1.0;

  std::vector<Violation> extra;
  const std::vector<Vector> points = sample_box_points(p, 20, o.seed);
  const double gc = grad_check(p, points, o.seed);
  if (!(gc <= kGradCheckTol)) extra.push_back({0, "grad_check", gc, kGradCheckTol});
  const double asym = hessian_asymmetry(p, points);
  if (!(asym <= kSymmetryTol)) extra.push_back({0, "hessian_symmetry", asym, kSymmetryTol});
  const double L_hat = remainder_constant_sample(p, radius, o.pairs, o.seed);

  const Vector x0 = starting_point(inst, o.x0);
  const auto t0 = std::chrono::steady_clock::now();
  const Trace t = run(p, x0, cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!t.converged()) extra.push_back({static_cast<int>(t.records.size()), "run_converged", 0.0, 0.0});

  RateReport rep = audit_trace(t, p, cfg, L_hat);
  attach_superlinear(rep, t);
  rep.violations.insert(rep.violations.begin(), extra.begin(), extra.end());

  json r;
  r["problem"] = o.problem;
  r["description"] = inst.description;
  r["seed"] = o.seed;
  r["grad_check_max_rel_error"] = gc;
  r["hessian_asymmetry"] = asym;
  r["L_hat"] = L_hat;
  if (p.constants.L) r["L_known"] = *p.constants.L;
  r["lambda_bar"] = rep.lambda_bar;
  r["run"] = {{"status", std::string(to_string(t.status))},
              {"iterations", t.records.size()},
              {"linear_solves", t.total_linear_solves},
              {"final_F", finite_or_null(final_F(t))},
              {"final_grad_dual_norm", finite_or_null(final_g(t))},
              {"wall_time_s", seconds}};
  r["checks"] = {{"monotone_F", rep.monotone_ok},
                 {"acceptance", rep.acceptance_ok},
                 {"lambda_bound", rep.lambda_bound_ok},
                 {"newton_step_count", rep.step_count_ok},
                 {"step_length", optional_bool(rep.step_length_ok)},
                 {"sublinear_envelope", optional_bool(rep.sublinear_envelope_ok)},
                 {"pl_linear_envelope", optional_bool(rep.pl_linear_envelope_ok)},
                 {"convex_envelope", optional_bool(rep.convex_envelope_ok)},
                 {"superlinear", optional_bool(rep.superlinear_detected)},
                 {"lambda_to_zero", optional_bool(rep.lambda_to_zero)}};
  if (const auto dm = dm_condition_sample(t, p)) {
    json a = json::array();
    for (double v : *dm) a.push_back(finite_or_null(v));
    r["dm_condition_ratios"] = a;
  } else {
    r["dm_condition_ratios"] = "not applicable";
  }
  if (o.problem == "partial_smooth_2d") {
    const auto idx = manifold_check(t, 0);
    r["manifold_identification_index"] = idx ? json(*idx) : json(nullptr);
  }
  r["violations"] = violations_json(rep.violations);
  r["ok"] = rep.violations.empty();

  const fs::path dir = prepare_out(o);
  write_text(dir / "report.json", r.dump(2) + "\n");
  std::cout << o.problem << ": " << rep.violations.size() << " violation(s)\n";
  for (const auto& v : rep.violations)
    std::cout << "  k=" << v.k << " " << v.inequality << " lhs=" << v.lhs << " rhs=" << v.rhs << "\n";
  return rep.violations.empty() ? 0 : kExitViolations;
}

int cmd_gen_data(const Options& o) {
  if (o.problem != "svm" && o.problem != "tv") throw UsageError("gen-data supports --problem svm or tv");
  if (o.problem == "svm") {
    const SvmData d = svm_synthetic(o.n.value_or(2), o.ell.value_or(10000), o.seed, o.separation.value_or(2.0),
                                    o.gamma.value_or(1.0));
    const fs::path dir = prepare_out(o);
    write_svm_text((dir / "svm.txt").string(), d);
    std::cout << "wrote " << (dir / "svm.txt").string() << "\n";
  } else {
    const int size = static_cast<int>(o.n.value_or(64));
    const GridImage clean = shepp_logan(size, size);
    const GridImage noisy = add_gaussian_noise(clean, o.sigma.value_or(0.06), o.seed);
    const fs::path dir = prepare_out(o);
    write_pgm((dir / "clean.pgm").string(), clean);
    write_pgm((dir / "noisy.pgm").string(), noisy);
    std::cout << "wrote " << (dir / "clean.pgm").string() << " and " << (dir / "noisy.pgm").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Levenberg-Marquardt proximal semismooth Newton solver"};
  app.footer(kExitCodeHelp);
  app.set_config("--config", "", "File of 'key = value' lines ('#' comments); flags override it");
  app.allow_config_extras(false);
  app.require_subcommand(1);

  Options o;
  std::string problems = "one of:";
  for (const auto& n : suite_problem_names()) problems += " " + n;
  app.add_option("--problem", o.problem, "Problem name, " + problems);
  app.add_option("--solver", o.solver, "leapssn, plain, backtracking or l2")->capture_default_str();
  app.add_option("--gamma", o.gamma, "Penalty or loss weight");
  app.add_option("--n", o.n, "Problem size (dimension, grid or image side, features)");
  app.add_option("--rank", o.rank, "Rank for rank_deficient_ls");
  app.add_option("--ell", o.ell, "SVM sample count");
  app.add_option("--sigma", o.sigma, "TV noise level");
  app.add_option("--delta", o.delta, "TV dual bound");
  app.add_option("--eps", o.eps, "TV smoothing weight");
  app.add_option("--separation", o.separation, "SVM class separation");
  app.add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
  app.add_option("--tol", o.tol, "Dual-norm stopping tolerance");
  app.add_option("--budget", o.budget, "Linear-solve budget");
  app.add_option("--max-outer", o.max_outer, "Outer iteration budget");
  app.add_option("--alpha", o.alpha, "Acceptance parameter alpha");
  app.add_option("--beta", o.beta, "Acceptance parameter beta");
  app.add_option("--m", o.m, "Parameter m");
  app.add_option("--lambda0", o.lambda0, "Initial regularisation Lambda_0");
  app.add_option("--x0", o.x0, "Starting point: preset, zeros, ones or a file of numbers")->capture_default_str();
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--data", o.data, "SVM text file or PGM image replacing synthetic data");
  app.add_option("--sweep", o.sweep, "Comma-separated gamma values (compare)")->delimiter(',');
  app.add_option("--solvers", o.solvers, "Comma-separated solvers (compare)")->delimiter(',');
  app.add_option("--ns", o.ns, "Comma-separated sizes, one column each (compare)")->delimiter(',');
  app.add_option("--pairs", o.pairs, "Sample pairs for the remainder constant (verify)")->capture_default_str();
  app.add_flag("--corrupt-gradient", o.corrupt_gradient)->group("");

  auto* run_cmd = app.add_subcommand("run", "Run one solver and write trace.csv and summary.json");
  auto* cmp_cmd = app.add_subcommand("compare", "Linear-solve counts over a gamma sweep");
  auto* ver_cmd = app.add_subcommand("verify", "Derivative checks, trace audit and rate envelopes");
  auto* gen_cmd = app.add_subcommand("gen-data", "Write seeded SVM data or phantom images");
  for (auto* c : {run_cmd, cmp_cmd, ver_cmd, gen_cmd}) c->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(o);
    if (cmp_cmd->parsed()) return cmd_compare(o);
    if (ver_cmd->parsed()) return cmd_verify(o);
    return cmd_gen_data(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
