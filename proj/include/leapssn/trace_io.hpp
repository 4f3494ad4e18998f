#pragma once

// Plain-text serialisation of solver traces.

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "leapssn/driver.hpp"

namespace leapssn {

inline constexpr const char* kTraceCsvHeader =
    "k,j_k,lambda_k,Lambda_k,F,grad_dual_norm,step_norm,cum_linear_solves";

/// One row per accepted iteration; reals printed with %.17g so the file
/// round-trips exactly.
inline void write_trace_csv(std::ostream& out, const Trace& t) {
  out << kTraceCsvHeader << '\n';
  char buf[256];
  for (const IterationRecord& r : t.records) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%ld\n", r.k, r.j_k, r.lambda_k, r.Lambda_k,
                  r.F, r.grad_dual_norm, r.step_norm, r.cumulative_linear_solves);
    out << buf;
  }
}

inline std::string trace_csv(const Trace& t) {
  std::ostringstream s;
  write_trace_csv(s, t);
  return s.str();
}

/// Process exit code for a finished run: 0 converged, 2 budget exhausted,
/// 3 persistent subproblem failure.
inline int exit_code(Status s) {
  switch (s) {
    case Status::converged: return 0;
    case Status::outer_budget:
    case Status::inner_budget:
    case Status::solve_budget: return 2;
    case Status::subproblem_failure_persistent: return 3;
  }
  return 3;
}

}  // namespace leapssn
