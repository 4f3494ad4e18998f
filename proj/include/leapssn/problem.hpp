#pragma once

// Composite problem F = f + psi: a smooth part with gradient and a symmetric
// Newton derivative H(x), a convex nonsmooth part with its proximal map, the
// metric, and optional ground-truth metadata used only by the verifier.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "leapssn/hilbert.hpp"
#include "leapssn/rng.hpp"

namespace leapssn {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct SmoothPart {
  std::function<double(const Vector&)> value;
  /// f'(x) as a dual-space element (coordinate vector).
  std::function<Vector(const Vector&)> gradient;
  /// A single-valued selection of the generalized derivative.
  std::function<LinearOperator(const Vector&)> newton_derivative;
  /// Optional f(x) - f(y) evaluated without cancellation against large f.
  std::function<double(const Vector&, const Vector&)> decrease;
};

/// Convex, proper, lsc psi. The proximal map is Euclidean; non-identity
/// metrics are only paired with psi == 0.
class NonsmoothPart {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using ProxFn = std::function<Vector(const Vector&, double)>;
  /// Element of d psi(x) closest to -g (used for reporting ||F'(x0)||).
  using SubgradFn = std::function<Vector(const Vector&, const Vector&)>;

  static NonsmoothPart zero() { return NonsmoothPart{}; }

  /// psi(x) = sum_i w_i |x_i| with w_i >= 0.
  static NonsmoothPart weighted_l1(Vector weights) {
    require((weights.array() >= 0.0).all(), "weighted_l1: weights must be nonnegative");
    NonsmoothPart p;
    p.zero_ = false;
    p.value_ = [weights](const Vector& x) { return weights.dot(x.cwiseAbs()); };
    p.prox_ = [weights](const Vector& v, double t) {
      Vector y(v.size());
      for (Index i = 0; i < v.size(); ++i) {
        const double thr = t * weights[i];
        if (v[i] > thr) {
          y[i] = v[i] - thr;
        } else if (v[i] < -thr) {
          y[i] = v[i] + thr;
        } else {
          y[i] = 0.0;
        }
      }
      return y;
    };
    p.subgrad_ = [weights](const Vector& x, const Vector& g) {
      Vector s(x.size());
      for (Index i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0) {
          s[i] = weights[i];
        } else if (x[i] < 0.0) {
          s[i] = -weights[i];
        } else {
          s[i] = std::clamp(-g[i], -weights[i], weights[i]);
        }
      }
      return s;
    };
    return p;
  }

  static NonsmoothPart custom(ValueFn value, ProxFn prox, SubgradFn subgradient) {
    NonsmoothPart p;
    p.zero_ = false;
    p.value_ = std::move(value);
    p.prox_ = std::move(prox);
    p.subgrad_ = std::move(subgradient);
    return p;
  }

  bool is_zero() const { return zero_; }

  double value(const Vector& x) const { return zero_ ? 0.0 : value_(x); }

  /// argmin_y psi(y) + ||y - v||^2 / (2t) in the metric R.
  Vector prox(const Vector& v, double t, const MetricOperator& R) const {
    require(t > 0.0, "prox: step must be positive");
    if (zero_) return v;
    require(R.is_identity(), "prox: nonzero psi requires the identity metric");
    return prox_(v, t);
  }

  Vector subgradient(const Vector& x, const Vector& g) const {
    if (zero_) return Vector::Zero(x.size());
    return subgrad_(x, g);
  }

 private:
  ValueFn value_;
  ProxFn prox_;
  SubgradFn subgrad_;
  bool zero_ = true;
};

struct KnownOptimum {
  Vector x;
  double F = 0.0;
};

/// Analytic constants, consumed only by the verifier. The solver never
/// reads them.
struct KnownConstants {
  std::optional<double> L;
  std::optional<double> mu_pl;
  std::optional<double> D0;
};

struct TestBox {
  Vector center;
  double radius = 1.0;
};

struct CompositeProblem {
  std::string name;
  Index dim = 0;
  SmoothPart smooth;
  NonsmoothPart nonsmooth;
  MetricOperator metric;

  std::optional<KnownOptimum> known_optimum;
  KnownConstants constants;
  /// F convex on the initial sublevel set.
  bool convex = false;
  /// H(x) is positive semidefinite everywhere.
  bool newton_psd = false;
  /// Region where the verifier samples remainder pairs and gradient checks.
  std::optional<TestBox> box;
  /// Metric projection onto the solution set, for non-isolated minima.
  std::function<Vector(const Vector&)> project_to_solution_set;
  /// Builds a pair (x', y) near the sampled x whose segment crosses an
  /// active-set switch.
  std::function<std::pair<Vector, Vector>(const Vector&, SplitMix64&)> kink_pair;
};

/// max(0, a)^2 - max(0, b)^2 given a, b and an accurately computed a - b.
inline double hinge_sq_difference(double a, double b, double a_minus_b) {
  const double ma = std::max(0.0, a);
  const double mb = std::max(0.0, b);
  if (ma > 0.0 && mb > 0.0) return a_minus_b * (ma + mb);
  return ma * ma - mb * mb;
}

/// F(x) = f(x) + psi(x); +inf outside dom psi.
inline double objective(const CompositeProblem& p, const Vector& x) {
  require(x.size() == p.dim, "objective: dimension mismatch");
  const double psi = p.nonsmooth.value(x);
  if (!std::isfinite(psi)) return kInfinity;
  return p.smooth.value(x) + psi;
}

/// F(x) - F(y), using the problem's cancellation-free difference of f when
/// one is provided.
inline double objective_decrease(const CompositeProblem& p, const Vector& x, const Vector& y) {
  require(x.size() == p.dim && y.size() == p.dim, "objective_decrease: dimension mismatch");
  const double psi_x = p.nonsmooth.value(x);
  const double psi_y = p.nonsmooth.value(y);
  if (!std::isfinite(psi_y)) return -kInfinity;
  const double df = p.smooth.decrease ? p.smooth.decrease(x, y) : p.smooth.value(x) - p.smooth.value(y);
  return df + (psi_x - psi_y);
}

/// f'(x) + psi_sub, an element of dF(x) when psi_sub is in d psi(x).
inline Vector full_subgradient(const CompositeProblem& p, const Vector& x, const Vector& psi_sub) {
  require(x.size() == p.dim && psi_sub.size() == p.dim, "full_subgradient: dimension mismatch");
  return p.smooth.gradient(x) + psi_sub;
}

}  // namespace leapssn
