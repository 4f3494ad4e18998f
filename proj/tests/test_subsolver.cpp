#include <gtest/gtest.h>

#include <cmath>

#include "leapssn/problems/analytic.hpp"
#include "leapssn/subsolver.hpp"

using namespace leapssn;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double t : v) x[i++] = t;
  return x;
}

/// Problem whose smooth part is linear-plus-quadratic with a prescribed
/// Newton derivative: f(y) = <c, y> + 1/2 <H y, y>.
CompositeProblem model_problem(const Matrix& H, const Vector& c, NonsmoothPart psi = NonsmoothPart::zero()) {
  return quadratic(H, -c, std::move(psi));
}

}  // namespace

TEST(SmoothStep, HalfNormSquared) {
  const CompositeProblem p = half_norm_squared(2);
  const SubproblemResult r = smooth_step(vec({2, 0}), 1.0, p);
  ASSERT_TRUE(r.computable);
  EXPECT_NEAR((r.x_plus - vec({1, 0})).norm(), 0.0, 1e-15);
  EXPECT_EQ(r.linear_solve_count, 1);
  EXPECT_EQ(r.psi_sub, Vector::Zero(2));
  EXPECT_NEAR((r.F_sub - vec({1, 0})).norm(), 0.0, 1e-15);
}

TEST(SmoothStep, SingularHessianRegularised) {
  // H = diag(2, 0), f'(0) = (3, 1): diag(3, 1) d = -(3, 1).
  Matrix H = Matrix::Zero(2, 2);
  H(0, 0) = 2.0;
  const CompositeProblem p = model_problem(H, vec({3, 1}));
  const SubproblemResult r = smooth_step(vec({0, 0}), 1.0, p);
  ASSERT_TRUE(r.computable);
  EXPECT_NEAR((r.x_plus - vec({-1, -1})).norm(), 0.0, 1e-14);
}

TEST(SmoothStep, StationaryPointIsFixed) {
  const CompositeProblem p = half_norm_squared(3);
  for (double lam : {0.1, 1.0, 7.0}) {
    const SubproblemResult r = smooth_step(Vector::Zero(3), lam, p);
    ASSERT_TRUE(r.computable);
    EXPECT_EQ(r.x_plus, Vector::Zero(3));
    EXPECT_EQ(r.stationarity_residual, 0.0);
  }
}

TEST(SmoothStep, IndefiniteIsNotComputable) {
  Matrix H = Matrix::Zero(2, 2);
  H(0, 0) = -3.0;
  H(1, 1) = 1.0;
  const CompositeProblem p = model_problem(H, vec({1, 1}));
  const SubproblemResult r = smooth_step(vec({0, 0}), 1.0, p);
  EXPECT_FALSE(r.computable);
  EXPECT_EQ(r.linear_solve_count, 1);
  EXPECT_TRUE(smooth_step(vec({0, 0}), 4.0, p).computable);
}

TEST(SmoothStep, RejectsNonzeroPsi) {
  EXPECT_THROW(smooth_step(vec({1, 1}), 1.0, partial_smooth_2d()), ContractViolation);
}

TEST(SmoothStep, FirstOrderConditionAndModelDecrease) {
  const CompositeProblem p = rank_deficient_ls(10, 4, 3);
  SplitMix64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Vector x = rng.uniform_vector(10, -2, 2);
    const double lam = rng.uniform(1e-3, 10.0);
    const SubproblemResult r = smooth_step(x, lam, p);
    ASSERT_TRUE(r.computable);
    const double F = objective(p, x);
    EXPECT_LE(r.model_value_at_xplus, F + model_slack(F));
    EXPECT_LE(r.stationarity_residual, 1e-9 * (1.0 + p.smooth.gradient(x).norm()));
    EXPECT_EQ(r.F_sub, p.smooth.gradient(r.x_plus) + r.psi_sub);
  }
}

TEST(ModelValue, Examples) {
  const CompositeProblem p = half_norm_squared(2);
  EXPECT_DOUBLE_EQ(model_value(vec({1, 0}), vec({2, 0}), 1.0, p), 1.0);
  const Vector x = vec({0.3, -1.2});
  EXPECT_EQ(model_value(x, x, 2.5, p), objective(p, x));

  const CompositeProblem q = quadratic(Matrix::Identity(2, 2), Vector::Zero(2),
                                       NonsmoothPart::weighted_l1(vec({1.0, 0.0})));
  EXPECT_DOUBLE_EQ(model_value(vec({1, 0}), vec({2, 0}), 1.0, q), 2.0);
  const CompositeProblem ps = partial_smooth_2d();
  EXPECT_EQ(model_value(vec({1, 1}), vec({1, 1}), 3.0, ps), objective(ps, vec({1, 1})));
}

TEST(CompositeStep, SoftThresholdOfFirstCoordinate) {
  // f' = 0 and H = 0 at x: the model minimiser is prox_{|y1|}(x) with t = 1.
  const CompositeProblem p = model_problem(Matrix::Zero(2, 2), Vector::Zero(2),
                                           NonsmoothPart::weighted_l1(vec({1.0, 0.0})));
  const SubproblemResult r = composite_step(vec({2, 3}), 1.0, p);
  ASSERT_TRUE(r.computable);
  EXPECT_NEAR((r.x_plus - vec({1, 3})).norm(), 0.0, 1e-9);
  EXPECT_NEAR((r.psi_sub - vec({1, 0})).norm(), 0.0, 1e-9);
}

TEST(CompositeStep, PartlySmoothMatchesGridSearch) {
  const CompositeProblem p = partial_smooth_2d();
  const Vector x = vec({1, 0});
  const double lam = 1.0;
  const NewtonModel model(p, x);
  // Refined grid search over [-2, 2]^2.
  Vector best = Vector::Zero(2);
  double best_val = model.value(best, lam);
  double h = 0.1;
  Vector centre = Vector::Zero(2);
  for (int round = 0; round < 40; ++round) {
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j) {
        const Vector y = centre + h * vec({static_cast<double>(i), static_cast<double>(j)});
        const double v = model.value(y, lam);
        if (v < best_val) {
          best_val = v;
          best = y;
        }
      }
    centre = best;
    h *= 0.5;
  }
  const SubproblemResult r = composite_step(model, lam);
  ASSERT_TRUE(r.computable);
  EXPECT_LE((r.x_plus - best).norm(), 1e-6);
  // Closed form: H = diag(4, 2), f'(x) = (4, 0), so x+ = (0, 0).
  EXPECT_LE(r.x_plus.norm(), 1e-9);
}

TEST(CompositeStep, AgreesWithSmoothStepWhenPsiIsZero) {
  const CompositeProblem p = rank_deficient_ls(8, 5, 2);
  SplitMix64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Vector x = rng.uniform_vector(8, -2, 2);
    const double lam = rng.uniform(0.05, 5.0);
    const SubproblemResult a = smooth_step(x, lam, p);
    const SubproblemResult b = composite_step(x, lam, p);
    ASSERT_TRUE(a.computable && b.computable);
    EXPECT_LE(primal_norm(a.x_plus - b.x_plus, p.metric), 1e-8);
  }
}

TEST(CompositeStep, ModelNonincreaseAndExactSubgradient) {
  const CompositeProblem p = partial_smooth_2d();
  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const Vector x = rng.uniform_vector(2, -3, 3);
    const double lam = rng.uniform(0.01, 10.0);
    const SubproblemResult r = composite_step(x, lam, p);
    ASSERT_TRUE(r.computable);
    const double F = objective(p, x);
    EXPECT_LE(r.model_value_at_xplus, F + model_slack(F));
    // psi_sub in d|y1| at x+, up to rounding in (z - y)/t.
    if (r.x_plus[0] > 0.0) {
      EXPECT_NEAR(r.psi_sub[0], 1.0, 1e-12);
    }
    if (r.x_plus[0] < 0.0) {
      EXPECT_NEAR(r.psi_sub[0], -1.0, 1e-12);
    }
    EXPECT_LE(std::abs(r.psi_sub[0]), 1.0 + 1e-12);
    EXPECT_EQ(r.psi_sub[1], 0.0);
    EXPECT_EQ(r.F_sub, p.smooth.gradient(r.x_plus) + r.psi_sub);
  }
}

TEST(CompositeStep, UnboundedModelIsNotComputable) {
  Matrix H = Matrix::Zero(2, 2);
  H(0, 0) = -4.0;
  const CompositeProblem p = model_problem(H, vec({1, 0}), NonsmoothPart::weighted_l1(vec({0.1, 0.1})));
  const SubproblemResult r = composite_step(vec({0, 0}), 1.0, p);
  EXPECT_FALSE(r.computable);
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(CompositeStep, InnerBudgetExhaustion) {
  const CompositeProblem p = partial_smooth_2d();
  CompositeOptions opts;
  opts.max_inner = 1;
  opts.inner_tol = 1e-300;
  const SubproblemResult r = composite_step(NewtonModel(p, vec({3, 2})), 1e-3, opts);
  EXPECT_FALSE(r.computable);
  EXPECT_EQ(r.diagnostics, "inner iteration budget exhausted");
}

TEST(NewtonStep, DispatchesOnPsi) {
  const CompositeProblem smooth = half_norm_squared(2);
  const SubproblemResult a = newton_step(NewtonModel(smooth, vec({2, 0})), 1.0);
  EXPECT_EQ(a.inner_iterations, 0);
  const CompositeProblem comp = partial_smooth_2d();
  const SubproblemResult b = newton_step(NewtonModel(comp, vec({2, 1})), 1.0);
  EXPECT_GT(b.inner_iterations, 0);
}

TEST(SubproblemInequalities, StepLengthAndLambdaSensitivity) {
  // H >= 0: ||x+ - x|| <= ||F'(x)||_*/lam and the lambda-sensitivity bound.
  const CompositeProblem p = partial_smooth_2d();
  SplitMix64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const Vector x = rng.uniform_vector(2, -3, 3);
    const double lam = rng.uniform(0.05, 5.0);
    const double lam2 = lam * rng.uniform(1.0, 8.0);
    const Vector s = vec({x[0] > 0 ? 1.0 : -1.0, 0.0});
    const NewtonModel model(p, x);
    const SubproblemResult a = composite_step(model, lam);
    const SubproblemResult b = composite_step(model, lam2);
    ASSERT_TRUE(a.computable && b.computable);
    const double bound = (model.gradient() + s).norm() / lam;
    EXPECT_LE((a.x_plus - x).norm(), bound * (1.0 + 1e-8) + 1e-12);
    EXPECT_LE((a.x_plus - b.x_plus).norm(), (lam2 - lam) / lam2 * (x - a.x_plus).norm() + 1e-8);
  }
}
