#include <gtest/gtest.h>

#include <cmath>

#include "leapssn/hilbert.hpp"
#include "leapssn/rng.hpp"

using namespace leapssn;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double t : v) x[i++] = t;
  return x;
}

MetricOperator diag41() { return MetricOperator::diagonal(vec({4.0, 1.0})); }

/// Seeded SPD matrix of size n with spectrum in [1, 10].
Matrix spd(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix M(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) M(i, j) = rng.normal();
  Matrix A = M * M.transpose() / static_cast<double>(n);
  A.diagonal().array() += 1.0;
  return A;
}

}  // namespace

TEST(Inner, EuclideanDotProduct) {
  EXPECT_DOUBLE_EQ(inner(vec({1, 2}), vec({3, 4}), MetricOperator::identity(2)), 11.0);
}

TEST(Inner, DiagonalMetric) {
  EXPECT_DOUBLE_EQ(inner(vec({1, 0}), vec({1, 0}), diag41()), 4.0);
  EXPECT_DOUBLE_EQ(inner(vec({1, 1}), vec({1, -1}), diag41()), 3.0);
}

TEST(Inner, DimensionMismatchIsContractViolation) {
  EXPECT_THROW(inner(vec({1, 2}), vec({1, 2, 3}), MetricOperator::identity(2)), ContractViolation);
  EXPECT_THROW(inner(vec({1, 2, 3}), vec({1, 2, 3}), MetricOperator::identity(2)), ContractViolation);
}

TEST(PrimalNorm, Examples) {
  EXPECT_DOUBLE_EQ(primal_norm(vec({3, 4}), MetricOperator::identity(2)), 5.0);
  EXPECT_DOUBLE_EQ(primal_norm(vec({1, 1}), diag41()), std::sqrt(5.0));
  EXPECT_EQ(primal_norm(Vector::Zero(2), diag41()), 0.0);
  EXPECT_EQ(primal_norm(Vector::Zero(2), MetricOperator::identity(2)), 0.0);
}

TEST(DualNorm, Examples) {
  EXPECT_DOUBLE_EQ(dual_norm(vec({3, 4}), MetricOperator::identity(2)), 5.0);
  EXPECT_DOUBLE_EQ(dual_norm(vec({2, 1}), diag41()), std::sqrt(2.0));
  EXPECT_EQ(dual_norm(Vector::Zero(2), diag41()), 0.0);
}

TEST(Metric, RejectsNonPositiveDiagonal) {
  EXPECT_THROW(MetricOperator::diagonal(vec({1.0, 0.0})), ContractViolation);
}

TEST(Metric, RejectsIndefiniteOperator) {
  Matrix A(2, 2);
  A << 1, 2, 2, 1;
  EXPECT_THROW(MetricOperator::from_operator(LinearOperator::dense(A)), ContractViolation);
}

TEST(Metric, SymmetryPositivityAndSolve) {
  const Index n = 12;
  const MetricOperator R = MetricOperator::from_operator(LinearOperator::dense(spd(n, 3)));
  SplitMix64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Vector x = rng.normal_vector(n);
    const Vector y = rng.normal_vector(n);
    const double a = inner(x, y, R);
    const double b = inner(y, x, R);
    EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a)));
    EXPECT_GT(inner(x, x, R), 0.0);
    const Vector back = R.solve(R.apply(x));
    EXPECT_LE((back - x).norm(), 1e-8 * x.norm());
  }
}

TEST(Metric, IterativeSolveForLargeSparseOperator) {
  // 1D Laplacian plus identity, beyond the dense factorisation limit.
  const Index n = kDenseSolveLimit + 500;
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, 3.0);
    if (i > 0) t.emplace_back(i, i - 1, -1.0);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  const MetricOperator R = MetricOperator::from_operator(LinearOperator::sparse(A));
  SplitMix64 rng(5);
  const Vector x = rng.normal_vector(n);
  EXPECT_LE((R.solve(R.apply(x)) - x).norm(), 1e-8 * x.norm());
}

TEST(Norms, CauchySchwarzAndRieszConsistency) {
  const Index n = 8;
  const MetricOperator R = MetricOperator::from_operator(LinearOperator::dense(spd(n, 7)));
  SplitMix64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const Vector g = rng.normal_vector(n);
    const Vector x = rng.normal_vector(n);
    const double bound = dual_norm(g, R) * primal_norm(x, R);
    EXPECT_LE(std::abs(g.dot(x)), bound * (1.0 + 1e-10));
    const double p = primal_norm(x, R);
    EXPECT_NEAR(dual_norm(R.apply(x), R), p, 1e-8 * p);
  }
}

TEST(Norms, IdentityMetricIsEuclidean) {
  SplitMix64 rng(9);
  const MetricOperator R = MetricOperator::identity(6);
  for (int t = 0; t < 20; ++t) {
    const Vector x = rng.normal_vector(6);
    EXPECT_DOUBLE_EQ(primal_norm(x, R), x.norm());
    EXPECT_DOUBLE_EQ(dual_norm(x, R), x.norm());
  }
}

TEST(SplitMix64, ReferenceSequence) {
  // Reference outputs of SplitMix64 seeded with 1234567.
  SplitMix64 rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ULL);
  EXPECT_EQ(rng.next(), 3203168211198807973ULL);
  EXPECT_EQ(rng.next(), 9817491932198370423ULL);
}

TEST(SplitMix64, UniformInOpenUnitInterval) {
  SplitMix64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(SplitMix64, NormalMoments) {
  SplitMix64 rng(12);
  const int N = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / N, 0.0, 0.01);
  EXPECT_NEAR(s2 / N, 1.0, 0.01);
}

TEST(LinearSolve, CholeskyReportsIndefinite) {
  Matrix A(2, 2);
  A << 1, 0, 0, -1;
  const SpdSolve s = solve_spd(LinearOperator::dense(A), Vector::Ones(2), 1e-10);
  EXPECT_FALSE(s.ok);
  EXPECT_TRUE(s.indefinite);
}

TEST(LinearSolve, PcgSolvesSpdSystem) {
  const Matrix A = spd(30, 13);
  SplitMix64 rng(14);
  const Vector b = rng.normal_vector(30);
  const CgResult r = pcg(LinearOperator::dense(A), b, 1e-12);
  ASSERT_TRUE(r.converged);
  EXPECT_LE((A * r.x - b).norm(), 1e-10 * b.norm());
}
