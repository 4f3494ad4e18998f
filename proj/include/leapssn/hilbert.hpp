#pragma once

// Finite-dimensional Hilbert space with an SPD metric R (the Riesz map).
// Primal norm ||x|| = sqrt(<Rx, x>), dual norm ||g||_* = sqrt(<g, R^-1 g>).
// The duality pairing <g, x> is the plain coordinate dot product.

#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

#include "leapssn/linalg.hpp"

namespace leapssn {

class MetricOperator {
 public:
  /// Relative residual demanded from CG-based metric solves.
  static constexpr double kSolveTol = 1e-12;

  MetricOperator() = default;

  static MetricOperator identity(Index dim) {
    require(dim > 0, "MetricOperator: dimension must be positive");
    MetricOperator m;
    m.op_ = LinearOperator::identity(dim);
    m.identity_ = true;
    return m;
  }

  static MetricOperator diagonal(const Vector& d) {
    require(d.size() > 0, "MetricOperator: dimension must be positive");
    require((d.array() > 0.0).all(), "MetricOperator: diagonal must be positive");
    return from_operator(LinearOperator::diagonal(d));
  }

  /// Wraps an SPD operator. Small operators are factorised once here.
  static MetricOperator from_operator(LinearOperator op) {
    MetricOperator m;
    m.op_ = std::move(op);
    if (m.op_.dim() <= kDenseSolveLimit) {
      auto llt = std::make_shared<Eigen::LLT<Matrix>>(m.op_.to_dense());
      require(llt->info() == Eigen::Success, "MetricOperator: operator is not positive definite");
      m.llt_ = std::move(llt);
    }
    return m;
  }

  Index dim() const { return op_.dim(); }
  bool is_identity() const { return identity_; }
  const LinearOperator& op() const { return op_; }

  Vector apply(const Vector& v) const {
    if (identity_) {
      require(v.size() == dim(), "MetricOperator::apply: dimension mismatch");
      return v;
    }
    return op_.apply(v);
  }

  /// R^-1 g. Throws NumericalError when the iterative solve fails.
  Vector solve(const Vector& g) const {
    require(g.size() == dim(), "MetricOperator::solve: dimension mismatch");
    if (identity_) return g;
    if (llt_) return llt_->solve(g);
    CgResult cg = pcg(op_, g, kSolveTol);
    if (!cg.converged) {
      std::ostringstream msg;
      msg << "metric solve failed after " << cg.iterations
          << " iterations, relative residual " << cg.relative_residual;
      throw NumericalError(msg.str());
    }
    return std::move(cg.x);
  }

 private:
  LinearOperator op_;
  std::shared_ptr<const Eigen::LLT<Matrix>> llt_;
  bool identity_ = false;
};

/// <Rx, y>
inline double inner(const Vector& x, const Vector& y, const MetricOperator& R) {
  require(x.size() == y.size() && x.size() == R.dim(), "inner: dimension mismatch");
  if (R.is_identity()) return x.dot(y);
  return R.apply(x).dot(y);
}

inline double primal_norm(const Vector& x, const MetricOperator& R) {
  if (R.is_identity()) {
    require(x.size() == R.dim(), "primal_norm: dimension mismatch");
    return x.norm();
  }
  return std::sqrt(std::max(0.0, inner(x, x, R)));
}

inline double dual_norm(const Vector& g, const MetricOperator& R) {
  if (R.is_identity()) {
    require(g.size() == R.dim(), "dual_norm: dimension mismatch");
    return g.norm();
  }
  if (g.isZero(0.0)) return 0.0;
  return std::sqrt(std::max(0.0, g.dot(R.solve(g))));
}

}  // namespace leapssn
