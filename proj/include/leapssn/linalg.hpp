#pragma once

// Dense/sparse/implicit linear operators and the two SPD solve paths used
// throughout: dense Cholesky for small systems, Jacobi-preconditioned CG
// for large ones.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace leapssn {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Raised when a caller breaks a documented precondition (dimension
/// mismatch, out-of-range parameter, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised for hard numerical faults: NaN input, failed metric solve.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Systems up to this size are factorised densely.
inline constexpr Index kDenseSolveLimit = 2000;

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// A symmetric linear map backed by a dense matrix, a sparse matrix or an
/// apply callback. Immutable and cheap to copy.
class LinearOperator {
 public:
  using ApplyFn = std::function<void(const Vector&, Vector&)>;

  struct Implicit {
    ApplyFn apply;
    Vector diagonal;
  };

  LinearOperator() = default;

  static LinearOperator dense(Matrix m) {
    require(m.rows() == m.cols() && m.rows() > 0, "LinearOperator: dense matrix must be square");
    LinearOperator op;
    op.dim_ = m.rows();
    op.repr_ = std::make_shared<const Repr>(std::move(m));
    return op;
  }

  static LinearOperator sparse(SparseMatrix m) {
    require(m.rows() == m.cols() && m.rows() > 0, "LinearOperator: sparse matrix must be square");
    m.makeCompressed();
    LinearOperator op;
    op.dim_ = m.rows();
    op.repr_ = std::make_shared<const Repr>(std::move(m));
    return op;
  }

  static LinearOperator implicit(Index dim, ApplyFn apply, Vector diagonal) {
    require(dim > 0, "LinearOperator: dimension must be positive");
    require(diagonal.size() == dim, "LinearOperator: diagonal has wrong size");
    LinearOperator op;
    op.dim_ = dim;
    op.repr_ = std::make_shared<const Repr>(Implicit{std::move(apply), std::move(diagonal)});
    return op;
  }

  static LinearOperator identity(Index dim) { return diagonal(Vector::Ones(dim)); }

  static LinearOperator diagonal(const Vector& d) {
    const Index n = d.size();
    SparseMatrix m(n, n);
    m.reserve(Eigen::VectorXi::Constant(n, 1));
    for (Index i = 0; i < n; ++i) m.insert(i, i) = d[i];
    return sparse(std::move(m));
  }

  Index dim() const { return dim_; }

  Vector apply(const Vector& v) const {
    require(v.size() == dim_, "LinearOperator::apply: dimension mismatch");
    return std::visit(
        [&](const auto& r) -> Vector {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Implicit>) {
            Vector out(dim_);
            r.apply(v, out);
            return out;
          } else {
            return r * v;
          }
        },
        *repr_);
  }

  Vector diagonal() const {
    return std::visit(
        [&](const auto& r) -> Vector {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Implicit>) {
            return r.diagonal;
          } else if constexpr (std::is_same_v<T, Matrix>) {
            return r.diagonal();
          } else {
            return Vector(r.diagonal());
          }
        },
        *repr_);
  }

  /// Materialises the operator. Implicit operators are applied to each unit
  /// vector, so this is only meant for small dimensions.
  Matrix to_dense() const {
    return std::visit(
        [&](const auto& r) -> Matrix {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Matrix>) {
            return r;
          } else if constexpr (std::is_same_v<T, SparseMatrix>) {
            return Matrix(r);
          } else {
            Matrix out(dim_, dim_);
            Vector e = Vector::Zero(dim_);
            Vector col(dim_);
            for (Index j = 0; j < dim_; ++j) {
              e[j] = 1.0;
              r.apply(e, col);
              out.col(j) = col;
              e[j] = 0.0;
            }
            return out;
          }
        },
        *repr_);
  }

  const Matrix* as_dense() const { return std::get_if<Matrix>(repr_.get()); }
  const SparseMatrix* as_sparse() const { return std::get_if<SparseMatrix>(repr_.get()); }

 private:
  using Repr = std::variant<Matrix, SparseMatrix, Implicit>;
  Index dim_ = 0;
  std::shared_ptr<const Repr> repr_;
};

/// a*A + b*B, kept sparse when both are sparse.
inline LinearOperator combine(double a, const LinearOperator& A, double b, const LinearOperator& B) {
  require(A.dim() == B.dim(), "combine: dimension mismatch");
  if (A.as_sparse() && B.as_sparse()) {
    SparseMatrix m = a * (*A.as_sparse()) + b * (*B.as_sparse());
    return LinearOperator::sparse(std::move(m));
  }
  if (A.dim() <= kDenseSolveLimit || A.as_dense() || B.as_dense()) {
    return LinearOperator::dense(a * A.to_dense() + b * B.to_dense());
  }
  Vector diag = a * A.diagonal() + b * B.diagonal();
  return LinearOperator::implicit(
      A.dim(), [A, B, a, b](const Vector& v, Vector& out) { out = a * A.apply(v) + b * B.apply(v); },
      std::move(diag));
}

struct CgResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  /// A search direction with nonpositive curvature was met.
  bool indefinite = false;
};

/// Jacobi-preconditioned conjugate gradients on an SPD operator.
inline CgResult pcg(const LinearOperator& A, const Vector& rhs, double rel_tol, int max_iter = 0) {
  const Index n = A.dim();
  require(rhs.size() == n, "pcg: dimension mismatch");
  if (max_iter <= 0) max_iter = static_cast<int>(std::max<Index>(10 * n, 100));
  CgResult res;
  res.x = Vector::Zero(n);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    res.converged = true;
    return res;
  }
  Vector inv_diag = A.diagonal();
  for (Index i = 0; i < n; ++i) {
    if (!(inv_diag[i] > 0.0)) {
      res.indefinite = true;
      return res;
    }
    inv_diag[i] = 1.0 / inv_diag[i];
  }
  Vector r = rhs;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    const Vector Ap = A.apply(p);
    const double curvature = p.dot(Ap);
    if (!(curvature > 0.0)) {
      res.indefinite = true;
      res.iterations = it;
      res.relative_residual = r.norm() / rhs_norm;
      return res;
    }
    const double step = rz / curvature;
    res.x += step * p;
    r -= step * Ap;
    res.iterations = it + 1;
    res.relative_residual = r.norm() / rhs_norm;
    if (res.relative_residual <= rel_tol) {
      res.converged = true;
      return res;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return res;
}

/// Outcome of an SPD solve; `ok == false` means the operator was found not
/// positive definite or the iteration failed.
struct SpdSolve {
  Vector x;
  bool ok = false;
  bool indefinite = false;
  double relative_residual = 0.0;
};

/// Solves A x = rhs for SPD A: dense LLT up to kDenseSolveLimit, PCG above.
inline SpdSolve solve_spd(const LinearOperator& A, const Vector& rhs, double cg_rel_tol) {
  SpdSolve out;
  if (A.dim() <= kDenseSolveLimit) {
    Eigen::LLT<Matrix> llt(A.to_dense());
    if (llt.info() != Eigen::Success) {
      out.indefinite = true;
      return out;
    }
    out.x = llt.solve(rhs);
    out.ok = out.x.allFinite();
    return out;
  }
  CgResult cg = pcg(A, rhs, cg_rel_tol);
  out.indefinite = cg.indefinite;
  out.relative_residual = cg.relative_residual;
  out.ok = cg.converged && cg.x.allFinite();
  out.x = std::move(cg.x);
  return out;
}

}  // namespace leapssn
