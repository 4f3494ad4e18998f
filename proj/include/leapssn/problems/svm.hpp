#pragma once

// L2-loss support vector machine in the variables z = (w, b):
//
//   F(w, b) = 1/2 ||w||^2 + gamma sum_i max(1 - y_i (w'x_i + b), 0)^2
//
// with Euclidean metric.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "leapssn/problem.hpp"
#include "leapssn/problems/image.hpp"

namespace leapssn {

struct SvmData {
  /// ell x n, one sample per row.
  Matrix points;
  /// Entries in {-1, +1}.
  Vector labels;
  double gamma = 1.0;

  Index samples() const { return points.rows(); }
  Index features() const { return points.cols(); }

  void validate() const {
    require(points.rows() >= 1 && points.cols() >= 1, "SvmData: need at least one sample and one feature");
    require(labels.size() == points.rows(), "SvmData: label count does not match sample count");
    require(gamma > 0.0 && std::isfinite(gamma), "SvmData: gamma must be positive");
    require(points.allFinite(), "SvmData: features must be finite");
    for (Index i = 0; i < labels.size(); ++i)
      require(labels[i] == 1.0 || labels[i] == -1.0, "SvmData: labels must be -1 or +1");
  }
};

inline CompositeProblem svm_problem(const SvmData& d) {
  d.validate();
  const Index n = d.features();
  const Index ell = d.samples();
  // Augmented rows (x_i, 1) pre-multiplied by y_i.
  Matrix Z(ell, n + 1);
  Z.leftCols(n) = d.labels.asDiagonal() * d.points;
  Z.col(n) = d.labels;
  const double gamma = d.gamma;

  CompositeProblem p;
  p.name = "svm";
  p.dim = n + 1;
  p.smooth.value = [Z, gamma, n](const Vector& z) {
    const Vector m = (1.0 - (Z * z).array()).max(0.0).matrix();
    return 0.5 * z.head(n).squaredNorm() + gamma * m.squaredNorm();
  };
  p.smooth.gradient = [Z, gamma, n](const Vector& z) -> Vector {
    const Vector m = (1.0 - (Z * z).array()).max(0.0).matrix();
    Vector g = -2.0 * gamma * (Z.transpose() * m);
    g.head(n) += z.head(n);
    return g;
  };
  p.smooth.decrease = [Z, gamma, n](const Vector& z1, const Vector& z2) {
    const Vector dz = z1 - z2;
    const Vector s1 = Z * z1;
    const Vector s2 = Z * z2;
    const Vector ds = Z * dz;
    double pen = 0.0;
    for (Index i = 0; i < s1.size(); ++i) pen += hinge_sq_difference(1.0 - s1[i], 1.0 - s2[i], -ds[i]);
    return 0.5 * dz.head(n).dot(z1.head(n) + z2.head(n)) + gamma * pen;
  };
  p.smooth.newton_derivative = [Z, gamma, n](const Vector& z) {
    const Vector s = Z * z;
    std::vector<Index> active;
    for (Index i = 0; i < s.size(); ++i)
      if (1.0 - s[i] >= 0.0) active.push_back(i);
    Matrix ZA(static_cast<Index>(active.size()), n + 1);
    for (std::size_t r = 0; r < active.size(); ++r) ZA.row(static_cast<Index>(r)) = Z.row(active[r]);
    Matrix H = Matrix::Zero(n + 1, n + 1);
    H.selfadjointView<Eigen::Lower>().rankUpdate(ZA.transpose(), 2.0 * gamma);
    H.diagonal().head(n).array() += 1.0;
    H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
    return LinearOperator::dense(std::move(H));
  };
  p.metric = MetricOperator::identity(n + 1);
  p.convex = true;
  p.newton_psd = true;
  p.box = TestBox{Vector::Zero(n + 1), 10.0};
  p.kink_pair = [Z, n](const Vector& z, SplitMix64& rng) {
    // Shift b so that one sample's margin argument changes sign.
    const Index i = static_cast<Index>(rng.next() % static_cast<std::uint64_t>(Z.rows()));
    const double yi = Z(i, n);
    const double a = 1.0 - Z.row(i).dot(z);
    const double target = a != 0.0 ? -a * rng.uniform(0.05, 2.0) : -1e-3;
    Vector y = z;
    y[n] += yi * (a - target);
    return std::pair<Vector, Vector>{z, y};
  };
  return p;
}

/// Upper bound 1 + 2 gamma sum_i ||(x_i, 1)||^2 on ||H(z)||.
inline double svm_hessian_bound(const SvmData& d) {
  return 1.0 + 2.0 * d.gamma * (d.points.squaredNorm() + static_cast<double>(d.samples()));
}

/// Two Gaussian blobs at +-(separation/2) u for a seeded unit vector u.
/// Labels alternate +1, -1, ... so +1 receives the extra sample for odd ell.
inline SvmData svm_synthetic(Index n, Index ell, std::uint64_t seed, double separation, double gamma = 1.0) {
  require(n >= 1, "svm_synthetic: n must be >= 1");
  require(ell >= 2, "svm_synthetic: ell must be >= 2");
  require(separation >= 0.0, "svm_synthetic: separation must be nonnegative");
  SplitMix64 rng(seed);
  Vector u = rng.normal_vector(n);
  u /= u.norm();
  SvmData d;
  d.gamma = gamma;
  d.points.resize(ell, n);
  d.labels.resize(ell);
  for (Index i = 0; i < ell; ++i) {
    const double y = (i % 2 == 0) ? 1.0 : -1.0;
    d.labels[i] = y;
    for (Index j = 0; j < n; ++j) d.points(i, j) = y * 0.5 * separation * u[j] + rng.normal();
  }
  return d;
}

/// One sample per line: label then n features. Blank lines and lines
/// starting with '#' are skipped.
inline SvmData read_svm_text(std::istream& in, double gamma = 1.0) {
  std::vector<double> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double y = 0.0;
    if (!(ls >> y) || (y != 1.0 && y != -1.0))
      throw IoError("SVM data line " + std::to_string(lineno) + ": label must be -1 or +1");
    std::vector<double> feats;
    double v = 0.0;
    while (ls >> v) feats.push_back(v);
    if (!ls.eof()) throw IoError("SVM data line " + std::to_string(lineno) + ": malformed feature");
    if (feats.empty()) throw IoError("SVM data line " + std::to_string(lineno) + ": no features");
    if (!rows.empty() && feats.size() != rows.front().size())
      throw IoError("SVM data line " + std::to_string(lineno) + ": inconsistent feature count");
    labels.push_back(y);
    rows.push_back(std::move(feats));
  }
  if (rows.empty()) throw IoError("SVM data: no samples");
  SvmData d;
  d.gamma = gamma;
  const Index ell = static_cast<Index>(rows.size());
  const Index n = static_cast<Index>(rows.front().size());
  d.points.resize(ell, n);
  d.labels.resize(ell);
  for (Index i = 0; i < ell; ++i) {
    d.labels[i] = labels[static_cast<std::size_t>(i)];
    for (Index j = 0; j < n; ++j) d.points(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  d.validate();
  return d;
}

inline SvmData read_svm_text(const std::string& path, double gamma = 1.0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_svm_text(in, gamma);
}

inline void write_svm_text(std::ostream& out, const SvmData& d) {
  char buf[32];
  for (Index i = 0; i < d.samples(); ++i) {
    out << (d.labels[i] > 0 ? "1" : "-1");
    for (Index j = 0; j < d.features(); ++j) {
      std::snprintf(buf, sizeof buf, " %.17g", d.points(i, j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("SVM data: write failed");
}

inline void write_svm_text(const std::string& path, const SvmData& d) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_svm_text(out, d);
}

}  // namespace leapssn
