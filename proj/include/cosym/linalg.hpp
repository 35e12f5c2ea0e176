#pragma once

// Small dense kernels used by the pointwise checks: rank, kernels, square
// solves and least squares. All matrices here are at most a few dozen rows.

#include <algorithm>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cosym/errors.hpp"

namespace cosym::linalg {

/// Singular values below rank_tolerance * max(1, largest) count as zero.
inline constexpr double rank_tolerance = 1e-9;

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

inline int rank(const Eigen::MatrixXd& m, double tol = rank_tolerance) {
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0) return 0;
  const double cutoff = tol * std::max(1.0, s(0));
  return static_cast<int>((s.array() > cutoff).count());
}

/// Ratio of largest to smallest singular value; infinity for singular input.
inline double condition_number(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0) return 1.0;
  const double smallest = s(s.size() - 1);
  if (smallest == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

/// Orthonormal basis of the kernel, one vector per column.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double tol = rank_tolerance) {
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  return svd.matrixV().rightCols(cols - r);
}

/// Solves a square system; throws SingularMatrixError when numerically singular.
inline Eigen::VectorXd solve_square(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const std::string& context = {}) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(rank_tolerance);
  if (!lu.isInvertible()) throw SingularMatrixError("singular matrix" + (context.empty() ? std::string{} : " in " + context));
  return lu.solve(b);
}

struct LeastSquares {
  Eigen::VectorXd solution;
  double residual = 0.0;  // max-norm of a*x - b
  int rank = 0;
};

inline LeastSquares least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  LeastSquares out;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(rank_tolerance);
  out.solution = cod.solve(b);
  out.rank = static_cast<int>(cod.rank());
  out.residual = a.rows() == 0 ? 0.0 : (a * out.solution - b).cwiseAbs().maxCoeff();
  return out;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace cosym::linalg
