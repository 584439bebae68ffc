#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace qarsta {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Relative tolerance below which a matrix is treated as column-rank deficient:
/// sigma_min < kRankTolerance * max(1, sigma_max).
inline constexpr double kRankTolerance = 1e-12;

/// Singular values in decreasing order. Empty for an empty matrix.
inline Vector singular_values(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) return Vector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

/// Smallest singular value over min(rows, cols) values. A single column gives
/// its norm; an empty matrix gives +inf.
inline double sigma_min(const Eigen::Ref<const Matrix>& m) {
  if (m.cols() == 0 || m.rows() == 0) return std::numeric_limits<double>::infinity();
  if (m.cols() == 1) return m.col(0).norm();
  const Vector s = singular_values(m);
  return s(s.size() - 1);
}

/// Spectral norm (largest singular value); zero for an empty matrix.
inline double spectral_norm(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) return 0.0;
  if (m.cols() == 1) return m.col(0).norm();
  return singular_values(m)(0);
}

/// Spectral norm of a symmetric matrix via its eigenvalues.
inline double symmetric_norm(const Eigen::Ref<const Matrix>& h) {
  if (h.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(h.rows() - 1)));
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace qarsta
