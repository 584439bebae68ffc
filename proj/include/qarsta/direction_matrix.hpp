#pragma once

#include <string>

#include "qarsta/errors.hpp"
#include "qarsta/linalg.hpp"

namespace qarsta {

/// An n x p matrix of sample directions together with its thin QR factors and
/// extreme singular values. The factors are computed once at construction, so
/// pseudoinverse applications are triangular solves.
///
/// Invariants: p >= 1, every column nonzero, columns == q() * r() to rounding.
class DirectionMatrix {
 public:
  explicit DirectionMatrix(Matrix columns) : columns_(std::move(columns)) {
    check_shape();
    const Eigen::Index n = columns_.rows();
    const Eigen::Index p = columns_.cols();
    Eigen::HouseholderQR<Matrix> qr(columns_);
    q_ = qr.householderQ() * Matrix::Identity(n, p);
    r_ = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    compute_singular_values();
  }

  /// Wraps a square upper-triangular matrix, using Q = I as its QR factor.
  /// This is how the subspace coordinates R of a full-space D are handled.
  static DirectionMatrix from_upper_triangular(const Matrix& r) {
    if (r.rows() != r.cols()) throw ArgumentError("from_upper_triangular: R must be square");
    DirectionMatrix d;
    d.columns_ = r.triangularView<Eigen::Upper>();
    d.check_shape();
    d.q_ = Matrix::Identity(r.rows(), r.cols());
    d.r_ = d.columns_;
    d.compute_singular_values();
    return d;
  }

  Eigen::Index rows() const { return columns_.rows(); }
  Eigen::Index cols() const { return columns_.cols(); }

  const Matrix& columns() const { return columns_; }
  const Matrix& q() const { return q_; }
  const Matrix& r() const { return r_; }
  auto column(Eigen::Index i) const { return columns_.col(i); }

  double sigma_min() const { return sigma_min_; }
  double sigma_max() const { return sigma_max_; }

  /// ||D^+|| = 1 / sigma_min for a full-column-rank D.
  double pinv_norm() const { return 1.0 / sigma_min_; }

  /// Longest column length.
  double max_column_norm() const { return columns_.colwise().norm().maxCoeff(); }

  bool full_rank() const { return sigma_min_ >= kRankTolerance * std::max(1.0, sigma_max_); }

  void require_full_rank(const char* who) const {
    if (!full_rank()) {
      throw RankDeficiencyError(std::string(who) + ": direction matrix is rank deficient (sigma_min = " +
                                std::to_string(sigma_min_) + ")");
    }
  }

  /// (D^T)^+ v = Q R^{-T} v.
  Vector apply_pinv_transpose(const Vector& v) const {
    if (v.size() != cols()) throw ArgumentError("apply_pinv_transpose: length mismatch");
    Vector y = r_.transpose().triangularView<Eigen::Lower>().solve(v);
    return q_ * y;
  }

  /// R^{-T} M R^{-1} for a square p x p M (the subspace part of (D^T)^+ M D^+).
  Matrix congruence_inverse(const Matrix& m) const {
    if (m.rows() != cols() || m.cols() != cols()) throw ArgumentError("congruence_inverse: shape mismatch");
    Matrix left = r_.transpose().triangularView<Eigen::Lower>().solve(m);
    // left * R^{-1} == (R^{-T} left^T)^T
    Matrix right = r_.transpose().triangularView<Eigen::Lower>().solve(left.transpose());
    return right.transpose();
  }

  /// gamma * D with factors and singular values scaled in place (exact for
  /// powers of two).
  DirectionMatrix scaled(double gamma) const {
    if (!(gamma > 0.0)) throw ArgumentError("scaled: factor must be positive");
    DirectionMatrix d = *this;
    d.columns_ *= gamma;
    d.r_ *= gamma;
    d.sigma_min_ *= gamma;
    d.sigma_max_ *= gamma;
    return d;
  }

 private:
  DirectionMatrix() = default;

  void check_shape() const {
    if (columns_.cols() < 1) throw ArgumentError("DirectionMatrix: need at least one column");
    if (columns_.cols() > columns_.rows())
      throw ArgumentError("DirectionMatrix: more columns than rows cannot have full column rank");
    if (!columns_.allFinite()) throw NumericError("DirectionMatrix: non-finite entries");
    for (Eigen::Index j = 0; j < columns_.cols(); ++j) {
      if (columns_.col(j).squaredNorm() == 0.0) throw ArgumentError("DirectionMatrix: zero column");
    }
  }

  void compute_singular_values() {
    const Vector s = singular_values(r_);
    sigma_max_ = s(0);
    sigma_min_ = s(s.size() - 1);
  }

  Matrix columns_;
  Matrix q_;
  Matrix r_;
  double sigma_min_ = 0.0;
  double sigma_max_ = 0.0;
};

}  // namespace qarsta
