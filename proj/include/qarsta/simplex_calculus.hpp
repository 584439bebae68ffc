#pragma once

// Generalized simplex gradients and Hessians built from function differences
// along a set of directions.

#include <functional>

#include "qarsta/direction_matrix.hpp"

namespace qarsta {

/// First differences f(x0 + d_i) - f(x0) over the columns of a direction set.
struct DeltaVector {
  Vector entries;
  double base_value = 0.0;
};

/// Second differences: (i,i) = f(x0+2d_i) - 2f(x0+d_i) + f(x0),
/// (i,j) = f(x0+d_i+d_j) - f(x0+d_i) - f(x0+d_j) + f(x0).
struct DeltaMatrix {
  Matrix entries;
};

/// Evaluates the first-difference vector directly. Mostly for tests and
/// one-off use; the model builders go through the evaluation cache.
template <class F>
DeltaVector make_delta_vector(F&& f, const Vector& x0, const Matrix& d) {
  DeltaVector out;
  out.base_value = f(x0);
  out.entries.resize(d.cols());
  for (Eigen::Index i = 0; i < d.cols(); ++i) {
    out.entries(i) = f(Vector(x0 + d.col(i))) - out.base_value;
  }
  return out;
}

/// Evaluates the full second-difference table directly.
template <class F>
DeltaMatrix make_delta_matrix(F&& f, const Vector& x0, const Matrix& d) {
  const Eigen::Index z = d.cols();
  const double f0 = f(x0);
  Vector fi(z);
  for (Eigen::Index i = 0; i < z; ++i) fi(i) = f(Vector(x0 + d.col(i)));
  DeltaMatrix out{Matrix(z, z)};
  for (Eigen::Index i = 0; i < z; ++i) {
    out.entries(i, i) = f(Vector(x0 + 2.0 * d.col(i))) - 2.0 * fi(i) + f0;
    for (Eigen::Index j = i + 1; j < z; ++j) {
      const double v = f(Vector(x0 + d.col(i) + d.col(j))) - fi(i) - fi(j) + f0;
      out.entries(i, j) = v;
      out.entries(j, i) = v;
    }
  }
  return out;
}

/// (D^T)^+ delta, computed from the QR factors of D.
inline Vector simplex_gradient(const DeltaVector& delta, const DirectionMatrix& d) {
  d.require_full_rank("simplex_gradient");
  if (delta.entries.size() != d.cols()) throw ArgumentError("simplex_gradient: delta length != column count");
  return d.apply_pinv_transpose(delta.entries);
}

/// (D^T)^+ delta2 D^+ = Q R^{-T} delta2 R^{-1} Q^T, then symmetrized.
inline Matrix simplex_hessian(const DeltaMatrix& delta2, const DirectionMatrix& d) {
  d.require_full_rank("simplex_hessian");
  if (delta2.entries.rows() != d.cols() || delta2.entries.cols() != d.cols())
    throw ArgumentError("simplex_hessian: delta table shape != column count");
  const Matrix inner = d.congruence_inverse(delta2.entries);
  Matrix h = d.q() * inner * d.q().transpose();
  // Floating-point addition commutes, so this is bitwise symmetric.
  return 0.5 * (h + h.transpose());
}

/// Adapted centred simplex gradient 2 grad_S f(0;R) - grad_S f(0;2R), where
/// delta_d is taken over R and delta_2d over 2R.
inline Vector acsg(const DeltaVector& delta_d, const DeltaVector& delta_2d, const DirectionMatrix& r) {
  r.require_full_rank("acsg");
  const Vector over_r = simplex_gradient(delta_d, r);
  const Vector over_2r = simplex_gradient(delta_2d, r.scaled(2.0));
  return 2.0 * over_r - over_2r;
}

}  // namespace qarsta
