#pragma once

// Sample-set geometry: direction removal by minimum singular value, random
// orthogonal direction generation, and subspace-quality diagnostics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qarsta/direction_matrix.hpp"

namespace qarsta {

using Rng = std::mt19937_64;

inline constexpr int kDefaultGenerationAttempts = 100;

/// Default bound on the spectral norm of the Gaussian sketch in direction
/// generation. The norm of an n x q sketch with N(0, 1/q) entries concentrates
/// near 1 + sqrt(n/q) <= 1 + sqrt(n), so resampling is rare for any q.
inline double default_sketch_bound(Eigen::Index n) { return 2.0 * (1.0 + std::sqrt(static_cast<double>(n))); }

/// Probability parameters for random-subspace alignment.
struct SubspaceQualityConfig {
  double alpha = 0.5;
  double delta_s = 0.1;
  double m_a = 3.0;
  double lipschitz_hint = 1.0;  // diagnostics only

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0,1)");
    if (!(delta_s > 0.0 && delta_s < 1.0)) throw ArgumentError("delta_s must lie in (0,1)");
    if (!(m_a >= 1.0)) throw ArgumentError("m_a must be >= 1");
    if (!(lipschitz_hint > 0.0)) throw ArgumentError("lipschitz_hint must be positive");
  }

  /// Smallest sketch width q with q >= 4 (1-alpha)^-2 ln(1/delta_s).
  int min_sketch_size() const {
    validate();
    const double bound = 4.0 / ((1.0 - alpha) * (1.0 - alpha)) * std::log(1.0 / delta_s);
    return std::max(1, static_cast<int>(std::ceil(bound)));
  }

  /// alpha_D = min(eps_geo^2 / M_DU, alpha * delta_min / (2 M_A)) with
  /// M_DU = eps_rad * delta_max * sqrt(p).
  double aligned_fraction(double eps_geo, double eps_rad, double delta_min, double delta_max, int p) const {
    const double m_du = eps_rad * delta_max * std::sqrt(static_cast<double>(p));
    return std::min(eps_geo * eps_geo / m_du, alpha * delta_min / (2.0 * m_a));
  }
};

/// theta_i = sigma_min(D without column i) * max(||d_i||^4 / delta^4, 1) for
/// every column of `cols`.
inline Vector removal_scores(const Matrix& cols, double delta) {
  const Eigen::Index m = cols.cols();
  Vector theta(m);
  if (m == 0) return theta;
  // sigma_min(M_i) == sigma_min(R without column i) since Q has orthonormal columns.
  Matrix r;
  if (cols.rows() >= m) {
    Eigen::HouseholderQR<Matrix> qr(cols);
    r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  } else {
    r = cols;
  }
  const double delta4 = std::pow(delta, 4);
  for (Eigen::Index i = 0; i < m; ++i) {
    Matrix mi(r.rows(), m - 1);
    mi << r.leftCols(i), r.rightCols(m - 1 - i);
    const double len4 = std::pow(cols.col(i).norm(), 4);
    theta(i) = sigma_min(mi) * std::max(len4 / delta4, 1.0);
  }
  return theta;
}

/// Outcome of a removal pass: surviving column indices (into the input, in
/// their original order), the removal order, and the scores of every pass.
struct RemovalResult {
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::Index> removed;
  std::vector<Vector> scores;  // scores[k] indexed like the block before removal k

  Matrix select(const Matrix& cols) const {
    Matrix out(cols.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = cols.col(kept[j]);
    return out;
  }
};

namespace detail {
inline void check_removal_args(const Matrix& cols, double delta, int p_rm) {
  if (cols.cols() == 0) throw ArgumentError("removal: column list is empty");
  if (!(delta > 0.0)) throw ArgumentError("removal: delta must be positive");
  if (p_rm < 1) throw ArgumentError("removal: p_rm must be >= 1");
  if (p_rm > cols.cols()) throw ArgumentError("removal: p_rm exceeds the column count");
}
}  // namespace detail

/// Sequential removal: p_rm times, drop the column with the largest theta and
/// recompute. Ties go to the lowest index.
inline RemovalResult removal_pass(const Matrix& cols, double delta, int p_rm) {
  detail::check_removal_args(cols, delta, p_rm);
  RemovalResult res;
  for (Eigen::Index i = 0; i < cols.cols(); ++i) res.kept.push_back(i);
  for (int step = 0; step < p_rm; ++step) {
    const Matrix block = res.select(cols);
    const Vector theta = removal_scores(block, delta);
    Eigen::Index worst = 0;
    for (Eigen::Index i = 1; i < theta.size(); ++i) {
      if (theta(i) > theta(worst)) worst = i;
    }
    res.scores.push_back(theta);
    res.removed.push_back(res.kept[static_cast<std::size_t>(worst)]);
    res.kept.erase(res.kept.begin() + worst);
  }
  return res;
}

/// One-shot variant: scores computed once, the p_rm largest removed together.
inline RemovalResult removal_one_shot(const Matrix& cols, double delta, int p_rm) {
  detail::check_removal_args(cols, delta, p_rm);
  RemovalResult res;
  const Vector theta = removal_scores(cols, delta);
  res.scores.push_back(theta);
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < cols.cols(); ++i) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return theta(a) > theta(b); });
  res.removed.assign(order.begin(), order.begin() + p_rm);
  for (Eigen::Index i = 0; i < cols.cols(); ++i) {
    if (std::find(res.removed.begin(), res.removed.end(), i) == res.removed.end()) res.kept.push_back(i);
  }
  return res;
}

/// New directions plus the sketch that produced them.
struct GeneratedDirections {
  Matrix directions;          // n x q, mutually orthogonal, each of length delta
  double sketch_norm = 0.0;   // ||A|| of the accepted sketch
  int attempts = 0;           // sketches drawn, including the accepted one
};

/// Draws q_new random mutually orthogonal directions of length delta that are
/// orthogonal to the columns of `basis` (n x m orthonormal; m may be 0).
///
/// A has i.i.d. N(0, 1/q_new) entries and is redrawn until it has full column
/// rank with ||A|| <= m_a and its projection onto the orthogonal complement of
/// `basis` is still full rank.
inline GeneratedDirections generate_directions(Eigen::Index n, const Matrix& basis, int q_new, double delta,
                                               double m_a, Rng& rng, int max_attempts = kDefaultGenerationAttempts) {
  if (q_new < 1) throw ArgumentError("generate_directions: q_new must be >= 1");
  if (!(delta > 0.0)) throw ArgumentError("generate_directions: delta must be positive");
  if (!(m_a >= 1.0)) throw ArgumentError("generate_directions: m_a must be >= 1");
  const Eigen::Index m = basis.cols();
  if (m > 0 && basis.rows() != n) throw ArgumentError("generate_directions: basis has the wrong row count");
  if (m + q_new > n) throw ArgumentError("generate_directions: m + q_new exceeds the dimension");

  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(q_new)));
  GeneratedDirections out;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    Matrix a(n, q_new);
    for (Eigen::Index j = 0; j < q_new; ++j)
      for (Eigen::Index i = 0; i < n; ++i) a(i, j) = normal(rng);

    const Vector s = singular_values(a);
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    if (smin < kRankTolerance * std::max(1.0, smax) || smax > m_a) continue;

    Matrix projected = a;
    if (m > 0) {
      // Project twice; one Gram-Schmidt sweep can leave O(eps * cond) residue.
      projected -= basis * (basis.transpose() * projected);
      projected -= basis * (basis.transpose() * projected);
    }
    Eigen::HouseholderQR<Matrix> qr(projected);
    const Matrix r = qr.matrixQR().topRows(q_new).triangularView<Eigen::Upper>();
    const Vector rs = singular_values(r);
    if (rs(rs.size() - 1) < kRankTolerance * std::max(1.0, rs(0))) continue;

    Matrix q = qr.householderQ() * Matrix::Identity(n, q_new);
    if (m > 0) {
      q -= basis * (basis.transpose() * q);
      for (Eigen::Index j = 0; j < q_new; ++j) q.col(j).normalize();
    }
    out.directions = delta * q;
    out.sketch_norm = smax;
    out.attempts = attempt;
    return out;
  }
  throw GenerationError("generate_directions: no acceptable sketch after " + std::to_string(max_attempts) +
                        " attempts");
}

/// Orthonormal basis of the span of `cols` (n x m, full column rank).
inline Matrix orthonormal_basis(const Matrix& cols) {
  if (cols.cols() == 0) return Matrix(cols.rows(), 0);
  Eigen::HouseholderQR<Matrix> qr(cols);
  return qr.householderQ() * Matrix::Identity(cols.rows(), cols.cols());
}

/// ||D^T g|| / ||g||; D is alpha-well aligned for gradient g iff this is >= alpha.
inline double alignment_ratio(const Matrix& d, const Vector& g) {
  if (d.rows() != g.size()) throw ArgumentError("alignment_ratio: dimension mismatch");
  const double gn = g.norm();
  if (!(gn > 0.0)) throw ArgumentError("alignment_ratio: gradient must be nonzero");
  return (d.transpose() * g).norm() / gn;
}

/// sigma_min([d_tilde x]) for ||x|| = delta. Never exceeds
/// min(sigma_min(d_tilde), delta), with equality when x is orthogonal to
/// every column of d_tilde.
inline double orthogonal_extension_check(const Matrix& d_tilde, const Vector& x, double delta) {
  if (d_tilde.rows() != x.size()) throw ArgumentError("orthogonal_extension_check: dimension mismatch");
  if (d_tilde.cols() + 1 > x.size()) throw ArgumentError("orthogonal_extension_check: too many columns");
  if (!(delta > 0.0) || std::abs(x.norm() - delta) > 1e-10 * delta)
    throw ArgumentError("orthogonal_extension_check: ||x|| must equal delta");
  Matrix ext(x.size(), d_tilde.cols() + 1);
  ext << d_tilde, x;
  return sigma_min(ext);
}

}  // namespace qarsta
