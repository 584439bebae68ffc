#pragma once

// Subspace interpolation models m(s) = c + g^T s + 1/2 s^T H s over the
// coordinates s of span(D), built from cached objective values.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qarsta/cache.hpp"
#include "qarsta/direction_matrix.hpp"
#include "qarsta/simplex_calculus.hpp"

namespace qarsta {

enum class ModelKind { DeterminedQuadratic, UnderdeterminedQuadratic, Linear, SquareOfLinear };

/// Short tags used on the command line and in solver ids.
inline std::string_view model_tag(ModelKind k) {
  switch (k) {
    case ModelKind::DeterminedQuadratic: return "dq";
    case ModelKind::UnderdeterminedQuadratic: return "uq";
    case ModelKind::Linear: return "lin";
    case ModelKind::SquareOfLinear: return "sql";
  }
  return "?";
}

inline ModelKind parse_model_tag(std::string_view tag) {
  if (tag == "dq") return ModelKind::DeterminedQuadratic;
  if (tag == "uq") return ModelKind::UnderdeterminedQuadratic;
  if (tag == "lin") return ModelKind::Linear;
  if (tag == "sql") return ModelKind::SquareOfLinear;
  throw ArgumentError("unknown model kind '" + std::string(tag) + "' (expected dq|uq|lin|sql)");
}

/// Number of distinct sample points a model kind needs in a p-dimensional
/// subspace.
inline std::size_t node_count(ModelKind k, std::size_t p) {
  switch (k) {
    case ModelKind::DeterminedQuadratic: return (p + 1) * (p + 2) / 2;
    case ModelKind::UnderdeterminedQuadratic: return 2 * p + 1;
    case ModelKind::Linear:
    case ModelKind::SquareOfLinear: return p + 1;
  }
  return 0;
}

/// The sample points around a base point x0 for a direction set D. Nodes are
/// indexed by pairs (i, j) over [0 D], where index 0 is the zero column:
/// (0,0) = x0, (0,i) = x0 + d_i, (i,i) = x0 + 2 d_i, (i,j) = x0 + d_i + d_j.
///
/// A column may carry an anchor: the exact coordinates of an already evaluated
/// point that node (0,i) stands for. Anchors let a direction recycled from a
/// previous iteration hit the cache even when x0 + d_i rounds differently.
class SampleStencil {
 public:
  SampleStencil(Vector base, DirectionMatrix d, std::vector<std::optional<Vector>> anchors = {})
      : base_(std::move(base)), d_(std::move(d)), anchors_(std::move(anchors)) {
    if (base_.size() != d_.rows()) throw ArgumentError("SampleStencil: base point and directions disagree on n");
    if (anchors_.empty()) anchors_.resize(static_cast<std::size_t>(d_.cols()));
    if (anchors_.size() != static_cast<std::size_t>(d_.cols()))
      throw ArgumentError("SampleStencil: one anchor slot per column required");
  }

  const Vector& base() const { return base_; }
  const DirectionMatrix& directions() const { return d_; }
  const std::vector<std::optional<Vector>>& anchors() const { return anchors_; }
  int p() const { return static_cast<int>(d_.cols()); }

  /// Coordinates of node (i, j), 0 <= i, j <= p; symmetric in (i, j).
  Vector point(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i < 0 || j > p()) throw ArgumentError("SampleStencil: node index out of range");
    if (j == 0) return base_;
    const auto dj = d_.column(j - 1);
    if (i == 0) {
      const auto& a = anchors_[static_cast<std::size_t>(j - 1)];
      return a ? *a : Vector(base_ + dj);
    }
    if (i == j) return base_ + 2.0 * dj;
    return base_ + d_.column(i - 1) + dj;
  }

 private:
  Vector base_;
  DirectionMatrix d_;
  std::vector<std::optional<Vector>> anchors_;
};

struct SubspaceModel {
  ModelKind kind = ModelKind::Linear;
  Vector base_point;
  Matrix q_basis;  // n x p, orthonormal
  Matrix r_factor; // p x p, coordinates of the directions in q_basis
  double constant = 0.0;
  Vector gradient;
  Matrix hessian;
  std::size_t evals_used = 0;

  int p() const { return static_cast<int>(gradient.size()); }
};

struct ModelQuery {
  double value;
  Vector gradient;
  Matrix hessian;
};

/// m(s), grad m(s) = g + H s, and H.
inline ModelQuery model_query(const SubspaceModel& m, const Vector& s) {
  if (s.size() != m.gradient.size()) throw ArgumentError("model_query: step has the wrong dimension");
  const Vector hs = m.hessian * s;
  return {m.constant + m.gradient.dot(s) + 0.5 * s.dot(hs), m.gradient + hs, m.hessian};
}

inline double model_value(const SubspaceModel& m, const Vector& s) {
  return m.constant + m.gradient.dot(s) + 0.5 * s.dot(m.hessian * s);
}

/// Value of the model at a full-space point on the affine space x0 + span(Q).
/// Throws DomainError when x is off that space by more than 1e-8 (1 + ||x - x0||).
inline double full_space_value(const SubspaceModel& m, const Vector& x) {
  if (x.size() != m.base_point.size()) throw ArgumentError("full_space_value: dimension mismatch");
  const Vector offset = x - m.base_point;
  const Vector s = m.q_basis.transpose() * offset;
  const double off_space = (offset - m.q_basis * s).norm();
  if (off_space > 1e-8 * (1.0 + offset.norm())) {
    throw DomainError("full_space_value: point is not in the model's affine space");
  }
  return model_value(m, s);
}

namespace detail {

struct NodeValues {
  double f0 = 0.0;
  Vector fi;       // f(x0 + d_i)
  Vector f2i;      // f(x0 + 2 d_i)
  Matrix fij;      // f(x0 + d_i + d_j), upper triangle
};

inline SubspaceModel model_shell(ModelKind kind, const SampleStencil& st) {
  SubspaceModel m;
  m.kind = kind;
  m.base_point = st.base();
  m.q_basis = st.directions().q();
  m.r_factor = st.directions().r();
  return m;
}

inline NodeValues gather(EvaluationCache& cache, const SampleStencil& st, bool doubled, bool cross) {
  const int p = st.p();
  NodeValues v;
  v.f0 = cache.value(st.point(0, 0));
  v.fi.resize(p);
  for (int i = 1; i <= p; ++i) v.fi(i - 1) = cache.value(st.point(0, i));
  if (doubled) {
    v.f2i.resize(p);
    for (int i = 1; i <= p; ++i) v.f2i(i - 1) = cache.value(st.point(i, i));
  }
  if (cross) {
    v.fij = Matrix::Zero(p, p);
    for (int i = 1; i <= p; ++i)
      for (int j = i + 1; j <= p; ++j) v.fij(i - 1, j - 1) = cache.value(st.point(i, j));
  }
  return v;
}

inline void check_stencil(const SampleStencil& st, const char* who) { st.directions().require_full_rank(who); }

}  // namespace detail

/// Determined quadratic interpolation model on all (p+1)(p+2)/2 nodes:
/// gradient from the adapted centred simplex gradient over (R, 2R), Hessian
/// from the full second-difference table.
inline SubspaceModel build_determined_quadratic(EvaluationCache& cache, const SampleStencil& st) {
  detail::check_stencil(st, "build_determined_quadratic");
  const std::size_t before = cache.evaluations();
  const auto v = detail::gather(cache, st, true, true);
  const int p = st.p();
  const DirectionMatrix r = DirectionMatrix::from_upper_triangular(st.directions().r());

  DeltaVector d1{(v.fi.array() - v.f0).matrix(), v.f0};
  DeltaVector d2{(v.f2i.array() - v.f0).matrix(), v.f0};
  DeltaMatrix table{Matrix(p, p)};
  for (int i = 0; i < p; ++i) {
    table.entries(i, i) = v.f2i(i) - 2.0 * v.fi(i) + v.f0;
    for (int j = i + 1; j < p; ++j) {
      const double e = v.fij(i, j) - v.fi(i) - v.fi(j) + v.f0;
      table.entries(i, j) = e;
      table.entries(j, i) = e;
    }
  }
  SubspaceModel m = detail::model_shell(ModelKind::DeterminedQuadratic, st);
  m.constant = v.f0;
  m.gradient = acsg(d1, d2, r);
  m.hessian = simplex_hessian(table, r);
  m.evals_used = cache.evaluations() - before;
  return m;
}

/// Quadratic model on the 2p+1 nodes {0, r_i, 2 r_i}: same gradient as the
/// determined model, Hessian from the diagonal of the second-difference table.
inline SubspaceModel build_underdetermined_quadratic(EvaluationCache& cache, const SampleStencil& st) {
  detail::check_stencil(st, "build_underdetermined_quadratic");
  const std::size_t before = cache.evaluations();
  const auto v = detail::gather(cache, st, true, false);
  const int p = st.p();
  const DirectionMatrix r = DirectionMatrix::from_upper_triangular(st.directions().r());

  DeltaVector d1{(v.fi.array() - v.f0).matrix(), v.f0};
  DeltaVector d2{(v.f2i.array() - v.f0).matrix(), v.f0};
  DeltaMatrix diag{Matrix::Zero(p, p)};
  for (int i = 0; i < p; ++i) diag.entries(i, i) = v.f2i(i) - 2.0 * v.fi(i) + v.f0;

  SubspaceModel m = detail::model_shell(ModelKind::UnderdeterminedQuadratic, st);
  m.constant = v.f0;
  m.gradient = acsg(d1, d2, r);
  m.hessian = simplex_hessian(diag, r);
  m.evals_used = cache.evaluations() - before;
  return m;
}

/// Linear interpolation model on the p+1 nodes {0, r_i}.
inline SubspaceModel build_linear(EvaluationCache& cache, const SampleStencil& st) {
  detail::check_stencil(st, "build_linear");
  const std::size_t before = cache.evaluations();
  const auto v = detail::gather(cache, st, false, false);
  const int p = st.p();
  const DirectionMatrix r = DirectionMatrix::from_upper_triangular(st.directions().r());

  SubspaceModel m = detail::model_shell(ModelKind::Linear, st);
  m.constant = v.f0;
  m.gradient = simplex_gradient(DeltaVector{(v.fi.array() - v.f0).matrix(), v.f0}, r);
  m.hessian = Matrix::Zero(p, p);
  m.evals_used = cache.evaluations() - before;
  return m;
}

/// Gauss-Newton style model 1/2 ||g0 + J s||^2 from a linear interpolant of
/// the residual map on {0, r_i}: c = 1/2 ||g0||^2, gradient J^T g0, Hessian J^T J.
inline SubspaceModel build_square_of_linear(EvaluationCache& cache, const SampleStencil& st) {
  if (!cache.has_residuals()) throw ArgumentError("build_square_of_linear: the cache has no residual map");
  detail::check_stencil(st, "build_square_of_linear");
  const std::size_t before = cache.evaluations();
  const int p = st.p();
  const Vector g0 = cache.residual(st.point(0, 0));
  Matrix diffs(g0.size(), p);  // column i: g(r_i) - g(0) = J r_i
  for (int i = 1; i <= p; ++i) {
    const Vector gi = cache.residual(st.point(0, i));
    if (gi.size() != g0.size()) throw ArgumentError("build_square_of_linear: residual length changed");
    diffs.col(i - 1) = gi - g0;
  }
  // J = diffs R^{-1}  =>  J^T = R^{-T} diffs^T
  const Matrix& r = st.directions().r();
  const Matrix jt = r.transpose().triangularView<Eigen::Lower>().solve(diffs.transpose());
  const Matrix jtj = jt * jt.transpose();

  SubspaceModel m = detail::model_shell(ModelKind::SquareOfLinear, st);
  m.constant = 0.5 * g0.squaredNorm();
  m.gradient = jt * g0;
  m.hessian = 0.5 * (jtj + jtj.transpose());
  m.evals_used = cache.evaluations() - before;
  return m;
}

/// Dispatches on the model kind.
inline SubspaceModel build_model(ModelKind kind, EvaluationCache& cache, const SampleStencil& st) {
  switch (kind) {
    case ModelKind::DeterminedQuadratic: return build_determined_quadratic(cache, st);
    case ModelKind::UnderdeterminedQuadratic: return build_underdetermined_quadratic(cache, st);
    case ModelKind::Linear: return build_linear(cache, st);
    case ModelKind::SquareOfLinear: return build_square_of_linear(cache, st);
  }
  throw ArgumentError("build_model: unknown kind");
}

inline SubspaceModel build_model(ModelKind kind, EvaluationCache& cache, const Vector& x0, const Matrix& d) {
  return build_model(kind, cache, SampleStencil(x0, DirectionMatrix(d)));
}

}  // namespace qarsta
