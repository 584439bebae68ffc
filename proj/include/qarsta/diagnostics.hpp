#pragma once

// Randomized oracle suites that check the numerical building blocks against
// their theoretical guarantees: interpolation, error-bound slopes, sketch
// alignment, geometry management and the subproblem decrease floor.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qarsta/geometry.hpp"
#include "qarsta/models.hpp"
#include "qarsta/solver.hpp"
#include "qarsta/trsolver.hpp"

namespace qarsta {

// ---- smooth functions with exact derivatives --------------------------------

struct SmoothFunction {
  std::string name;
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> grad;
  std::function<Matrix(const Vector&)> hess;
};

/// Three fixed non-quadratic test functions on R^n: exp of a linear form plus
/// a sine sum, log-sum-exp of a fixed linear map, and extended Rosenbrock.
inline std::vector<SmoothFunction> smooth_test_functions(Eigen::Index n) {
  Rng rng(20240611);
  std::normal_distribution<double> nd;
  Vector a(n);
  for (Eigen::Index i = 0; i < n; ++i) a(i) = 0.5 * nd(rng) / std::sqrt(static_cast<double>(n));
  const Eigen::Index rows = n + 3;
  Matrix lse(rows, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) lse(i, j) = nd(rng);

  std::vector<SmoothFunction> out;
  out.push_back({"exp_sine",
                 [a](const Vector& x) { return std::exp(a.dot(x)) + x.array().sin().sum(); },
                 [a](const Vector& x) { return Vector(std::exp(a.dot(x)) * a + Vector(x.array().cos())); },
                 [a](const Vector& x) {
                   Matrix h = std::exp(a.dot(x)) * a * a.transpose();
                   h.diagonal() -= Vector(x.array().sin());
                   return h;
                 }});

  auto softmax = [lse](const Vector& x) {
    const Vector z = lse * x;
    const double zmax = z.maxCoeff();
    Vector e = (z.array() - zmax).exp().matrix();
    const double s = e.sum();
    return std::make_pair(Vector(e / s), zmax + std::log(s));
  };
  out.push_back({"log_sum_exp", [softmax](const Vector& x) { return softmax(x).second; },
                 [softmax, lse](const Vector& x) { return Vector(lse.transpose() * softmax(x).first); },
                 [softmax, lse](const Vector& x) {
                   const Vector pi = softmax(x).first;
                   const Matrix w = Matrix(pi.asDiagonal()) - pi * pi.transpose();
                   return Matrix(lse.transpose() * w * lse);
                 }});

  out.push_back({"rosenbrock",
                 [](const Vector& x) {
                   double s = 0.0;
                   for (Eigen::Index i = 0; i + 1 < x.size(); i += 2)
                     s += 100.0 * std::pow(x(i + 1) - x(i) * x(i), 2) + std::pow(1.0 - x(i), 2);
                   return s;
                 },
                 [](const Vector& x) {
                   Vector g = Vector::Zero(x.size());
                   for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) {
                     const double t = x(i + 1) - x(i) * x(i);
                     g(i) = -400.0 * x(i) * t - 2.0 * (1.0 - x(i));
                     g(i + 1) = 200.0 * t;
                   }
                   return g;
                 },
                 [](const Vector& x) {
                   Matrix h = Matrix::Zero(x.size(), x.size());
                   for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) {
                     h(i, i) = 1200.0 * x(i) * x(i) - 400.0 * x(i + 1) + 2.0;
                     h(i, i + 1) = h(i + 1, i) = -400.0 * x(i);
                     h(i + 1, i + 1) = 200.0;
                   }
                   return h;
                 }});
  return out;
}

// ---- interpolation ------------------------------------------------------------

/// Stencil nodes (i, j) a model of the given kind interpolates.
inline std::vector<std::pair<int, int>> interpolation_nodes(ModelKind kind, int p) {
  std::vector<std::pair<int, int>> nodes = {{0, 0}};
  for (int i = 1; i <= p; ++i) nodes.emplace_back(0, i);
  if (kind == ModelKind::DeterminedQuadratic || kind == ModelKind::UnderdeterminedQuadratic)
    for (int i = 1; i <= p; ++i) nodes.emplace_back(i, i);
  if (kind == ModelKind::DeterminedQuadratic)
    for (int i = 1; i <= p; ++i)
      for (int j = i + 1; j <= p; ++j) nodes.emplace_back(i, j);
  return nodes;
}

struct InterpolationReport {
  ModelKind kind = ModelKind::DeterminedQuadratic;
  int p = 0;
  int instances = 0;
  std::size_t nodes_checked = 0;
  double max_relative_error = 0.0;
  bool node_count_ok = true;
  bool passed(double tol) const { return node_count_ok && max_relative_error <= tol; }
};

/// Builds models on random smooth functions, random base points and random
/// full-rank directions, then compares the model with f at every declared
/// node. Square-of-linear instances use a random residual map.
inline InterpolationReport interpolation_check(ModelKind kind, int p, int instances, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif(-2.0, 0.0);
  InterpolationReport rep;
  rep.kind = kind;
  rep.p = p;
  rep.instances = instances;
  const Eigen::Index n = p + 3;
  for (int t = 0; t < instances; ++t) {
    Vector c(n), x0(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      c(i) = nd(rng);
      x0(i) = nd(rng);
    }
    Matrix b(n, n);
    for (Eigen::Index i = 0; i < n * n; ++i) b.data()[i] = nd(rng) / static_cast<double>(n);
    const Matrix mres = b;
    auto residuals = [c, mres](const Vector& x) {
      Vector r = mres * x + c;
      r.array() += 0.3 * x.array().sin();
      return r;
    };
    auto objective = [c](const Vector& x) {
      return std::exp(0.2 * c.dot(x) / std::sqrt(static_cast<double>(x.size()))) + x.array().cos().sum() +
             0.1 * x.squaredNorm() * x.squaredNorm() + 3.0;
    };
    const double delta = std::pow(10.0, unif(rng));
    Matrix d(n, p);
    for (Eigen::Index i = 0; i < n * p; ++i) d.data()[i] = nd(rng) * delta / std::sqrt(static_cast<double>(n));

    const bool ls = kind == ModelKind::SquareOfLinear;
    ObjectiveFn fobj = ls ? ObjectiveFn([residuals](const Vector& x) { return 0.5 * residuals(x).squaredNorm(); })
                          : ObjectiveFn(objective);
    EvaluationCache cache(fobj, ls ? ResidualFn(residuals) : ResidualFn{});
    const SampleStencil st(x0, DirectionMatrix(d));
    const SubspaceModel m = build_model(kind, cache, st);
    const auto nodes = interpolation_nodes(kind, p);
    rep.node_count_ok = rep.node_count_ok && nodes.size() == node_count(kind, static_cast<std::size_t>(p)) &&
                        cache.evaluations() == nodes.size();
    const double f0 = fobj(x0);
    for (auto [i, j] : nodes) {
      const Vector x = st.point(i, j);
      const double fx = fobj(x);
      const double err = std::abs(full_space_value(m, x) - fx) / std::max(std::abs(fx), std::abs(f0));
      rep.max_relative_error = std::max(rep.max_relative_error, err);
      ++rep.nodes_checked;
    }
  }
  return rep;
}

// ---- error-bound slopes ---------------------------------------------------------

/// Least-squares slope of log2(err) against log2(delta).
inline double loglog_slope(const std::vector<double>& deltas, const std::vector<double>& errs) {
  const std::size_t m = deltas.size();
  if (m < 2 || errs.size() != m) throw ArgumentError("loglog_slope: need at least two matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log2(deltas[i]);
    const double y = std::log2(std::max(errs[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

struct SlopeReport {
  std::string function;
  ModelKind kind = ModelKind::DeterminedQuadratic;
  std::vector<double> deltas;
  std::vector<double> value_errors, gradient_errors, hessian_errors;
  double value_slope = 0.0, gradient_slope = 0.0, hessian_slope = 0.0;
};

inline std::vector<double> default_slope_deltas() {
  std::vector<double> d;
  for (int k = 2; k <= 9; ++k) d.push_back(std::ldexp(1.0, -k));
  return d;
}

/// Model errors over the ball of radius delta in the subspace, for directions
/// D = delta * D1 with a fixed well-conditioned D1 (unit-norm columns). The
/// value, gradient and Hessian errors are maxima over the centre and 2p points
/// +-delta * e_i in subspace coordinates.
inline SlopeReport measure_slopes(const SmoothFunction& fn, ModelKind kind, const Vector& x0, const Matrix& d1,
                                  const std::vector<double>& deltas = default_slope_deltas()) {
  if (kind == ModelKind::SquareOfLinear) throw ArgumentError("measure_slopes: needs a scalar-objective model kind");
  SlopeReport rep;
  rep.function = fn.name;
  rep.kind = kind;
  rep.deltas = deltas;
  for (double delta : deltas) {
    EvaluationCache cache(fn.f);
    const SubspaceModel m = build_model(kind, cache, x0, Matrix(delta * d1));
    const Matrix& q = m.q_basis;
    const int p = m.p();
    std::vector<Vector> probes = {Vector::Zero(p)};
    for (int i = 0; i < p; ++i) {
      probes.push_back(delta * Vector::Unit(p, i));
      probes.push_back(-delta * Vector::Unit(p, i));
    }
    double ev = 0, eg = 0, eh = 0;
    for (const Vector& s : probes) {
      const Vector x = x0 + q * s;
      const ModelQuery mq = model_query(m, s);
      ev = std::max(ev, std::abs(fn.f(x) - mq.value));
      eg = std::max(eg, (q.transpose() * fn.grad(x) - mq.gradient).norm());
      eh = std::max(eh, symmetric_norm(Matrix(q.transpose() * fn.hess(x) * q - mq.hessian)));
    }
    rep.value_errors.push_back(ev);
    rep.gradient_errors.push_back(eg);
    rep.hessian_errors.push_back(eh);
  }
  rep.value_slope = loglog_slope(deltas, rep.value_errors);
  rep.gradient_slope = loglog_slope(deltas, rep.gradient_errors);
  rep.hessian_slope = loglog_slope(deltas, rep.hessian_errors);
  return rep;
}

/// The fixed slope setup: n = 6, p = 3, base point and D1 from a fixed seed.
inline std::vector<SlopeReport> slope_suite(ModelKind kind) {
  const Eigen::Index n = 6;
  const int p = 3;
  Rng rng(77);
  std::normal_distribution<double> nd;
  Vector x0(n);
  for (Eigen::Index i = 0; i < n; ++i) x0(i) = 0.5 * nd(rng);
  Matrix d1(n, p);
  for (Eigen::Index i = 0; i < n * p; ++i) d1.data()[i] = nd(rng);
  d1 = orthonormal_basis(d1);
  d1.col(1) = (d1.col(1) + 0.5 * d1.col(0)).normalized();  // not orthogonal, still well conditioned
  std::vector<SlopeReport> out;
  for (const auto& fn : smooth_test_functions(n)) out.push_back(measure_slopes(fn, kind, x0, d1));
  return out;
}

// ---- sketch alignment ---------------------------------------------------------------

struct AlignmentReport {
  Eigen::Index n = 0;
  int q = 0;
  double alpha = 0.0;
  int trials = 0;
  int aligned = 0;
  double frequency() const { return static_cast<double>(aligned) / trials; }
  /// 1 - delta_s minus a three-sigma binomial band.
  double threshold(double delta_s) const {
    const double target = 1.0 - delta_s;
    return target - 3.0 * std::sqrt(target * (1.0 - target) / trials);
  }
};

/// Draws `trials` n x q sketches with N(0, 1/q) entries and counts
/// ||A^T v|| >= alpha for a fixed unit vector v.
inline AlignmentReport alignment_frequency(Eigen::Index n, int q, double alpha, int trials, std::uint64_t seed) {
  if (n < 1 || q < 1 || trials < 1) throw ArgumentError("alignment_frequency: n, q and trials must be positive");
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(q)));
  Vector v(n);
  std::normal_distribution<double> unit;
  for (Eigen::Index i = 0; i < n; ++i) v(i) = unit(rng);
  v.normalize();
  AlignmentReport rep;
  rep.n = n;
  rep.q = q;
  rep.alpha = alpha;
  rep.trials = trials;
  Matrix a(n, q);
  for (int t = 0; t < trials; ++t) {
    for (Eigen::Index i = 0; i < n * q; ++i) a.data()[i] = nd(rng);
    rep.aligned += (a.transpose() * v).norm() >= alpha;
  }
  return rep;
}

// ---- geometry management ------------------------------------------------------------

struct GeometryReport {
  int sequences = 0;
  int managements = 0;
  int bound_violations = 0;
  int retained_violations = 0;   // retained column too long or block below eps_geo
  int generation_violations = 0; // fresh columns not orthogonal or wrong length
  double worst_pinv_ratio = 0.0; // max ||D^+|| / bound
  bool passed() const { return bound_violations == 0 && retained_violations == 0 && generation_violations == 0; }
};

/// Randomized management sequences: each starts from a random direction set
/// (sometimes nearly dependent, lengths up to 2 delta) and applies `steps`
/// rounds of build_du + assemble_directions with random trial steps, random
/// choices of the next iterate among the evaluated candidates and random radius
/// updates. After each round the assembled D must satisfy
/// ||D^+|| <= max(1/eps_geo, 1/delta_min), and the fresh columns must be
/// mutually orthogonal, orthogonal to the retained block and of length
/// delta_{k+1}, to 1e3 machine epsilon.
inline GeometryReport geometry_sequences(int sequences, int steps, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  GeometryReport rep;
  rep.sequences = sequences;
  for (int sq = 0; sq < sequences; ++sq) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(u01(rng) * 9);  // 2..10
    SolverConfig c;
    c.p = 1 + static_cast<int>(u01(rng) * static_cast<double>(std::min<Eigen::Index>(n, 7)));
    c.p_rand = 1 + static_cast<int>(u01(rng) * c.p);
    c.eps_rad = 1.0 + 2.0 * u01(rng);
    const double eps_geo = c.geometry_tolerance();
    const double bound = std::max(1.0 / eps_geo, 1.0 / c.delta_min);

    double delta = std::pow(10.0, -8.0 + 10.0 * u01(rng));
    delta = std::clamp(delta, c.delta_min, c.delta_max);
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = nd(rng);
    Matrix d(n, c.p);
    for (Eigen::Index j = 0; j < c.p; ++j) {
      Vector col(n);
      for (Eigen::Index i = 0; i < n; ++i) col(i) = nd(rng);
      if (j > 0 && u01(rng) < 0.2) col = d.col(j - 1) / delta + 1e-9 * col;  // nearly dependent
      d.col(j) = col.normalized() * delta * (0.1 + 1.9 * u01(rng));
    }
    if (sigma_min(d) < kRankTolerance * spectral_norm(d)) d = delta * orthonormal_basis(Matrix::Identity(n, c.p));

    for (int step = 0; step < steps; ++step) {
      ++rep.managements;
      const SampleStencil stencil(x, DirectionMatrix(d));
      Vector s(n);
      for (Eigen::Index i = 0; i < n; ++i) s(i) = nd(rng);
      s *= delta * u01(rng) / s.norm();
      const Vector trial = x + s;
      Vector x_next = x;
      const double pick = u01(rng);
      if (pick < 0.4) {
        x_next = trial;
      } else if (pick < 0.8) {
        const int i = static_cast<int>(u01(rng) * (c.p + 1));
        const int j = static_cast<int>(u01(rng) * (c.p + 1));
        x_next = stencil.point(std::min(i, c.p), std::min(j, c.p));
      }
      const double r = u01(rng);
      double next_delta = r < 0.4 ? c.gamma_dec * delta : (r < 0.7 ? delta : c.gamma_inc * delta);
      next_delta = std::min(next_delta, c.delta_max);
      if (next_delta < c.delta_min) next_delta = c.delta_min;  // the loop would stop; test the floor case

      const RetainedBlock keep = build_du(stencil, trial, x_next, next_delta, c);
      const Eigen::Index kept = keep.columns.cols();
      for (Eigen::Index j = 0; j < kept; ++j)
        rep.retained_violations += keep.columns.col(j).norm() > c.eps_rad * next_delta * (1.0 + 1e-12);
      if (kept > 0) rep.retained_violations += sigma_min(keep.columns) < eps_geo;

      const Matrix next = assemble_directions(keep.columns, c.p, next_delta, c.sketch_bound(n), rng);
      const Eigen::Index q = c.p - kept;
      if (q > 0) {
        const Matrix g = next.rightCols(q);
        const double tol = 1e3 * kEps;
        const Matrix gram = g.transpose() * g / (next_delta * next_delta) - Matrix::Identity(q, q);
        bool ok = gram.cwiseAbs().maxCoeff() <= tol;
        if (kept > 0) {
          const Matrix basis = orthonormal_basis(keep.columns);
          ok = ok && (basis.transpose() * g).cwiseAbs().maxCoeff() <= tol * next_delta;
        }
        rep.generation_violations += !ok;
      }
      const double smin = sigma_min(next);
      const double ratio = smin > 0.0 ? (1.0 / smin) / bound : std::numeric_limits<double>::infinity();
      rep.worst_pinv_ratio = std::max(rep.worst_pinv_ratio, ratio);
      rep.bound_violations += ratio > 1.0 + 1e-9;

      x = x_next;
      d = next;
      delta = next_delta;
    }
  }
  return rep;
}

// ---- trust-region subproblem ----------------------------------------------------------

struct SubproblemReport {
  int instances = 0;
  int infeasible = 0;
  int below_floor = 0;
  int below_cauchy = 0;
  int inconsistent = 0;  // reported decrease disagrees with -m(s)
  bool passed() const { return infeasible == 0 && below_floor == 0 && below_cauchy == 0 && inconsistent == 0; }
};

/// Random subproblems with p in 1..10 and Hessians drawn from several classes
/// (indefinite, positive definite, negative definite, rank one, zero); g is
/// occasionally zero or tiny. Checks feasibility, the c1 = 1/2 floor and the
/// Cauchy decrease.
inline SubproblemReport subproblem_floor_check(int instances, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  SubproblemReport rep;
  rep.instances = instances;
  for (int t = 0; t < instances; ++t) {
    const Eigen::Index p = 1 + t % 10;
    Matrix b(p, p);
    for (Eigen::Index i = 0; i < p * p; ++i) b.data()[i] = nd(rng);
    Matrix h;
    switch (t % 5) {
      case 0: h = b + b.transpose(); break;
      case 1: h = b * b.transpose() + 1e-3 * Matrix::Identity(p, p); break;
      case 2: h = -(b * b.transpose()); break;
      case 3: h = b.col(0) * b.col(0).transpose() * (u01(rng) < 0.5 ? -1.0 : 1.0); break;
      default: h = Matrix::Zero(p, p); break;
    }
    h *= std::pow(10.0, -3.0 + 6.0 * u01(rng));
    Vector g(p);
    for (Eigen::Index i = 0; i < p; ++i) g(i) = nd(rng);
    const double gscale = u01(rng);
    if (gscale < 0.05) g.setZero();
    else if (gscale < 0.1) g *= 1e-10;
    const double delta = std::pow(10.0, -4.0 + 6.0 * u01(rng));

    const TrsSolution sol = solve_subproblem(g, h, delta);
    const TrsSolution cp = cauchy_point(g, h, delta);
    const double model = g.dot(sol.step) + 0.5 * sol.step.dot(h * sol.step);
    const double scale = 1e-12 * std::max(1.0, std::abs(sol.predicted_decrease));
    rep.infeasible += !(sol.step.allFinite() && sol.step.norm() <= delta * (1.0 + 1e-12));
    rep.below_floor += sol.predicted_decrease < decrease_floor(g, h, delta) * (1.0 - 1e-12);
    rep.below_cauchy += sol.predicted_decrease < cp.predicted_decrease * (1.0 - 1e-12) - scale;
    rep.inconsistent += std::abs(sol.predicted_decrease + model) > 1e-10 * std::max(1.0, std::abs(model));
  }
  return rep;
}

}  // namespace qarsta
