#pragma once

// Approximate minimization of a quadratic model over the ball ||s|| <= delta:
// truncated conjugate gradient (Steihaug-Toint), then rotations along the
// boundary in the style of TRSBOX, never worse than the Cauchy point.

#include <cmath>
#include <numbers>

#include "qarsta/models.hpp"

namespace qarsta {

struct TrsSolution {
  Vector step;
  double predicted_decrease = 0.0;  // m(0) - m(step)
  bool on_boundary = false;
  int iterations = 0;
};

namespace detail {

inline double quad_decrease(const Vector& g, const Matrix& h, const Vector& s) {
  return -(g.dot(s) + 0.5 * s.dot(h * s));
}

/// Largest tau >= 0 with ||s + tau d|| = delta, assuming ||s|| <= delta.
inline double boundary_tau(const Vector& s, const Vector& d, double delta) {
  const double dd = d.squaredNorm();
  const double sd = s.dot(d);
  const double ss = s.squaredNorm();
  const double rad = std::max(0.0, sd * sd + dd * (delta * delta - ss));
  // Numerically stable form of (-sd + sqrt(rad)) / dd.
  if (sd <= 0.0) return (-sd + std::sqrt(rad)) / dd;
  return (delta * delta - ss) / (sd + std::sqrt(rad));
}

inline void check_inputs(const Vector& g, const Matrix& h, double delta, const char* who) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ArgumentError(std::string(who) + ": delta must be positive");
  if (h.rows() != g.size() || h.cols() != g.size()) throw ArgumentError(std::string(who) + ": shape mismatch");
  if (!g.allFinite() || !h.allFinite()) throw NumericError(std::string(who) + ": non-finite model coefficients");
}

inline TrsSolution finish(const Vector& g, const Matrix& h, double delta, Vector s, bool boundary, int iters) {
  const double norm = s.norm();
  if (norm > delta) s *= delta / norm;
  TrsSolution out;
  out.predicted_decrease = quad_decrease(g, h, s);
  out.step = std::move(s);
  out.on_boundary = boundary || norm >= delta * (1.0 - 1e-12);
  out.iterations = iters;
  return out;
}

/// Rotate s within the sphere ||s|| = delta towards lower model values, one
/// plane at a time (span{s, tangential gradient}), sampling the angle.
inline int boundary_refine(const Vector& g, const Matrix& h, Vector& s, int max_iters) {
  int iters = 0;
  for (; iters < max_iters; ++iters) {
    const Vector hs = h * s;
    const Vector grad = g + hs;
    const double ss = s.squaredNorm();
    Vector tangent = grad - (grad.dot(s) / ss) * s;
    const double tn = tangent.norm();
    if (tn <= 1e-10 * std::max(grad.norm(), 1e-300)) break;
    const Vector w = (-std::sqrt(ss) / tn) * tangent;  // ||w|| == ||s||, w orthogonal to s

    const Vector hw = h * w;
    const double gs = g.dot(s), gw = g.dot(w);
    const double shs = s.dot(hs), shw = s.dot(hw), whw = w.dot(hw);
    auto value = [&](double t) {
      const double c = std::cos(t), sn = std::sin(t);
      return c * gs + sn * gw + 0.5 * (c * c * shs + 2.0 * c * sn * shw + sn * sn * whw);
    };
    constexpr int kSamples = 48;
    const double base = value(0.0);
    double best_t = 0.0, best_v = base;
    for (int k = 1; k < kSamples; ++k) {
      const double t = std::numbers::pi * k / kSamples;
      const double v = value(t);
      if (v < best_v) {
        best_v = v;
        best_t = t;
      }
    }
    if (best_t == 0.0) break;
    // Parabolic refinement through the neighbouring samples.
    const double hstep = std::numbers::pi / kSamples;
    const double vl = value(best_t - hstep), vr = value(best_t + hstep);
    const double denom = vl - 2.0 * best_v + vr;
    if (denom > 0.0) {
      const double t = best_t + 0.5 * hstep * (vl - vr) / denom;
      const double v = value(t);
      if (v < best_v) {
        best_v = v;
        best_t = t;
      }
    }
    if (base - best_v <= 1e-12 * std::max(1.0, std::abs(base))) break;
    s = std::cos(best_t) * s + std::sin(best_t) * w;
  }
  return iters;
}

}  // namespace detail

/// Minimizer of the model along -g within the ball. Its decrease is at least
/// 1/2 ||g|| min(delta, ||g|| / ||H||).
inline TrsSolution cauchy_point(const Vector& g, const Matrix& h, double delta) {
  detail::check_inputs(g, h, delta, "cauchy_point");
  const double gn = g.norm();
  if (gn == 0.0) return detail::finish(g, h, delta, Vector::Zero(g.size()), false, 0);
  const double ghg = g.dot(h * g);
  double tau = 1.0;
  if (ghg > 0.0) tau = std::min(gn * gn * gn / (delta * ghg), 1.0);
  return detail::finish(g, h, delta, Vector(-(tau * delta / gn) * g), tau >= 1.0, 0);
}

inline TrsSolution cauchy_point(const SubspaceModel& m, double delta) {
  return cauchy_point(m.gradient, m.hessian, delta);
}

/// The guaranteed decrease floor c1 ||g|| min(delta, ||g|| / max(||H||, 1))
/// with c1 = 1/2.
inline double decrease_floor(const Vector& g, const Matrix& h, double delta) {
  const double gn = g.norm();
  return 0.5 * gn * std::min(delta, gn / std::max(symmetric_norm(h), 1.0));
}

inline TrsSolution solve_subproblem(const Vector& g, const Matrix& h, double delta) {
  detail::check_inputs(g, h, delta, "solve_subproblem");
  const Eigen::Index p = g.size();
  const double gn = g.norm();

  if (gn == 0.0) {
    // Stationary model: only negative curvature can decrease it.
    if (p == 0) return detail::finish(g, h, delta, Vector::Zero(0), false, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.eigenvalues()(0) < 0.0) {
      // A round-off "negative" eigenvalue of a singular PSD matrix yields a
      // step with a (tiny) model increase; keep the origin then.
      TrsSolution sol = detail::finish(g, h, delta, Vector(delta * es.eigenvectors().col(0)), true, 0);
      if (sol.predicted_decrease > 0.0) return sol;
    }
    return detail::finish(g, h, delta, Vector::Zero(p), false, 0);
  }

  Vector s = Vector::Zero(p);
  Vector r = g;  // model gradient at s
  Vector d = -r;
  bool boundary = false;
  int iters = 0;
  const int cap = static_cast<int>(5 * p);
  const double tol = 1e-8 * gn;
  while (iters < cap) {
    ++iters;
    const Vector hd = h * d;
    const double dhd = d.dot(hd);
    const double rr = r.squaredNorm();
    if (dhd <= 0.0) {
      s += detail::boundary_tau(s, d, delta) * d;
      boundary = true;
      break;
    }
    const double alpha = rr / dhd;
    if ((s + alpha * d).norm() >= delta) {
      s += detail::boundary_tau(s, d, delta) * d;
      boundary = true;
      break;
    }
    s += alpha * d;
    r += alpha * hd;
    if (r.norm() <= tol) break;
    d = -r + (r.squaredNorm() / rr) * d;
  }
  if (boundary) iters += detail::boundary_refine(g, h, s, static_cast<int>(2 * p));

  TrsSolution best = detail::finish(g, h, delta, std::move(s), boundary, iters);
  const TrsSolution cp = cauchy_point(g, h, delta);
  if (!(best.predicted_decrease >= cp.predicted_decrease)) {
    const int n_it = best.iterations;
    best = cp;
    best.iterations = n_it;
  }
  return best;
}

inline TrsSolution solve_subproblem(const SubspaceModel& m, double delta) {
  return solve_subproblem(m.gradient, m.hessian, delta);
}

}  // namespace qarsta
