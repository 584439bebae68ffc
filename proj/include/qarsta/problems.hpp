#pragma once

// Dimension-scalable test objectives. Least-squares entries expose a residual
// map g with f(x) = 1/2 ||g(x)||^2.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qarsta/cache.hpp"

namespace qarsta {

enum class ProblemKind { General, LeastSquares };

inline std::string_view problem_kind_name(ProblemKind k) {
  return k == ProblemKind::General ? "general" : "least_squares";
}

struct ProblemSpec {
  std::string name;
  Eigen::Index n = 0;
  ProblemKind kind = ProblemKind::General;
  std::optional<double> known_minimum;
  Vector x0;
  ObjectiveFn objective;
  ResidualFn residuals;  // empty for general problems
};

struct ProblemInfo {
  std::string name;
  ProblemKind kind;
  int block;  // n must be a multiple of this
  std::string description;
};

namespace detail {

using Builder = std::function<ProblemSpec(Eigen::Index)>;

struct RegistryEntry {
  ProblemInfo info;
  Builder build;
};

inline ObjectiveFn half_squared_norm(ResidualFn g) {
  return [g = std::move(g)](const Vector& x) { return 0.5 * g(x).squaredNorm(); };
}

inline ProblemSpec general(std::string name, Eigen::Index n, Vector x0, ObjectiveFn f, std::optional<double> fmin) {
  return {std::move(name), n, ProblemKind::General, fmin, std::move(x0), std::move(f), {}};
}

inline ProblemSpec least_squares(std::string name, Eigen::Index n, Vector x0, ResidualFn g,
                                 std::optional<double> fmin) {
  ObjectiveFn f = half_squared_norm(g);
  return {std::move(name), n, ProblemKind::LeastSquares, fmin, std::move(x0), std::move(f), std::move(g)};
}

inline Vector alternating(Eigen::Index n, std::initializer_list<double> pattern) {
  const std::vector<double> p(pattern);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = p[static_cast<std::size_t>(i) % p.size()];
  return x;
}

// ---- general problems -----------------------------------------------------

inline ProblemSpec sphere(Eigen::Index n) {
  return general("sphere", n, Vector::Ones(n), [](const Vector& x) { return x.squaredNorm(); }, 0.0);
}

inline ProblemSpec extended_rosenbrock(Eigen::Index n) {
  auto f = [](const Vector& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) {
      const double a = x(i + 1) - x(i) * x(i), b = 1.0 - x(i);
      s += 100.0 * a * a + b * b;
    }
    return s;
  };
  return general("extended_rosenbrock", n, alternating(n, {-1.2, 1.0}), f, 0.0);
}

inline ProblemSpec arwhead_like(Eigen::Index n) {
  auto f = [](const Vector& x) {
    const Eigen::Index m = x.size();
    const double xn2 = x(m - 1) * x(m - 1);
    double s = 0.0;
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      const double q = x(i) * x(i) + xn2;
      s += q * q - 4.0 * x(i) + 3.0;
    }
    return s;
  };
  return general("arwhead_like", n, Vector::Ones(n), f, 0.0);
}

inline ProblemSpec chained_wood_like(Eigen::Index n) {
  auto f = [](const Vector& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 3 < x.size(); i += 4) {
      const double x1 = x(i), x2 = x(i + 1), x3 = x(i + 2), x4 = x(i + 3);
      s += 100.0 * std::pow(x2 - x1 * x1, 2) + std::pow(1.0 - x1, 2) + 90.0 * std::pow(x4 - x3 * x3, 2) +
           std::pow(1.0 - x3, 2) + 10.1 * (std::pow(x2 - 1.0, 2) + std::pow(x4 - 1.0, 2)) +
           19.8 * (x2 - 1.0) * (x4 - 1.0);
    }
    return s;
  };
  return general("chained_wood_like", n, alternating(n, {-3.0, -1.0, -3.0, -1.0}), f, 0.0);
}

inline ProblemSpec extended_powell_singular(Eigen::Index n) {
  auto f = [](const Vector& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 3 < x.size(); i += 4) {
      const double x1 = x(i), x2 = x(i + 1), x3 = x(i + 2), x4 = x(i + 3);
      s += std::pow(x1 + 10.0 * x2, 2) + 5.0 * std::pow(x3 - x4, 2) + std::pow(x2 - 2.0 * x3, 4) +
           10.0 * std::pow(x1 - x4, 4);
    }
    return s;
  };
  return general("extended_powell_singular", n, alternating(n, {3.0, -1.0, 0.0, 1.0}), f, 0.0);
}

inline ProblemSpec dqdrtic(Eigen::Index n) {
  auto f = [](const Vector& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 2 < x.size(); ++i)
      s += x(i) * x(i) + 100.0 * (x(i + 1) * x(i + 1) + x(i + 2) * x(i + 2));
    return s;
  };
  return general("dqdrtic", n, Vector::Constant(n, 3.0), f, 0.0);
}

inline ProblemSpec liarwhd(Eigen::Index n) {
  auto f = [](const Vector& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += 4.0 * std::pow(x(i) * x(i) - x(0), 2) + std::pow(x(i) - 1.0, 2);
    return s;
  };
  return general("liarwhd", n, Vector::Constant(n, 4.0), f, 0.0);
}

inline ProblemSpec tridia(Eigen::Index n) {
  auto f = [](const Vector& x) {
    double s = std::pow(x(0) - 1.0, 2);
    for (Eigen::Index i = 1; i < x.size(); ++i) s += static_cast<double>(i + 1) * std::pow(2.0 * x(i) - x(i - 1), 2);
    return s;
  };
  return general("tridia", n, Vector::Ones(n), f, 0.0);
}

inline ProblemSpec engval1(Eigen::Index n) {
  auto f = [](const Vector& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double q = x(i) * x(i) + x(i + 1) * x(i + 1);
      s += q * q - 4.0 * x(i) + 3.0;
    }
    return s;
  };
  return general("engval1", n, Vector::Constant(n, 2.0), f, std::nullopt);
}

inline ProblemSpec dixon_price(Eigen::Index n) {
  auto f = [](const Vector& x) {
    double s = std::pow(x(0) - 1.0, 2);
    for (Eigen::Index i = 1; i < x.size(); ++i)
      s += static_cast<double>(i + 1) * std::pow(2.0 * x(i) * x(i) - x(i - 1), 2);
    return s;
  };
  return general("dixon_price", n, Vector::Ones(n), f, 0.0);
}

inline ProblemSpec nondquar(Eigen::Index n) {
  auto f = [](const Vector& x) {
    const Eigen::Index m = x.size();
    double s = std::pow(x(0) - x(1), 2) + std::pow(x(m - 2) + x(m - 1), 2);
    for (Eigen::Index i = 0; i + 2 < m; ++i) s += std::pow(x(i) + x(i + 1) + x(m - 1), 4);
    return s;
  };
  return general("nondquar", n, alternating(n, {1.0, -1.0}), f, 0.0);
}

// ---- least-squares problems ------------------------------------------------

inline ProblemSpec broyden_tridiagonal(Eigen::Index n) {
  auto g = [](const Vector& x) {
    const Eigen::Index m = x.size();
    Vector r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double left = i > 0 ? x(i - 1) : 0.0;
      const double right = i + 1 < m ? x(i + 1) : 0.0;
      r(i) = (3.0 - 2.0 * x(i)) * x(i) - left - 2.0 * right + 1.0;
    }
    return r;
  };
  return least_squares("broyden_tridiagonal", n, Vector::Constant(n, -1.0), g, 0.0);
}

/// Linear function of full rank with m = 2n residuals; the minimum of
/// 1/2 ||g||^2 is (m - n) / 2 = n / 2 at x = -1.
inline ProblemSpec linear_residuals(Eigen::Index n) {
  auto g = [](const Vector& x) {
    const Eigen::Index k = x.size(), m = 2 * k;
    const double t = 2.0 * x.sum() / static_cast<double>(m);
    Vector r(m);
    for (Eigen::Index i = 0; i < k; ++i) r(i) = x(i) - t - 1.0;
    for (Eigen::Index i = k; i < m; ++i) r(i) = -t - 1.0;
    return r;
  };
  return least_squares("linear_residuals", n, Vector::Ones(n), g, 0.5 * static_cast<double>(n));
}

inline ProblemSpec trigonometric(Eigen::Index n) {
  auto g = [](const Vector& x) {
    const Eigen::Index m = x.size();
    const double c = x.array().cos().sum();
    Vector r(m);
    for (Eigen::Index i = 0; i < m; ++i)
      r(i) = static_cast<double>(m) - c + static_cast<double>(i + 1) * (1.0 - std::cos(x(i))) - std::sin(x(i));
    return r;
  };
  return least_squares("trigonometric", n, Vector::Constant(n, 1.0 / static_cast<double>(n)), g, 0.0);
}

inline ProblemSpec extended_rosenbrock_ls(Eigen::Index n) {
  auto g = [](const Vector& x) {
    Vector r(x.size());
    for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) {
      r(i) = 10.0 * (x(i + 1) - x(i) * x(i));
      r(i + 1) = 1.0 - x(i);
    }
    return r;
  };
  return least_squares("extended_rosenbrock_ls", n, alternating(n, {-1.2, 1.0}), g, 0.0);
}

inline ProblemSpec extended_powell_ls(Eigen::Index n) {
  auto g = [](const Vector& x) {
    Vector r(x.size());
    const double s5 = std::sqrt(5.0), s10 = std::sqrt(10.0);
    for (Eigen::Index i = 0; i + 3 < x.size(); i += 4) {
      r(i) = x(i) + 10.0 * x(i + 1);
      r(i + 1) = s5 * (x(i + 2) - x(i + 3));
      r(i + 2) = std::pow(x(i + 1) - 2.0 * x(i + 2), 2);
      r(i + 3) = s10 * std::pow(x(i) - x(i + 3), 2);
    }
    return r;
  };
  return least_squares("extended_powell_ls", n, alternating(n, {3.0, -1.0, 0.0, 1.0}), g, 0.0);
}

inline ProblemSpec broyden_banded(Eigen::Index n) {
  auto g = [](const Vector& x) {
    const Eigen::Index m = x.size();
    Vector r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      double s = 0.0;
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - 5); j <= std::min<Eigen::Index>(m - 1, i + 1); ++j)
        if (j != i) s += x(j) * (1.0 + x(j));
      r(i) = x(i) * (2.0 + 5.0 * x(i) * x(i)) + 1.0 - s;
    }
    return r;
  };
  return least_squares("broyden_banded", n, Vector::Constant(n, -1.0), g, 0.0);
}

inline ProblemSpec discrete_boundary_value(Eigen::Index n) {
  const double h = 1.0 / static_cast<double>(n + 1);
  auto g = [h](const Vector& x) {
    const Eigen::Index m = x.size();
    Vector r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double t = static_cast<double>(i + 1) * h;
      const double left = i > 0 ? x(i - 1) : 0.0;
      const double right = i + 1 < m ? x(i + 1) : 0.0;
      r(i) = 2.0 * x(i) - left - right + 0.5 * h * h * std::pow(x(i) + t + 1.0, 3);
    }
    return r;
  };
  Vector x0(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1) * h;
    x0(i) = t * (t - 1.0);
  }
  return least_squares("discrete_boundary_value", n, x0, g, 0.0);
}

/// Penalty function I: residuals sqrt(a)(x_i - 1) and sum x_i^2 - 1/4.
inline ProblemSpec penalty1(Eigen::Index n) {
  const double sa = std::sqrt(1e-5);
  auto g = [sa](const Vector& x) {
    const Eigen::Index m = x.size();
    Vector r(m + 1);
    for (Eigen::Index i = 0; i < m; ++i) r(i) = sa * (x(i) - 1.0);
    r(m) = x.squaredNorm() - 0.25;
    return r;
  };
  Vector x0(n);
  for (Eigen::Index i = 0; i < n; ++i) x0(i) = static_cast<double>(i + 1);
  return least_squares("penalty1", n, x0, g, std::nullopt);
}

inline const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> entries = {
      {{"sphere", ProblemKind::General, 1, "sum of squares"}, sphere},
      {{"extended_rosenbrock", ProblemKind::General, 2, "decoupled Rosenbrock pairs"}, extended_rosenbrock},
      {{"arwhead_like", ProblemKind::General, 1, "arrowhead quartic coupled through x_n"}, arwhead_like},
      {{"chained_wood_like", ProblemKind::General, 4, "decoupled Wood function blocks"}, chained_wood_like},
      {{"extended_powell_singular", ProblemKind::General, 4, "Powell singular blocks, singular Hessian at x*"},
       extended_powell_singular},
      {{"dqdrtic", ProblemKind::General, 1, "banded diagonal quadratic"}, dqdrtic},
      {{"liarwhd", ProblemKind::General, 1, "quartic coupled through x_1"}, liarwhd},
      {{"tridia", ProblemKind::General, 1, "tridiagonal quadratic"}, tridia},
      {{"engval1", ProblemKind::General, 1, "chained quartic"}, engval1},
      {{"dixon_price", ProblemKind::General, 1, "Dixon-Price chain"}, dixon_price},
      {{"nondquar", ProblemKind::General, 1, "nondiagonal quartic"}, nondquar},
      {{"broyden_tridiagonal", ProblemKind::LeastSquares, 1, "Broyden tridiagonal system"}, broyden_tridiagonal},
      {{"linear_residuals", ProblemKind::LeastSquares, 1, "full-rank linear residuals, m = 2n"}, linear_residuals},
      {{"trigonometric", ProblemKind::LeastSquares, 1, "trigonometric system"}, trigonometric},
      {{"extended_rosenbrock_ls", ProblemKind::LeastSquares, 2, "Rosenbrock pairs as residuals"},
       extended_rosenbrock_ls},
      {{"extended_powell_ls", ProblemKind::LeastSquares, 4, "Powell singular blocks as residuals"},
       extended_powell_ls},
      {{"broyden_banded", ProblemKind::LeastSquares, 1, "Broyden banded system"}, broyden_banded},
      {{"discrete_boundary_value", ProblemKind::LeastSquares, 1, "discretized two-point boundary value problem"},
       discrete_boundary_value},
      {{"penalty1", ProblemKind::LeastSquares, 1, "penalty function I, m = n + 1"}, penalty1},
  };
  return entries;
}

inline const RegistryEntry& lookup(std::string_view name) {
  for (const auto& e : registry())
    if (e.info.name == name) return e;
  throw ArgumentError("unknown problem '" + std::string(name) + "'");
}

}  // namespace detail

inline constexpr Eigen::Index kMinProblemDimension = 4;

inline std::vector<ProblemInfo> list_problems() {
  std::vector<ProblemInfo> out;
  for (const auto& e : detail::registry()) out.push_back(e.info);
  return out;
}

inline bool problem_accepts(const ProblemInfo& info, Eigen::Index n) {
  return n >= kMinProblemDimension && n % info.block == 0;
}

/// Builds a registered problem. Throws ArgumentError for an unknown name or a
/// dimension the family does not support.
inline ProblemSpec make_problem(std::string_view name, Eigen::Index n) {
  const auto& entry = detail::lookup(name);
  if (!problem_accepts(entry.info, n)) {
    throw ArgumentError("problem '" + entry.info.name + "' needs n >= " + std::to_string(kMinProblemDimension) +
                        " and a multiple of " + std::to_string(entry.info.block) + ", got " + std::to_string(n));
  }
  return entry.build(n);
}

/// Problems of a kind that accept dimension n, in registry order.
inline std::vector<std::string> suite_problems(ProblemKind kind, Eigen::Index n) {
  std::vector<std::string> out;
  for (const auto& e : detail::registry())
    if (e.info.kind == kind && problem_accepts(e.info, n)) out.push_back(e.info.name);
  return out;
}

}  // namespace qarsta
