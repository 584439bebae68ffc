#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qarsta/trsolver.hpp"

using namespace qarsta;

namespace {

double model_at(const Vector& g, const Matrix& h, const Vector& s) { return g.dot(s) + 0.5 * s.dot(h * s); }

}  // namespace

TEST(Subproblem, LinearModelStepsToBoundary) {
  Vector g(3);
  g << 3, 0, 4;
  const TrsSolution sol = solve_subproblem(g, Matrix::Zero(3, 3), 2.0);
  EXPECT_LT((sol.step + 2.0 * g / 5.0).norm(), 1e-14);
  EXPECT_NEAR(sol.predicted_decrease, 10.0, 1e-13);
  EXPECT_TRUE(sol.on_boundary);
}

TEST(Subproblem, ConvexInteriorNewtonPoint) {
  const Vector g = -Vector::Unit(3, 0);
  const TrsSolution sol = solve_subproblem(g, Matrix::Identity(3, 3), 10.0);
  EXPECT_LT((sol.step - Vector::Unit(3, 0)).norm(), 1e-14);
  EXPECT_NEAR(sol.predicted_decrease, 0.5, 1e-14);
  EXPECT_FALSE(sol.on_boundary);
}

TEST(Subproblem, NearGlobalOnConvexFiveDimensional) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 3; ++trial) {
    Matrix b(5, 5);
    for (Eigen::Index i = 0; i < 25; ++i) b.data()[i] = nd(rng);
    const Matrix h = b * b.transpose() + 0.1 * Matrix::Identity(5, 5);
    Vector g(5);
    for (Eigen::Index i = 0; i < 5; ++i) g(i) = 3.0 * nd(rng);
    const TrsSolution sol = solve_subproblem(g, h, 1.0);
    // Dense sampling oracle over the ball: half on the sphere, half inside.
    double best = 0.0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000000; ++k) {
      Vector s(5);
      for (Eigen::Index i = 0; i < 5; ++i) s(i) = nd(rng);
      s.normalize();
      if (k % 2) s *= std::pow(u(rng), 0.2);
      best = std::min(best, model_at(g, h, s));
    }
    EXPECT_GE(sol.predicted_decrease, 0.95 * -best);
  }
}

TEST(Subproblem, FloorAndCauchyOnRandomInstances) {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5000; ++trial) {
    const Eigen::Index p = 1 + trial % 8;
    Matrix b(p, p);
    for (Eigen::Index i = 0; i < p * p; ++i) b.data()[i] = nd(rng);
    Matrix h = b + b.transpose();
    if (trial % 7 == 0) h.setZero();
    Vector g(p);
    for (Eigen::Index i = 0; i < p; ++i) g(i) = nd(rng);
    const double delta = std::exp(2.0 * nd(rng));
    const TrsSolution sol = solve_subproblem(g, h, delta);
    const TrsSolution cp = cauchy_point(g, h, delta);
    ASSERT_LE(sol.step.norm(), delta * (1 + 1e-12));
    ASSERT_GE(sol.predicted_decrease, decrease_floor(g, h, delta) * (1 - 1e-12));
    ASSERT_GE(sol.predicted_decrease, cp.predicted_decrease);
    ASSERT_NEAR(sol.predicted_decrease, -model_at(g, h, sol.step), 1e-10 * (1 + sol.predicted_decrease));
  }
}

TEST(Subproblem, ZeroGradientUsesNegativeCurvature) {
  Matrix h = Matrix::Identity(2, 2);
  h(1, 1) = -2.0;
  const TrsSolution sol = solve_subproblem(Vector::Zero(2), h, 0.5);
  EXPECT_NEAR(std::abs(sol.step(1)), 0.5, 1e-14);
  EXPECT_NEAR(sol.predicted_decrease, 0.25, 1e-14);
  EXPECT_EQ(solve_subproblem(Vector::Zero(2), Matrix::Identity(2, 2), 0.5).step.norm(), 0.0);
}

TEST(Subproblem, RejectsBadInput) {
  EXPECT_THROW(solve_subproblem(Vector::Ones(2), Matrix::Identity(2, 2), 0.0), ArgumentError);
  EXPECT_THROW(solve_subproblem(Vector::Ones(2), Matrix::Identity(3, 3), 1.0), ArgumentError);
  Vector g = Vector::Ones(2);
  g(0) = std::nan("");
  EXPECT_THROW(solve_subproblem(g, Matrix::Identity(2, 2), 1.0), NumericError);
}

TEST(CauchyPoint, Cases) {
  EXPECT_EQ(cauchy_point(Vector::Zero(2), Matrix::Identity(2, 2), 1.0).step.norm(), 0.0);
  // m(s) = -s + s^2
  const TrsSolution cp = cauchy_point(-Vector::Ones(1), 2.0 * Matrix::Identity(1, 1), 1.0);
  EXPECT_NEAR(cp.step(0), 0.5, 1e-15);
  EXPECT_NEAR(cp.predicted_decrease, 0.25, 1e-15);
  const TrsSolution lin = cauchy_point(Vector::Ones(2), Matrix::Zero(2, 2), 3.0);
  EXPECT_NEAR(lin.predicted_decrease, 3.0 * std::sqrt(2.0), 1e-13);
}

TEST(Subproblem, ZeroGradientSingularPsdHessianStaysAtOrigin) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::Index p = 2 + trial % 8;
    Vector b(p);
    for (Eigen::Index i = 0; i < p; ++i) b(i) = nd(rng);
    const TrsSolution sol = solve_subproblem(Vector::Zero(p), b * b.transpose(), 0.5);
    ASSERT_GE(sol.predicted_decrease, 0.0);
  }
}
