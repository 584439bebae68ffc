#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qarsta/simplex_calculus.hpp"

using namespace qarsta;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

Matrix one(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST(SimplexGradient, ConstantFunctionGivesZero) {
  auto f = [](const Vector&) { return 3.5; };
  std::mt19937_64 rng(1);
  const Matrix d = random_matrix(4, 3, rng);
  const Vector g = simplex_gradient(make_delta_vector(f, Vector::Zero(4), d), DirectionMatrix(d));
  EXPECT_EQ(g.norm(), 0.0);
}

TEST(SimplexGradient, LinearFunctionIsExactForSquareD) {
  std::mt19937_64 rng(2);
  const Vector a = random_matrix(5, 1, rng).col(0);
  auto f = [&](const Vector& x) { return a.dot(x); };
  const Matrix d = random_matrix(5, 5, rng);
  const Vector g = simplex_gradient(make_delta_vector(f, random_matrix(5, 1, rng).col(0), d), DirectionMatrix(d));
  EXPECT_LT((g - a).norm(), 1e-10 * a.norm());
}

TEST(SimplexGradient, SquareInOneDimension) {
  auto f = [](const Vector& x) { return x(0) * x(0); };
  const Vector g = simplex_gradient(make_delta_vector(f, Vector::Zero(1), one(1.0)), DirectionMatrix(one(1.0)));
  EXPECT_DOUBLE_EQ(g(0), 1.0);
}

TEST(SimplexGradient, MatchesNormalEquationsForTallD) {
  std::mt19937_64 rng(3);
  const Matrix d = random_matrix(7, 3, rng);
  DeltaVector delta{random_matrix(3, 1, rng).col(0), 0.0};
  const Vector g = simplex_gradient(delta, DirectionMatrix(d));
  const Vector ref = d * (d.transpose() * d).inverse() * delta.entries;
  EXPECT_LT((g - ref).norm(), 1e-10 * ref.norm());
}

TEST(SimplexGradient, RankDeficientDirectionsThrow) {
  Matrix d(3, 2);
  d << 1, 2, 1, 2, 1, 2;
  DeltaVector delta{Vector::Ones(2), 0.0};
  EXPECT_THROW(simplex_gradient(delta, DirectionMatrix(d)), RankDeficiencyError);
}

TEST(SimplexGradient, LengthMismatchThrows) {
  DeltaVector delta{Vector::Ones(3), 0.0};
  EXPECT_THROW(simplex_gradient(delta, DirectionMatrix(Matrix::Identity(3, 2))), ArgumentError);
}

TEST(SimplexHessian, QuadraticIsRecoveredForAnyInvertibleD) {
  std::mt19937_64 rng(4);
  const Matrix b = random_matrix(4, 4, rng);
  const Matrix h = b * b.transpose() - 2.0 * Matrix::Identity(4, 4);
  const Vector c = random_matrix(4, 1, rng).col(0);
  auto f = [&](const Vector& x) { return c.dot(x) + 0.5 * x.dot(h * x); };
  const Matrix d = 0.5 * random_matrix(4, 4, rng);
  const Vector x0 = random_matrix(4, 1, rng).col(0);
  const Matrix hh = simplex_hessian(make_delta_matrix(f, x0, d), DirectionMatrix(d));
  EXPECT_LT((hh - h).norm(), 1e-7 * h.norm());
}

TEST(SimplexHessian, DiagonalQuadraticWithIdentityDirections) {
  auto f = [](const Vector& x) { return x(0) * x(0) + 2.0 * x(1) * x(1); };
  const Matrix d = Matrix::Identity(2, 2);
  const Matrix h = simplex_hessian(make_delta_matrix(f, Vector::Zero(2), d), DirectionMatrix(d));
  Matrix expected(2, 2);
  expected << 2, 0, 0, 4;
  EXPECT_LT((h - expected).norm(), 1e-14);
}

TEST(SimplexHessian, CubicGivesSixH) {
  auto f = [](const Vector& x) { return x(0) * x(0) * x(0); };
  for (double h : {1.0, 0.5, 0.125}) {
    const DeltaMatrix table = make_delta_matrix(f, Vector::Zero(1), one(h));
    EXPECT_DOUBLE_EQ(table.entries(0, 0), 6.0 * h * h * h);
    EXPECT_DOUBLE_EQ(simplex_hessian(table, DirectionMatrix(one(h)))(0, 0), 6.0 * h);
  }
}

TEST(SimplexHessian, OutputIsExactlySymmetric) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix d = random_matrix(6, 4, rng);
    const Matrix t = random_matrix(4, 4, rng);
    const Matrix h = simplex_hessian(DeltaMatrix{t + t.transpose()}, DirectionMatrix(d));
    EXPECT_EQ((h - h.transpose()).norm(), 0.0);
  }
}

TEST(Acsg, ExactForSquareInOneDimension) {
  auto f = [](const Vector& x) { return x(0) * x(0); };
  const Matrix r = one(1.0);
  const Vector g = acsg(make_delta_vector(f, Vector::Zero(1), r), make_delta_vector(f, Vector::Zero(1), 2.0 * r),
                        DirectionMatrix::from_upper_triangular(r));
  EXPECT_DOUBLE_EQ(g(0), 0.0);
}

TEST(Acsg, LinearFunctionIsExact) {
  std::mt19937_64 rng(6);
  const Vector a = random_matrix(3, 1, rng).col(0);
  auto f = [&](const Vector& x) { return 1.0 + a.dot(x); };
  const Matrix r = Matrix(random_matrix(3, 3, rng).triangularView<Eigen::Upper>()) + 2.0 * Matrix::Identity(3, 3);
  const Vector g = acsg(make_delta_vector(f, Vector::Zero(3), r), make_delta_vector(f, Vector::Zero(3), 2.0 * r),
                        DirectionMatrix::from_upper_triangular(r));
  EXPECT_LT((g - a).norm(), 1e-12 * (1.0 + a.norm()));
}

TEST(Acsg, CubicErrorIsMinusTwoHSquared) {
  auto f = [](const Vector& x) { return x(0) * x(0) * x(0); };
  for (double h : {1.0, 0.25}) {
    const Matrix r = one(h);
    const Vector g = acsg(make_delta_vector(f, Vector::Zero(1), r), make_delta_vector(f, Vector::Zero(1), 2.0 * r),
                          DirectionMatrix::from_upper_triangular(r));
    EXPECT_NEAR(g(0), -2.0 * h * h, 1e-14);
  }
}

TEST(Acsg, QuadraticExactnessOverRandomInstances) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index p = 1 + trial % 6;
    const Matrix b = random_matrix(p, p, rng);
    const Matrix h = b + b.transpose();
    const Vector c = random_matrix(p, 1, rng).col(0);
    auto f = [&](const Vector& x) { return 0.3 + c.dot(x) + 0.5 * x.dot(h * x); };
    Matrix r = random_matrix(p, p, rng).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < p; ++j) {
      r(j, j) = std::copysign(1.0 + std::abs(r(j, j)), r(j, j));
      r.col(j) /= r.col(j).norm();
    }
    const DirectionMatrix rd = DirectionMatrix::from_upper_triangular(r);
    const Vector g = acsg(make_delta_vector(f, Vector::Zero(p), r), make_delta_vector(f, Vector::Zero(p), 2.0 * r), rd);
    const Matrix hh = simplex_hessian(make_delta_matrix(f, Vector::Zero(p), r), rd);
    const double scale = 1.0 + c.norm() + h.norm();
    EXPECT_LT((g - c).norm(), 1e3 * kEps * scale * std::max(1.0, rd.pinv_norm() * rd.pinv_norm()));
    EXPECT_LT((hh - h).norm(), 1e3 * kEps * scale * std::max(1.0, std::pow(rd.pinv_norm(), 2)) * 10);
  }
}
