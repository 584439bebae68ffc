#include <gtest/gtest.h>

#include <cmath>

#include "qarsta/geometry.hpp"
#include "qarsta/models.hpp"

using namespace qarsta;

namespace {

Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

double smooth(const Vector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::exp(0.3 * x(i)) + std::sin(x(i)) * x((i + 1) % x.size());
  return s;
}

}  // namespace

TEST(ModelTags, RoundTrip) {
  for (auto k : {ModelKind::DeterminedQuadratic, ModelKind::UnderdeterminedQuadratic, ModelKind::Linear,
                 ModelKind::SquareOfLinear})
    EXPECT_EQ(parse_model_tag(model_tag(k)), k);
  EXPECT_THROW(parse_model_tag("cubic"), ArgumentError);
}

TEST(ModelBuilders, ColdCacheEvaluationCounts) {
  Rng rng(1);
  const Matrix d = 0.1 * gaussian(20, 10, rng);
  const Vector x0 = gaussian(20, 1, rng).col(0);
  auto residuals = [](const Vector& x) { return Vector(x.array().sin()); };
  const std::pair<ModelKind, std::size_t> cases[] = {{ModelKind::DeterminedQuadratic, 66},
                                                     {ModelKind::UnderdeterminedQuadratic, 21},
                                                     {ModelKind::Linear, 11},
                                                     {ModelKind::SquareOfLinear, 11}};
  for (const auto& [kind, expected] : cases) {
    EvaluationCache cache(smooth, residuals);
    const SubspaceModel m = build_model(kind, cache, x0, d);
    EXPECT_EQ(m.evals_used, expected) << model_tag(kind);
    EXPECT_EQ(cache.evaluations(), expected);
    EXPECT_EQ(node_count(kind, 10), expected);
    // Rebuilding on the same stencil is free.
    EXPECT_EQ(build_model(kind, cache, x0, d).evals_used, 0u);
  }
}

TEST(ModelBuilders, DeterminedQuadraticInterpolatesAllNodes) {
  auto f = [](const Vector& x) { return std::pow(x(0), 4) + x(1) * x(1); };
  const Matrix d = 0.5 * Matrix::Identity(2, 2);
  EvaluationCache cache(f);
  const SampleStencil st(Vector::Zero(2), DirectionMatrix(d));
  const SubspaceModel m = build_determined_quadratic(cache, st);
  for (int i = 0; i <= 2; ++i)
    for (int j = i; j <= 2; ++j) {
      const Vector x = st.point(i, j);
      EXPECT_NEAR(full_space_value(m, x), f(x), 1e-14) << i << "," << j;
    }
}

TEST(ModelBuilders, QuadraticIsReproducedEverywhere) {
  Rng rng(2);
  const Matrix b = gaussian(6, 6, rng);
  const Matrix h = b + b.transpose();
  const Vector c = gaussian(6, 1, rng).col(0);
  auto f = [&](const Vector& x) { return 1.0 + c.dot(x) + 0.5 * x.dot(h * x); };
  const Matrix d = 0.3 * gaussian(6, 3, rng);
  const Vector x0 = gaussian(6, 1, rng).col(0);
  EvaluationCache cache(f);
  const SubspaceModel m = build_model(ModelKind::DeterminedQuadratic, cache, x0, d);
  for (int t = 0; t < 20; ++t) {
    const Vector s = gaussian(3, 1, rng).col(0);
    const Vector x = x0 + m.q_basis * s;
    EXPECT_NEAR(model_value(m, s), f(x), 1e-9 * (1.0 + std::abs(f(x))));
  }
  EXPECT_LT((m.gradient - m.q_basis.transpose() * (c + h * x0)).norm(), 1e-9);
  EXPECT_LT((m.hessian - m.q_basis.transpose() * h * m.q_basis).norm(), 1e-8);
}

TEST(ModelBuilders, UnderdeterminedMissesCrossTerm) {
  auto f = [](const Vector& x) { return x(0) * x(1); };
  const Matrix d = Matrix::Identity(2, 2);
  EvaluationCache c1(f), c2(f);
  const SubspaceModel uq = build_model(ModelKind::UnderdeterminedQuadratic, c1, Vector::Zero(2), d);
  const SubspaceModel dq = build_model(ModelKind::DeterminedQuadratic, c2, Vector::Zero(2), d);
  EXPECT_EQ(uq.hessian.norm(), 0.0);
  EXPECT_NEAR(std::abs(dq.hessian(0, 1)), 1.0, 1e-14);
}

TEST(ModelBuilders, UnderdeterminedMatchesDeterminedOnSeparableQuadratic) {
  auto f = [](const Vector& x) { return 3.0 * x(0) * x(0) - x(1) * x(1) + 0.5 * x(2) * x(2) + x(0) - 2.0 * x(2); };
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 0.5, -0.25, 1.0;
  EvaluationCache c1(f), c2(f);
  const SubspaceModel uq = build_model(ModelKind::UnderdeterminedQuadratic, c1, Vector::Ones(3), d);
  const SubspaceModel dq = build_model(ModelKind::DeterminedQuadratic, c2, Vector::Ones(3), d);
  EXPECT_LT((uq.hessian - dq.hessian).norm(), 1e-12);
  EXPECT_LT((uq.gradient - dq.gradient).norm(), 1e-12);
}

TEST(ModelBuilders, LinearHasForwardDifferenceBias) {
  auto f = [](const Vector& x) { return x(0) * x(0); };
  for (double h : {1.0, 0.1}) {
    EvaluationCache cache(f);
    const SubspaceModel m = build_model(ModelKind::Linear, cache, Vector::Zero(1), Matrix::Constant(1, 1, h));
    // Q may carry a sign flip; the gradient along the direction is h.
    EXPECT_NEAR(m.gradient(0) * m.q_basis(0, 0), h, 1e-14);
    EXPECT_EQ(m.hessian.norm(), 0.0);
  }
}

TEST(ModelBuilders, LinearIsExactForLinearFunctions) {
  Rng rng(3);
  const Vector a = gaussian(5, 1, rng).col(0);
  auto f = [&](const Vector& x) { return 2.0 + a.dot(x); };
  const Matrix d = gaussian(5, 3, rng);
  EvaluationCache cache(f);
  const SubspaceModel m = build_model(ModelKind::Linear, cache, Vector::Zero(5), d);
  EXPECT_LT((m.gradient - m.q_basis.transpose() * a).norm(), 1e-12);
}

TEST(ModelBuilders, SquareOfLinearIdentityResiduals) {
  Rng rng(4);
  auto g = [](const Vector& x) { return x; };
  const Matrix d = generate_directions(6, Matrix(6, 0), 3, 1.0, 10.0, rng).directions;
  EvaluationCache cache({}, g);
  const SubspaceModel m = build_model(ModelKind::SquareOfLinear, cache, Vector::Zero(6), d);
  EXPECT_LT((m.hessian - Matrix::Identity(3, 3)).norm(), 1e-13);
  EXPECT_LT(m.gradient.norm(), 1e-14);
  EXPECT_EQ(m.constant, 0.0);
}

TEST(ModelBuilders, SquareOfLinearHessianIsPsdOnRosenbrock) {
  Rng rng(5);
  auto g = [](const Vector& x) {
    Vector r(2);
    r << 10.0 * (x(1) - x(0) * x(0)), 1.0 - x(0);
    return r;
  };
  for (int t = 0; t < 20; ++t) {
    EvaluationCache cache({}, g);
    const SubspaceModel m =
        build_model(ModelKind::SquareOfLinear, cache, gaussian(2, 1, rng).col(0), 0.1 * gaussian(2, 2, rng));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.hessian);
    EXPECT_GE(es.eigenvalues()(0), -1e-10 * std::max(1.0, es.eigenvalues()(1)));
  }
}

TEST(ModelBuilders, SquareOfLinearNeedsResiduals) {
  EvaluationCache cache(smooth);
  EXPECT_THROW(build_model(ModelKind::SquareOfLinear, cache, Vector::Zero(3), Matrix::Identity(3, 2)), ArgumentError);
}

TEST(ModelBuilders, RankDeficientStencilThrows) {
  Matrix d(3, 2);
  d << 1, 2, 0, 0, 0, 0;
  EvaluationCache cache(smooth);
  EXPECT_THROW(build_model(ModelKind::Linear, cache, Vector::Zero(3), d), RankDeficiencyError);
}

TEST(ModelQueryTest, OriginAndFiniteDifferences) {
  Rng rng(6);
  SubspaceModel m;
  m.constant = 0.7;
  m.gradient = gaussian(4, 1, rng).col(0);
  const Matrix b = gaussian(4, 4, rng);
  m.hessian = b + b.transpose();
  const ModelQuery at0 = model_query(m, Vector::Zero(4));
  EXPECT_EQ(at0.value, m.constant);
  EXPECT_EQ(at0.gradient, m.gradient);
  const Vector s = gaussian(4, 1, rng).col(0);
  const ModelQuery q = model_query(m, s);
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < 4; ++i) {
    const Vector e = Vector::Unit(4, i);
    const double fd = (model_value(m, s + h * e) - model_value(m, s - h * e)) / (2 * h);
    EXPECT_NEAR(fd, q.gradient(i), 1e-6 * (1.0 + std::abs(q.gradient(i))));
  }
  EXPECT_THROW(model_query(m, Vector::Zero(3)), ArgumentError);
}

TEST(ModelQueryTest, ZeroHessianGivesConstantGradient) {
  SubspaceModel m;
  m.gradient = Vector::Ones(3);
  m.hessian = Matrix::Zero(3, 3);
  EXPECT_EQ(model_query(m, Vector::Constant(3, 5.0)).gradient, m.gradient);
}

TEST(FullSpaceValue, NodesAndDomainCheck) {
  Rng rng(7);
  const Matrix d = 0.2 * gaussian(5, 2, rng);
  const Vector x0 = gaussian(5, 1, rng).col(0);
  EvaluationCache cache(smooth);
  const SubspaceModel m = build_model(ModelKind::DeterminedQuadratic, cache, x0, d);
  EXPECT_DOUBLE_EQ(full_space_value(m, x0), smooth(x0));
  for (int i = 0; i < 2; ++i) {
    const Vector x = x0 + d.col(i);
    EXPECT_NEAR(full_space_value(m, x), smooth(x), 1e-12 * (1 + std::abs(smooth(x))));
  }
  Vector off = gaussian(5, 1, rng).col(0);
  off -= m.q_basis * (m.q_basis.transpose() * off);
  EXPECT_THROW(full_space_value(m, x0 + off), DomainError);
}

TEST(ModelGradient, EqualsAcsgBitForBit) {
  Rng rng(8);
  const Matrix d = 0.3 * gaussian(4, 3, rng);
  const Vector x0 = gaussian(4, 1, rng).col(0);
  EvaluationCache cache(smooth);
  const SubspaceModel m = build_model(ModelKind::DeterminedQuadratic, cache, x0, d);
  const SampleStencil st(x0, DirectionMatrix(d));
  Vector fi(3), f2i(3);
  for (int i = 1; i <= 3; ++i) {
    fi(i - 1) = smooth(st.point(0, i)) - smooth(x0);
    f2i(i - 1) = smooth(st.point(i, i)) - smooth(x0);
  }
  const Vector g = acsg(DeltaVector{fi, smooth(x0)}, DeltaVector{f2i, smooth(x0)},
                        DirectionMatrix::from_upper_triangular(m.r_factor));
  EXPECT_EQ(model_query(m, Vector::Zero(3)).gradient, g);
}

TEST(SampleStencilTest, AnchorsReplaceFirstOrderNodes) {
  const Vector anchor = Vector::Constant(2, 0.123);
  SampleStencil st(Vector::Zero(2), DirectionMatrix(Matrix::Identity(2, 2)), {anchor, std::nullopt});
  EXPECT_EQ(st.point(0, 1), anchor);
  EXPECT_EQ(st.point(1, 0), anchor);
  EXPECT_EQ(st.point(0, 2), Vector::Unit(2, 1));
  EXPECT_EQ(st.point(1, 2), Vector::Ones(2));
  EXPECT_THROW(st.point(0, 3), ArgumentError);
}
