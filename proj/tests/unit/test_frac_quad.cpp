#include "core/error.hpp"
#include "core/frac_quad.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>

using namespace wmspde;

namespace {

// Exact (M^{-1} K)^{-gamma} M^{-1} g from the generalized eigenproblem K v = lambda M v.
Vector spectral_oracle(const FemOperators& ops, double gamma, const Vector& g) {
  const Eigen::MatrixXd k(ops.a2_matrix()), m(ops.mass());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
  const Eigen::MatrixXd& v = es.eigenvectors();  // v^T M v = I
  const Eigen::VectorXd lam = es.eigenvalues().array().pow(-gamma);
  return v * lam.asDiagonal() * (v.transpose() * g);
}

}  // namespace

TEST(QuadSpec, NodeCounts) {
  const auto s = make_spec(0.5, 0.5);
  EXPECT_EQ(s.kind, QuadratureSpec::Kind::sinc);
  EXPECT_EQ(s.n_pos, 40);
  EXPECT_EQ(s.n_neg, 40);
  EXPECT_EQ(s.nodes.size(), 81u);
  const auto t = make_spec(0.25, 0.5);
  EXPECT_EQ(t.n_pos, static_cast<int>(std::ceil(M_PI * M_PI / (2 * 0.25 * 0.25))));
  EXPECT_EQ(t.n_neg, static_cast<int>(std::ceil(M_PI * M_PI / (2 * 0.75 * 0.25))));
  EXPECT_EQ(make_spec(1.0, 0.5).kind, QuadratureSpec::Kind::full_inverse);
  EXPECT_EQ(make_spec(0.0, 0.5).kind, QuadratureSpec::Kind::identity);
}

TEST(QuadSpec, WeightsFollowTheSincFormula) {
  const double gamma = 0.3, k = 0.4;
  const auto s = make_spec(gamma, k);
  ASSERT_EQ(s.nodes.size(), s.weights.size());
  for (std::size_t i = 0; i < s.nodes.size(); ++i)
    EXPECT_NEAR(s.weights[i], k * std::sin(M_PI * gamma) / M_PI * std::exp((1 - gamma) * s.nodes[i]),
                1e-15 * std::max(1.0, s.weights[i]));
  EXPECT_NEAR(s.nodes.front(), -s.n_neg * k, 1e-12);
  EXPECT_NEAR(s.nodes.back(), s.n_pos * k, 1e-12);
}

TEST(QuadSpec, RejectsBadInput) {
  EXPECT_THROW(make_spec(-0.1, 0.5), Error);
  EXPECT_THROW(make_spec(1.1, 0.5), Error);
  EXPECT_THROW(make_spec(0.5, 0.0), Error);
  EXPECT_THROW(scalar_qgamma(make_spec(0.5, 0.5), 0.0), Error);
}

TEST(ScalarQuadrature, Examples) {
  EXPECT_NEAR(scalar_qgamma(make_spec(0.5, 0.5), 1.0), 1.0, 1e-4);
  EXPECT_NEAR(scalar_qgamma(make_spec(0.25, 0.25), 10.0), std::pow(10.0, -0.25), 1e-6);
  EXPECT_NEAR(scalar_qgamma(make_spec(0.5, 0.25), 2.0), std::pow(2.0, -0.5), 1e-6);
  EXPECT_EQ(scalar_qgamma(make_spec(1.0, 0.5), 4.0), 0.25);
  EXPECT_EQ(scalar_qgamma(make_spec(0.0, 0.5), 4.0), 1.0);
}

TEST(ScalarQuadrature, ErrorShrinksWithK) {
  for (double gamma : {0.25, 0.5, 0.75})
    for (double a : {0.5, 1.0, 10.0}) {
      double prev = INFINITY;
      for (double k : {1.0, 0.5, 0.25}) {
        const double err = std::abs(scalar_qgamma(make_spec(gamma, k), a) - std::pow(a, -gamma));
        EXPECT_LT(err, prev) << gamma << " " << a << " " << k;
        prev = err;
      }
    }
}

TEST(QuadratureOperator, MatchesSpectralOracle) {
  for (int dim : {1, 2}) {
    const FemOperators ops(build_mesh(dim, dim == 1 ? 4 : 2));
    Vector g(ops.size());
    for (Index i = 0; i < g.size(); ++i) g(i) = std::sin(2.0 * i + 0.5);
    for (double gamma : {0.25, 0.5, 0.75}) {
      const auto spec = make_spec(gamma, 0.25);
      const Vector q = QuadratureOperator(spec, ops).apply(g);
      const Vector exact = spectral_oracle(ops, gamma, g);
      EXPECT_LT((q - exact).norm() / exact.norm(), 1e-6) << dim << " " << gamma;
    }
  }
}

TEST(QuadratureOperator, Sentinels) {
  const FemOperators ops(build_mesh(1, 3));
  Vector v(ops.size());
  for (Index i = 0; i < v.size(); ++i) v(i) = 1.0 + 0.1 * i * i;
  const Vector kv = ops.a2_matrix() * v;
  EXPECT_LT((apply_qgamma(make_spec(1.0, 0.5), ops, kv) - v).norm() / v.norm(), 1e-12);
  const Vector mv = ops.mass() * v;
  EXPECT_LT((apply_qgamma(make_spec(0.0, 0.5), ops, mv) - v).norm() / v.norm(), 1e-12);
}

TEST(QuadratureOperator, ConstantEigenvector) {
  const FemOperators ops(build_mesh(1, 3));
  const Vector ones = Vector::Ones(ops.size());
  // T 1 = 0, so 1 is a pencil eigenvector with eigenvalue 1
  const auto spec = make_spec(0.5, 0.5);
  const Vector q = apply_qgamma(spec, ops, ops.mass() * ones);
  EXPECT_LT((q - scalar_qgamma(spec, 1.0) * ones).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((q - ones).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(QuadratureOperator, ScalarSurrogate) {
  // 1x1 pencil M = 1, K = 2
  SparseMatrix m(1, 1), t(1, 1);
  m.insert(0, 0) = 1.0;
  t.insert(0, 0) = 1.0;
  const FemOperators ops(1, 0, m, t);
  Vector g(1);
  g << 1.0;
  EXPECT_NEAR(apply_qgamma(make_spec(0.5, 0.25), ops, g)(0), std::pow(2.0, -0.5), 1e-6);
}

TEST(QuadSpec, JsonListsCounts) {
  const auto j = make_spec(0.5, 0.5).to_json();
  EXPECT_NE(j.find("\"N\": 40"), std::string::npos);
  EXPECT_NE(j.find("\"M\": 40"), std::string::npos);
}

TEST(QuadSpec, CouplingHelper) {
  const double h = 1.0 / 64;
  const double k = max_k_for_mesh(0.5, h);
  EXPECT_NEAR(k, -(M_PI * M_PI / 2) / 2.0 / std::log(h), 1e-12);
}
