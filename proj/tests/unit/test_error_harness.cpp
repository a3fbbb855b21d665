#include "core/error.hpp"
#include "core/error_harness.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wmspde;

TEST(RelativeError, TrivialCases) {
  const auto fine = build_mesh(1, 3);
  const FemOperators ops(fine);
  const Vector ref = Vector::LinSpaced(ops.size(), 0.5, 2.0);
  EXPECT_EQ(relative_error(ref, ref, nullptr, ops.mass()), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(Vector::Zero(ops.size()), ref, nullptr, ops.mass()), 1.0);
  const auto coarse = build_mesh(1, 1);
  const auto a = restriction_matrix(coarse, fine);
  Vector c(3);
  c << 1.0, -2.0, 0.5;
  const Vector prolonged = a.transpose() * c;
  EXPECT_NEAR(relative_error(c, prolonged, &a, ops.mass()), 0.0, 1e-15);
  try {
    relative_error(c, Vector::Zero(ops.size()), &a, ops.mass());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_reference);
  }
}

TEST(RelativeError, DenseOracleLevelsOneTwo) {
  // coarse nodes 0, 1/2, 1; fine nodes 0, 1/4, 1/2, 3/4, 1; h = 1/4
  Eigen::MatrixXd m(5, 5);
  m.setZero();
  const double h = 0.25;
  for (int e = 0; e < 4; ++e) {
    m(e, e) += h / 3;
    m(e + 1, e + 1) += h / 3;
    m(e, e + 1) += h / 6;
    m(e + 1, e) += h / 6;
  }
  Eigen::MatrixXd at(5, 3);
  at << 1, 0, 0, 0.5, 0.5, 0, 0, 1, 0, 0, 0.5, 0.5, 0, 0, 1;
  Vector coarse(3), ref(5);
  coarse << 0.3, -1.0, 2.0;
  ref << 0.1, 0.2, -0.7, 1.1, 1.9;
  const Vector d = at * coarse - ref;
  const double expected = std::sqrt(d.dot(m * d) / ref.dot(m * ref));
  const auto a = restriction_matrix(build_mesh(1, 1), build_mesh(1, 2));
  const FemOperators ops(build_mesh(1, 2));
  EXPECT_NEAR(relative_error(coarse, ref, &a, ops.mass()), expected, 1e-14);
}

TEST(TheoreticalRates, Examples) {
  auto r = theoretical_rates(0.75, 1);
  EXPECT_DOUBLE_EQ(r.space, 2.0);
  EXPECT_DOUBLE_EQ(r.time, 1.0);
  r = theoretical_rates(0.5, 2);
  EXPECT_DOUBLE_EQ(r.space, 1.0);
  EXPECT_DOUBLE_EQ(r.time, 0.5);
  r = theoretical_rates(0.25, 1);
  EXPECT_DOUBLE_EQ(r.space, 1.0);
  EXPECT_DOUBLE_EQ(r.time, 0.5);
  r = theoretical_rates(1.0, 1, 0.8);
  EXPECT_DOUBLE_EQ(r.space, 2.0);
  EXPECT_DOUBLE_EQ(r.time, 0.8);
}

TEST(FitRate, ExactData) {
  const std::vector<std::pair<double, double>> one = {{1, 1}, {0.5, 0.5}, {0.25, 0.25}};
  const std::vector<std::pair<double, double>> two = {{1, 1}, {0.5, 0.25}, {0.25, 1.0 / 16}};
  EXPECT_NEAR(fit_rate(one), 1.0, 1e-15);
  EXPECT_NEAR(fit_rate(two), 2.0, 1e-15);
  std::vector<std::pair<double, double>> synthetic;
  for (int l = 2; l <= 6; ++l) synthetic.emplace_back(std::ldexp(1.0, -l), std::ldexp(1.0, -2 * l));
  EXPECT_EQ(fit_rate(synthetic), 2.0);
}

TEST(FitRate, NoisyData) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::pair<double, double>> pts;
  for (int l = 1; l <= 10; ++l) {
    const double h = std::ldexp(1.0, -l);
    pts.emplace_back(h, std::pow(h, 1.5) * (1.0 + noise(rng)));
  }
  const double r = fit_rate(pts);
  EXPECT_GE(r, 1.4);
  EXPECT_LE(r, 1.6);
}

TEST(FitRate, NeedsThreePoints) {
  const std::vector<std::pair<double, double>> two = {{1, 1}, {0.5, 0.5}};
  try {
    fit_rate(two);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_data);
  }
}

TEST(ConvergenceStudy, ReferenceLevelExcludedAndDeterministic) {
  SchemeConfig base;
  base.dim = 1;
  base.gamma = 0.5;
  base.master_seed = 3;
  base.space_level = 6;
  base.time_steps = 64;
  const std::vector<int> ladder = {2, 3, 4, 6};
  OperatorCache cache;
  const auto r = convergence_study(base, Axis::space, ladder, Reference{6, 6}, 3, cache);
  ASSERT_EQ(r.levels.size(), 4u);
  EXPECT_TRUE(r.levels.back().is_reference);
  EXPECT_EQ(r.levels.back().mean_error, 0.0);
  EXPECT_TRUE(std::isfinite(r.fitted_rate));
  EXPECT_EQ(r.seeds.size(), 3u);
  EXPECT_EQ(r.seeds[1], path_seed(3, 1));
  EXPECT_GE(monotone_pairs(r), 2);
  const auto again = convergence_study(base, Axis::space, ladder, Reference{6, 6}, 3, cache, 2);
  for (std::size_t i = 0; i < r.levels.size(); ++i) EXPECT_EQ(r.levels[i].path_errors, again.levels[i].path_errors);
}

TEST(ConvergenceStudy, TimeAxisLadder) {
  SchemeConfig base;
  base.gamma = 0.75;
  base.master_seed = 1;
  base.space_level = 4;
  base.time_steps = 256;
  const std::vector<int> ladder = {2, 3, 4, 5};
  OperatorCache cache;
  const auto r = convergence_study(base, Axis::time, ladder, Reference{4, 8}, 2, cache);
  for (const auto& e : r.levels) EXPECT_EQ(e.level, 4);
  EXPECT_DOUBLE_EQ(r.levels.front().resolution, 0.25);
  EXPECT_DOUBLE_EQ(r.theoretical_rate, 1.0);
  EXPECT_GT(r.levels.front().mean_error, r.levels.back().mean_error);
}

TEST(ConvergenceStudy, RejectsBadLadders) {
  SchemeConfig base;
  OperatorCache cache;
  const std::vector<int> finer = {2, 7};
  EXPECT_THROW(convergence_study(base, Axis::space, finer, Reference{6, 6}, 1, cache), Error);
  const std::vector<int> unordered = {3, 2, 4};
  EXPECT_THROW(convergence_study(base, Axis::space, unordered, Reference{6, 6}, 1, cache), Error);
  EXPECT_THROW(convergence_study(base, Axis::space, finer, Reference{6, 6}, 0, cache), Error);
}
