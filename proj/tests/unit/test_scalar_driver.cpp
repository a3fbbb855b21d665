#include "core/error.hpp"
#include "core/scalar_driver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace wmspde;

TEST(ScalarDriver, DeterministicAndPrefixStable) {
  const auto a = sample_driver(9, 100), b = sample_driver(9, 100), c = sample_driver(9, 200);
  EXPECT_EQ(a.coeffs(), b.coeffs());
  ASSERT_EQ(a.coeffs().size(), 101u);
  for (std::size_t n = 0; n <= 100; ++n) EXPECT_EQ(a.coeffs()[n], c.coeffs()[n]);
}

TEST(ScalarDriver, CoefficientVariance) {
  double sum = 0, sq = 0;
  const int seeds = 10000;
  for (int s = 0; s < seeds; ++s) {
    const double x = sample_driver(static_cast<std::uint64_t>(s), 3).coeffs()[3];
    sum += x;
    sq += x * x;
  }
  const double var = (sq - sum * sum / seeds) / (seeds - 1);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(ScalarDriver, ClosedFormEvaluations) {
  const auto zero = ScalarDriver::from_coefficients({0, 0, 0, 0});
  const auto constant = ScalarDriver::from_coefficients({1, 0, 0});
  const auto first = ScalarDriver::from_coefficients({0, 1});
  for (double t : {0.0, 0.3, 1.0}) {
    EXPECT_EQ(eval_f(zero, t), 0.0);
    EXPECT_EQ(eval_b(zero, t), 1.0);
    EXPECT_DOUBLE_EQ(eval_f(constant, t), 1.0);
    EXPECT_NEAR(eval_b(constant, t), std::exp(1.0), 1e-15);
  }
  EXPECT_NEAR(eval_f(first, 0.0), std::sqrt(2.0) / (1 + M_PI * M_PI), 1e-15);
  EXPECT_NEAR(eval_f(first, 0.0), 0.130107, 1e-6);
  EXPECT_NEAR(eval_f(first, 1.0), -std::sqrt(2.0) / (1 + M_PI * M_PI), 1e-15);
}

TEST(ScalarDriver, RecurrenceMatchesDirectSum) {
  const auto d = sample_driver(3, 1000);
  for (double t : {0.0, 0.123, 0.5, 0.77, 1.0}) {
    double direct = d.coeffs()[0];
    for (int n = 1; n <= 1000; ++n)
      direct += d.coeffs()[static_cast<std::size_t>(n)] / (1 + M_PI * M_PI * n * n) * std::sqrt(2.0) * std::cos(M_PI * n * t);
    EXPECT_NEAR(d.f(t), direct, 1e-12);
    EXPECT_GE(d.b(t), 1.0);
  }
}

TEST(ScalarDriver, TruncationBound) {
  double tail = 0;
  for (int n = 101; n < 2000000; ++n) tail += std::sqrt(2.0) / (1 + M_PI * M_PI * double(n) * n);
  EXPECT_LE(tail, driver_truncation_bound(100));
}

TEST(ScalarDriver, OutsideUnitInterval) {
  const auto d = sample_driver(1, 10);
  EXPECT_THROW(d.f(-0.01), Error);
  EXPECT_THROW(d.f(1.01), Error);
}
