#include "core/scalar_driver.hpp"

#include "core/error.hpp"
#include "core/keyed_rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace wmspde {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> scale_coefficients(const std::vector<double>& coeffs) {
  std::vector<double> scaled(coeffs.size(), 0.0);
  for (std::size_t n = 1; n < coeffs.size(); ++n) {
    const double nn = static_cast<double>(n);
    scaled[n] = std::numbers::sqrt2 * coeffs[n] / (1.0 + kPi * kPi * nn * nn);
  }
  return scaled;
}

}  // namespace

ScalarDriver::ScalarDriver(std::uint64_t seed, int n_modes) : seed_(seed) {
  require(n_modes >= 1, ErrorCode::domain, fmt::format("scalar driver needs at least one mode, got {}", n_modes));
  const KeyedNormal normal(seed, StreamTag::scalar_driver);
  coeffs_.resize(static_cast<std::size_t>(n_modes) + 1);
  for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] = normal(0, n);
  scaled_ = scale_coefficients(coeffs_);
}

ScalarDriver ScalarDriver::from_coefficients(std::vector<double> coeffs) {
  require(coeffs.size() >= 2, ErrorCode::domain, "scalar driver needs at least one mode");
  ScalarDriver driver;
  driver.coeffs_ = std::move(coeffs);
  driver.scaled_ = scale_coefficients(driver.coeffs_);
  return driver;
}

double ScalarDriver::f(double t) const {
  require(t >= 0.0 && t <= 1.0, ErrorCode::domain, fmt::format("scalar driver evaluated at t = {} outside [0, 1]", t));
  // cos(pi n t) by the Chebyshev recurrence: c_{n+1} = 2 cos(pi t) c_n - c_{n-1}.
  const double c1 = std::cos(kPi * t);
  double prev = 1.0;
  double curr = c1;
  double sum = coeffs_[0];
  for (std::size_t n = 1; n < scaled_.size(); ++n) {
    sum += scaled_[n] * curr;
    const double next = 2.0 * c1 * curr - prev;
    prev = curr;
    curr = next;
  }
  return sum;
}

double ScalarDriver::b(double t) const {
  const double value = f(t);
  return std::exp(value * value);
}

std::string ScalarDriver::to_json() const {
  std::string out = fmt::format(R"({{"seed": {}, "n_modes": {}, "coeffs": [)", seed_, n_modes());
  for (std::size_t n = 0; n < coeffs_.size(); ++n) out += fmt::format("{}{:.17g}", n ? ", " : "", coeffs_[n]);
  out += "]}";
  return out;
}

ScalarDriver sample_driver(std::uint64_t seed, int n_modes) { return ScalarDriver(seed, n_modes); }
double eval_f(const ScalarDriver& driver, double t) { return driver.f(t); }
double eval_b(const ScalarDriver& driver, double t) { return driver.b(t); }

double driver_truncation_bound(int n_modes) { return std::numbers::sqrt2 / (kPi * kPi * n_modes); }

}  // namespace wmspde
