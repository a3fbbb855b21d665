#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wmspde {

constexpr int kDefaultDriverModes = 1000;

/// Truncated cosine expansion of f = (I - d^2/dt^2)^{-1} W on (0, 1) with
/// Neumann conditions,
///
///   f(t) = xi_0 + sum_{n=1}^{n_modes} (1 + pi^2 n^2)^{-1} xi_n sqrt(2) cos(pi n t),
///
/// and the rough noise scale b = exp(f^2). Coefficient n is keyed by
/// (seed, mode n), so a longer expansion extends a shorter one.
class ScalarDriver {
 public:
  ScalarDriver(std::uint64_t seed, int n_modes);
  /// Driver with prescribed coefficients xi_0..xi_{n_modes}.
  static ScalarDriver from_coefficients(std::vector<double> coeffs);

  std::uint64_t seed() const { return seed_; }
  int n_modes() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  double f(double t) const;
  double b(double t) const;

  std::string to_json() const;

 private:
  ScalarDriver() = default;

  std::uint64_t seed_ = 0;
  std::vector<double> coeffs_;
  std::vector<double> scaled_;  // (1 + pi^2 n^2)^{-1} sqrt(2) xi_n, n >= 1
};

ScalarDriver sample_driver(std::uint64_t seed, int n_modes);
double eval_f(const ScalarDriver& driver, double t);
double eval_b(const ScalarDriver& driver, double t);

/// Tail bound sum_{n > n_modes} sqrt(2) / (1 + pi^2 n^2) <= sqrt(2) / (pi^2 n_modes).
double driver_truncation_bound(int n_modes);

}  // namespace wmspde
