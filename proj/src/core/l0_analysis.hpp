#pragma once

#include "core/mesh_fem.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wmspde {

/// d_p from samples of d(x, y): (mean of min(1, s^p))^{1/p}.
double dp_metric(std::span<const double> samples, double p);

enum class IntegrandFamily { deterministic_const, wiener_functional, heavy_tailed_scale };

const char* to_string(IntegrandFamily family);
IntegrandFamily parse_family(const std::string& text);

/// Elementary integrand Phi = sum_n Phi_n 1_{(t_n, t_{n+1}]} on H = R^q with
/// a uniform partition of [0, 1] and Phi_n = c_n I_q, where
///   deterministic_const:  c_n = scale
///   wiener_functional:    c_n = scale * W_1(t_n)          (first component of its block)
///   heavy_tailed_scale:   c_n = scale * exp(G^2), G ~ N(0,1) drawn at time 0 and
///                         independent of W, so E[Phi^2] = infinity.
/// `block` selects which q components of the cylindrical Wiener process drive it.
struct ElementaryIntegrand {
  int dim_q = 1;
  int steps = 64;
  IntegrandFamily family = IntegrandFamily::deterministic_const;
  double scale = 1.0;
  int block = 0;
};

struct IntegralPath {
  /// Integral at t_0..t_N (N + 1 vectors of size q).
  std::vector<Vector> values;
  double sup_norm = 0.0;
  /// int_0^1 ||Phi||_{L_2}^2 dt.
  double quadratic_variation = 0.0;
};

/// Exact evaluation of sum_n Phi_n (W(t_{n+1} ^ t) - W(t_n ^ t)) at the
/// partition points, for path `path` of the keyed stream under `seed`.
IntegralPath ito_integral_elementary(const ElementaryIntegrand& phi, std::uint64_t seed, std::uint64_t path);

struct BdgEstimate {
  double lhs = 0.0;  // E[1 ^ sup ||int Phi dW||^p]            (or the summed variant)
  double rhs = 0.0;  // E[1 ^ int ||Phi||^2]^{p/2}              (or E[1 ^ sum (int ||Phi_n||^2)^{p/2}])
  double ratio = 0.0;
  int paths = 0;
  bool alarm = false;  // RHS estimate 0 with LHS > 0, even after a 10x rerun
};

/// Monte Carlo ratio of the two sides of the truncated BDG inequality. 0/0 := 0.
BdgEstimate bdg_ratio(const ElementaryIntegrand& phi, double p, int n_paths, std::uint64_t seed);

/// Same for a finite sequence: E[1 ^ sum_n sup ||int Phi_n dW||^p] over
/// E[1 ^ sum_n (int ||Phi_n||^2)^{p/2}]. Requires p >= 2.
BdgEstimate bdg_sum_ratio(std::span<const ElementaryIntegrand> phis, double p, int n_paths, std::uint64_t seed);

/// Monte Carlo variance of the first component of int_0^1 Phi dW and the
/// Ito isometry prediction E[int ||Phi e_1||^2 dt] for deterministic Phi.
struct IsometryCheck {
  double sample_variance = 0.0;
  double predicted = 0.0;
  double relative_error = 0.0;
};
IsometryCheck ito_isometry_check(const ElementaryIntegrand& phi, int n_paths, std::uint64_t seed);

struct HolderEstimate {
  double exponent = 0.0;  // NaN when degenerate
  bool degenerate = false;
  std::vector<int> levels;
  std::vector<double> max_increments;  // S(m)
};

/// Given x on the grid j 2^{-m_max}, j = 0..2^{m_max}, computes
/// S(m) = max_j ||x((j+1) 2^{-m}) - x(j 2^{-m})|| for m = m_min..m_max and
/// returns the least-squares slope of log2 S(m) against -m.
HolderEstimate holder_exponent(std::span<const Vector> finest, int m_min, int m_max,
                               const std::function<double(const Vector&)>& norm);
HolderEstimate holder_exponent(std::span<const double> finest, int m_min, int m_max);

/// Standard Brownian motion on j 2^{-m}, j = 0..2^m, keyed by seed.
std::vector<double> brownian_path(std::uint64_t seed, int m);

}  // namespace wmspde
