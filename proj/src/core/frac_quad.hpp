#pragma once

#include "core/mesh_fem.hpp"

#include <memory>
#include <string>
#include <vector>

namespace wmspde {

/// Sinc quadrature for the negative fractional power of the pencil (M, K):
///
///   Q_k^{-gamma} = (k sin(pi gamma) / pi) sum_{j=-M}^{N} e^{(1-gamma) y_j} (e^{y_j} I + A)^{-1},
///   y_j = j k,  N = ceil(pi^2 / (2 gamma k^2)),  M = ceil(pi^2 / (2 (1 - gamma) k^2)).
///
/// gamma = 0 and gamma = 1 are sentinels for the identity and the exact
/// inverse; their node lists are empty.
struct QuadratureSpec {
  enum class Kind { identity, full_inverse, sinc };

  Kind kind = Kind::sinc;
  double gamma = 0.5;
  double k = 0.5;
  int n_pos = 0;
  int n_neg = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::string to_json() const;
};

QuadratureSpec make_spec(double gamma, double k);

/// (k sin(pi gamma)/pi) sum_j e^{(1-gamma) y_j} / (e^{y_j} + a); the
/// sentinels return 1 and 1/a.
double scalar_qgamma(const QuadratureSpec& spec, double a);

/// Coupling k <= -(pi^2/2) (2 gamma + 1)^{-1} / log(h) under which the
/// quadrature error does not limit the spatial rate. Advisory only.
double max_k_for_mesh(double gamma, double h);

/// Cached factorizations of the shifted pencils e^{y_j} M + K for one
/// (level, k, gamma). apply() is const and reentrant.
class QuadratureOperator {
 public:
  QuadratureOperator(QuadratureSpec spec, const FemOperators& ops);
  ~QuadratureOperator();
  QuadratureOperator(QuadratureOperator&&) noexcept;
  QuadratureOperator& operator=(QuadratureOperator&&) noexcept;

  const QuadratureSpec& spec() const { return spec_; }

  /// g is a load vector (one entry per vertex). Returns nodal coefficients:
  /// sum_j w_j (e^{y_j} M + K)^{-1} g for gamma in (0,1), K^{-1} g for
  /// gamma = 1, and M^{-1} g for gamma = 0.
  Vector apply(const Vector& g) const;

 private:
  struct Factor;
  QuadratureSpec spec_;
  Index size_;
  std::vector<std::unique_ptr<Factor>> factors_;
};

Vector apply_qgamma(const QuadratureSpec& spec, const FemOperators& ops, const Vector& g);

}  // namespace wmspde
