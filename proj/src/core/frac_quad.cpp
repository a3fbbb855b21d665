#include "core/frac_quad.hpp"

#include "core/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace wmspde {

namespace {
constexpr double kPi = std::numbers::pi;
}

QuadratureSpec make_spec(double gamma, double k) {
  require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::domain, fmt::format("quadrature: gamma {} outside [0, 1]", gamma));
  require(k > 0.0 && std::isfinite(k), ErrorCode::domain, fmt::format("quadrature: resolution k = {} must be positive", k));
  QuadratureSpec spec;
  spec.gamma = gamma;
  spec.k = k;
  if (gamma == 0.0) {
    spec.kind = QuadratureSpec::Kind::identity;
    return spec;
  }
  if (gamma == 1.0) {
    spec.kind = QuadratureSpec::Kind::full_inverse;
    return spec;
  }
  spec.kind = QuadratureSpec::Kind::sinc;
  spec.n_pos = static_cast<int>(std::ceil(kPi * kPi / (2.0 * gamma * k * k)));
  spec.n_neg = static_cast<int>(std::ceil(kPi * kPi / (2.0 * (1.0 - gamma) * k * k)));
  const double prefactor = k * std::sin(kPi * gamma) / kPi;
  const std::size_t count = static_cast<std::size_t>(spec.n_pos + spec.n_neg + 1);
  spec.nodes.reserve(count);
  spec.weights.reserve(count);
  for (int j = -spec.n_neg; j <= spec.n_pos; ++j) {
    const double y = j * k;
    spec.nodes.push_back(y);
    spec.weights.push_back(prefactor * std::exp((1.0 - gamma) * y));
  }
  return spec;
}

double scalar_qgamma(const QuadratureSpec& spec, double a) {
  require(a > 0.0, ErrorCode::domain, "scalar_qgamma: argument must be positive");
  switch (spec.kind) {
    case QuadratureSpec::Kind::identity:
      return 1.0;
    case QuadratureSpec::Kind::full_inverse:
      return 1.0 / a;
    case QuadratureSpec::Kind::sinc:
      break;
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < spec.nodes.size(); ++j) sum += spec.weights[j] / (std::exp(spec.nodes[j]) + a);
  return sum;
}

double max_k_for_mesh(double gamma, double h) {
  require(h > 0.0 && h < 1.0, ErrorCode::domain, "max_k_for_mesh: h must lie in (0, 1)");
  return -(kPi * kPi / 2.0) / (2.0 * gamma + 1.0) / std::log(h);
}

std::string QuadratureSpec::to_json() const {
  std::string out = fmt::format(R"({{"gamma": {:.17g}, "k": {:.17g}, "kind": "{}", "N": {}, "M": {}, "nodes": [)", gamma, k,
                                kind == Kind::sinc ? "sinc" : (kind == Kind::identity ? "identity" : "full_inverse"),
                                n_pos, n_neg);
  for (std::size_t j = 0; j < nodes.size(); ++j) out += fmt::format("{}{:.17g}", j ? ", " : "", nodes[j]);
  out += R"(], "weights": [)";
  for (std::size_t j = 0; j < weights.size(); ++j) out += fmt::format("{}{:.17g}", j ? ", " : "", weights[j]);
  out += "]}";
  return out;
}

struct QuadratureOperator::Factor {
  SparseMatrix matrix;
  Eigen::SimplicialLLT<SparseMatrix> llt;
};

QuadratureOperator::QuadratureOperator(QuadratureSpec spec, const FemOperators& ops)
    : spec_(std::move(spec)), size_(ops.size()) {
  auto add = [this](SparseMatrix m) {
    auto f = std::make_unique<Factor>();
    f->matrix = std::move(m);
    f->llt.compute(f->matrix);
    require(f->llt.info() == Eigen::Success, ErrorCode::internal,
            "quadrature: shifted pencil factorization failed (matrix should be SPD)");
    factors_.push_back(std::move(f));
  };
  switch (spec_.kind) {
    case QuadratureSpec::Kind::identity:
      add(ops.mass());
      break;
    case QuadratureSpec::Kind::full_inverse:
      add(ops.a2_matrix());
      break;
    case QuadratureSpec::Kind::sinc: {
      factors_.reserve(spec_.nodes.size());
      for (double y : spec_.nodes) add(std::exp(y) * ops.mass() + ops.a2_matrix());
      break;
    }
  }
}

QuadratureOperator::~QuadratureOperator() = default;
QuadratureOperator::QuadratureOperator(QuadratureOperator&&) noexcept = default;
QuadratureOperator& QuadratureOperator::operator=(QuadratureOperator&&) noexcept = default;

Vector QuadratureOperator::apply(const Vector& g) const {
  require(g.size() == size_, ErrorCode::dimension_mismatch,
          fmt::format("quadrature: operand has {} entries, mesh has {} vertices", g.size(), size_));
  if (spec_.kind != QuadratureSpec::Kind::sinc) return factors_.front()->llt.solve(g);
  Vector sum = Vector::Zero(size_);
  for (std::size_t j = 0; j < factors_.size(); ++j) sum.noalias() += spec_.weights[j] * factors_[j]->llt.solve(g);
  return sum;
}

Vector apply_qgamma(const QuadratureSpec& spec, const FemOperators& ops, const Vector& g) {
  return QuadratureOperator(spec, ops).apply(g);
}

}  // namespace wmspde
