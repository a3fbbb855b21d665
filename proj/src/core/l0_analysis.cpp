#include "core/l0_analysis.hpp"

#include "core/error.hpp"
#include "core/error_harness.hpp"
#include "core/keyed_rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace wmspde {

double dp_metric(std::span<const double> samples, double p) {
  require(!samples.empty(), ErrorCode::insufficient_data, "dp_metric: empty sample");
  require(p >= 1.0, ErrorCode::domain, fmt::format("dp_metric: p = {} must be at least 1", p));
  double sum = 0.0;
  for (double s : samples) {
    require(s >= 0.0, ErrorCode::domain, "dp_metric: distances must be nonnegative");
    sum += std::min(1.0, std::pow(s, p));
  }
  return std::pow(sum / static_cast<double>(samples.size()), 1.0 / p);
}

const char* to_string(IntegrandFamily family) {
  switch (family) {
    case IntegrandFamily::deterministic_const:
      return "deterministic_const";
    case IntegrandFamily::wiener_functional:
      return "wiener_functional";
    case IntegrandFamily::heavy_tailed_scale:
      return "heavy_tailed_scale";
  }
  return "?";
}

IntegrandFamily parse_family(const std::string& text) {
  for (auto f : {IntegrandFamily::deterministic_const, IntegrandFamily::wiener_functional,
                 IntegrandFamily::heavy_tailed_scale})
    if (text == to_string(f)) return f;
  fail(ErrorCode::config, fmt::format("unknown integrand family '{}'", text));
}

namespace {

struct PathStats {
  double sup_pow = 0.0;    // sup_t ||X(t)||^p
  double quadratic = 0.0;  // int ||Phi||^2
};

// Runs the elementary integral for one path, optionally recording the path.
PathStats integrate(const ElementaryIntegrand& phi, const KeyedNormal& wiener, const KeyedNormal& scale_stream,
                    std::uint64_t path, double p, IntegralPath* record) {
  require(phi.dim_q >= 1 && phi.steps >= 1, ErrorCode::domain, "elementary integrand needs q >= 1 and N >= 1");
  const auto q = static_cast<std::size_t>(phi.dim_q);
  const double dt = 1.0 / phi.steps;
  const double sqrt_dt = std::sqrt(dt);
  const std::uint64_t first = static_cast<std::uint64_t>(phi.block) * q;
  // Keys: step = path * (steps + 1) + n keeps paths disjoint for a fixed partition.
  const std::uint64_t base = path * static_cast<std::uint64_t>(phi.steps + 1);

  double heavy = 1.0;
  if (phi.family == IntegrandFamily::heavy_tailed_scale) {
    const double g = scale_stream(path, static_cast<std::uint64_t>(phi.block));
    heavy = std::exp(g * g);
  }

  std::vector<double> w(q, 0.0), x(q, 0.0), dw(q, 0.0);
  PathStats stats;
  if (record) {
    record->values.assign(1, Vector::Zero(static_cast<Index>(q)));
    record->values.reserve(static_cast<std::size_t>(phi.steps) + 1);
  }
  double sup_sq = 0.0;
  for (int n = 0; n < phi.steps; ++n) {
    double c = phi.scale;
    switch (phi.family) {
      case IntegrandFamily::deterministic_const:
        break;
      case IntegrandFamily::wiener_functional:
        c *= w[0];
        break;
      case IntegrandFamily::heavy_tailed_scale:
        c *= heavy;
        break;
    }
    wiener.fill(base + static_cast<std::uint64_t>(n), first, std::span<double>(dw));
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      dw[i] *= sqrt_dt;
      x[i] += c * dw[i];
      w[i] += dw[i];
      norm_sq += x[i] * x[i];
    }
    stats.quadratic += static_cast<double>(q) * c * c * dt;
    sup_sq = std::max(sup_sq, norm_sq);
    if (record) record->values.emplace_back(Eigen::Map<const Vector>(x.data(), static_cast<Index>(q)));
  }
  stats.sup_pow = std::pow(sup_sq, p / 2.0);
  if (record) {
    record->sup_norm = std::sqrt(sup_sq);
    record->quadratic_variation = stats.quadratic;
  }
  return stats;
}

KeyedNormal wiener_stream(std::uint64_t seed) { return KeyedNormal(seed, StreamTag::l0_wiener); }
KeyedNormal scale_stream(std::uint64_t seed) { return KeyedNormal(seed, StreamTag::l0_scale); }

template <class Estimate>
BdgEstimate with_rerun(Estimate&& estimate, int n_paths) {
  BdgEstimate est = estimate(n_paths);
  if (est.rhs == 0.0 && est.lhs > 0.0) {
    est = estimate(10 * n_paths);
    est.alarm = est.rhs == 0.0 && est.lhs > 0.0;
    if (est.alarm) est.ratio = std::numeric_limits<double>::infinity();
  }
  return est;
}

}  // namespace

IntegralPath ito_integral_elementary(const ElementaryIntegrand& phi, std::uint64_t seed, std::uint64_t path) {
  IntegralPath out;
  integrate(phi, wiener_stream(seed), scale_stream(seed), path, 2.0, &out);
  return out;
}

BdgEstimate bdg_ratio(const ElementaryIntegrand& phi, double p, int n_paths, std::uint64_t seed) {
  require(p > 0.0, ErrorCode::domain, "bdg_ratio: p must be positive");
  require(n_paths >= 1, ErrorCode::domain, "bdg_ratio: need at least one path");
  const auto w = wiener_stream(seed);
  const auto s = scale_stream(seed);
  return with_rerun(
      [&](int paths) {
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < paths; ++i) {
          const auto stats = integrate(phi, w, s, static_cast<std::uint64_t>(i), p, nullptr);
          lhs += std::min(1.0, stats.sup_pow);
          rhs += std::min(1.0, stats.quadratic);
        }
        BdgEstimate est;
        est.paths = paths;
        est.lhs = lhs / paths;
        est.rhs = std::pow(rhs / paths, p / 2.0);
        est.ratio = est.rhs > 0.0 ? est.lhs / est.rhs : 0.0;
        return est;
      },
      n_paths);
}

BdgEstimate bdg_sum_ratio(std::span<const ElementaryIntegrand> phis, double p, int n_paths, std::uint64_t seed) {
  require(p >= 2.0, ErrorCode::domain, "bdg_sum_ratio: p must be at least 2");
  require(n_paths >= 1, ErrorCode::domain, "bdg_sum_ratio: need at least one path");
  const auto w = wiener_stream(seed);
  const auto s = scale_stream(seed);
  return with_rerun(
      [&](int paths) {
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < paths; ++i) {
          double sum_sup = 0.0, sum_q = 0.0;
          for (const auto& phi : phis) {
            const auto stats = integrate(phi, w, s, static_cast<std::uint64_t>(i), p, nullptr);
            sum_sup += stats.sup_pow;
            sum_q += std::pow(stats.quadratic, p / 2.0);
          }
          lhs += std::min(1.0, sum_sup);
          rhs += std::min(1.0, sum_q);
        }
        BdgEstimate est;
        est.paths = paths;
        est.lhs = lhs / paths;
        est.rhs = rhs / paths;
        est.ratio = est.rhs > 0.0 ? est.lhs / est.rhs : 0.0;
        return est;
      },
      n_paths);
}

IsometryCheck ito_isometry_check(const ElementaryIntegrand& phi, int n_paths, std::uint64_t seed) {
  require(phi.family == IntegrandFamily::deterministic_const, ErrorCode::domain,
          "ito_isometry_check: closed form needs a deterministic integrand");
  require(n_paths >= 2, ErrorCode::insufficient_data, "ito_isometry_check: need at least two paths");
  const auto w = wiener_stream(seed);
  const auto s = scale_stream(seed);
  double sum = 0.0, sum_sq = 0.0;
  IntegralPath path;
  for (int i = 0; i < n_paths; ++i) {
    integrate(phi, w, s, static_cast<std::uint64_t>(i), 2.0, &path);
    const double x = path.values.back()(0);
    sum += x;
    sum_sq += x * x;
  }
  IsometryCheck check;
  const double n = n_paths;
  check.sample_variance = (sum_sq - sum * sum / n) / (n - 1.0);
  check.predicted = phi.scale * phi.scale;
  check.relative_error = std::abs(check.sample_variance - check.predicted) / check.predicted;
  return check;
}

HolderEstimate holder_exponent(std::span<const Vector> finest, int m_min, int m_max,
                               const std::function<double(const Vector&)>& norm) {
  require(m_max - m_min + 1 >= 4, ErrorCode::insufficient_data,
          fmt::format("holder_exponent: need at least 4 dyadic levels, got {}..{}", m_min, m_max));
  require(m_min >= 0, ErrorCode::domain, "holder_exponent: m_min must be nonnegative");
  const std::size_t expected = (std::size_t{1} << m_max) + 1;
  require(finest.size() == expected, ErrorCode::dimension_mismatch,
          fmt::format("holder_exponent: expected {} samples on the 2^-{} grid, got {}", expected, m_max, finest.size()));
  HolderEstimate est;
  std::vector<std::pair<double, double>> points;
  for (int m = m_min; m <= m_max; ++m) {
    const std::size_t stride = std::size_t{1} << (m_max - m);
    double s = 0.0;
    for (std::size_t j = 0; j + stride < finest.size(); j += stride) s = std::max(s, norm(finest[j + stride] - finest[j]));
    est.levels.push_back(m);
    est.max_increments.push_back(s);
    if (s <= 0.0) est.degenerate = true;
    // log2 S against -m: feed resolution 2^-m so the slope is the exponent.
    points.emplace_back(std::ldexp(1.0, -m), s);
  }
  if (est.degenerate) {
    est.exponent = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.exponent = fit_rate(points);
  return est;
}

HolderEstimate holder_exponent(std::span<const double> finest, int m_min, int m_max) {
  std::vector<Vector> wrapped;
  wrapped.reserve(finest.size());
  for (double v : finest) wrapped.push_back(Vector::Constant(1, v));
  return holder_exponent(wrapped, m_min, m_max, [](const Vector& v) { return std::abs(v(0)); });
}

std::vector<double> brownian_path(std::uint64_t seed, int m) {
  require(m >= 0 && m <= 30, ErrorCode::domain, "brownian_path: level out of range");
  const KeyedNormal normal(seed, StreamTag::l0_wiener);
  const std::size_t n = std::size_t{1} << m;
  const double sd = std::sqrt(std::ldexp(1.0, -m));
  std::vector<double> w(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) w[j + 1] = w[j] + sd * normal(j, 0);
  return w;
}

}  // namespace wmspde
