#include "core/error_harness.hpp"

#include "core/error.hpp"
#include "core/keyed_rng.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace wmspde {

const char* to_string(Axis axis) { return axis == Axis::space ? "space" : "time"; }

Axis parse_axis(const std::string& text) {
  if (text == "space") return Axis::space;
  if (text == "time") return Axis::time;
  fail(ErrorCode::config, fmt::format("unknown axis '{}', expected 'space' or 'time'", text));
}

double relative_error(const Vector& alpha_coarse, const Vector& alpha_ref, const SparseMatrix* restriction,
                      const SparseMatrix& mass_ref) {
  require(mass_ref.rows() == alpha_ref.size(), ErrorCode::dimension_mismatch, "relative_error: reference size mismatch");
  Vector prolonged;
  if (restriction) {
    require(restriction->rows() == alpha_coarse.size() && restriction->cols() == alpha_ref.size(),
            ErrorCode::dimension_mismatch, "relative_error: restriction does not match the vectors");
    prolonged = restriction->transpose() * alpha_coarse;
  } else {
    require(alpha_coarse.size() == alpha_ref.size(), ErrorCode::dimension_mismatch,
            "relative_error: vectors differ in size and no restriction was given");
    prolonged = alpha_coarse;
  }
  const double denom = alpha_ref.dot(mass_ref * alpha_ref);
  require(denom > 0.0, ErrorCode::degenerate_reference, "relative_error: reference solution has zero norm");
  const Vector diff = prolonged - alpha_ref;
  return std::sqrt(std::max(0.0, diff.dot(mass_ref * diff)) / denom);
}

TheoreticalRates theoretical_rates(double gamma, int dim, double beta) {
  TheoreticalRates rates;
  rates.space = std::min(2.0, 2.0 * gamma + 1.0 - dim / 2.0);
  rates.time = std::min(rates.space / 2.0, beta);
  return rates;
}

double fit_rate(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 3, ErrorCode::insufficient_data,
          fmt::format("fit_rate: need at least 3 points, got {}", points.size()));
  double sx = 0.0, sy = 0.0;
  for (const auto& [res, err] : points) {
    require(res > 0.0 && err > 0.0, ErrorCode::domain, "fit_rate: resolutions and errors must be positive");
    sx += std::log2(res);
    sy += std::log2(err);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [res, err] : points) {
    const double dx = std::log2(res) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log2(err) - my);
  }
  require(sxx > 0.0, ErrorCode::insufficient_data, "fit_rate: resolutions are all equal");
  return sxy / sxx;
}

std::uint64_t path_seed(std::uint64_t master_seed, int index) {
  return mix_seed(master_seed, static_cast<std::uint64_t>(index));
}

int monotone_pairs(const ConvergenceReport& report) {
  int count = 0;
  for (std::size_t i = 1; i < report.levels.size(); ++i)
    if (report.levels[i].mean_error <= report.levels[i - 1].mean_error) ++count;
  return count;
}

namespace {

double usable_fit(const std::vector<LadderEntry>& levels, const std::vector<double>& errors) {
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (!levels[i].is_reference && !levels[i].saturated && errors[i] > 0.0)
      points.emplace_back(levels[i].resolution, errors[i]);
  if (points.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  return fit_rate(points);
}

}  // namespace

ConvergenceReport convergence_study(const SchemeConfig& base, Axis axis, std::span<const int> ladder,
                                    Reference reference, int n_paths, OperatorCache& cache, int workers, double beta) {
  base.validate();
  require(n_paths >= 1, ErrorCode::config, "convergence_study: need at least one path");
  require(reference.time_log2 >= 0 && reference.time_log2 <= 40, ErrorCode::config,
          "convergence_study: reference time resolution out of range");
  const std::int64_t ref_steps = std::int64_t{1} << reference.time_log2;

  SchemeConfig ref_config = base;
  ref_config.space_level = reference.level;
  ref_config.time_steps = ref_steps;
  ref_config.validate();

  ConvergenceReport report;
  report.axis = axis;
  report.dim = base.dim;
  report.gamma = base.gamma;
  report.paths = n_paths;
  const auto rates = theoretical_rates(base.gamma, base.dim, beta);
  report.theoretical_rate = axis == Axis::space ? rates.space : rates.time;

  for (int entry : ladder) {
    LadderEntry e;
    if (axis == Axis::space) {
      e.level = entry;
      e.time_steps = base.time_steps;
    } else {
      e.level = base.space_level;
      require(entry >= 0 && entry <= 40, ErrorCode::config, "convergence_study: time ladder entry out of range");
      e.time_steps = std::int64_t{1} << entry;
    }
    require(e.level <= reference.level, ErrorCode::config,
            fmt::format("convergence_study: ladder level {} is finer than the reference level {}", e.level, reference.level));
    require(e.time_steps <= ref_steps && ref_steps % e.time_steps == 0, ErrorCode::config,
            fmt::format("convergence_study: {} steps do not divide the {} reference steps", e.time_steps, ref_steps));
    e.is_reference = e.level == reference.level && e.time_steps == ref_steps;
    report.levels.push_back(std::move(e));
  }
  for (std::size_t i = 1; i < report.levels.size(); ++i)
    require(axis == Axis::space ? report.levels[i].level > report.levels[i - 1].level
                                : report.levels[i].time_steps > report.levels[i - 1].time_steps,
            ErrorCode::config, "convergence_study: ladder must be strictly ordered from coarse to fine");

  // Build every shared operator up front; workers only read them.
  const auto ref_ctx = cache.level(base.dim, reference.level);
  const Discretization ref_disc = cache.discretization(base.dim, reference.level, ref_steps, base.gamma, base.k);
  std::vector<Discretization> discs;
  std::vector<std::shared_ptr<const SparseMatrix>> restrictions;
  for (auto& e : report.levels) {
    discs.push_back(cache.discretization(base.dim, e.level, e.time_steps, base.gamma, base.k));
    restrictions.push_back(e.level == reference.level ? nullptr : cache.restriction(base.dim, e.level, reference.level));
    e.resolution = axis == Axis::space ? discs.back().mesh().h : discs.back().dt();
  }

  std::vector<std::vector<double>> errors(static_cast<std::size_t>(n_paths),
                                          std::vector<double>(report.levels.size(), 0.0));
  report.seeds.resize(static_cast<std::size_t>(n_paths));
  for (int p = 0; p < n_paths; ++p) report.seeds[static_cast<std::size_t>(p)] = path_seed(base.master_seed, p);

  auto run_path = [&](int p) {
    const std::uint64_t seed = report.seeds[static_cast<std::size_t>(p)];
    const NoiseStream stream(seed, reference.level, ref_steps, ref_ctx->mesh.vertex_count());
    const ScalarDriver driver(seed, base.n_modes);
    std::vector<EvolveTarget> targets(report.levels.size() + 1);
    targets[0].disc = &ref_disc;
    targets[0].mode = base.mode;
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
      targets[i + 1].disc = &discs[i];
      targets[i + 1].restriction = restrictions[i].get();
      targets[i + 1].mode = base.mode;
    }
    const auto results = evolve_coupled(stream, ref_ctx->ops.mass_factor(), driver, targets);
    for (std::size_t i = 0; i < report.levels.size(); ++i)
      errors[static_cast<std::size_t>(p)][i] =
          relative_error(results[i + 1].final.alpha, results[0].final.alpha, restrictions[i].get(), ref_ctx->ops.mass());
  };

  const int threads = std::max(1, std::min(workers, n_paths));
  if (threads == 1) {
    for (int p = 0; p < n_paths; ++p) run_path(p);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int p = next++; p < n_paths; p = next++) run_path(p);
        } catch (...) {
          failures[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    auto& e = report.levels[i];
    double sum = 0.0;
    for (int p = 0; p < n_paths; ++p) {
      e.path_errors.push_back(errors[static_cast<std::size_t>(p)][i]);
      sum += errors[static_cast<std::size_t>(p)][i];
    }
    e.mean_error = sum / n_paths;
    e.saturated = !e.is_reference && e.mean_error < kSaturationThreshold;
  }
  std::vector<double> means;
  for (const auto& e : report.levels) means.push_back(e.mean_error);
  report.fitted_rate = usable_fit(report.levels, means);
  for (int p = 0; p < n_paths; ++p) report.path_fitted_rates.push_back(usable_fit(report.levels, errors[static_cast<std::size_t>(p)]));
  return report;
}

}  // namespace wmspde
