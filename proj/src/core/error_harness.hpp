#pragma once

#include "core/timestepper.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wmspde {

enum class Axis { space, time };

const char* to_string(Axis axis);
Axis parse_axis(const std::string& text);

/// e = sqrt( (A^T a - a_ref)^T M_ref (A^T a - a_ref) / (a_ref^T M_ref a_ref) ).
/// `restriction` maps the reference mesh to the coarse one (coarse x fine);
/// nullptr means both live on the same mesh.
double relative_error(const Vector& alpha_coarse, const Vector& alpha_ref, const SparseMatrix* restriction,
                      const SparseMatrix& mass_ref);

struct TheoreticalRates {
  double space = 0.0;
  double time = 0.0;
};

/// space = min(2, 2 gamma + 1 - d/2), time = min(space / 2, beta).
TheoreticalRates theoretical_rates(double gamma, int dim, double beta = 1.0);

/// Least-squares slope of log2(error) against log2(resolution); needs at
/// least three points with positive entries.
double fit_rate(std::span<const std::pair<double, double>> points);

/// Levels whose mean error sits below this are flagged as saturated.
constexpr double kSaturationThreshold = 10.0 * SystemFactor::kResidualTolerance;

struct LadderEntry {
  int level = 0;              // mesh level of the coarse run
  std::int64_t time_steps = 0;
  double resolution = 0.0;    // h (space axis) or dt (time axis)
  std::vector<double> path_errors;
  double mean_error = 0.0;
  bool saturated = false;
  bool is_reference = false;
};

struct ConvergenceReport {
  Axis axis = Axis::space;
  int dim = 1;
  double gamma = 0.5;
  std::vector<LadderEntry> levels;  // coarse to fine
  double fitted_rate = 0.0;         // NaN when fewer than three usable levels
  std::vector<double> path_fitted_rates;
  double theoretical_rate = 0.0;
  int paths = 0;
  std::vector<std::uint64_t> seeds;
};

struct Reference {
  int level = 9;
  int time_log2 = 14;
};

/// Coupled study: for each path, one reference run and every ladder entry on
/// the same noise. On the space axis the ladder lists mesh levels (time steps
/// from base.time_steps); on the time axis it lists log2 of the step counts
/// (mesh level from base.space_level). Paths run on `workers` threads.
ConvergenceReport convergence_study(const SchemeConfig& base, Axis axis, std::span<const int> ladder,
                                    Reference reference, int n_paths, OperatorCache& cache, int workers = 1,
                                    double beta = 1.0);

/// Number of consecutive ladder pairs along which the mean error does not increase.
int monotone_pairs(const ConvergenceReport& report);

/// Seed of path `index` under a master seed.
std::uint64_t path_seed(std::uint64_t master_seed, int index);

}  // namespace wmspde
