#pragma once

#include "core/frac_quad.hpp"
#include "core/mesh_fem.hpp"
#include "core/scalar_driver.hpp"
#include "core/wiener.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace wmspde {

enum class StepMode { per_step, final_time };

struct SchemeConfig {
  int dim = 1;
  double gamma = 0.5;
  double k = 0.5;
  int space_level = 4;
  std::int64_t time_steps = 16;
  StepMode mode = StepMode::final_time;
  /// Nodal values of the initial datum; empty means zero.
  Vector initial;
  std::uint64_t master_seed = 0;
  int n_modes = kDefaultDriverModes;

  double dt() const { return 1.0 / static_cast<double>(time_steps); }
  /// Throws ErrorCode::config unless gamma lies in (d/4 - 1/2, 1] and [0, 1]
  /// and the levels respect the mesh guards.
  void validate() const;
};

bool gamma_admissible(double gamma, int dim);

struct PathState {
  Vector alpha;
  std::int64_t n = 0;
  double t = 0.0;
};

/// Mesh and assembled operators for one (dim, level).
struct LevelContext {
  DyadicMesh mesh;
  FemOperators ops;

  explicit LevelContext(DyadicMesh m) : mesh(std::move(m)), ops(mesh) {}
};

/// Everything one backward Euler path needs at a fixed (level, dt, gamma, k).
/// Immutable; shared read-only between paths.
class Discretization {
 public:
  Discretization(std::shared_ptr<const LevelContext> level, std::shared_ptr<const SystemFactor> system,
                 std::shared_ptr<const QuadratureOperator> quadrature);

  const DyadicMesh& mesh() const { return level_->mesh; }
  const FemOperators& ops() const { return level_->ops; }
  const SystemFactor& system() const { return *system_; }
  const QuadratureOperator& quadrature() const { return *quadrature_; }
  double dt() const { return system_->dt(); }
  double gamma() const { return quadrature_->spec().gamma; }

 private:
  std::shared_ptr<const LevelContext> level_;
  std::shared_ptr<const SystemFactor> system_;
  std::shared_ptr<const QuadratureOperator> quadrature_;
};

/// Thread-safe memo of levels, system factors and quadrature operators.
class OperatorCache {
 public:
  std::shared_ptr<const LevelContext> level(int dim, int level);
  std::shared_ptr<const SystemFactor> system(int dim, int level, std::int64_t time_steps);
  std::shared_ptr<const QuadratureOperator> quadrature(int dim, int level, double gamma, double k);
  std::shared_ptr<const SparseMatrix> restriction(int dim, int coarse_level, int fine_level);
  Discretization discretization(int dim, int level, std::int64_t time_steps, double gamma, double k);

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, std::shared_ptr<const LevelContext>> levels_;
  std::map<std::tuple<int, int, std::int64_t>, std::shared_ptr<const SystemFactor>> systems_;
  std::map<std::tuple<int, int, double, double>, std::shared_ptr<const QuadratureOperator>> quadratures_;
  std::map<std::tuple<int, int, int>, std::shared_ptr<const SparseMatrix>> restrictions_;
};

/// One backward Euler step:
///   (M + dt T) alpha^{n+1} = M alpha^n + b_n M Q(g_n)   for gamma in (0, 1],
///   (M + dt T) alpha^{n+1} = M alpha^n + b_n g_n        for gamma = 0.
PathState step(const PathState& state, const Discretization& disc, double b_n, const ProjectedIncrement& g_n);

/// One simulation sharing the reference noise stream with others.
struct EvolveTarget {
  const Discretization* disc = nullptr;
  /// Restriction from the stream's fine mesh to this target's mesh; nullptr
  /// when the target lives on the fine mesh itself.
  const SparseMatrix* restriction = nullptr;
  StepMode mode = StepMode::final_time;
  Vector initial;
  /// Record alpha at t = j 2^{-snapshot_log2}, j = 0..2^snapshot_log2. Negative disables.
  int snapshot_log2 = -1;
  /// Multiplies every noise increment (used by linearity checks).
  double noise_scale = 1.0;
};

struct EvolveResult {
  PathState final;
  std::vector<Vector> snapshots;
};

/// Advances every target over [0, 1] in a single pass over the fine noise.
/// Each target sees g_n = A * (sum of its fine increments), b_n = b(t_n) at
/// the left end of its own steps.
std::vector<EvolveResult> evolve_coupled(const NoiseStream& stream, const SparseMatrix& fine_mass_factor,
                                         const ScalarDriver& driver, std::span<const EvolveTarget> targets);

/// Per-step coloring of the noise (mode from config ignored).
EvolveResult evolve(const Discretization& disc, const NoiseStream& stream, const SparseMatrix& fine_mass_factor,
                    const ScalarDriver& driver, const SparseMatrix* restriction, const Vector& initial = Vector(),
                    int snapshot_log2 = -1);

/// Runs the recursion on raw noise and colors once at read-out; valid
/// because Q(M^{-1} K) and (I + dt M^{-1} T)^{-1} commute when K = M + T.
EvolveResult evolve_fast(const Discretization& disc, const NoiseStream& stream, const SparseMatrix& fine_mass_factor,
                         const ScalarDriver& driver, const SparseMatrix* restriction, const Vector& initial = Vector(),
                         int snapshot_log2 = -1);

/// Convenience entry point building all operators from a config. The
/// stream's fine mesh must be a refinement of config.space_level.
EvolveResult evolve(const SchemeConfig& config, const NoiseStream& stream, const ScalarDriver& driver,
                    OperatorCache& cache);

}  // namespace wmspde
