#include "core/timestepper.hpp"

#include "core/error.hpp"

#include <fmt/format.h>

namespace wmspde {

bool gamma_admissible(double gamma, int dim) {
  return gamma >= 0.0 && gamma <= 1.0 && gamma > dim / 4.0 - 0.5;
}

void SchemeConfig::validate() const {
  require(dim == 1 || dim == 2, ErrorCode::config, fmt::format("dim must be 1 or 2, got {}", dim));
  require(gamma_admissible(gamma, dim), ErrorCode::config,
          fmt::format("gamma = {} is not admissible in d = {} (need gamma in ({}, 1] and [0, 1])", gamma, dim,
                      dim / 4.0 - 0.5));
  require(k > 0.0, ErrorCode::config, "quadrature resolution k must be positive");
  const int guard = dim == 1 ? kMaxLevel1d : kMaxLevel2d;
  require(space_level >= 0 && space_level <= guard, ErrorCode::config,
          fmt::format("space level {} outside [0, {}] for d = {}", space_level, guard, dim));
  require(time_steps >= 1, ErrorCode::config, "time_steps must be positive");
  require(n_modes >= 1, ErrorCode::config, "n_modes must be positive");
}

Discretization::Discretization(std::shared_ptr<const LevelContext> level, std::shared_ptr<const SystemFactor> system,
                               std::shared_ptr<const QuadratureOperator> quadrature)
    : level_(std::move(level)), system_(std::move(system)), quadrature_(std::move(quadrature)) {}

std::shared_ptr<const LevelContext> OperatorCache::level(int dim, int level) {
  std::lock_guard lock(mutex_);
  auto& slot = levels_[{dim, level}];
  if (!slot) slot = std::make_shared<const LevelContext>(build_mesh(dim, level));
  return slot;
}

std::shared_ptr<const SystemFactor> OperatorCache::system(int dim, int lvl, std::int64_t time_steps) {
  auto ctx = level(dim, lvl);
  std::lock_guard lock(mutex_);
  auto& slot = systems_[{dim, lvl, time_steps}];
  if (!slot) slot = std::make_shared<const SystemFactor>(ctx->ops, 1.0 / static_cast<double>(time_steps));
  return slot;
}

std::shared_ptr<const QuadratureOperator> OperatorCache::quadrature(int dim, int lvl, double gamma, double k) {
  auto ctx = level(dim, lvl);
  std::lock_guard lock(mutex_);
  auto& slot = quadratures_[{dim, lvl, gamma, k}];
  if (!slot) slot = std::make_shared<const QuadratureOperator>(make_spec(gamma, k), ctx->ops);
  return slot;
}

std::shared_ptr<const SparseMatrix> OperatorCache::restriction(int dim, int coarse_level, int fine_level) {
  auto coarse = level(dim, coarse_level);
  auto fine = level(dim, fine_level);
  std::lock_guard lock(mutex_);
  auto& slot = restrictions_[{dim, coarse_level, fine_level}];
  if (!slot) slot = std::make_shared<const SparseMatrix>(restriction_matrix(coarse->mesh, fine->mesh));
  return slot;
}

Discretization OperatorCache::discretization(int dim, int lvl, std::int64_t time_steps, double gamma, double k) {
  return Discretization(level(dim, lvl), system(dim, lvl, time_steps), quadrature(dim, lvl, gamma, k));
}

PathState step(const PathState& state, const Discretization& disc, double b_n, const ProjectedIncrement& g_n) {
  const auto& ops = disc.ops();
  require(state.alpha.size() == ops.size(), ErrorCode::dimension_mismatch, "step: state does not match mesh");
  require(g_n.values.size() == ops.size(), ErrorCode::dimension_mismatch, "step: increment does not match mesh");
  Vector rhs = ops.mass() * state.alpha;
  if (disc.gamma() == 0.0)
    rhs += b_n * g_n.values;
  else
    rhs += b_n * (ops.mass() * disc.quadrature().apply(g_n.values));
  PathState next;
  next.alpha = disc.system().solve(rhs);
  next.n = state.n + 1;
  next.t = static_cast<double>(next.n) * disc.dt();
  return next;
}

namespace {

struct TargetRun {
  const EvolveTarget* target = nullptr;
  std::int64_t steps = 0;
  std::int64_t ratio = 0;
  std::int64_t snapshot_every = 0;
  PathState state;      // colored coefficients (per_step) or raw recursion (final_time)
  Vector homogeneous;   // final_time with nonzero initial data: R^n alpha_0
  bool has_homogeneous = false;
  EvolveResult result;
};

Vector read_out(const TargetRun& run) {
  const auto& disc = *run.target->disc;
  if (run.target->mode == StepMode::per_step) return run.state.alpha;
  Vector alpha = disc.gamma() == 0.0 ? run.state.alpha
                                     : disc.quadrature().apply(disc.ops().mass() * run.state.alpha);
  if (run.has_homogeneous) alpha += run.homogeneous;
  return alpha;
}

}  // namespace

std::vector<EvolveResult> evolve_coupled(const NoiseStream& stream, const SparseMatrix& fine_mass_factor,
                                         const ScalarDriver& driver, std::span<const EvolveTarget> targets) {
  const std::int64_t fine_steps = stream.fine_steps();
  std::vector<TargetRun> runs;
  runs.reserve(targets.size());
  std::map<std::int64_t, Vector> accumulators;
  for (const auto& target : targets) {
    require(target.disc != nullptr, ErrorCode::internal, "evolve: target without discretization");
    const auto& disc = *target.disc;
    const double steps_real = 1.0 / disc.dt();
    const auto steps = static_cast<std::int64_t>(std::llround(steps_real));
    require(steps >= 1 && fine_steps % steps == 0, ErrorCode::domain,
            fmt::format("evolve: {} time steps do not divide the {} reference steps", steps, fine_steps));
    const Index n = disc.ops().size();
    if (target.restriction) {
      require(target.restriction->rows() == n && target.restriction->cols() == stream.vertex_count(),
              ErrorCode::dimension_mismatch, "evolve: restriction matrix does not map the fine mesh to the target mesh");
    } else {
      require(n == stream.vertex_count(), ErrorCode::dimension_mismatch,
              "evolve: target mesh differs from the stream mesh but no restriction was given");
    }
    TargetRun run;
    run.target = &target;
    run.steps = steps;
    run.ratio = fine_steps / steps;
    const bool nonzero_initial = target.initial.size() > 0 && target.initial.cwiseAbs().maxCoeff() > 0.0;
    if (target.initial.size() > 0)
      require(target.initial.size() == n, ErrorCode::dimension_mismatch, "evolve: initial data does not match mesh");
    run.state.alpha = Vector::Zero(n);
    if (nonzero_initial) {
      if (target.mode == StepMode::per_step) {
        run.state.alpha = target.initial;
      } else {
        run.homogeneous = target.initial;
        run.has_homogeneous = true;
      }
    }
    if (target.snapshot_log2 >= 0) {
      const std::int64_t count = std::int64_t{1} << target.snapshot_log2;
      require(steps % count == 0, ErrorCode::domain,
              fmt::format("evolve: snapshots at 2^-{} need the step count {} to be a multiple", target.snapshot_log2, steps));
      run.snapshot_every = steps / count;
      run.result.snapshots.reserve(static_cast<std::size_t>(count + 1));
    }
    accumulators.try_emplace(run.ratio, Vector::Zero(stream.vertex_count()));
    runs.push_back(std::move(run));
  }

  for (auto& run : runs)
    if (run.snapshot_every > 0) run.result.snapshots.push_back(read_out(run));

  Vector scratch;
  Vector increment;
  ProjectedIncrement coarse;
  for (std::int64_t n = 0; n < fine_steps; ++n) {
    fine_increment_into(stream, n, fine_mass_factor, scratch, increment);
    for (auto& [ratio, acc] : accumulators) acc += increment;

    for (auto& run : runs) {
      if ((n + 1) % run.ratio != 0) continue;
      const auto& target = *run.target;
      const auto& disc = *target.disc;
      const Vector& acc = accumulators.at(run.ratio);
      coarse.values = target.restriction ? Vector(*target.restriction * acc) : acc;
      if (target.noise_scale != 1.0) coarse.values *= target.noise_scale;
      coarse.step_begin = n + 1 - run.ratio;
      coarse.step_end = n + 1;
      coarse.level = disc.mesh().level;
      const std::int64_t coarse_step = n / run.ratio;
      const double b_n = driver.b(static_cast<double>(coarse_step) / static_cast<double>(run.steps));

      if (target.mode == StepMode::per_step) {
        run.state = step(run.state, disc, b_n, coarse);
      } else {
        // Raw recursion: (M + dt T) beta^{n+1} = M beta^n + b_n g_n.
        const auto& mass = disc.ops().mass();
        Vector rhs = mass * run.state.alpha;
        rhs += b_n * coarse.values;
        run.state.alpha = disc.system().solve(rhs);
        run.state.n += 1;
        run.state.t = static_cast<double>(run.state.n) * disc.dt();
        if (run.has_homogeneous) run.homogeneous = disc.system().solve(mass * run.homogeneous);
      }
      if (run.snapshot_every > 0 && (coarse_step + 1) % run.snapshot_every == 0)
        run.result.snapshots.push_back(read_out(run));
    }
    for (auto& [ratio, acc] : accumulators)
      if ((n + 1) % ratio == 0) acc.setZero();
  }

  std::vector<EvolveResult> results;
  results.reserve(runs.size());
  for (auto& run : runs) {
    run.result.final.alpha = read_out(run);
    run.result.final.n = run.state.n;
    run.result.final.t = run.state.t;
    results.push_back(std::move(run.result));
  }
  return results;
}

namespace {

EvolveResult evolve_single(StepMode mode, const Discretization& disc, const NoiseStream& stream,
                           const SparseMatrix& fine_mass_factor, const ScalarDriver& driver,
                           const SparseMatrix* restriction, const Vector& initial, int snapshot_log2) {
  EvolveTarget target;
  target.disc = &disc;
  target.restriction = restriction;
  target.mode = mode;
  target.initial = initial;
  target.snapshot_log2 = snapshot_log2;
  auto results = evolve_coupled(stream, fine_mass_factor, driver, std::span<const EvolveTarget>(&target, 1));
  return std::move(results.front());
}

}  // namespace

EvolveResult evolve(const Discretization& disc, const NoiseStream& stream, const SparseMatrix& fine_mass_factor,
                    const ScalarDriver& driver, const SparseMatrix* restriction, const Vector& initial,
                    int snapshot_log2) {
  return evolve_single(StepMode::per_step, disc, stream, fine_mass_factor, driver, restriction, initial, snapshot_log2);
}

EvolveResult evolve_fast(const Discretization& disc, const NoiseStream& stream, const SparseMatrix& fine_mass_factor,
                         const ScalarDriver& driver, const SparseMatrix* restriction, const Vector& initial,
                         int snapshot_log2) {
  return evolve_single(StepMode::final_time, disc, stream, fine_mass_factor, driver, restriction, initial,
                       snapshot_log2);
}

EvolveResult evolve(const SchemeConfig& config, const NoiseStream& stream, const ScalarDriver& driver,
                    OperatorCache& cache) {
  config.validate();
  const auto fine = cache.level(config.dim, stream.fine_level());
  require(fine->mesh.vertex_count() == stream.vertex_count(), ErrorCode::dimension_mismatch,
          "evolve: stream vertex count does not match its fine level");
  const Discretization disc = cache.discretization(config.dim, config.space_level, config.time_steps, config.gamma,
                                                   config.k);
  const SparseMatrix* restriction = nullptr;
  std::shared_ptr<const SparseMatrix> a;
  if (config.space_level != stream.fine_level()) {
    a = cache.restriction(config.dim, config.space_level, stream.fine_level());
    restriction = a.get();
  }
  return evolve_single(config.mode, disc, stream, fine->ops.mass_factor(), driver, restriction, config.initial, -1);
}

}  // namespace wmspde
