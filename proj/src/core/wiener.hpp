#pragma once

#include "core/keyed_rng.hpp"
#include "core/mesh_fem.hpp"

#include <cstdint>

namespace wmspde {

/// Load-vector representation of a projected Wiener increment,
/// values(i) = (phi_i, pi_h (W(t_end) - W(t_begin)))_H on mesh `level`.
struct ProjectedIncrement {
  Vector values;
  int level = 0;
  std::int64_t step_begin = 0;  // fine steps, half open
  std::int64_t step_end = 0;
};

/// Replayable source of projected cylindrical Wiener increments at the
/// reference resolution (fine_level, fine_steps). The normal for
/// (step n, vertex i) is a pure function of (seed, n, i).
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, int fine_level, std::int64_t fine_steps, Index vertex_count);

  std::uint64_t seed() const { return normal_.seed(); }
  int fine_level() const { return fine_level_; }
  std::int64_t fine_steps() const { return fine_steps_; }
  Index vertex_count() const { return vertex_count_; }
  double fine_dt() const { return 1.0 / static_cast<double>(fine_steps_); }

  /// Standard normals rho_n for one fine step.
  void normals(std::int64_t step, Vector& out) const;

 private:
  KeyedNormal normal_;
  int fine_level_;
  std::int64_t fine_steps_;
  Index vertex_count_;
};

/// sqrt(dt_fine) * L_M * rho_n.
ProjectedIncrement fine_increment(const NoiseStream& stream, std::int64_t step, const SparseMatrix& mass_factor);

/// Sum of fine increments over [coarse_step * ratio, (coarse_step + 1) * ratio).
ProjectedIncrement aggregate_increment(const NoiseStream& stream, std::int64_t coarse_step, std::int64_t ratio,
                                       const SparseMatrix& mass_factor);

/// A * g: the same increment tested against the coarse nodal basis.
ProjectedIncrement restrict_increment(const SparseMatrix& restriction, const ProjectedIncrement& fine, int coarse_level);

/// In-place variant used by the time loops: out = sqrt(dt_fine) * L_M * rho_n,
/// with `scratch` holding the normals.
void fine_increment_into(const NoiseStream& stream, std::int64_t step, const SparseMatrix& mass_factor,
                         Vector& scratch, Vector& out);

}  // namespace wmspde
