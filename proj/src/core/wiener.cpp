#include "core/wiener.hpp"

#include "core/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace wmspde {

NoiseStream::NoiseStream(std::uint64_t seed, int fine_level, std::int64_t fine_steps, Index vertex_count)
    : normal_(seed, StreamTag::wiener), fine_level_(fine_level), fine_steps_(fine_steps), vertex_count_(vertex_count) {
  require(fine_steps > 0, ErrorCode::domain, "noise stream needs a positive number of fine steps");
  require(vertex_count > 0, ErrorCode::domain, "noise stream needs a positive vertex count");
}

void NoiseStream::normals(std::int64_t step, Vector& out) const {
  require(step >= 0 && step < fine_steps_, ErrorCode::domain,
          fmt::format("noise stream: step {} outside [0, {})", step, fine_steps_));
  out.resize(vertex_count_);
  normal_.fill(static_cast<std::uint64_t>(step), 0, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
}

void fine_increment_into(const NoiseStream& stream, std::int64_t step, const SparseMatrix& mass_factor,
                         Vector& scratch, Vector& out) {
  require(mass_factor.cols() == stream.vertex_count(), ErrorCode::dimension_mismatch,
          "fine_increment: mass factor does not match the stream's mesh");
  stream.normals(step, scratch);
  out.noalias() = mass_factor * scratch;
  out *= std::sqrt(stream.fine_dt());
}

ProjectedIncrement fine_increment(const NoiseStream& stream, std::int64_t step, const SparseMatrix& mass_factor) {
  ProjectedIncrement inc;
  Vector scratch;
  fine_increment_into(stream, step, mass_factor, scratch, inc.values);
  inc.level = stream.fine_level();
  inc.step_begin = step;
  inc.step_end = step + 1;
  return inc;
}

ProjectedIncrement aggregate_increment(const NoiseStream& stream, std::int64_t coarse_step, std::int64_t ratio,
                                       const SparseMatrix& mass_factor) {
  require(ratio >= 1 && stream.fine_steps() % ratio == 0, ErrorCode::domain,
          fmt::format("aggregate_increment: ratio {} does not divide {} fine steps", ratio, stream.fine_steps()));
  require(coarse_step >= 0 && coarse_step < stream.fine_steps() / ratio, ErrorCode::domain,
          fmt::format("aggregate_increment: coarse step {} out of range", coarse_step));
  ProjectedIncrement inc;
  inc.level = stream.fine_level();
  inc.step_begin = coarse_step * ratio;
  inc.step_end = inc.step_begin + ratio;
  inc.values = Vector::Zero(stream.vertex_count());
  Vector scratch;
  Vector single;
  for (std::int64_t n = inc.step_begin; n < inc.step_end; ++n) {
    fine_increment_into(stream, n, mass_factor, scratch, single);
    inc.values += single;
  }
  return inc;
}

ProjectedIncrement restrict_increment(const SparseMatrix& restriction, const ProjectedIncrement& fine, int coarse_level) {
  require(restriction.cols() == fine.values.size(), ErrorCode::dimension_mismatch,
          fmt::format("restrict_increment: restriction has {} columns, increment has {} entries", restriction.cols(),
                      fine.values.size()));
  ProjectedIncrement inc;
  inc.values = restriction * fine.values;
  inc.level = coarse_level;
  inc.step_begin = fine.step_begin;
  inc.step_end = fine.step_end;
  return inc;
}

}  // namespace wmspde
