#include "core/mesh_fem.hpp"

#include "core/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace wmspde {

namespace {

using Triplet = Eigen::Triplet<double>;

std::array<double, 2> local_element_1d(double length, bool stiffness) {
  if (stiffness) return {1.0 / length, -1.0 / length};
  return {length / 3.0, length / 6.0};
}

void assemble_1d(const DyadicMesh& mesh, std::vector<Triplet>& mass, std::vector<Triplet>& stiff) {
  for (const auto& cell : mesh.cells) {
    const double length = mesh.vertices[cell[1]][0] - mesh.vertices[cell[0]][0];
    const auto m = local_element_1d(length, false);
    const auto t = local_element_1d(length, true);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const int slot = a == b ? 0 : 1;
        mass.emplace_back(cell[a], cell[b], m[slot]);
        stiff.emplace_back(cell[a], cell[b], t[slot]);
      }
    }
  }
}

void assemble_2d(const DyadicMesh& mesh, std::vector<Triplet>& mass, std::vector<Triplet>& stiff) {
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    const auto& cell = mesh.cells[c];
    const double area = mesh.cell_volume(c);
    // Gradient of the barycentric coordinate opposite edge (j, k) is the
    // rotated edge vector divided by twice the area.
    std::array<std::array<double, 2>, 3> grad{};
    for (int a = 0; a < 3; ++a) {
      const auto& pj = mesh.vertices[cell[(a + 1) % 3]];
      const auto& pk = mesh.vertices[cell[(a + 2) % 3]];
      grad[a] = {(pj[1] - pk[1]) / (2.0 * area), (pk[0] - pj[0]) / (2.0 * area)};
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        mass.emplace_back(cell[a], cell[b], area * (a == b ? 2.0 : 1.0) / 12.0);
        stiff.emplace_back(cell[a], cell[b], area * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]));
      }
    }
  }
}

}  // namespace

double DyadicMesh::cell_volume(Index cell) const {
  const auto& c = cells[static_cast<std::size_t>(cell)];
  if (dim == 1) return vertices[c[1]][0] - vertices[c[0]][0];
  const auto& p0 = vertices[c[0]];
  const auto& p1 = vertices[c[1]];
  const auto& p2 = vertices[c[2]];
  return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

DyadicMesh build_mesh(int dim, int level) {
  require(dim == 1 || dim == 2, ErrorCode::domain, fmt::format("mesh dimension must be 1 or 2, got {}", dim));
  require(level >= 0, ErrorCode::domain, fmt::format("mesh level must be nonnegative, got {}", level));
  const int guard = dim == 1 ? kMaxLevel1d : kMaxLevel2d;
  require(level <= guard, ErrorCode::capacity,
          fmt::format("mesh level {} exceeds the {}D limit of {}", level, dim, guard));

  DyadicMesh mesh;
  mesh.dim = dim;
  mesh.level = level;
  mesh.cell_size = std::ldexp(1.0, -level);
  mesh.h = dim == 1 ? mesh.cell_size : std::sqrt(2.0) * mesh.cell_size;

  const Index n = Index{1} << level;
  const Index per_axis = n + 1;
  if (dim == 1) {
    mesh.vertices.reserve(static_cast<std::size_t>(per_axis));
    for (Index i = 0; i <= n; ++i) mesh.vertices.push_back({static_cast<double>(i) * mesh.cell_size, 0.0});
    mesh.cells.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) mesh.cells.push_back({i, i + 1, 0});
    return mesh;
  }

  mesh.vertices.reserve(static_cast<std::size_t>(per_axis * per_axis));
  for (Index iy = 0; iy <= n; ++iy)
    for (Index ix = 0; ix <= n; ++ix)
      mesh.vertices.push_back({static_cast<double>(ix) * mesh.cell_size, static_cast<double>(iy) * mesh.cell_size});
  mesh.cells.reserve(static_cast<std::size_t>(2 * n * n));
  for (Index iy = 0; iy < n; ++iy) {
    for (Index ix = 0; ix < n; ++ix) {
      const Index v00 = iy * per_axis + ix;
      const Index v10 = v00 + 1;
      const Index v01 = v00 + per_axis;
      const Index v11 = v01 + 1;
      // Counter-clockwise: lower-right triangle, then upper-left.
      mesh.cells.push_back({v00, v10, v11});
      mesh.cells.push_back({v00, v11, v01});
    }
  }
  return mesh;
}

std::string mesh_summary_json(const DyadicMesh& mesh) {
  return fmt::format(R"({{"dim": {}, "level": {}, "vertices": {}, "cells": {}, "cell_size": {:.17g}, "h": {:.17g}}})",
                     mesh.dim, mesh.level, mesh.vertex_count(), mesh.cell_count(), mesh.cell_size, mesh.h);
}

SparseMatrix cholesky_factor(const SparseMatrix& m) {
  require(m.rows() == m.cols(), ErrorCode::dimension_mismatch, "cholesky_factor: matrix is not square");
  const SparseMatrix mt = m.transpose();
  require((m - mt).norm() <= 1e-14 * m.norm(), ErrorCode::factorization, "cholesky_factor: matrix is not symmetric");
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(m);
  require(llt.info() == Eigen::Success, ErrorCode::factorization, "cholesky_factor: matrix is not positive definite");
  return SparseMatrix(llt.matrixL());
}

FemOperators::FemOperators(const DyadicMesh& mesh) : dim_(mesh.dim), level_(mesh.level) {
  const Index n = mesh.vertex_count();
  std::vector<Triplet> mass_entries;
  std::vector<Triplet> stiff_entries;
  const std::size_t per_cell = static_cast<std::size_t>(mesh.vertices_per_cell() * mesh.vertices_per_cell());
  mass_entries.reserve(per_cell * mesh.cells.size());
  stiff_entries.reserve(per_cell * mesh.cells.size());
  if (mesh.dim == 1)
    assemble_1d(mesh, mass_entries, stiff_entries);
  else
    assemble_2d(mesh, mass_entries, stiff_entries);

  mass_.resize(n, n);
  stiffness_.resize(n, n);
  mass_.setFromTriplets(mass_entries.begin(), mass_entries.end());
  stiffness_.setFromTriplets(stiff_entries.begin(), stiff_entries.end());
  // a2(u, v) = (u, v) + (grad u, grad v), so K is formed from M and T directly.
  a2_ = mass_ + stiffness_;
  mass_factor_ = cholesky_factor(mass_);
}

FemOperators::FemOperators(int dim, int level, SparseMatrix mass, SparseMatrix stiffness)
    : dim_(dim), level_(level), mass_(std::move(mass)), stiffness_(std::move(stiffness)) {
  require(mass_.rows() == mass_.cols() && stiffness_.rows() == mass_.rows() && stiffness_.cols() == mass_.cols(),
          ErrorCode::dimension_mismatch, "FemOperators: M and T must be square and of equal size");
  a2_ = mass_ + stiffness_;
  mass_factor_ = cholesky_factor(mass_);
}

FemOperators assemble(const DyadicMesh& mesh) { return FemOperators(mesh); }

SystemFactor::SystemFactor(const FemOperators& ops, double dt) : dt_(dt) {
  require(dt > 0.0, ErrorCode::domain, "SystemFactor: time step must be positive");
  matrix_ = ops.mass() + dt * ops.stiffness();
  llt_.compute(matrix_);
  require(llt_.info() == Eigen::Success, ErrorCode::factorization, "SystemFactor: factorization of M + dt T failed");
}

Vector SystemFactor::solve(const Vector& rhs) const {
  require(rhs.size() == matrix_.rows(), ErrorCode::dimension_mismatch, "SystemFactor::solve: size mismatch");
  Vector x = llt_.solve(rhs);
  const double rhs_norm = rhs.norm();
  if (rhs_norm > 0.0) {
    const double residual = (matrix_ * x - rhs).norm() / rhs_norm;
    require(residual <= kResidualTolerance, ErrorCode::numerical,
            fmt::format("backward Euler solve: relative residual {:.3e} above {:.1e} (dt = {:.6g}, n = {})", residual,
                        kResidualTolerance, dt_, rhs.size()));
  }
  return x;
}

double hat_value(const DyadicMesh& mesh, Index vertex, const Point& x) {
  const double inv = std::ldexp(1.0, mesh.level);
  const Index per_axis = mesh.vertices_per_axis();
  if (mesh.dim == 1) {
    const double s = x[0] * inv - static_cast<double>(vertex);
    return std::max(0.0, 1.0 - std::abs(s));
  }
  const double sx = x[0] * inv - static_cast<double>(vertex % per_axis);
  const double sy = x[1] * inv - static_cast<double>(vertex / per_axis);
  // Hat function of the (0,0)-(1,1) diagonal triangulation in local units.
  if (sx * sy >= 0.0) return std::max(0.0, 1.0 - std::max(std::abs(sx), std::abs(sy)));
  return std::max(0.0, 1.0 - std::abs(sx) - std::abs(sy));
}

SparseMatrix restriction_matrix(const DyadicMesh& coarse, const DyadicMesh& fine) {
  require(coarse.dim == fine.dim, ErrorCode::domain, "restriction_matrix: meshes differ in dimension");
  require(coarse.level <= fine.level, ErrorCode::domain,
          fmt::format("restriction_matrix: coarse level {} is finer than level {}", coarse.level, fine.level));
  const Index ratio = Index{1} << (fine.level - coarse.level);
  const double inv_ratio = 1.0 / static_cast<double>(ratio);
  const Index coarse_axis = coarse.vertices_per_axis();
  const Index fine_axis = fine.vertices_per_axis();

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(fine.vertex_count() * (fine.dim + 1)));
  if (fine.dim == 1) {
    for (Index j = 0; j < fine_axis; ++j) {
      const Index c = j / ratio;
      const double s = static_cast<double>(j % ratio) * inv_ratio;
      entries.emplace_back(c, j, 1.0 - s);
      if (s > 0.0) entries.emplace_back(c + 1, j, s);
    }
  } else {
    for (Index jy = 0; jy < fine_axis; ++jy) {
      for (Index jx = 0; jx < fine_axis; ++jx) {
        const Index j = jy * fine_axis + jx;
        const Index cx = jx / ratio;
        const Index cy = jy / ratio;
        const double x = static_cast<double>(jx % ratio) * inv_ratio;
        const double y = static_cast<double>(jy % ratio) * inv_ratio;
        const Index c00 = cy * coarse_axis + cx;
        entries.emplace_back(c00, j, 1.0 - std::max(x, y));
        if (x >= y) {
          if (x > y) entries.emplace_back(c00 + 1, j, x - y);
          if (y > 0.0) entries.emplace_back(c00 + coarse_axis + 1, j, y);
        } else {
          entries.emplace_back(c00 + coarse_axis, j, y - x);
          if (x > 0.0) entries.emplace_back(c00 + coarse_axis + 1, j, x);
        }
      }
    }
  }
  SparseMatrix a(coarse.vertex_count(), fine.vertex_count());
  a.setFromTriplets(entries.begin(), entries.end());
  a.prune(0.0);
  return a;
}

std::string to_triplets(const SparseMatrix& m) {
  std::string out;
  for (Index col = 0; col < m.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(m, col); it; ++it)
      out += fmt::format("{} {} {:.17g}\n", it.row(), it.col(), it.value());
  return out;
}

double mass_norm(const SparseMatrix& mass, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(mass * v))); }

}  // namespace wmspde
