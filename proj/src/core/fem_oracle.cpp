#include "core/fem_oracle.hpp"

#include <fmt/format.h>

#include <cmath>

namespace wmspde {

namespace {

using Triplet = Eigen::Triplet<double>;

// Number of cells of the 2D mesh containing both vertices (ix, iy) and
// (ix + dx, iy + dy); (dx, dy) == (0, 0) counts cells containing the vertex.
int shared_cells_2d(Index n, Index ix, Index iy, int dx, int dy) {
  auto square_exists = [n](Index sx, Index sy) { return sx >= 0 && sy >= 0 && sx < n && sy < n; };
  if (dx == 0 && dy == 0) {
    int count = 0;
    // Corners (0,0) and (1,1) of a square touch both of its triangles.
    if (square_exists(ix, iy)) count += 2;
    if (square_exists(ix - 1, iy - 1)) count += 2;
    if (square_exists(ix - 1, iy)) count += 1;
    if (square_exists(ix, iy - 1)) count += 1;
    return count;
  }
  if (dx == 1 && dy == 0) return int(square_exists(ix, iy)) + int(square_exists(ix, iy - 1));
  if (dx == 0 && dy == 1) return int(square_exists(ix, iy)) + int(square_exists(ix - 1, iy));
  if (dx == 1 && dy == 1) return square_exists(ix, iy) ? 2 : 0;
  return 0;
}

SparseMatrix closed_form_1d(const DyadicMesh& mesh, bool stiffness) {
  const Index n = mesh.vertex_count();
  const double h = mesh.cell_size;
  std::vector<Triplet> entries;
  for (Index i = 0; i < n; ++i) {
    const bool boundary = i == 0 || i == n - 1;
    if (stiffness) {
      entries.emplace_back(i, i, (boundary ? 1.0 : 2.0) / h);
      if (i + 1 < n) {
        entries.emplace_back(i, i + 1, -1.0 / h);
        entries.emplace_back(i + 1, i, -1.0 / h);
      }
    } else {
      entries.emplace_back(i, i, h / 6.0 * (boundary ? 2.0 : 4.0));
      if (i + 1 < n) {
        entries.emplace_back(i, i + 1, h / 6.0);
        entries.emplace_back(i + 1, i, h / 6.0);
      }
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

SparseMatrix closed_form_2d(const DyadicMesh& mesh, bool stiffness) {
  const Index cells_per_axis = Index{1} << mesh.level;
  const Index per_axis = cells_per_axis + 1;
  const double h = mesh.cell_size;
  const double area = 0.5 * h * h;
  std::vector<Triplet> entries;
  constexpr int kNeighbours[3][2] = {{1, 0}, {0, 1}, {1, 1}};
  for (Index iy = 0; iy < per_axis; ++iy) {
    for (Index ix = 0; ix < per_axis; ++ix) {
      const Index i = iy * per_axis + ix;
      if (!stiffness) entries.emplace_back(i, i, shared_cells_2d(cells_per_axis, ix, iy, 0, 0) * area / 6.0);
      for (const auto& d : kNeighbours) {
        const Index jx = ix + d[0];
        const Index jy = iy + d[1];
        if (jx >= per_axis || jy >= per_axis) continue;
        const Index j = jy * per_axis + jx;
        const int shared = shared_cells_2d(cells_per_axis, ix, iy, d[0], d[1]);
        double value = 0.0;
        if (stiffness) {
          // Axis edges face a 45 degree angle (cot = 1); the diagonal faces
          // the right angle (cot = 0).
          const bool diagonal = d[0] == 1 && d[1] == 1;
          value = diagonal ? 0.0 : -0.5 * shared;
          entries.emplace_back(i, i, -value);
          entries.emplace_back(j, j, -value);
        } else {
          value = shared * area / 12.0;
        }
        if (value != 0.0) {
          entries.emplace_back(i, j, value);
          entries.emplace_back(j, i, value);
        }
      }
    }
  }
  SparseMatrix m(mesh.vertex_count(), mesh.vertex_count());
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

}  // namespace

SparseMatrix closed_form_mass(const DyadicMesh& mesh) {
  return mesh.dim == 1 ? closed_form_1d(mesh, false) : closed_form_2d(mesh, false);
}

SparseMatrix closed_form_stiffness(const DyadicMesh& mesh) {
  return mesh.dim == 1 ? closed_form_1d(mesh, true) : closed_form_2d(mesh, true);
}

double max_entry_diff(const SparseMatrix& actual, const SparseMatrix& expected, const std::string& name,
                      double tolerance, std::vector<EntryDiff>* diffs, std::size_t max_diffs) {
  if (actual.rows() != expected.rows() || actual.cols() != expected.cols()) {
    if (diffs) diffs->push_back({name + " (shape)", actual.rows(), actual.cols(), double(expected.rows()), double(actual.rows())});
    return std::numeric_limits<double>::infinity();
  }
  const SparseMatrix delta = actual - expected;
  double worst = 0.0;
  for (Index col = 0; col < delta.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(delta, col); it; ++it) {
      const double d = std::abs(it.value());
      worst = std::max(worst, d);
      if (d > tolerance && diffs && diffs->size() < max_diffs)
        diffs->push_back({name, it.row(), it.col(), expected.coeff(it.row(), it.col()), actual.coeff(it.row(), it.col())});
    }
  }
  return worst;
}

AssemblyReport check_assembly(const DyadicMesh& mesh, const FemOperators& ops, double tolerance) {
  AssemblyReport report;
  report.dim = mesh.dim;
  report.level = mesh.level;
  auto record = [&report](std::string name, double measured, double tol) {
    const bool pass = measured <= tol;
    report.checks.push_back({std::move(name), pass, measured, tol});
    report.pass = report.pass && pass;
  };

  const SparseMatrix m_ref = closed_form_mass(mesh);
  const SparseMatrix t_ref = closed_form_stiffness(mesh);
  const double m_scale = std::max(1e-300, m_ref.coeffs().abs().maxCoeff());
  const double t_scale = std::max(1e-300, t_ref.coeffs().abs().maxCoeff());
  record("mass vs closed form (relative)",
         max_entry_diff(ops.mass(), m_ref, "mass", tolerance * m_scale, &report.diffs) / m_scale, tolerance);
  record("stiffness vs closed form (relative)",
         max_entry_diff(ops.stiffness(), t_ref, "stiffness", tolerance * t_scale, &report.diffs) / t_scale, tolerance);

  const SparseMatrix mt = ops.mass().transpose();
  const SparseMatrix tt = ops.stiffness().transpose();
  const SparseMatrix kt = ops.a2_matrix().transpose();
  record("mass symmetry", max_entry_diff(ops.mass(), mt, "mass^T", 0.0, nullptr), 0.0);
  record("stiffness symmetry", max_entry_diff(ops.stiffness(), tt, "stiffness^T", 0.0, nullptr), 0.0);
  record("a2 symmetry", max_entry_diff(ops.a2_matrix(), kt, "a2^T", 0.0, nullptr), 0.0);
  const SparseMatrix k_sum = ops.mass() + ops.stiffness();
  record("K = M + T", max_entry_diff(ops.a2_matrix(), k_sum, "a2", 0.0, &report.diffs), 0.0);

  const Vector ones = Vector::Ones(mesh.vertex_count());
  record("T 1 = 0 (relative to max entry)", (ops.stiffness() * ones).cwiseAbs().maxCoeff() / t_scale, 1e-14);
  record("1^T M 1 = 1", std::abs(ones.dot(ops.mass() * ones) - 1.0), tolerance);

  const SparseMatrix& l = ops.mass_factor();
  const SparseMatrix llt = l * SparseMatrix(l.transpose());
  record("L L^T = M (relative Frobenius)", (llt - ops.mass()).norm() / ops.mass().norm(), tolerance);

  double worst_column = 0.0;
  for (int coarse_level = 0; coarse_level <= mesh.level; ++coarse_level) {
    const SparseMatrix a = restriction_matrix(build_mesh(mesh.dim, coarse_level), mesh);
    const Eigen::RowVectorXd sums = Eigen::RowVectorXd::Ones(a.rows()) * a;
    worst_column = std::max(worst_column, (sums.array() - 1.0).abs().maxCoeff());
  }
  record("restriction column sums = 1", worst_column, 1e-14);
  return report;
}

std::string AssemblyReport::to_text() const {
  std::string out = fmt::format("assemble-check dim={} level={}: {}\n", dim, level, pass ? "PASS" : "FAIL");
  for (const auto& c : checks)
    out += fmt::format("  [{}] {:<40} {:.3e} (tol {:.1e})\n", c.pass ? "ok" : "!!", c.name, c.measured, c.tolerance);
  for (const auto& d : diffs)
    out += fmt::format("  diff {}({}, {}): expected {:.17g}, got {:.17g}\n", d.matrix, d.row, d.col, d.expected, d.actual);
  return out;
}

}  // namespace wmspde
