#pragma once

#include "core/mesh_fem.hpp"

#include <string>
#include <vector>

namespace wmspde {

/// Closed-form P1 matrices on the dyadic meshes, built from stencils
/// (1D: h/6 [1 4 1], 1/h [-1 2 -1]; 2D: triangle counts per vertex and edge
/// and the cotangent formula). Independent of the element assembly loop.
SparseMatrix closed_form_mass(const DyadicMesh& mesh);
SparseMatrix closed_form_stiffness(const DyadicMesh& mesh);

struct EntryDiff {
  std::string matrix;
  Index row = 0;
  Index col = 0;
  double expected = 0.0;
  double actual = 0.0;
};

struct OracleCheck {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct AssemblyReport {
  int dim = 1;
  int level = 0;
  bool pass = true;
  std::vector<OracleCheck> checks;
  std::vector<EntryDiff> diffs;  // first few offending entries

  std::string to_text() const;
};

/// Runs every closed-form oracle on one assembled level: matrix entries,
/// symmetry, K = M + T, T 1 = 0, 1^T M 1 = 1, Cholesky round trip and
/// restriction column sums against all coarser levels.
AssemblyReport check_assembly(const DyadicMesh& mesh, const FemOperators& ops, double tolerance = 1e-12);

/// Largest |a - b| entry; appends up to `max_diffs` offending entries whose
/// deviation exceeds `tolerance`.
double max_entry_diff(const SparseMatrix& actual, const SparseMatrix& expected, const std::string& name,
                      double tolerance, std::vector<EntryDiff>* diffs, std::size_t max_diffs = 8);

}  // namespace wmspde
