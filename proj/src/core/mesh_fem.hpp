#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wmspde {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

constexpr int kMaxLevel1d = 14;
constexpr int kMaxLevel2d = 8;

using Point = std::array<double, 2>;

/// Nested uniform simplicial mesh of (0,1)^dim at refinement level L.
///
/// Vertices are ordered lexicographically (x fastest), so vertex (ix, iy)
/// has index iy * (2^L + 1) + ix. In 2D each square of side 2^-L is split
/// along its (0,0)-(1,1) diagonal into two right isosceles triangles, which
/// keeps every level a refinement of the previous one.
struct DyadicMesh {
  int dim = 1;
  int level = 0;
  double cell_size = 1.0;
  double h = 1.0;
  std::vector<Point> vertices;
  /// Cells as vertex index tuples; only the first dim + 1 entries are used.
  std::vector<std::array<Index, 3>> cells;

  Index vertices_per_axis() const { return (Index{1} << level) + 1; }
  Index vertex_count() const { return static_cast<Index>(vertices.size()); }
  Index cell_count() const { return static_cast<Index>(cells.size()); }
  int vertices_per_cell() const { return dim + 1; }

  /// Signed measure of a cell (length in 1D, area in 2D).
  double cell_volume(Index cell) const;
};

DyadicMesh build_mesh(int dim, int level);

/// Mesh summary as a JSON object: dim, level, vertex/cell counts, h.
std::string mesh_summary_json(const DyadicMesh& mesh);

/// Lower-triangular Cholesky factor L with L * L^T = m. Throws
/// ErrorCode::factorization if m is not symmetric positive definite.
SparseMatrix cholesky_factor(const SparseMatrix& m);

/// P1 finite element matrices for A1 = -Laplace, A2 = I - Laplace with
/// homogeneous Neumann conditions. Immutable after construction.
class FemOperators {
 public:
  explicit FemOperators(const DyadicMesh& mesh);
  /// Operators from given M and T (K = M + T); used to feed the oracles
  /// deliberately wrong matrices.
  FemOperators(int dim, int level, SparseMatrix mass, SparseMatrix stiffness);

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& a2_matrix() const { return a2_; }
  const SparseMatrix& mass_factor() const { return mass_factor_; }
  Index size() const { return mass_.rows(); }
  int dim() const { return dim_; }
  int level() const { return level_; }

 private:
  int dim_;
  int level_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  SparseMatrix a2_;
  SparseMatrix mass_factor_;
};

FemOperators assemble(const DyadicMesh& mesh);

/// Reusable factorization of M + dt * T for the backward Euler step.
class SystemFactor {
 public:
  SystemFactor(const FemOperators& ops, double dt);

  double dt() const { return dt_; }
  const SparseMatrix& matrix() const { return matrix_; }

  /// Solves (M + dt T) x = rhs; throws ErrorCode::numerical when the relative
  /// residual exceeds the configured tolerance.
  Vector solve(const Vector& rhs) const;

  static constexpr double kResidualTolerance = 1e-10;

 private:
  double dt_;
  SparseMatrix matrix_;
  Eigen::SimplicialLLT<SparseMatrix> llt_;
};

/// A(i, j) = phi_i(x_j): coarse nodal basis functions evaluated at fine
/// vertices. Rows index coarse vertices, columns fine vertices.
SparseMatrix restriction_matrix(const DyadicMesh& coarse, const DyadicMesh& fine);

/// Value of nodal basis function `vertex` of `mesh` at an arbitrary point.
double hat_value(const DyadicMesh& mesh, Index vertex, const Point& x);

/// Plain-text triplet dump: "row col value" per line, 17 significant digits.
std::string to_triplets(const SparseMatrix& m);

/// M-weighted norm sqrt(v^T M v).
double mass_norm(const SparseMatrix& mass, const Vector& v);

}  // namespace wmspde
