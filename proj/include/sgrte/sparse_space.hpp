#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sgrte/wavelet1d.hpp"

namespace sgrte {

constexpr int kMaxDim = 3;

using Point = Eigen::Vector3d;
using ScalarField = std::function<double(const Point&)>;

/// Multi-index of one sparse-space basis function: per axis the wavelet level,
/// the cell at that level and the polynomial index. Axes >= dim are zero.
struct HierIndex {
  std::array<int, kMaxDim> levels{};
  std::array<long, kMaxDim> cells{};
  std::array<int, kMaxDim> polys{};
  bool operator==(const HierIndex&) const = default;
};

/// Affine map from [0,1]^d onto an axis-aligned box.
struct BoxMap {
  int dim = 2;
  Point origin = Point::Zero();
  Point lengths = Point::Ones();

  Point to_physical(const Point& ref) const;
  Point to_reference(const Point& x) const;
  double volume() const;
};

/// Number of wavelet functions on one axis at level n: k+1 at level 0,
/// (k+1) 2^(n-1) above.
inline long wavelet_space_dim(int k, int n) { return (k + 1) * level_cells(n); }

long sparse_dof_count(int d, int k, int N);
long full_dof_count(int d, int k, int N);

/// All multi-indices of the truncated space sum_{|n|_1 <= N} W_n, ordered by level
/// sum, then level (lexicographic), then cell, then polynomial index.
std::vector<HierIndex> enumerate_dofs(int d, int k, int N);

struct DofGrowthRow {
  int N = 0;
  long sparse = 0;
  long full = 0;
  double ratio = 0.0;
};
std::vector<DofGrowthRow> dof_growth_report(int d, int k, int N_max);

/// Restriction of the global basis to one finest-grid cell: column j holds the
/// local orthonormal Legendre coefficients of basis function dofs[j].
struct CellExpansion {
  std::vector<long> dofs;
  Eigen::MatrixXd local;
};

/// The sparse multiwavelet DG space on a box patch.
class SparseSpace {
 public:
  SparseSpace(int d, int k, int N, BoxMap map = {});

  int dim() const { return d_; }
  int degree() const { return k_; }
  int max_level() const { return N_; }
  long size() const { return static_cast<long>(axis_index_.size()); }
  long cells_per_axis() const { return 1L << N_; }
  long fine_cell_count() const;
  long local_size() const;  // (k+1)^d
  long axis_size() const { return basis_->size(); }  // (k+1) 2^N
  long full_size() const;    // ((k+1) 2^N)^d

  const BoxMap& map() const { return map_; }
  const HierarchicalBasis1D& basis1d() const { return *basis_; }
  const Eigen::MatrixXd& dense_transfer() const { return *dense_T_; }

  HierIndex dof(long p) const;
  /// Flat 1-D hierarchical index of dof p along `axis`.
  long axis_index(long p, int axis) const { return axis_index_[p][axis]; }
  long index_of(const HierIndex& h) const;

  /// Basis restricted to the fine cell with multi-index `cell`.
  CellExpansion cell_dofs(const std::array<long, kMaxDim>& cell) const;

  /// Offset of dof p's (axis-indexed) entry inside the full tensor grid.
  long full_offset(long p) const;

 private:
  struct LevelBlock {
    std::array<int, kMaxDim> levels{};
    long offset = 0;
    std::array<long, kMaxDim> cells{};
  };

  int d_, k_, N_;
  BoxMap map_;
  std::shared_ptr<const HierarchicalBasis1D> basis_;
  std::shared_ptr<const Eigen::MatrixXd> dense_T_;
  std::vector<LevelBlock> blocks_;
  std::vector<int> block_lookup_;  // (N+1)^d table: level multi-index -> block
  std::vector<std::array<long, kMaxDim>> axis_index_;
};

// ---- full-grid tensor helpers -------------------------------------------------
// A full tensor has `dims` axes of equal length S, row-major (axis 0 slowest).

/// y_fiber = A * x_fiber along `axis`; A is S x S.
void apply_along_axis(Eigen::VectorXd& data, int dims, long S, int axis, const Eigen::SparseMatrix<double>& A);

/// Elementwise Legendre coefficients on the full fine grid for `coeffs`.
Eigen::VectorXd fine_cell_restriction(const SparseSpace& space, const Eigen::VectorXd& coeffs);

/// Adjoint of fine_cell_restriction (exact inverse on the space).
Eigen::VectorXd fine_cell_gather(const SparseSpace& space, const Eigen::VectorXd& fine);

/// Local coefficient block ((k+1)^d entries) of one fine cell inside a fine tensor.
Eigen::VectorXd cell_block(const SparseSpace& space, const Eigen::VectorXd& fine, const std::array<long, kMaxDim>& cell);

/// Orthonormal-Legendre coefficients of f on every fine cell of a `dims`-dimensional
/// full grid with 2^N cells per axis over `box`, using `qpts` Gauss points per axis.
/// Coefficients are scaled to the physical cell (orthonormal in physical L2).
Eigen::VectorXd project_fine(int dims, int k, int N, const BoxMap& box, const ScalarField& f, int qpts);

/// L2 projection onto the sparse space.
Eigen::VectorXd project_l2(const SparseSpace& space, const ScalarField& f, int qpts = -1);

double evaluate(const SparseSpace& space, const Eigen::VectorXd& coeffs, const Point& x);

/// Default quadrature points per axis for variable data: max(k+2, 4).
inline int variable_quadrature_points(int k) { return k + 2 > 4 ? k + 2 : 4; }

// ---- coefficient files -------------------------------------------------------
void write_coefficients(std::ostream& os, const SparseSpace& space, const Eigen::VectorXd& coeffs);
Eigen::VectorXd read_coefficients(std::istream& is, const SparseSpace& space);

}  // namespace sgrte
