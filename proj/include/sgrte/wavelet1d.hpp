#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <iosfwd>
#include <vector>

namespace sgrte {

/// A function on [0,1] that is a polynomial of degree <= `degree` on each interval
/// (b_t, b_{t+1}]. Coefficients are taken in the local orthonormal Legendre basis of
/// each interval, one column per interval.
struct PiecewisePoly {
  int degree = 0;
  std::vector<double> breakpoints;
  Eigen::MatrixXd coeffs;

  int intervals() const { return static_cast<int>(breakpoints.size()) - 1; }
  double operator()(double x) const;
  double derivative(double x) const;
};

/// L2([0,1]) inner product, exact for the stored polynomial degrees.
double l2_inner(const PiecewisePoly& f, const PiecewisePoly& g);

/// Orthonormal Legendre polynomials of degree <= k supported on the cell
/// (2^-n j, 2^-n (j+1)].
std::vector<PiecewisePoly> scaling_basis(int k, int n, long j);

/// Alpert multiwavelets on [0,1] with breakpoints {0, 1/2, 1}.
struct MotherWaveletSet {
  int degree = 0;
  // Column i holds wavelet i in the orthonormal Legendre basis of (0,1/2] and
  // (1/2,1] respectively.
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  std::vector<PiecewisePoly> wavelets;
};

MotherWaveletSet build_mother_wavelets(int k);

/// 2^((n-1)/2) psi_i(2^(n-1) x - j) for level n >= 1.
double wavelet_at(const MotherWaveletSet& mother, int n, long j, int i, double x);
double wavelet_at(int k, int n, long j, int i, double x);

/// Index of the cell (c/cells, (c+1)/cells] containing x; x = 0 belongs to cell 0.
long dyadic_cell(double x, long cells);

/// Two-scale matrices: coefficients on the left/right child of a cell, given the
/// orthonormal Legendre coefficients on the parent (child = H * parent).
struct TwoScale {
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
};
TwoScale two_scale_matrices(int k);

/// Change of basis from the hierarchical multiwavelet basis (levels 0..N) to the
/// elementwise orthonormal Legendre basis on the 2^N cells of the finest grid.
/// Columns: flat hierarchical index; rows: fine_cell * (k+1) + local index.
struct Transfer1D {
  int N = 0;
  int k = 0;
  Eigen::SparseMatrix<double> T;
};

Transfer1D build_transfer(int N, int k);

/// Flat layout of the 1-D hierarchical basis up to level N: level 0 holds the k+1
/// Legendre polynomials, level n >= 1 holds 2^(n-1) cells of k+1 wavelets.
struct HierIndex1D {
  int level = 0;
  long cell = 0;
  int poly = 0;
};

inline long level_offset(int k, int n) { return n == 0 ? 0 : static_cast<long>(k + 1) << (n - 1); }
inline long level_cells(int n) { return n == 0 ? 1 : 1L << (n - 1); }
inline long hier_size(int k, int N) { return static_cast<long>(k + 1) << N; }
inline long hier_flat(int k, int n, long j, int i) { return level_offset(k, n) + j * (k + 1) + i; }
HierIndex1D hier_decode(int k, long flat);

/// The complete 1-D hierarchical basis for fixed (k, N): wavelets, transfer and
/// pointwise evaluation. Immutable after construction.
class HierarchicalBasis1D {
 public:
  HierarchicalBasis1D(int k, int N);

  int degree() const { return k_; }
  int max_level() const { return N_; }
  long size() const { return hier_size(k_, N_); }
  const MotherWaveletSet& mother() const { return mother_; }
  const Transfer1D& transfer() const { return transfer_; }
  const Eigen::SparseMatrix<double>& T() const { return transfer_.T; }

  /// Value of hierarchical function `flat` at x in [0,1].
  double value(long flat, double x) const;

  /// For each level n = 0..N, the cell containing x and the k+1 function values
  /// there. `cells` has N+1 entries; `values` is (k+1) x (N+1).
  void nonzero_values(double x, std::vector<long>& cells, Eigen::MatrixXd& values) const;

  /// Values of every hierarchical function at the fine nodes i / 2^N, i = 0..2^N,
  /// taken from the left cell (row i uses cell i-1) and the right cell (cell i).
  /// Row 0 of `from_left` and row 2^N of `from_right` are zero.
  void node_traces(Eigen::MatrixXd& from_left, Eigen::MatrixXd& from_right) const;

 private:
  int k_;
  int N_;
  MotherWaveletSet mother_;
  Transfer1D transfer_;
};

/// Plain-text dump of the mother wavelet coefficients and transfer nonzeros.
void write_basis_table(std::ostream& os, const HierarchicalBasis1D& basis);

}  // namespace sgrte
