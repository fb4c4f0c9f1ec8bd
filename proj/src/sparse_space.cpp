#include "sgrte/sparse_space.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sgrte/errors.hpp"
#include "sgrte/quadrature.hpp"

namespace sgrte {

namespace {

long ipow(long b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::vector<std::array<int, kMaxDim>> level_multi_indices(int d, int N) {
  std::vector<std::array<int, kMaxDim>> out;
  std::array<int, kMaxDim> n{};
  const long total = ipow(N + 1, d);
  for (long t = 0; t < total; ++t) {
    long r = t;
    int sum = 0;
    for (int m = d - 1; m >= 0; --m) {
      n[m] = static_cast<int>(r % (N + 1));
      r /= N + 1;
      sum += n[m];
    }
    if (sum <= N) out.push_back(n);
  }
  std::stable_sort(out.begin(), out.end(), [d](const auto& a, const auto& b) {
    const int sa = std::accumulate(a.begin(), a.begin() + d, 0);
    const int sb = std::accumulate(b.begin(), b.begin() + d, 0);
    if (sa != sb) return sa < sb;
    return a < b;
  });
  return out;
}

void check_dim(int d) {
  if (d != 2 && d != 3) throw ArgumentError("spatial dimension must be 2 or 3");
}

}  // namespace

Point BoxMap::to_physical(const Point& ref) const {
  Point x = Point::Zero();
  for (int m = 0; m < dim; ++m) x[m] = origin[m] + lengths[m] * ref[m];
  return x;
}

Point BoxMap::to_reference(const Point& x) const {
  Point r = Point::Zero();
  for (int m = 0; m < dim; ++m) r[m] = (x[m] - origin[m]) / lengths[m];
  return r;
}

double BoxMap::volume() const {
  double v = 1.0;
  for (int m = 0; m < dim; ++m) v *= lengths[m];
  return v;
}

long sparse_dof_count(int d, int k, int N) {
  long total = 0;
  for (const auto& n : level_multi_indices(d, N)) {
    long p = 1;
    for (int m = 0; m < d; ++m) p *= wavelet_space_dim(k, n[m]);
    total += p;
  }
  return total;
}

long full_dof_count(int d, int k, int N) { return ipow((k + 1) * (1L << N), d); }

std::vector<HierIndex> enumerate_dofs(int d, int k, int N) {
  check_dim(d);
  if (k < 0 || N < 0) throw ArgumentError("enumerate_dofs: negative degree or level");
  std::vector<HierIndex> out;
  const long local = ipow(k + 1, d);
  for (const auto& n : level_multi_indices(d, N)) {
    std::array<long, kMaxDim> cells{1, 1, 1};
    long ncell = 1;
    for (int m = 0; m < d; ++m) {
      cells[m] = level_cells(n[m]);
      ncell *= cells[m];
    }
    for (long c = 0; c < ncell; ++c) {
      HierIndex h;
      h.levels = n;
      long r = c;
      for (int m = d - 1; m >= 0; --m) {
        h.cells[m] = r % cells[m];
        r /= cells[m];
      }
      for (long q = 0; q < local; ++q) {
        long s = q;
        for (int m = d - 1; m >= 0; --m) {
          h.polys[m] = static_cast<int>(s % (k + 1));
          s /= k + 1;
        }
        out.push_back(h);
      }
    }
  }
  return out;
}

std::vector<DofGrowthRow> dof_growth_report(int d, int k, int N_max) {
  check_dim(d);
  if (N_max > (d == 2 ? 12 : 8)) throw ArgumentError("dof_growth_report: N_max too large");
  std::vector<DofGrowthRow> rows;
  for (int N = 0; N <= N_max; ++N) {
    DofGrowthRow r;
    r.N = N;
    r.sparse = sparse_dof_count(d, k, N);
    r.full = full_dof_count(d, k, N);
    r.ratio = static_cast<double>(r.sparse) / static_cast<double>(r.full);
    rows.push_back(r);
  }
  return rows;
}

SparseSpace::SparseSpace(int d, int k, int N, BoxMap map) : d_(d), k_(k), N_(N), map_(map) {
  check_dim(d);
  if (k < 0 || N < 0) throw ArgumentError("SparseSpace: negative degree or level");
  map_.dim = d;
  for (int m = 0; m < d; ++m)
    if (!(map_.lengths[m] > 0)) throw ArgumentError("SparseSpace: patch must have positive extent");
  basis_ = std::make_shared<HierarchicalBasis1D>(k, N);
  dense_T_ = std::make_shared<Eigen::MatrixXd>(basis_->T());

  const long local = local_size();
  block_lookup_.assign(ipow(N + 1, d), -1);
  long offset = 0;
  for (const auto& n : level_multi_indices(d, N)) {
    LevelBlock b;
    b.levels = n;
    b.offset = offset;
    b.cells = {1, 1, 1};
    long ncell = 1;
    long key = 0;
    for (int m = 0; m < d; ++m) {
      b.cells[m] = level_cells(n[m]);
      ncell *= b.cells[m];
      key = key * (N + 1) + n[m];
    }
    block_lookup_[key] = static_cast<int>(blocks_.size());
    blocks_.push_back(b);
    offset += ncell * local;
  }

  axis_index_.reserve(offset);
  for (const auto& h : enumerate_dofs(d, k, N)) {
    std::array<long, kMaxDim> ax{};
    for (int m = 0; m < d; ++m) ax[m] = hier_flat(k, h.levels[m], h.cells[m], h.polys[m]);
    axis_index_.push_back(ax);
  }
}

long SparseSpace::fine_cell_count() const { return ipow(cells_per_axis(), d_); }
long SparseSpace::local_size() const { return ipow(k_ + 1, d_); }
long SparseSpace::full_size() const { return ipow(axis_size(), d_); }

HierIndex SparseSpace::dof(long p) const {
  if (p < 0 || p >= size()) throw ArgumentError("SparseSpace::dof: index out of range");
  HierIndex h;
  for (int m = 0; m < d_; ++m) {
    const HierIndex1D a = hier_decode(k_, axis_index_[p][m]);
    h.levels[m] = a.level;
    h.cells[m] = a.cell;
    h.polys[m] = a.poly;
  }
  return h;
}

long SparseSpace::index_of(const HierIndex& h) const {
  long key = 0;
  for (int m = 0; m < d_; ++m) {
    if (h.levels[m] < 0 || h.levels[m] > N_) throw ArgumentError("index_of: level out of range");
    key = key * (N_ + 1) + h.levels[m];
  }
  const int bi = block_lookup_[key];
  if (bi < 0) throw ArgumentError("index_of: level multi-index not in the sparse space");
  const LevelBlock& b = blocks_[bi];
  long cell = 0, poly = 0;
  for (int m = 0; m < d_; ++m) {
    if (h.cells[m] < 0 || h.cells[m] >= b.cells[m]) throw ArgumentError("index_of: cell out of range");
    if (h.polys[m] < 0 || h.polys[m] > k_) throw ArgumentError("index_of: poly out of range");
    cell = cell * b.cells[m] + h.cells[m];
    poly = poly * (k_ + 1) + h.polys[m];
  }
  return b.offset + cell * local_size() + poly;
}

long SparseSpace::full_offset(long p) const {
  long off = 0;
  for (int m = 0; m < d_; ++m) off = off * axis_size() + axis_index_[p][m];
  return off;
}

CellExpansion SparseSpace::cell_dofs(const std::array<long, kMaxDim>& cell) const {
  const int m1 = k_ + 1;
  const long local = local_size();
  const Eigen::MatrixXd& T = *dense_T_;
  CellExpansion out;
  out.local.resize(local, static_cast<Eigen::Index>(blocks_.size()) * local);
  out.dofs.reserve(blocks_.size() * local);
  for (int m = 0; m < d_; ++m)
    if (cell[m] < 0 || cell[m] >= cells_per_axis()) throw ArgumentError("cell_dofs: cell out of range");

  Eigen::MatrixXd kron, factor;
  long col = 0;
  for (const LevelBlock& b : blocks_) {
    std::array<long, kMaxDim> j{};
    long cell_lin = 0;
    for (int m = 0; m < d_; ++m) {
      j[m] = b.levels[m] == 0 ? 0 : (cell[m] >> (N_ - b.levels[m] + 1));
      cell_lin = cell_lin * b.cells[m] + j[m];
    }
    kron = Eigen::MatrixXd::Ones(1, 1);
    for (int m = 0; m < d_; ++m) {
      factor = T.block(cell[m] * m1, hier_flat(k_, b.levels[m], j[m], 0), m1, m1);
      Eigen::MatrixXd next(kron.rows() * m1, kron.cols() * m1);
      for (Eigen::Index r = 0; r < kron.rows(); ++r)
        for (Eigen::Index c = 0; c < kron.cols(); ++c) next.block(r * m1, c * m1, m1, m1) = kron(r, c) * factor;
      kron = std::move(next);
    }
    out.local.middleCols(col, local) = kron;
    for (long q = 0; q < local; ++q) out.dofs.push_back(b.offset + cell_lin * local + q);
    col += local;
  }
  return out;
}

void apply_along_axis(Eigen::VectorXd& data, int dims, long S, int axis, const Eigen::SparseMatrix<double>& A) {
  const long stride = ipow(S, dims - 1 - axis);
  const long outer = ipow(S, axis);
  Eigen::VectorXd x(S), y(S);
  for (long o = 0; o < outer; ++o) {
    double* base = data.data() + o * S * stride;
    for (long in = 0; in < stride; ++in) {
      Eigen::Map<Eigen::VectorXd, 0, Eigen::InnerStride<>> fiber(base + in, S, Eigen::InnerStride<>(stride));
      x = fiber;
      y.noalias() = A * x;
      fiber = y;
    }
  }
}

Eigen::VectorXd fine_cell_restriction(const SparseSpace& space, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != space.size()) throw ArgumentError("fine_cell_restriction: coefficient length mismatch");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(space.full_size());
  for (long p = 0; p < space.size(); ++p) full[space.full_offset(p)] = coeffs[p];
  for (int m = 0; m < space.dim(); ++m) apply_along_axis(full, space.dim(), space.axis_size(), m, space.basis1d().T());
  return full;
}

Eigen::VectorXd fine_cell_gather(const SparseSpace& space, const Eigen::VectorXd& fine) {
  if (fine.size() != space.full_size()) throw ArgumentError("fine_cell_gather: tensor size mismatch");
  Eigen::VectorXd full = fine;
  const Eigen::SparseMatrix<double> Tt = space.basis1d().T().transpose();
  for (int m = 0; m < space.dim(); ++m) apply_along_axis(full, space.dim(), space.axis_size(), m, Tt);
  Eigen::VectorXd out(space.size());
  for (long p = 0; p < space.size(); ++p) out[p] = full[space.full_offset(p)];
  return out;
}

Eigen::VectorXd cell_block(const SparseSpace& space, const Eigen::VectorXd& fine, const std::array<long, kMaxDim>& cell) {
  const int d = space.dim();
  const int m1 = space.degree() + 1;
  const long S = space.axis_size();
  Eigen::VectorXd out(space.local_size());
  for (long q = 0; q < space.local_size(); ++q) {
    long r = q;
    std::array<long, kMaxDim> a{};
    for (int m = d - 1; m >= 0; --m) {
      a[m] = r % m1;
      r /= m1;
    }
    long off = 0;
    for (int m = 0; m < d; ++m) off = off * S + cell[m] * m1 + a[m];
    out[q] = fine[off];
  }
  return out;
}

Eigen::VectorXd project_fine(int dims, int k, int N, const BoxMap& box, const ScalarField& f, int qpts) {
  const int m1 = k + 1;
  const long cells = 1L << N;
  const long S = m1 * cells;
  const auto rule = gauss_legendre(qpts);
  const int nq = static_cast<int>(rule.size());

  Eigen::MatrixXd L(m1, nq);  // L(a, q)
  for (int q = 0; q < nq; ++q) {
    Eigen::VectorXd v(m1);
    legendre_values(k, rule.nodes[q], v);
    L.col(q) = v;
  }
  double scale = 1.0;
  for (int m = 0; m < dims; ++m) scale *= box.lengths[m] / static_cast<double>(cells);
  scale = std::sqrt(scale);

  Eigen::VectorXd out = Eigen::VectorXd::Zero(ipow(S, dims));
  const long ncells = ipow(cells, dims);
  const long npts = ipow(nq, dims);
  const long nloc = ipow(m1, dims);
  Eigen::VectorXd fw(npts);
  std::array<long, kMaxDim> c{}, qi{}, a{};
  for (long cl = 0; cl < ncells; ++cl) {
    long r = cl;
    for (int m = dims - 1; m >= 0; --m) {
      c[m] = r % cells;
      r /= cells;
    }
    for (long qp = 0; qp < npts; ++qp) {
      long s = qp;
      double w = 1.0;
      Point x = box.origin;
      for (int m = dims - 1; m >= 0; --m) {
        qi[m] = s % nq;
        s /= nq;
        w *= rule.weights[qi[m]];
        x[m] = box.origin[m] + box.lengths[m] * (static_cast<double>(c[m]) + rule.nodes[qi[m]]) / static_cast<double>(cells);
      }
      const double v = f(x);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite field value at quadrature point (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
        throw DataError(msg.str());
      }
      fw[qp] = w * v;
    }
    for (long lq = 0; lq < nloc; ++lq) {
      long s = lq;
      for (int m = dims - 1; m >= 0; --m) {
        a[m] = s % m1;
        s /= m1;
      }
      double sum = 0.0;
      for (long qp = 0; qp < npts; ++qp) {
        long t = qp;
        double prod = fw[qp];
        for (int m = dims - 1; m >= 0; --m) {
          prod *= L(a[m], t % nq);
          t /= nq;
        }
        sum += prod;
      }
      long off = 0;
      for (int m = 0; m < dims; ++m) off = off * S + c[m] * m1 + a[m];
      out[off] = scale * sum;
    }
  }
  return out;
}

Eigen::VectorXd project_l2(const SparseSpace& space, const ScalarField& f, int qpts) {
  if (qpts <= 0) qpts = variable_quadrature_points(space.degree());
  const Eigen::VectorXd fine = project_fine(space.dim(), space.degree(), space.max_level(), space.map(), f, qpts);
  return fine_cell_gather(space, fine);
}

double evaluate(const SparseSpace& space, const Eigen::VectorXd& coeffs, const Point& x) {
  if (coeffs.size() != space.size()) throw ArgumentError("evaluate: coefficient length mismatch");
  const int d = space.dim();
  const int k = space.degree();
  const int N = space.max_level();
  Point ref = space.map().to_reference(x);
  for (int m = 0; m < d; ++m) {
    if (ref[m] < -1e-12 || ref[m] > 1.0 + 1e-12 || !std::isfinite(ref[m])) {
      throw ArgumentError("evaluate: point outside the patch");
    }
    ref[m] = std::clamp(ref[m], 0.0, 1.0);
  }
  std::array<std::vector<long>, kMaxDim> cells;
  std::array<Eigen::MatrixXd, kMaxDim> vals;
  for (int m = 0; m < d; ++m) space.basis1d().nonzero_values(ref[m], cells[m], vals[m]);

  // Sum over every level block; in each, exactly one cell per axis is active.
  double total = 0.0;
  HierIndex h;
  const long local = space.local_size();
  std::array<int, kMaxDim> n{};
  const long nlev = ipow(N + 1, d);
  for (long t = 0; t < nlev; ++t) {
    long r = t;
    int sum = 0;
    for (int m = d - 1; m >= 0; --m) {
      n[m] = static_cast<int>(r % (N + 1));
      r /= N + 1;
      sum += n[m];
    }
    if (sum > N) continue;
    for (int m = 0; m < d; ++m) {
      h.levels[m] = n[m];
      h.cells[m] = cells[m][n[m]];
      h.polys[m] = 0;
    }
    const long base = space.index_of(h);
    for (long q = 0; q < local; ++q) {
      long s = q;
      double prod = coeffs[base + q];
      for (int m = d - 1; m >= 0; --m) {
        prod *= vals[m](s % (k + 1), n[m]);
        s /= k + 1;
      }
      total += prod;
    }
  }
  return total / std::sqrt(space.map().volume());
}

void write_coefficients(std::ostream& os, const SparseSpace& space, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != space.size()) throw ArgumentError("write_coefficients: length mismatch");
  os << "# sgrte-coefficients d=" << space.dim() << " k=" << space.degree() << " N=" << space.max_level()
     << " dofs=" << space.size() << " ordering=levelsum-lex\n";
  const auto prec = os.precision(17);
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) os << coeffs[i] << "\n";
  os.precision(prec);
}

Eigen::VectorXd read_coefficients(std::istream& is, const SparseSpace& space) {
  std::string header;
  std::getline(is, header);
  std::ostringstream expect;
  expect << "# sgrte-coefficients d=" << space.dim() << " k=" << space.degree() << " N=" << space.max_level()
         << " dofs=" << space.size() << " ordering=levelsum-lex";
  if (header != expect.str()) throw DataError("coefficient file header mismatch: '" + header + "'");
  Eigen::VectorXd c(space.size());
  for (long i = 0; i < space.size(); ++i) {
    if (!(is >> c[i])) throw DataError("coefficient file truncated at entry " + std::to_string(i));
  }
  return c;
}

}  // namespace sgrte
