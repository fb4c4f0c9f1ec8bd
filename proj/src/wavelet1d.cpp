#include "sgrte/wavelet1d.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <string>

#include "sgrte/errors.hpp"
#include "sgrte/quadrature.hpp"

namespace sgrte {

namespace {

int locate_interval(const std::vector<double>& bp, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("point outside [0,1]: " + std::to_string(x));
  auto it = std::lower_bound(bp.begin() + 1, bp.end(), x);
  if (it == bp.end()) --it;
  return static_cast<int>(it - (bp.begin() + 1));
}

// Legendre coefficients of x^p restricted to (a, b].
Eigen::VectorXd monomial_coeffs(int k, int p, double a, double b) {
  const auto rule = gauss_legendre(k + 1 + (p + 1) / 2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 1);
  Eigen::VectorXd L(k + 1);
  const double h = b - a;
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    const double xi = rule.nodes[q];
    legendre_values(k, xi, L);
    const double x = a + h * xi;
    c += rule.weights[q] * std::pow(x, p) * std::sqrt(h) * L;
  }
  return c;
}

}  // namespace

double PiecewisePoly::operator()(double x) const {
  const int t = locate_interval(breakpoints, x);
  const double a = breakpoints[t], b = breakpoints[t + 1];
  Eigen::VectorXd L(degree + 1);
  legendre_values(degree, (x - a) / (b - a), L);
  return coeffs.col(t).dot(L) / std::sqrt(b - a);
}

double PiecewisePoly::derivative(double x) const {
  const int t = locate_interval(breakpoints, x);
  const double a = breakpoints[t], b = breakpoints[t + 1];
  Eigen::VectorXd L(degree + 1), dL(degree + 1);
  legendre_values_and_derivatives(degree, (x - a) / (b - a), L, dL);
  return coeffs.col(t).dot(dL) / ((b - a) * std::sqrt(b - a));
}

double l2_inner(const PiecewisePoly& f, const PiecewisePoly& g) {
  std::vector<double> bp = f.breakpoints;
  bp.insert(bp.end(), g.breakpoints.begin(), g.breakpoints.end());
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  const auto rule = gauss_legendre((f.degree + g.degree) / 2 + 1);
  double sum = 0.0;
  for (size_t t = 0; t + 1 < bp.size(); ++t) {
    const double a = bp[t], h = bp[t + 1] - bp[t];
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
      const double x = a + h * rule.nodes[q];
      sum += h * rule.weights[q] * f(x) * g(x);
    }
  }
  return sum;
}

std::vector<PiecewisePoly> scaling_basis(int k, int n, long j) {
  if (k < 0 || n < 0) throw ArgumentError("scaling_basis: negative degree or level");
  const long cells = 1L << n;
  if (j < 0 || j >= cells) throw ArgumentError("scaling_basis: cell index out of range");
  const double a = std::ldexp(static_cast<double>(j), -n);
  const double b = std::ldexp(static_cast<double>(j + 1), -n);
  std::vector<double> bp{0.0};
  if (a > 0.0) bp.push_back(a);
  bp.push_back(b);
  if (b < 1.0) bp.push_back(1.0);
  const int cell_interval = a > 0.0 ? 1 : 0;

  std::vector<PiecewisePoly> out;
  for (int i = 0; i <= k; ++i) {
    PiecewisePoly p;
    p.degree = k;
    p.breakpoints = bp;
    p.coeffs = Eigen::MatrixXd::Zero(k + 1, static_cast<Eigen::Index>(bp.size()) - 1);
    p.coeffs(i, cell_interval) = 1.0;
    out.push_back(std::move(p));
  }
  return out;
}

TwoScale two_scale_matrices(int k) {
  const auto rule = gauss_legendre(k + 1);
  TwoScale h{Eigen::MatrixXd::Zero(k + 1, k + 1), Eigen::MatrixXd::Zero(k + 1, k + 1)};
  Eigen::VectorXd child(k + 1), pl(k + 1), pr(k + 1);
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    const double t = rule.nodes[q];
    legendre_values(k, t, child);
    legendre_values(k, 0.5 * t, pl);
    legendre_values(k, 0.5 * (1.0 + t), pr);
    const double w = rule.weights[q] / std::sqrt(2.0);
    h.left += w * child * pl.transpose();
    h.right += w * child * pr.transpose();
  }
  return h;
}

MotherWaveletSet build_mother_wavelets(int k) {
  if (k < 0) throw ArgumentError("build_mother_wavelets: negative degree");
  const int m = k + 1;
  const TwoScale hs = two_scale_matrices(k);

  // Coordinates in V_1: [left half block; right half block], both orthonormal.
  Eigen::MatrixXd poly_basis(2 * m, m);
  poly_basis.topRows(m) = hs.left;
  poly_basis.bottomRows(m) = hs.right;

  Eigen::MatrixXd w(2 * m, m);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd v(2 * m);
    v.head(m) = monomial_coeffs(k, i, 0.0, 0.5);
    v.tail(m) = -monomial_coeffs(k, i, 0.5, 1.0);
    const double seed_norm = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      v -= poly_basis * (poly_basis.transpose() * v);
      if (i > 0) v -= w.leftCols(i) * (w.leftCols(i).transpose() * v);
    }
    const double nv = v.norm();
    if (!(nv > 1e-10 * seed_norm)) {
      throw InternalError("multiwavelet Gram-Schmidt lost rank at seed " + std::to_string(i));
    }
    v /= nv;

    // Sign: positive just right of 0, else positive slope there.
    Eigen::VectorXd L(m), dL(m);
    legendre_values_and_derivatives(k, 0.0, L, dL);
    const double val = std::sqrt(2.0) * v.head(m).dot(L);
    const double slope = 2.0 * std::sqrt(2.0) * v.head(m).dot(dL);
    const double s = std::abs(val) > 1e-8 ? val : slope;
    if (s < 0) v = -v;
    w.col(i) = v;
  }

  MotherWaveletSet out;
  out.degree = k;
  out.left = w.topRows(m);
  out.right = w.bottomRows(m);
  for (int i = 0; i < m; ++i) {
    PiecewisePoly p;
    p.degree = k;
    p.breakpoints = {0.0, 0.5, 1.0};
    p.coeffs.resize(m, 2);
    p.coeffs.col(0) = out.left.col(i);
    p.coeffs.col(1) = out.right.col(i);
    out.wavelets.push_back(std::move(p));
  }
  return out;
}

long dyadic_cell(double x, long cells) {
  if (x <= 0.0) return 0;
  const long c = static_cast<long>(std::ceil(x * static_cast<double>(cells))) - 1;
  return std::clamp(c, 0L, cells - 1);
}

namespace {

// Value of mother wavelet i at y in [0,1] (left-closed-at-0 convention).
double mother_value(const MotherWaveletSet& mw, int i, double y) {
  const int m = mw.degree + 1;
  Eigen::VectorXd L(m);
  if (y <= 0.5) {
    legendre_values(mw.degree, 2.0 * y, L);
    return std::sqrt(2.0) * mw.left.col(i).dot(L);
  }
  legendre_values(mw.degree, 2.0 * y - 1.0, L);
  return std::sqrt(2.0) * mw.right.col(i).dot(L);
}

}  // namespace

double wavelet_at(const MotherWaveletSet& mother, int n, long j, int i, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("wavelet_at: x outside [0,1]");
  if (n < 1) throw ArgumentError("wavelet_at: level must be >= 1");
  if (j < 0 || j >= level_cells(n)) throw ArgumentError("wavelet_at: cell index out of range");
  if (i < 0 || i > mother.degree) throw ArgumentError("wavelet_at: wavelet index out of range");
  if (dyadic_cell(x, level_cells(n)) != j) return 0.0;
  const double y = std::ldexp(x, n - 1) - static_cast<double>(j);
  return std::pow(2.0, 0.5 * (n - 1)) * mother_value(mother, i, y);
}

double wavelet_at(int k, int n, long j, int i, double x) {
  static std::mutex mu;
  static std::map<int, MotherWaveletSet> cache;
  const MotherWaveletSet* mw;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, build_mother_wavelets(k)).first;
    mw = &it->second;
  }
  return wavelet_at(*mw, n, j, i, x);
}

HierIndex1D hier_decode(int k, long flat) {
  const long m = k + 1;
  if (flat < m) return {0, 0, static_cast<int>(flat)};
  int n = 1;
  while (level_offset(k, n + 1) <= flat) ++n;
  const long r = flat - level_offset(k, n);
  return {n, r / m, static_cast<int>(r % m)};
}

Transfer1D build_transfer(int N, int k) {
  if (N < 0 || k < 0) throw ArgumentError("build_transfer: negative level or degree");
  const int m = k + 1;
  const TwoScale hs = two_scale_matrices(k);
  const MotherWaveletSet mw = build_mother_wavelets(k);
  const long size = hier_size(k, N);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(m) * m * (N + 1) << N);

  // Refine a block of per-cell coefficients (columns) from `level` down to N and
  // emit triplets for column `col`; `first_cell` is the index of the first cell.
  auto emit = [&](Eigen::MatrixXd blocks, long first_cell, int level, long col) {
    for (int lv = level; lv < N; ++lv) {
      Eigen::MatrixXd finer(m, 2 * blocks.cols());
      for (Eigen::Index c = 0; c < blocks.cols(); ++c) {
        finer.col(2 * c) = hs.left * blocks.col(c);
        finer.col(2 * c + 1) = hs.right * blocks.col(c);
      }
      blocks = std::move(finer);
      first_cell *= 2;
    }
    for (Eigen::Index c = 0; c < blocks.cols(); ++c) {
      for (int a = 0; a < m; ++a) {
        const double v = blocks(a, c);
        if (v != 0.0) trip.emplace_back(static_cast<int>((first_cell + c) * m + a), static_cast<int>(col), v);
      }
    }
  };

  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, 1);
    b(i, 0) = 1.0;
    emit(b, 0, 0, hier_flat(k, 0, 0, i));
  }
  for (int n = 1; n <= N; ++n) {
    for (long j = 0; j < level_cells(n); ++j) {
      for (int i = 0; i < m; ++i) {
        Eigen::MatrixXd b(m, 2);
        b.col(0) = mw.left.col(i);
        b.col(1) = mw.right.col(i);
        emit(b, 2 * j, n, hier_flat(k, n, j, i));
      }
    }
  }

  Transfer1D t;
  t.N = N;
  t.k = k;
  t.T.resize(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  t.T.setFromTriplets(trip.begin(), trip.end());
  t.T.makeCompressed();
  return t;
}

HierarchicalBasis1D::HierarchicalBasis1D(int k, int N)
    : k_(k), N_(N), mother_(build_mother_wavelets(k)), transfer_(build_transfer(N, k)) {}

double HierarchicalBasis1D::value(long flat, double x) const {
  const HierIndex1D h = hier_decode(k_, flat);
  if (h.level == 0) {
    if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("value: x outside [0,1]");
    Eigen::VectorXd L(k_ + 1);
    legendre_values(k_, x, L);
    return L[h.poly];
  }
  return wavelet_at(mother_, h.level, h.cell, h.poly, x);
}

void HierarchicalBasis1D::nonzero_values(double x, std::vector<long>& cells, Eigen::MatrixXd& values) const {
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("nonzero_values: x outside [0,1]");
  const int m = k_ + 1;
  cells.assign(N_ + 1, 0);
  values.resize(m, N_ + 1);
  Eigen::VectorXd L(m);
  legendre_values(k_, x, L);
  values.col(0) = L;
  for (int n = 1; n <= N_; ++n) {
    const long j = dyadic_cell(x, level_cells(n));
    cells[n] = j;
    const double y = std::ldexp(x, n - 1) - static_cast<double>(j);
    const double scale = std::pow(2.0, 0.5 * n);  // 2^((n-1)/2) * sqrt(2)
    if (y <= 0.5) {
      legendre_values(k_, 2.0 * y, L);
      values.col(n) = scale * (mother_.left.transpose() * L);
    } else {
      legendre_values(k_, 2.0 * y - 1.0, L);
      values.col(n) = scale * (mother_.right.transpose() * L);
    }
  }
}

void HierarchicalBasis1D::node_traces(Eigen::MatrixXd& from_left, Eigen::MatrixXd& from_right) const {
  const int m = k_ + 1;
  const long cells = 1L << N_;
  const double inv_sqrt_h = std::sqrt(static_cast<double>(cells));
  Eigen::VectorXd at0(m), at1(m);
  legendre_values(k_, 0.0, at0);
  legendre_values(k_, 1.0, at1);
  from_left = Eigen::MatrixXd::Zero(cells + 1, size());
  from_right = Eigen::MatrixXd::Zero(cells + 1, size());
  const auto& T = transfer_.T;
  for (Eigen::Index col = 0; col < T.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(T, col); it; ++it) {
      const long c = it.row() / m;
      const int a = static_cast<int>(it.row() % m);
      from_left(c + 1, col) += it.value() * at1[a] * inv_sqrt_h;
      from_right(c, col) += it.value() * at0[a] * inv_sqrt_h;
    }
  }
}

void write_basis_table(std::ostream& os, const HierarchicalBasis1D& basis) {
  const auto& mw = basis.mother();
  const auto old_prec = os.precision(17);
  os << "# multiwavelet basis k=" << basis.degree() << " N=" << basis.max_level() << "\n";
  os << "# mother wavelets: wavelet half local_index coefficient\n";
  for (int i = 0; i <= mw.degree; ++i) {
    for (int a = 0; a <= mw.degree; ++a) os << i << " left " << a << " " << mw.left(a, i) << "\n";
    for (int a = 0; a <= mw.degree; ++a) os << i << " right " << a << " " << mw.right(a, i) << "\n";
  }
  os << "# transfer nonzeros: row col value\n";
  const auto& T = basis.T();
  for (Eigen::Index col = 0; col < T.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(T, col); it; ++it) {
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
    }
  }
  os.precision(old_prec);
}

}  // namespace sgrte
