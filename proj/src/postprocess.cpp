#include "sgrte/postprocess.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "sgrte/errors.hpp"
#include "sgrte/quadrature.hpp"

namespace sgrte {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

long ipow(long b, int e) {
  long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Tensor quadrature on the reference cell: points, weights, local basis values
// and (optionally) reference derivatives per axis.
struct CellRule {
  std::vector<Point> ref;
  Eigen::VectorXd w;
  Eigen::MatrixXd B;                 // points x local
  std::array<Eigen::MatrixXd, kMaxDim> dB;  // d/dxi_m
};

CellRule cell_rule(int d, int k, int q, bool derivatives) {
  const auto rule = gauss_legendre(q);
  const int m1 = k + 1;
  const long P = ipow(q, d), L = ipow(m1, d);
  CellRule c;
  c.ref.resize(P);
  c.w.resize(P);
  c.B.resize(P, L);
  if (derivatives)
    for (int m = 0; m < d; ++m) c.dB[m].resize(P, L);
  std::vector<Eigen::VectorXd> val(q), der(q);
  for (int i = 0; i < q; ++i) {
    val[i].resize(m1);
    der[i].resize(m1);
    legendre_values_and_derivatives(k, rule.nodes[i], val[i], der[i]);
  }
  for (long p = 0; p < P; ++p) {
    std::array<int, kMaxDim> ip{};
    long r = p;
    for (int m = d - 1; m >= 0; --m) {
      ip[m] = static_cast<int>(r % q);
      r /= q;
    }
    Point x = Point::Zero();
    double w = 1;
    for (int m = 0; m < d; ++m) {
      x[m] = rule.nodes[ip[m]];
      w *= rule.weights[ip[m]];
    }
    c.ref[p] = x;
    c.w[p] = w;
    for (long a = 0; a < L; ++a) {
      std::array<int, kMaxDim> ia{};
      long s = a;
      for (int m = d - 1; m >= 0; --m) {
        ia[m] = static_cast<int>(s % m1);
        s /= m1;
      }
      double v = 1;
      for (int m = 0; m < d; ++m) v *= val[ip[m]][ia[m]];
      c.B(p, a) = v;
      if (derivatives)
        for (int t = 0; t < d; ++t) {
          double g = 1;
          for (int m = 0; m < d; ++m) g *= m == t ? der[ip[m]][ia[m]] : val[ip[m]][ia[m]];
          c.dB[t](p, a) = g;
        }
    }
  }
  return c;
}

// Visit every fine cell of a box patch with its local coefficient block.
template <class Visit>
void for_each_cell(const SparseSpace& space, const Eigen::VectorXd& coeffs, Visit&& visit) {
  const Eigen::VectorXd fine = fine_cell_restriction(space, coeffs);
  const int d = space.dim();
  const long n = space.cells_per_axis();
  for (long c = 0; c < space.fine_cell_count(); ++c) {
    std::array<long, kMaxDim> cell{};
    long r = c;
    for (int m = d - 1; m >= 0; --m) {
      cell[m] = r % n;
      r /= n;
    }
    visit(cell, cell_block(space, fine, cell));
  }
}

Point cell_point(const SparseSpace& space, const std::array<long, kMaxDim>& cell, const Point& xi) {
  const double h = 1.0 / double(space.cells_per_axis());
  Point ref = Point::Zero();
  for (int m = 0; m < space.dim(); ++m) ref[m] = (double(cell[m]) + xi[m]) * h;
  return space.map().to_physical(ref);
}

double cell_volume(const SparseSpace& space) { return space.map().volume() / double(space.fine_cell_count()); }

}  // namespace

double evaluate_domain(const Domain& domain, const Eigen::VectorXd& coeffs, const Point& x) {
  if (coeffs.size() != domain.dofs) throw ArgumentError("evaluate_domain: coefficient length mismatch");
  const int p = domain.locate(x);
  if (p < 0) return nan;
  const Patch& patch = domain.patches[p];
  const Eigen::VectorXd seg = coeffs.segment(patch.offset, patch.size());
  return patch.kind == PatchKind::box ? evaluate(*patch.box, seg, x) : patch.triangle->evaluate(seg, x);
}

Eigen::VectorXd project_domain(const Domain& domain, const ScalarField& g) {
  Eigen::VectorXd c(domain.dofs);
  for (const Patch& patch : domain.patches)
    c.segment(patch.offset, patch.size()) =
        patch.kind == PatchKind::box ? project_l2(*patch.box, g) : patch.triangle->project(g);
  return c;
}

SquaredNorms l2_norms(const Domain& domain, const Eigen::VectorXd& coeffs, const ScalarField& g, int q) {
  if (coeffs.size() != domain.dofs) throw ArgumentError("l2_norms: coefficient length mismatch");
  if (q < 0) q = std::max(domain.degree + 3, 5);
  SquaredNorms s;
  Eigen::VectorXd phi;
  for (const Patch& patch : domain.patches) {
    const Eigen::VectorXd seg = coeffs.segment(patch.offset, patch.size());
    if (patch.kind == PatchKind::box) {
      const SparseSpace& space = *patch.box;
      const CellRule rule = cell_rule(space.dim(), space.degree(), q, false);
      const double vol = cell_volume(space), scale = 1.0 / std::sqrt(vol);
      for_each_cell(space, seg, [&](const std::array<long, kMaxDim>& cell, const Eigen::VectorXd& block) {
        const Eigen::VectorXd uh = scale * (rule.B * block);
        for (long p = 0; p < uh.size(); ++p) {
          const double e = g(cell_point(space, cell, rule.ref[p]));
          s.error += vol * rule.w[p] * (uh[p] - e) * (uh[p] - e);
          s.exact += vol * rule.w[p] * e * e;
        }
      });
    } else {
      const TriangleSpace& tri = *patch.triangle;
      for (const auto& p : tri.quadrature(q + 1)) {
        tri.values(p.x, phi);
        const double uh = phi.dot(seg), e = g(p.x);
        s.error += p.w * (uh - e) * (uh - e);
        s.exact += p.w * e * e;
      }
    }
  }
  return s;
}

ErrorReport weighted_relative_error(const Domain& domain, const OrdinateSet& set, const std::vector<Eigen::VectorXd>& U,
                                    const PhaseSpaceField& exact, int q) {
  if (static_cast<int>(U.size()) != set.size()) throw ArgumentError("weighted_relative_error: direction count mismatch");
  ErrorReport r;
  r.k = domain.degree;
  r.N = domain.level;
  r.n = set.order;
  r.dofs = domain.dofs;
  double num = 0, den = 0;
  for (int l = 0; l < set.size(); ++l) {
    const Direction w = set.directions[l];
    const SquaredNorms s = l2_norms(domain, U[l], [&](const Point& x) { return exact(x, w); }, q);
    r.direction_errors.push_back(std::sqrt(s.error));
    r.direction_norms.push_back(std::sqrt(s.exact));
    num += set.weights[l] * s.error;
    den += set.weights[l] * s.exact;
  }
  if (!(den > 0) || !std::isfinite(num)) throw DataError("weighted relative error undefined: exact solution has zero norm");
  r.relative = std::sqrt(num / den);
  return r;
}

ProjectionErrors projection_errors(const SparseSpace& space, const Eigen::VectorXd& coeffs, const ScalarField& f,
                                   const std::function<Point(const Point&)>& grad, int q) {
  if (q < 0) q = std::max(space.degree() + 3, 5);
  const int d = space.dim();
  const CellRule rule = cell_rule(d, space.degree(), q, true);
  const double vol = cell_volume(space), scale = 1.0 / std::sqrt(vol);
  Point inv_h = Point::Zero();
  for (int m = 0; m < d; ++m) inv_h[m] = double(space.cells_per_axis()) / space.map().lengths[m];
  double l2 = 0, h1 = 0;
  for_each_cell(space, coeffs, [&](const std::array<long, kMaxDim>& cell, const Eigen::VectorXd& block) {
    const Eigen::VectorXd uh = scale * (rule.B * block);
    std::array<Eigen::VectorXd, kMaxDim> du;
    for (int m = 0; m < d; ++m) du[m] = scale * inv_h[m] * (rule.dB[m] * block);
    for (long p = 0; p < uh.size(); ++p) {
      const Point x = cell_point(space, cell, rule.ref[p]);
      const double w = vol * rule.w[p];
      l2 += w * (uh[p] - f(x)) * (uh[p] - f(x));
      const Point g = grad(x);
      for (int m = 0; m < d; ++m) h1 += w * (du[m][p] - g[m]) * (du[m][p] - g[m]);
    }
  });
  return {std::sqrt(l2), std::sqrt(h1)};
}

Eigen::VectorXd flux_coefficients(const OrdinateSet& set, const std::vector<Eigen::VectorXd>& U) {
  if (U.empty() || static_cast<int>(U.size()) != set.size()) throw ArgumentError("flux_coefficients: direction count mismatch");
  Eigen::VectorXd q = Eigen::VectorXd::Zero(U[0].size());
  for (int l = 0; l < set.size(); ++l) q += set.weights[l] * U[l];
  return q / (4 * std::numbers::pi);
}

Point GridField::point(int i, int j, int l) const {
  auto coord = [](double a, double b, int n, int i) { return n > 1 ? a + (b - a) * double(i) / double(n - 1) : a; };
  return Point(coord(lo[0], hi[0], nx, i), coord(lo[1], hi[1], ny, j), coord(lo[2], hi[2], nz, l));
}

GridField sample_grid(const Domain& domain, const Eigen::VectorXd& coeffs, int nx, int ny, int nz, const Point& lo,
                      const Point& hi) {
  if (nx < 1 || ny < 1 || nz < 1) throw ArgumentError("sample_grid: grid sizes must be positive");
  GridField g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.lo = lo;
  g.hi = hi;
  g.values.resize(std::size_t(nx) * ny * nz);
  for (int l = 0; l < nz; ++l)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) g.at(i, j, l) = evaluate_domain(domain, coeffs, g.point(i, j, l));
  return g;
}

GridField photon_flux(const Domain& domain, const OrdinateSet& set, const std::vector<Eigen::VectorXd>& U, double z,
                      int samples) {
  Point lo = Point::Constant(std::numeric_limits<double>::max()), hi = -lo;
  for (const Element& e : domain.topology.elements) {
    lo = lo.cwiseMin(e.lo);
    hi = hi.cwiseMax(e.hi);
  }
  const Eigen::VectorXd q = flux_coefficients(set, U);
  if (domain.dim == 3) {
    if (samples < 0) samples = 51;
    lo[2] = hi[2] = z;
  } else {
    if (samples < 0) samples = 101;
    lo[2] = hi[2] = 0;
  }
  return sample_grid(domain, q, samples, samples, 1, lo, hi);
}

void write_grid(std::ostream& os, const GridField& g) {
  char buf[64];
  os << g.nx << ' ' << g.ny << ' ' << g.nz << '\n';
  for (const Point* p : {&g.lo, &g.hi}) {
    for (int m = 0; m < 3; ++m) {
      std::snprintf(buf, sizeof buf, "%.17g", (*p)[m]);
      os << (m ? " " : "") << buf;
    }
    os << '\n';
  }
  for (int l = 0; l < g.nz; ++l)
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double v = g.at(i, j, l);
        if (std::isnan(v)) std::snprintf(buf, sizeof buf, "nan");
        else std::snprintf(buf, sizeof buf, "%.17g", v);
        os << (i ? " " : "") << buf;
      }
      os << '\n';
    }
}

GridField read_grid(std::istream& is) {
  GridField g;
  if (!(is >> g.nx >> g.ny >> g.nz) || g.nx < 1 || g.ny < 1 || g.nz < 1) throw DataError("grid file: bad header");
  for (Point* p : {&g.lo, &g.hi})
    for (int m = 0; m < 3; ++m)
      if (!(is >> (*p)[m])) throw DataError("grid file: bad bounds");
  g.values.resize(std::size_t(g.nx) * g.ny * g.nz);
  std::string tok;
  for (double& v : g.values) {
    if (!(is >> tok)) throw DataError("grid file: truncated values");
    v = tok == "nan" ? nan : std::stod(tok);
  }
  return g;
}

void write_grid_file(const std::string& path, const GridField& g) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  write_grid(os, g);
  if (!os) throw DataError("write failed for '" + path + "'");
}

std::string study_header() { return "problem,n,k,N,theta0,dofs,error,rate,sweeps,residual,status"; }

std::string format_error(double e, bool full_precision) {
  if (std::isnan(e)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, full_precision ? "%.17e" : "%.5e", e);
  return buf;
}

double printed_rate(const std::string& previous, const std::string& current) {
  if (previous.empty() || current.empty()) return nan;
  return std::log2(std::stod(previous) / std::stod(current));
}

std::string format_study_row(const StudyRow& r, bool full_precision) {
  char rate[32] = "", th[32], res[32];
  if (std::isfinite(r.rate)) std::snprintf(rate, sizeof rate, "%.4f", r.rate);
  std::snprintf(th, sizeof th, "%.6g", r.theta0);
  std::snprintf(res, sizeof res, "%.3e", r.residual);
  std::ostringstream os;
  os << r.problem << ',' << r.n << ',' << r.k << ',' << r.N << ',' << th << ',' << r.dofs << ','
     << format_error(r.error, full_precision) << ',' << rate << ',' << r.sweeps << ',' << res << ','
     << r.status;
  return os.str();
}

}  // namespace sgrte
