#include "sgrte/domains.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "sgrte/errors.hpp"
#include "sgrte/quadrature.hpp"

namespace sgrte {

namespace {

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::shared_ptr<const TriangleBasis> cached_basis(int k) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const TriangleBasis>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[k];
  if (!slot) slot = std::make_shared<const TriangleBasis>(triangle_orthobasis(k));
  return slot;
}

}  // namespace

double reference_triangle_moment(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

void TriangleBasis::values(double r, double s, Eigen::VectorXd& out) const {
  Eigen::VectorXd mono(size());
  for (int j = 0; j < size(); ++j) mono[j] = std::pow(r, exponents[j][0]) * std::pow(s, exponents[j][1]);
  out = coeffs * mono;
}

void TriangleBasis::gradients(double r, double s, Eigen::MatrixXd& out) const {
  Eigen::MatrixXd dm(size(), 2);
  for (int j = 0; j < size(); ++j) {
    const int a = exponents[j][0], b = exponents[j][1];
    dm(j, 0) = a == 0 ? 0.0 : a * std::pow(r, a - 1) * std::pow(s, b);
    dm(j, 1) = b == 0 ? 0.0 : b * std::pow(r, a) * std::pow(s, b - 1);
  }
  out = (coeffs * dm).transpose();
}

TriangleBasis triangle_orthobasis(int k) {
  if (k < 0 || k > 4) throw ArgumentError("triangle basis degree must be in [0,4]");
  TriangleBasis tb;
  tb.degree = k;
  for (int deg = 0; deg <= k; ++deg)
    for (int b = 0; b <= deg; ++b) tb.exponents.push_back({deg - b, b});
  const int n = tb.size();
  // long double keeps the monomial Gram-Schmidt accurate to ~1e-15 at k = 4
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  MatL gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int a = tb.exponents[i][0] + tb.exponents[j][0], b = tb.exponents[i][1] + tb.exponents[j][1];
      long double m = 1;
      for (int t = 2; t <= a; ++t) m *= t;
      for (int t = 2; t <= b; ++t) m *= t;
      for (int t = 2; t <= a + b + 2; ++t) m /= t;
      gram(i, j) = m;
    }
  auto ip = [&](const VecL& p, const VecL& q) { return p.dot(gram * q); };

  MatL c = MatL::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    VecL v = VecL::Unit(n, i);
    const long double seed = std::sqrt(ip(v, v));
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < i; ++j) {
        const VecL q = c.row(j).transpose();
        v -= ip(v, q) * q;
      }
    const long double nv = std::sqrt(ip(v, v));
    if (nv < 1e-10L * seed) throw InternalError("triangle Gram-Schmidt lost rank");
    v /= nv;
    if (v[i] < 0) v = -v;
    c.row(i) = v.transpose();
  }
  tb.coeffs = c.cast<double>();
  return tb;
}

TriangleSpace::TriangleSpace(int k, const std::array<Point, 3>& vertices) : basis_(cached_basis(k)), v_(vertices) {
  jac_.col(0) = (v_[1] - v_[0]).head<2>();
  jac_.col(1) = (v_[2] - v_[0]).head<2>();
  const double det = jac_.determinant();
  const double scale = std::max((v_[1] - v_[0]).squaredNorm(), (v_[2] - v_[0]).squaredNorm());
  if (!(std::abs(det) > 1e-14 * scale)) throw GeometryError("triangle vertices are collinear");
  if (det < 0) throw GeometryError("triangle vertices must be counterclockwise");
  area_ = 0.5 * det;
  jac_inv_ = jac_.inverse();
}

Point TriangleSpace::to_physical(double r, double s) const {
  Point x = v_[0];
  x.head<2>() += jac_ * Eigen::Vector2d(r, s);
  return x;
}

Eigen::Vector2d TriangleSpace::to_reference(const Point& x) const { return jac_inv_ * (x - v_[0]).head<2>(); }

bool TriangleSpace::contains(const Point& x, double slack) const {
  const Eigen::Vector2d rs = to_reference(x);
  return rs[0] >= -slack && rs[1] >= -slack && rs[0] + rs[1] <= 1 + slack;
}

void TriangleSpace::values(const Point& x, Eigen::VectorXd& out) const {
  const Eigen::Vector2d rs = to_reference(x);
  basis_->values(rs[0], rs[1], out);
  out /= std::sqrt(2 * area_);
}

void TriangleSpace::gradients(const Point& x, Eigen::MatrixXd& out) const {
  const Eigen::Vector2d rs = to_reference(x);
  Eigen::MatrixXd g;
  basis_->gradients(rs[0], rs[1], g);
  out = jac_inv_.transpose() * g / std::sqrt(2 * area_);
}

std::vector<WeightedPoint> TriangleSpace::quadrature(int q) const {
  const auto rule = gauss_legendre(q);
  std::vector<WeightedPoint> pts;
  pts.reserve(q * q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const double u = rule.nodes[i], v = rule.nodes[j];
      pts.push_back({to_physical(u, (1 - u) * v), rule.weights[i] * rule.weights[j] * (1 - u) * 2 * area_});
    }
  return pts;
}

Eigen::VectorXd TriangleSpace::project(const ScalarField& f, int q) const {
  if (q < 0) q = variable_quadrature_points(degree()) + 1;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(size()), phi;
  for (const auto& p : quadrature(q)) {
    const double v = f(p.x);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite value at quadrature point (" << p.x.transpose() << ")";
      throw DataError(msg.str());
    }
    values(p.x, phi);
    c += p.w * v * phi;
  }
  return c;
}

double TriangleSpace::evaluate(const Eigen::VectorXd& coeffs, const Point& x) const {
  if (!contains(x)) throw ArgumentError("point outside triangle");
  Eigen::VectorXd phi;
  values(x, phi);
  return coeffs.dot(phi);
}

long Patch::size() const { return kind == PatchKind::box ? box->size() : triangle->size(); }

// ---- topology ------------------------------------------------------------------

namespace {

struct Edge {
  int elem;
  int patch;
  int side;  // box side index, or -1 for triangle edges
  Point p0, p1;
  Point normal;
};

Point cell_corner(const SparseSpace& s, const std::array<long, kMaxDim>& cell, const std::array<int, kMaxDim>& hi) {
  Point ref = Point::Zero();
  const double h = 1.0 / s.cells_per_axis();
  for (int m = 0; m < s.dim(); ++m) ref[m] = (cell[m] + hi[m]) * h;
  return s.map().to_physical(ref);
}

long cell_linear(const std::array<long, kMaxDim>& c, int d, long n) {
  long idx = 0;
  for (int m = 0; m < d; ++m) idx = idx * n + c[m];
  return idx;
}

std::array<long, kMaxDim> cell_multi(long idx, int d, long n) {
  std::array<long, kMaxDim> c{};
  for (int m = d - 1; m >= 0; --m) {
    c[m] = idx % n;
    idx /= n;
  }
  return c;
}

// Faces strictly inside one box patch.
void structured_faces(const SparseSpace& s, int elem0, std::vector<Face>& out) {
  const int d = s.dim();
  const long n = s.cells_per_axis();
  const long cells = s.fine_cell_count();
  for (long e = 0; e < cells; ++e) {
    const auto c = cell_multi(e, d, n);
    for (int m = 0; m < d; ++m) {
      if (c[m] + 1 >= n) continue;
      auto nb = c;
      ++nb[m];
      Face f;
      f.left = elem0 + static_cast<int>(e);
      f.right = elem0 + static_cast<int>(cell_linear(nb, d, n));
      std::array<int, kMaxDim> hi{};
      hi[m] = 1;
      f.origin = cell_corner(s, c, hi);
      int t = 0;
      for (int a = 0; a < d; ++a) {
        if (a == m) continue;
        Point span = Point::Zero();
        span[a] = s.map().lengths[a] / n;
        (t++ == 0 ? f.e1 : f.e2) = span;
      }
      f.normal = Point::Unit(m);
      f.measure = d == 2 ? f.e1.norm() : f.e1.norm() * f.e2.norm();
      f.structured = true;
      out.push_back(f);
    }
  }
}

// Faces of a box patch side in 3-D (only used for single-box domains).
void side_faces_3d(const SparseSpace& s, int elem0, int side, std::vector<Face>& out) {
  const int m = side / 2, hi = side % 2;
  const long n = s.cells_per_axis();
  for (long e = 0; e < s.fine_cell_count(); ++e) {
    const auto c = cell_multi(e, 3, n);
    if (c[m] != (hi ? n - 1 : 0)) continue;
    Face f;
    f.left = elem0 + static_cast<int>(e);
    std::array<int, kMaxDim> corner{};
    corner[m] = hi;
    f.origin = cell_corner(s, c, corner);
    int t = 0;
    for (int a = 0; a < 3; ++a) {
      if (a == m) continue;
      Point span = Point::Zero();
      span[a] = s.map().lengths[a] / n;
      (t++ == 0 ? f.e1 : f.e2) = span;
    }
    f.normal = (hi ? 1.0 : -1.0) * Point::Unit(m);
    f.measure = f.e1.norm() * f.e2.norm();
    f.structured = true;
    out.push_back(f);
  }
}

}  // namespace

MeshTopology build_topology(int dim, std::vector<Patch>& patches) {
  MeshTopology topo;
  std::vector<int> elem0(patches.size());
  for (size_t p = 0; p < patches.size(); ++p) {
    elem0[p] = static_cast<int>(topo.elements.size());
    const Patch& P = patches[p];
    if (P.kind == PatchKind::box) {
      const SparseSpace& s = *P.box;
      const long n = s.cells_per_axis();
      for (long e = 0; e < s.fine_cell_count(); ++e) {
        Element el;
        el.patch = static_cast<int>(p);
        el.cell = cell_multi(e, dim, n);
        el.lo = cell_corner(s, el.cell, {0, 0, 0});
        el.hi = cell_corner(s, el.cell, {1, 1, 1});
        topo.elements.push_back(el);
      }
      structured_faces(s, elem0[p], topo.interior);
    } else {
      if (dim != 2) throw GeometryError("triangle patches need a 2-D domain");
      Element el;
      el.patch = static_cast<int>(p);
      const auto& v = P.triangle->vertices();
      el.lo = v[0].cwiseMin(v[1]).cwiseMin(v[2]);
      el.hi = v[0].cwiseMax(v[1]).cwiseMax(v[2]);
      topo.elements.push_back(el);
    }
  }

  if (dim == 3) {
    if (patches.size() != 1 || patches[0].kind != PatchKind::box)
      throw GeometryError("3-D domains must be a single box patch");
    for (int side = 0; side < 6; ++side) {
      side_faces_3d(*patches[0].box, 0, side, topo.boundary);
      patches[0].physical_side[side] = true;
    }
    return topo;
  }

  // 2-D: collect patch-boundary edges and match them along shared lines.
  std::vector<Edge> edges;
  for (size_t p = 0; p < patches.size(); ++p) {
    const Patch& P = patches[p];
    if (P.kind == PatchKind::box) {
      const SparseSpace& s = *P.box;
      const long n = s.cells_per_axis();
      for (int side = 0; side < 4; ++side) {
        const int m = side / 2, hi = side % 2, o = 1 - m;
        for (long j = 0; j < n; ++j) {
          std::array<long, kMaxDim> c{};
          c[m] = hi ? n - 1 : 0;
          c[o] = j;
          std::array<int, kMaxDim> a{}, b{};
          a[m] = b[m] = hi;
          b[o] = 1;
          edges.push_back({elem0[p] + static_cast<int>(cell_linear(c, 2, n)), static_cast<int>(p), side,
                           cell_corner(s, c, a), cell_corner(s, c, b), (hi ? 1.0 : -1.0) * Point::Unit(m)});
        }
      }
    } else {
      const auto& v = P.triangle->vertices();
      for (int e = 0; e < 3; ++e) {
        const Point a = v[e], b = v[(e + 1) % 3];
        const Point t = (b - a).normalized();
        edges.push_back({elem0[p], static_cast<int>(p), -1, a, b, Point(t[1], -t[0], 0)});
      }
    }
  }

  // canonical line direction: normal with angle in (-pi/2, pi/2]
  struct Keyed {
    double angle, offset;
    int sign;
    size_t edge;
  };
  std::vector<Keyed> keys;
  for (size_t i = 0; i < edges.size(); ++i) {
    Point n = edges[i].normal;
    int sign = 1;
    if (n[0] < -1e-12 || (std::abs(n[0]) <= 1e-12 && n[1] < 0)) {
      n = -n;
      sign = -1;
    }
    keys.push_back({std::atan2(n[1], n[0]), n.dot(edges[i].p0), sign, i});
  }
  std::sort(keys.begin(), keys.end(), [](const Keyed& a, const Keyed& b) {
    if (std::abs(a.angle - b.angle) > 1e-9) return a.angle < b.angle;
    return a.offset < b.offset - 1e-9;
  });

  std::vector<std::array<int, 2>> side_hits(patches.size() * 4, {0, 0});  // (boundary, interior) pieces per box side
  const double tol = 1e-10;
  for (size_t g0 = 0; g0 < keys.size();) {
    size_t g1 = g0 + 1;
    while (g1 < keys.size() && std::abs(keys[g1].angle - keys[g0].angle) <= 1e-9 &&
           std::abs(keys[g1].offset - keys[g0].offset) <= 1e-9)
      ++g1;
    const Point n(std::cos(keys[g0].angle), std::sin(keys[g0].angle), 0);
    const Point tan(-n[1], n[0], 0);
    struct Span {
      double a, b;
      int sign;
      size_t edge;
    };
    std::vector<Span> spans;
    std::vector<double> bps;
    for (size_t i = g0; i < g1; ++i) {
      const Edge& e = edges[keys[i].edge];
      double a = tan.dot(e.p0), b = tan.dot(e.p1);
      if (a > b) std::swap(a, b);
      spans.push_back({a, b, keys[i].sign, keys[i].edge});
      bps.push_back(a);
      bps.push_back(b);
    }
    std::sort(bps.begin(), bps.end());
    std::vector<double> pts;
    for (double t : bps)
      if (pts.empty() || t - pts.back() > tol) pts.push_back(t);
    std::sort(spans.begin(), spans.end(), [](const Span& x, const Span& y) { return x.a < y.a; });

    const double offset = keys[g0].offset;
    int prev_pos = -2, prev_neg = -2;
    Face* open = nullptr;
    std::vector<Face>* open_list = nullptr;
    for (size_t q = 0; q + 1 < pts.size(); ++q) {
      const double mid = 0.5 * (pts[q] + pts[q + 1]);
      int pos = -1, neg = -1;
      for (const Span& s : spans) {
        if (s.a > mid) break;
        if (s.b < mid) continue;
        int& slot = s.sign > 0 ? pos : neg;
        if (slot >= 0) throw GeometryError("overlapping elements along a shared edge");
        slot = static_cast<int>(s.edge);
      }
      if (pos < 0 && neg < 0) {
        prev_pos = prev_neg = -2;
        open = nullptr;
        continue;
      }
      const Point a = offset * n + pts[q] * tan, b = offset * n + pts[q + 1] * tan;
      if (open && pos == prev_pos && neg == prev_neg) {
        open->e1 = b - open->origin;
        open->measure = open->e1.norm();
        continue;
      }
      prev_pos = pos;
      prev_neg = neg;
      Face f;
      f.origin = a;
      f.e1 = b - a;
      f.measure = f.e1.norm();
      if (pos >= 0 && neg >= 0) {
        f.left = edges[pos].elem;
        f.right = edges[neg].elem;
        f.normal = n;
        f.structured = false;
        for (int e : {pos, neg})
          if (edges[e].side >= 0) ++side_hits[edges[e].patch * 4 + edges[e].side][1];
        open_list = &topo.interior;
      } else {
        const Edge& e = edges[pos >= 0 ? pos : neg];
        f.left = e.elem;
        f.normal = e.normal;
        f.structured = e.side >= 0;
        if (e.side >= 0) ++side_hits[e.patch * 4 + e.side][0];
        open_list = &topo.boundary;
      }
      open_list->push_back(f);
      open = &open_list->back();
    }
    g0 = g1;
  }

  for (size_t p = 0; p < patches.size(); ++p) {
    if (patches[p].kind != PatchKind::box) continue;
    for (int side = 0; side < 4; ++side) {
      const auto& h = side_hits[p * 4 + side];
      if (h[0] > 0 && h[1] > 0) throw GeometryError("box patch side is only partly on the domain boundary");
      patches[p].physical_side[side] = h[0] > 0;
    }
  }
  return topo;
}

std::vector<WeightedPoint> face_quadrature(const Face& f, int dim, int q) {
  const auto rule = gauss_legendre(q);
  std::vector<WeightedPoint> pts;
  if (dim == 2) {
    for (int i = 0; i < q; ++i) pts.push_back({f.origin + rule.nodes[i] * f.e1, rule.weights[i] * f.measure});
  } else {
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        pts.push_back({f.origin + rule.nodes[i] * f.e1 + rule.nodes[j] * f.e2, rule.weights[i] * rule.weights[j] * f.measure});
  }
  return pts;
}

// ---- domains ---------------------------------------------------------------------

int Domain::locate(const Point& x, double slack) const {
  for (size_t p = 0; p < patches.size(); ++p) {
    const Patch& P = patches[p];
    if (P.kind == PatchKind::triangle) {
      if (P.triangle->contains(x, slack)) return static_cast<int>(p);
      continue;
    }
    const BoxMap& m = P.box->map();
    bool in = true;
    for (int a = 0; a < dim; ++a)
      in = in && x[a] >= m.origin[a] - slack * m.lengths[a] && x[a] <= m.origin[a] + m.lengths[a] * (1 + slack);
    if (in) return static_cast<int>(p);
  }
  return -1;
}

double Domain::volume() const {
  double v = 0;
  for (const Patch& P : patches) v += P.kind == PatchKind::box ? P.box->map().volume() : P.triangle->area();
  return v;
}

namespace {

Domain finish(std::string name, int dim, int k, int N, std::vector<Patch> patches) {
  Domain d;
  d.name = std::move(name);
  d.dim = dim;
  d.degree = k;
  d.level = N;
  long off = 0;
  for (Patch& p : patches) {
    p.offset = off;
    off += p.size();
  }
  d.dofs = off;
  d.topology = build_topology(dim, patches);
  d.patches = std::move(patches);
  return d;
}

Patch box_patch(int d, int k, int N, const BoxMap& m) {
  Patch p;
  p.kind = PatchKind::box;
  p.box = std::make_shared<const SparseSpace>(d, k, N, m);
  return p;
}

}  // namespace

Domain make_box(int d, int k, int N, const BoxMap& map) {
  if (d != 2 && d != 3) throw ArgumentError("spatial dimension must be 2 or 3");
  BoxMap m = map;
  m.dim = d;
  return finish(d == 2 ? "square" : "cube", d, k, N, {box_patch(d, k, N, m)});
}

Domain make_unit_box(int d, int k, int N) {
  BoxMap m;
  m.dim = d;
  return make_box(d, k, N, m);
}

Domain make_lshape(int k, int N) {
  std::vector<Patch> patches;
  for (const Point& o : {Point(0, 1, 0), Point(0, 0, 0), Point(1, 0, 0)}) {
    BoxMap m;
    m.dim = 2;
    m.origin = o;
    patches.push_back(box_patch(2, k, N, m));
  }
  return finish("lshape", 2, k, N, std::move(patches));
}

Domain make_circle(int k, int N, double radius, const Point& center, double half) {
  if (!(radius > 0)) throw GeometryError("circle radius must be positive");
  if (half < 0) half = radius / std::numbers::sqrt2;
  if (!(half > 0) || half * std::numbers::sqrt2 > radius * (1 + 1e-12))
    throw GeometryError("inner square must lie inside the circle");
  const double a = half, r = radius;
  BoxMap m;
  m.dim = 2;
  m.origin = center - Point(a, a, 0);
  m.origin[2] = 0;
  m.lengths = Point(2 * a, 2 * a, 1);
  std::vector<Patch> patches{box_patch(2, k, N, m)};
  const std::array<std::array<Point, 3>, 2> base{{{Point(a, -a, 0), Point(r, 0, 0), Point(a, 0, 0)},
                                                  {Point(a, 0, 0), Point(r, 0, 0), Point(a, a, 0)}}};
  for (int rot = 0; rot < 4; ++rot) {
    const double c = std::cos(rot * std::numbers::pi / 2), s = std::sin(rot * std::numbers::pi / 2);
    for (const auto& tri : base) {
      std::array<Point, 3> v;
      for (int i = 0; i < 3; ++i) {
        v[i] = Point(std::round(c) * tri[i][0] - std::round(s) * tri[i][1], std::round(s) * tri[i][0] + std::round(c) * tri[i][1], 0);
        v[i] += Point(center[0], center[1], 0);
      }
      Patch p;
      p.kind = PatchKind::triangle;
      p.triangle = std::make_shared<const TriangleSpace>(k, v);
      patches.push_back(p);
    }
  }
  return finish("circle", 2, k, N, std::move(patches));
}

}  // namespace sgrte
