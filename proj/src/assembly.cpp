#include "sgrte/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "sgrte/errors.hpp"
#include "sgrte/quadrature.hpp"

namespace sgrte {

namespace {

SpMat dense_to_sparse(const Eigen::MatrixXd& A) {
  Triplets t;
  for (Eigen::Index c = 0; c < A.cols(); ++c)
    for (Eigen::Index r = 0; r < A.rows(); ++r)
      if (A(r, c) != 0.0) t.emplace_back(r, c, A(r, c));
  SpMat S(A.rows(), A.cols());
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw DataError(std::string("non-finite entries in ") + what);
}

}  // namespace

AxisOperators build_axis_operators(const HierarchicalBasis1D& basis) {
  const int k = basis.degree();
  const int m1 = k + 1;
  const long cells = 1L << basis.max_level();
  const long S = basis.size();
  const double h = 1.0 / static_cast<double>(cells);
  const SpMat& T = basis.T();

  // local int L_b L_a' on one fine cell of width h (orthonormal L / sqrt h)
  const auto rule = gauss_legendre(k + 1);
  Eigen::MatrixXd Dloc = Eigen::MatrixXd::Zero(m1, m1);
  Eigen::VectorXd v(m1), dv(m1);
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    legendre_values_and_derivatives(k, rule.nodes[q], v, dv);
    Dloc += rule.weights[q] * dv * v.transpose();
  }
  Dloc /= h;
  Triplets t;
  for (long c = 0; c < cells; ++c)
    for (int a = 0; a < m1; ++a)
      for (int b = 0; b < m1; ++b)
        if (Dloc(a, b) != 0.0) t.emplace_back(c * m1 + a, c * m1 + b, Dloc(a, b));
  SpMat Kfine(S, S);
  Kfine.setFromTriplets(t.begin(), t.end());

  AxisOperators ops;
  ops.volume = SpMat(T.transpose() * Kfine * T);
  ops.volume.prune(0.0);

  Eigen::MatrixXd left, right;
  basis.node_traces(left, right);
  const Eigen::MatrixXd J = left.middleRows(1, cells - 1) - right.middleRows(1, cells - 1);
  const Eigen::MatrixXd A = 0.5 * (left.middleRows(1, cells - 1) + right.middleRows(1, cells - 1));
  ops.average = dense_to_sparse(J.transpose() * A);
  ops.penalty = dense_to_sparse(J.transpose() * J);
  ops.trace_low = right.row(0).transpose();
  ops.trace_high = left.row(cells).transpose();
  ops.low = dense_to_sparse(ops.trace_low * ops.trace_low.transpose());
  ops.high = dense_to_sparse(ops.trace_high * ops.trace_high.transpose());
  return ops;
}

AssemblyPlan::AssemblyPlan(const Domain& domain) : domain_(&domain) {
  const int d = domain.dim;
  std::map<std::pair<int, int>, std::shared_ptr<const AxisOperators>> ops_cache;

  for (size_t p = 0; p < domain.patches.size(); ++p) {
    const Patch& P = domain.patches[p];
    if (P.kind == PatchKind::triangle) {
      const TriangleSpace& T = *P.triangle;
      TriangleData td;
      td.patch = static_cast<int>(p);
      td.gx = Eigen::MatrixXd::Zero(T.size(), T.size());
      td.gy = td.gx;
      Eigen::VectorXd v;
      Eigen::MatrixXd g;
      for (const auto& q : T.quadrature(T.degree() + 2)) {
        T.values(q.x, v);
        T.gradients(q.x, g);
        td.gx += q.w * g.row(0).transpose() * v.transpose();
        td.gy += q.w * g.row(1).transpose() * v.transpose();
      }
      triangles_.push_back(std::move(td));
      continue;
    }
    const SparseSpace& s = *P.box;
    BoxData b;
    b.patch = static_cast<int>(p);
    auto& slot = ops_cache[{s.degree(), s.max_level()}];
    if (!slot) slot = std::make_shared<const AxisOperators>(build_axis_operators(s.basis1d()));
    b.ops = slot;
    for (int m = 0; m < d; ++m) {
      std::vector<std::pair<std::array<long, kMaxDim>, long>> keyed(s.size());
      for (long q = 0; q < s.size(); ++q) {
        std::array<long, kMaxDim> key{};
        for (int a = 0; a < d; ++a) key[a] = a == m ? 0 : s.axis_index(q, a);
        keyed[q] = {key, q};
      }
      std::sort(keyed.begin(), keyed.end());
      for (size_t i = 0; i < keyed.size();) {
        size_t j = i;
        Group g;
        while (j < keyed.size() && keyed[j].first == keyed[i].first) g.dofs.push_back(keyed[j++].second);
        b.groups[m].push_back(std::move(g));
        i = j;
      }
    }
    boxes_.push_back(std::move(b));
  }

  const int q = face_quadrature_points(domain.degree);
  auto add_face = [&](const Face& f, bool boundary) {
    FaceData fd;
    fd.normal = f.normal;
    fd.boundary = boundary;
    const auto pts = face_quadrature(f, d, q);
    fd.weights.resize(static_cast<Eigen::Index>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i) {
      fd.points.push_back(pts[i].x);
      fd.weights[static_cast<Eigen::Index>(i)] = pts[i].w;
    }
    fd.left = side_values(f.left, fd.points);
    if (!boundary) fd.right = side_values(f.right, fd.points);
    faces_.push_back(std::move(fd));
  };
  for (const Face& f : domain.topology.interior)
    if (!f.structured) add_face(f, false);
  for (const Face& f : domain.topology.boundary)
    if (!f.structured) add_face(f, true);
}

AssemblyPlan::SideValues AssemblyPlan::side_values(int elem, const std::vector<Point>& pts) const {
  const Element& el = domain_->topology.elements[elem];
  const Patch& P = domain_->patches[el.patch];
  SideValues sv;
  if (P.kind == PatchKind::triangle) {
    const TriangleSpace& T = *P.triangle;
    sv.V.resize(static_cast<Eigen::Index>(pts.size()), T.size());
    Eigen::VectorXd v;
    for (size_t i = 0; i < pts.size(); ++i) {
      T.values(pts[i], v);
      sv.V.row(static_cast<Eigen::Index>(i)) = v.transpose();
    }
    for (int j = 0; j < T.size(); ++j) sv.dofs.push_back(P.offset + j);
    return sv;
  }
  const SparseSpace& s = *P.box;
  const int d = s.dim(), m1 = s.degree() + 1;
  const long n = s.cells_per_axis();
  const CellExpansion ex = s.cell_dofs(el.cell);
  double vol = 1.0;
  for (int a = 0; a < d; ++a) vol *= s.map().lengths[a] / static_cast<double>(n);
  const double scale = 1.0 / std::sqrt(vol);
  Eigen::MatrixXd Lrow(static_cast<Eigen::Index>(pts.size()), s.local_size());
  std::array<Eigen::VectorXd, kMaxDim> lv;
  for (size_t i = 0; i < pts.size(); ++i) {
    const Point ref = s.map().to_reference(pts[i]);
    for (int a = 0; a < d; ++a) {
      const double xi = std::clamp(ref[a] * n - static_cast<double>(el.cell[a]), 0.0, 1.0);
      lv[a].resize(m1);
      legendre_values(s.degree(), xi, lv[a]);
    }
    for (long loc = 0; loc < s.local_size(); ++loc) {
      long r = loc;
      double prod = scale;
      for (int a = d - 1; a >= 0; --a) {
        prod *= lv[a][r % m1];
        r /= m1;
      }
      Lrow(static_cast<Eigen::Index>(i), loc) = prod;
    }
  }
  sv.V = Lrow * ex.local;
  for (long dof : ex.dofs) sv.dofs.push_back(P.offset + dof);
  return sv;
}

void AssemblyPlan::expand_axis(const BoxData& b, int axis, const SpMat& A, Triplets& out) const {
  const Patch& P = domain_->patches[b.patch];
  const SparseSpace& s = *P.box;
  std::vector<long> pos(static_cast<size_t>(s.axis_size()), -1);
  for (const Group& g : b.groups[axis]) {
    for (long dof : g.dofs) pos[s.axis_index(dof, axis)] = dof;
    for (long q : g.dofs) {
      const long c = s.axis_index(q, axis);
      for (SpMat::InnerIterator it(A, c); it; ++it) {
        const long p = pos[it.row()];
        if (p >= 0) out.emplace_back(P.offset + p, P.offset + q, it.value());
      }
    }
    for (long dof : g.dofs) pos[s.axis_index(dof, axis)] = -1;
  }
}

void AssemblyPlan::transport_triplets(const Direction& omega, double sigma_t, double theta0, const OperatorTerms& terms,
                                      Triplets& out) const {
  const Domain& D = *domain_;
  const int d = D.dim;
  if (terms.mass && sigma_t != 0.0)
    for (long i = 0; i < D.dofs; ++i) out.emplace_back(i, i, sigma_t);

  for (const BoxData& b : boxes_) {
    const Patch& P = D.patches[b.patch];
    const AxisOperators& ops = *b.ops;
    for (int m = 0; m < d; ++m) {
      const double w = omega[m];
      SpMat A(ops.volume.rows(), ops.volume.cols());
      if (terms.advection) A -= w * ops.volume;
      if (terms.average) {
        A += w * ops.average;
        if (w > 0 && P.physical_side[2 * m + 1]) A += w * ops.high;
        if (w < 0 && P.physical_side[2 * m]) A -= w * ops.low;
      }
      if (terms.penalty && theta0 != 0.0) A += theta0 * std::abs(w) * ops.penalty;
      A /= P.box->map().lengths[m];
      A.prune(0.0);
      expand_axis(b, m, A, out);
    }
  }

  if (terms.advection)
    for (const TriangleData& t : triangles_) {
      const Patch& P = D.patches[t.patch];
      const Eigen::MatrixXd K = -(omega[0] * t.gx + omega[1] * t.gy);
      for (Eigen::Index q = 0; q < K.cols(); ++q)
        for (Eigen::Index p = 0; p < K.rows(); ++p) out.emplace_back(P.offset + p, P.offset + q, K(p, q));
    }

  for (const FaceData& f : faces_) {
    double an = 0;
    for (int a = 0; a < d; ++a) an += omega[a] * f.normal[a];
    const auto W = f.weights.asDiagonal();
    if (f.boundary) {
      if (!terms.average || an <= 0) continue;
      const Eigen::MatrixXd B = an * (f.left.V.transpose() * W * f.left.V);
      for (Eigen::Index q = 0; q < B.cols(); ++q)
        for (Eigen::Index p = 0; p < B.rows(); ++p) out.emplace_back(f.left.dofs[p], f.left.dofs[q], B(p, q));
      continue;
    }
    const Eigen::Index nl = f.left.V.cols(), nr = f.right.V.cols(), nq = f.weights.size();
    Eigen::MatrixXd J(nq, nl + nr), Av(nq, nl + nr);
    J << f.left.V, -f.right.V;
    Av << 0.5 * f.left.V, 0.5 * f.right.V;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nl + nr, nl + nr);
    if (terms.average) B += an * (J.transpose() * W * Av);
    if (terms.penalty && theta0 != 0.0) B += theta0 * std::abs(an) * (J.transpose() * W * J);
    auto dof = [&](Eigen::Index i) { return i < nl ? f.left.dofs[i] : f.right.dofs[i - nl]; };
    for (Eigen::Index q = 0; q < B.cols(); ++q)
      for (Eigen::Index p = 0; p < B.rows(); ++p)
        if (B(p, q) != 0.0) out.emplace_back(dof(p), dof(q), B(p, q));
  }
}

SpMat AssemblyPlan::transport(const Direction& omega, double sigma_t, double theta0, const OperatorTerms& terms) const {
  Triplets t;
  transport_triplets(omega, sigma_t, theta0, terms, t);
  SpMat A(size(), size());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

Eigen::VectorXd AssemblyPlan::load(const Direction& omega, const PhaseSpaceField& source, const PhaseSpaceField& inflow,
                                   bool zero_source, bool zero_inflow) const {
  const Domain& D = *domain_;
  const int d = D.dim;
  Eigen::VectorXd F = Eigen::VectorXd::Zero(D.dofs);

  for (const Patch& P : D.patches) {
    if (!zero_source) {
      if (P.kind == PatchKind::box)
        F.segment(P.offset, P.size()) += project_l2(*P.box, [&](const Point& x) { return source(x, omega); });
      else
        F.segment(P.offset, P.size()) += P.triangle->project([&](const Point& x) { return source(x, omega); });
    }
    if (zero_inflow || P.kind != PatchKind::box) continue;

    const SparseSpace& s = *P.box;
    const BoxMap& map = s.map();
    const int k = s.degree(), N = s.max_level();
    const AxisOperators* ops = nullptr;
    for (const BoxData& b : boxes_)
      if (&D.patches[b.patch] == &P) ops = b.ops.get();
    for (int side = 0; side < 2 * d; ++side) {
      const int m = side / 2, hi = side % 2;
      const double an = hi ? omega[m] : -omega[m];
      if (!P.physical_side[side] || an >= 0) continue;
      std::array<int, kMaxDim> others{};
      int no = 0;
      BoxMap sb;
      sb.dim = d - 1;
      for (int a = 0; a < d; ++a) {
        if (a == m) continue;
        others[no] = a;
        sb.origin[no] = map.origin[a];
        sb.lengths[no] = map.lengths[a];
        ++no;
      }
      auto alpha = [&](const Point& y) {
        Point x = Point::Zero();
        x[m] = map.origin[m] + (hi ? map.lengths[m] : 0.0);
        for (int i = 0; i < no; ++i) x[others[i]] = y[i];
        return inflow(x, omega);
      };
      Eigen::VectorXd side_coeffs = project_fine(no, k, N, sb, alpha, variable_quadrature_points(k));
      const SpMat Tt = s.basis1d().T().transpose();
      for (int i = 0; i < no; ++i) apply_along_axis(side_coeffs, no, s.axis_size(), i, Tt);
      const Eigen::VectorXd& trace = hi ? ops->trace_high : ops->trace_low;
      const double tscale = -an / std::sqrt(map.lengths[m]);
      for (long p = 0; p < s.size(); ++p) {
        const double tr = trace[s.axis_index(p, m)];
        if (tr == 0.0) continue;
        long off = 0;
        for (int i = 0; i < no; ++i) off = off * s.axis_size() + s.axis_index(p, others[i]);
        F[P.offset + p] += tscale * side_coeffs[off] * tr;
      }
    }
  }

  if (!zero_inflow)
    for (const FaceData& f : faces_) {
      if (!f.boundary) continue;
      double an = 0;
      for (int a = 0; a < d; ++a) an += omega[a] * f.normal[a];
      if (an >= 0) continue;
      Eigen::VectorXd a(f.weights.size());
      for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = f.weights[i] * inflow(f.points[i], omega);
      const Eigen::VectorXd c = -an * (f.left.V.transpose() * a);
      for (size_t j = 0; j < f.left.dofs.size(); ++j) F[f.left.dofs[j]] += c[static_cast<Eigen::Index>(j)];
    }
  check_finite(F, "load vector");
  return F;
}

long BlockSystem::nonzeros() const {
  long nnz = 0;
  for (const SpMat& A : D) nnz += A.nonZeros();
  if (sigma_s != 0.0)
    for (int l = 0; l < L; ++l)
      for (int i = 0; i < L; ++i)
        if (i != l && G(l, i) != 0.0) nnz += M;
  return nnz;
}

bool BlockSystem::coupled() const {
  if (sigma_s == 0.0) return false;
  for (int l = 0; l < L; ++l)
    for (int i = 0; i < L; ++i)
      if (i != l && G(l, i) != 0.0) return true;
  return false;
}

Eigen::VectorXd BlockSystem::apply(const Eigen::VectorXd& x) const {
  if (x.size() != dimension()) throw ArgumentError("BlockSystem::apply: size mismatch");
  Eigen::VectorXd y(dimension());
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd yl = D[l] * x.segment(l * M, M);
    for (int i = 0; i < L; ++i)
      if (i != l && G(l, i) != 0.0) yl -= sigma_s * G(l, i) * x.segment(i * M, M);
    y.segment(l * M, M) = yl;
  }
  return y;
}

Eigen::VectorXd BlockSystem::rhs() const {
  Eigen::VectorXd f(dimension());
  for (int l = 0; l < L; ++l) f.segment(l * M, M) = F[l];
  return f;
}

BlockSystem build_system(const AssemblyPlan& plan, const OrdinateSet& set, const KernelMatrix& kernel,
                         const SystemInputs& in) {
  if (kernel.G.rows() != set.size()) throw ArgumentError("kernel size does not match the ordinate set");
  if (in.theta0 < 0) throw ArgumentError("theta0 must be nonnegative");
  BlockSystem sys;
  sys.L = set.size();
  sys.M = plan.size();
  sys.G = kernel.G;
  sys.sigma_s = in.sigma_s;
  sys.D.reserve(sys.L);
  sys.F.reserve(sys.L);
  for (int l = 0; l < sys.L; ++l) {
    const Direction& w = set.directions[l];
    sys.D.push_back(plan.transport(w, in.sigma_t - in.sigma_s * kernel.G(l, l), in.theta0));
    sys.F.push_back(plan.load(w, in.source, in.inflow, in.zero_source, in.zero_inflow));
  }
  return sys;
}

void write_sparsity_summary(std::ostream& os, const BlockSystem& sys) {
  os << "# dimension " << sys.dimension() << " nnz " << sys.nonzeros() << " sparsity " << std::fixed
     << std::setprecision(4) << 100.0 * sys.sparsity_ratio() << "%" << std::defaultfloat << '\n';
}

void write_matrix(std::ostream& os, const BlockSystem& sys) {
  os << std::setprecision(17);
  for (int l = 0; l < sys.L; ++l) {
    for (int i = 0; i < sys.L; ++i) {
      if (i == l) {
        const SpMat& A = sys.D[l];
        for (Eigen::Index c = 0; c < A.outerSize(); ++c)
          for (SpMat::InnerIterator it(A, c); it; ++it)
            os << l * sys.M + it.row() << ' ' << l * sys.M + it.col() << ' ' << it.value() << '\n';
      } else if (sys.sigma_s != 0.0 && sys.G(l, i) != 0.0) {
        const double v = -sys.sigma_s * sys.G(l, i);
        for (long r = 0; r < sys.M; ++r) os << l * sys.M + r << ' ' << i * sys.M + r << ' ' << v << '\n';
      }
    }
  }
  write_sparsity_summary(os, sys);
}

}  // namespace sgrte
