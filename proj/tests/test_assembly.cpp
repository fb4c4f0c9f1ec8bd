#include <Eigen/SparseLU>
#include <cmath>
#include <random>

#include "doctest.h"
#include "sgrte/assembly.hpp"
#include "sgrte/errors.hpp"
#include "sgrte/postprocess.hpp"
#include "sgrte/quadrature.hpp"

using namespace sgrte;

namespace {

Eigen::VectorXd random_vector(long n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(n);
  for (long i = 0; i < n; ++i) x[i] = g(rng);
  return x;
}

Direction unit(double a, double b, double c) { return Direction(a, b, c).normalized(); }

// sigma_t |u|^2 + 1/2 int_{dD} |w.n| u^2 + theta0 sum_int int |w.n| [[u]]^2, from point values.
double energy_oracle(const Domain& D, const Eigen::VectorXd& c, const Direction& w, double sigma_t, double theta0) {
  const double delta = 1e-9;
  const int q = D.degree + 2;
  double e = sigma_t * c.squaredNorm();
  for (const Face& f : D.topology.boundary)
    for (const auto& p : face_quadrature(f, D.dim, q)) {
      const double u = evaluate_domain(D, c, p.x - delta * f.normal);
      e += 0.5 * std::abs(w.dot(f.normal)) * p.w * u * u;
    }
  for (const Face& f : D.topology.interior)
    for (const auto& p : face_quadrature(f, D.dim, q)) {
      const double jump = evaluate_domain(D, c, p.x - delta * f.normal) - evaluate_domain(D, c, p.x + delta * f.normal);
      e += theta0 * std::abs(w.dot(f.normal)) * p.w * jump * jump;
    }
  return e;
}

// Exactness of the scheme: for u in the space and data f = w.grad u + sigma_t u,
// alpha = u, the projected u satisfies the discrete equations.
void check_consistency(const Domain& D, const Direction& w, const ScalarField& u,
                       const std::function<Point(const Point&)>& grad, double theta0) {
  AssemblyPlan plan(D);
  const double sigma_t = 1.5;
  PhaseSpaceField f = [&](const Point& x, const Direction& v) {
    Direction adv = v;
    if (D.dim == 2) adv[2] = 0;
    return adv.dot(grad(x)) + sigma_t * u(x);
  };
  PhaseSpaceField alpha = [&](const Point& x, const Direction&) { return u(x); };
  const Eigen::VectorXd c = project_domain(D, u);
  const Eigen::VectorXd r = plan.transport(w, sigma_t, theta0) * c - plan.load(w, f, alpha);
  CHECK(r.norm() <= 1e-9 * (1 + c.norm() * (1 + theta0)));
}

}  // namespace

TEST_CASE("mass term is sigma_t times identity") {
  for (const Domain& D : {make_unit_box(2, 2, 3), make_unit_box(3, 1, 2), make_lshape(1, 2), make_circle(2, 2, 0.5, Point(0.5, 0.5, 0))}) {
    AssemblyPlan plan(D);
    OperatorTerms t{true, false, false, false};
    const SpMat A = plan.transport(unit(1, 2, 3), 2.5, 1e3, t);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(A);
    CHECK((dense - 2.5 * Eigen::MatrixXd::Identity(D.dofs, D.dofs)).norm() < 1e-12);
  }
}

TEST_CASE("k = 0 central flux and penalty against hand values") {
  // Two cells in x per row on a 2-D N = 1 box; omega = +x only sees x-faces.
  const Domain D = make_unit_box(2, 0, 1);
  AssemblyPlan plan(D);
  const Direction w(1, 0, 0);
  const Eigen::MatrixXd avg = Eigen::MatrixXd(plan.transport(w, 0, 0, {false, false, true, false}));
  const Eigen::MatrixXd pen = Eigen::MatrixXd(plan.transport(w, 0, 1, {false, false, false, true}));
  REQUIRE(D.dofs == 3);
  // Cell values of each basis function at the four cell centers.
  auto val = [&](long p, double x, double y) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(3, p);
    return evaluate_domain(D, e, Point(x, y, 0));
  };
  for (long m = 0; m < 3; ++m)
    for (long n = 0; n < 3; ++n) {
      double a = 0, b = 0;
      for (double y : {0.25, 0.75}) {
        const double uL = val(m, 0.25, y), uR = val(m, 0.75, y);
        const double vL = val(n, 0.25, y), vR = val(n, 0.75, y);
        a += 0.5 * (0.5 * (uL + uR) * (vL - vR) + uR * vR);  // interior x = 1/2 plus outflow x = 1
        b += 0.5 * (uL - uR) * (vL - vR);
      }
      CHECK(avg(n, m) == doctest::Approx(a).epsilon(1e-12));
      CHECK(pen(n, m) == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("penalty annihilates the constant and is even in omega") {
  for (const Domain& D : {make_unit_box(2, 2, 3), make_unit_box(3, 1, 2), make_lshape(2, 2), make_circle(2, 2, 0.5, Point(0.5, 0.5, 0))}) {
    AssemblyPlan plan(D);
    const Eigen::VectorXd one = project_domain(D, [](const Point&) { return 1.0; });
    const Direction w = unit(0.3, -0.8, 0.52);
    const SpMat P = plan.transport(w, 0, 7.0, {false, false, false, true});
    CHECK((P * one).norm() < 1e-11 * one.norm());
    const SpMat Pm = plan.transport(-w, 0, 7.0, {false, false, false, true});
    CHECK(Eigen::MatrixXd(P - Pm).norm() < 1e-11);
    // volume term is odd in omega
    const SpMat V = plan.transport(w, 0, 0, {false, true, false, false});
    const SpMat Vm = plan.transport(-w, 0, 0, {false, true, false, false});
    CHECK(Eigen::MatrixXd(V + Vm).norm() < 1e-11);
  }
}

TEST_CASE("interior average part is odd in omega") {
  // Boundary outflow terms switch sides under omega -> -omega; subtract them by
  // comparing B(w) + B(-w) with the |w.n| boundary mass.
  const Domain D = make_lshape(1, 2);
  AssemblyPlan plan(D);
  const Direction w = unit(0.6, 0.8, 0.0);
  const SpMat A = plan.transport(w, 0, 0, {false, false, true, false});
  const SpMat Am = plan.transport(-w, 0, 0, {false, false, true, false});
  const Eigen::VectorXd x = random_vector(D.dofs, 3);
  const double sym = x.dot((A + Am) * x);
  // (A + Am) restricted to x gives int_{dD} |w.n| u^2
  const double oracle = 2 * (energy_oracle(D, x, w, 0, 0));
  CHECK(sym == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("energy identity on every geometry") {
  struct Case {
    Domain D;
    Direction w;
  };
  std::vector<Case> cases = {{make_unit_box(2, 2, 3), unit(0.5, -0.3, 0.81)},
                             {make_unit_box(3, 1, 2), unit(-0.2, 0.7, 0.68)},
                             {make_lshape(2, 2), unit(0.9, 0.2, -0.38)},
                             {make_circle(2, 2, 0.5, Point(0.5, 0.5, 0)), unit(-0.35, -0.6, 0.72)},
                             {make_circle(1, 3, 1.0), unit(0.1, 0.95, 0.3)}};
  unsigned seed = 11;
  for (const Case& c : cases) {
    AssemblyPlan plan(c.D);
    const SpMat T = plan.transport(c.w, 1.25, 40.0);
    const Eigen::VectorXd x = random_vector(c.D.dofs, seed++);
    const double e = x.dot(T * x);
    CHECK(e > 0);
    CHECK(e == doctest::Approx(energy_oracle(c.D, x, c.w, 1.25, 40.0)).epsilon(1e-7));
  }
}

TEST_CASE("polynomials in the space are reproduced exactly") {
  const Direction w = unit(0.4, -0.7, 0.59);
  SUBCASE("cube, k = 2") {
    auto u = [](const Point& x) { return 1 + x[0] * x[0] * x[1] - 2 * x[1] * x[2] + x[2] * x[2]; };
    auto g = [](const Point& x) { return Point(2 * x[0] * x[1], x[0] * x[0] - 2 * x[2], -2 * x[1] + 2 * x[2]); };
    check_consistency(make_unit_box(3, 2, 2), w, u, g, 1e4);
  }
  SUBCASE("square, k = 1") {
    auto u = [](const Point& x) { return 0.5 - x[0] + 3 * x[0] * x[1]; };
    auto g = [](const Point& x) { return Point(-1 + 3 * x[1], 3 * x[0], 0); };
    check_consistency(make_unit_box(2, 1, 3), w, u, g, 1e4);
    check_consistency(make_unit_box(2, 1, 3), -w, u, g, 0);
  }
  SUBCASE("L-shape, k = 2") {
    auto u = [](const Point& x) { return x[0] * x[0] - x[0] * x[1] + 2 * x[1] - 1; };
    auto g = [](const Point& x) { return Point(2 * x[0] - x[1], -x[0] + 2, 0); };
    check_consistency(make_lshape(2, 2), w, u, g, 1e4);
  }
  SUBCASE("circle, k = 2, hanging nodes") {
    auto u = [](const Point& x) { return x[0] * x[0] + x[0] * x[1] - 3 * x[1] + 0.25; };
    auto g = [](const Point& x) { return Point(2 * x[0] + x[1], x[0] - 3, 0); };
    check_consistency(make_circle(2, 3, 0.5, Point(0.5, 0.5, 0)), w, u, g, 1e4);
    check_consistency(make_circle(2, 1, 1.0), -w, u, g, 10);
  }
}

TEST_CASE("transport solution converges for a smooth solution") {
  // sigma_s = 0 single direction; the jump of u_h on interior faces shrinks with N
  auto u = [](const Point& x) { return std::sin(3 * x[0]) * std::cos(2 * x[1]); };
  const Direction w = unit(0.6, 0.5, 0.62);
  PhaseSpaceField f = [&](const Point& x, const Direction& v) {
    return v[0] * 3 * std::cos(3 * x[0]) * std::cos(2 * x[1]) - v[1] * 2 * std::sin(3 * x[0]) * std::sin(2 * x[1]) + u(x);
  };
  PhaseSpaceField alpha = [&](const Point& x, const Direction&) { return u(x); };
  double prev = 1e300;
  for (int N = 1; N <= 4; ++N) {
    const Domain D = make_unit_box(2, 1, N);
    AssemblyPlan plan(D);
    const SpMat T = plan.transport(w, 1.0, std::pow(10.0, N + 1));
    Eigen::SparseLU<SpMat> lu(T);
    const Eigen::VectorXd c = lu.solve(plan.load(w, f, alpha));
    const double err = std::sqrt(l2_norms(D, c, u).error);
    CHECK(err < 0.5 * prev);
    prev = err;
  }
}

TEST_CASE("inflow load for alpha = 1 at k = 0") {
  const Domain D = make_unit_box(2, 0, 2);
  AssemblyPlan plan(D);
  const Direction w = unit(0.3, 0.5, 0.81);
  PhaseSpaceField zero = [](const Point&, const Direction&) { return 0.0; };
  PhaseSpaceField one = [](const Point&, const Direction&) { return 1.0; };
  const Eigen::VectorXd F = plan.load(w, zero, one, true, false);
  // Pairing with the constant function: - int_{inflow} (w.n) = |w_x| + |w_y|
  const Eigen::VectorXd c1 = project_domain(D, [](const Point&) { return 1.0; });
  CHECK(F.dot(c1) == doctest::Approx(w[0] + w[1]).epsilon(1e-12));
  // zero_inflow suppresses the boundary term
  CHECK(plan.load(w, zero, one, true, true).norm() == 0.0);
}

TEST_CASE("global matrix of the three-dimensional S2 system") {
  const Domain D = make_unit_box(3, 2, 3);
  AssemblyPlan plan(D);
  const OrdinateSet set = build_sn(2);
  const KernelMatrix K = build_kernel(PhaseFunction::isotropic(), set);
  SystemInputs in;
  in.sigma_t = 2;
  in.sigma_s = 1;
  in.theta0 = 1e5;
  in.source = [](const Point&, const Direction&) { return 1.0; };
  in.inflow = [](const Point&, const Direction&) { return 0.0; };
  in.zero_inflow = true;
  const BlockSystem sys = build_system(plan, set, K, in);
  CHECK(D.dofs == 1026);
  CHECK(sys.dimension() == 8208);
  CHECK(sys.sparsity_ratio() > 0.99);
  CHECK(sys.coupled());
  // apply() agrees with a block-by-block product
  const Eigen::VectorXd x = random_vector(sys.dimension(), 5);
  const Eigen::VectorXd y = sys.apply(x);
  for (int l = 0; l < sys.L; ++l) {
    Eigen::VectorXd yl = sys.D[l] * x.segment(l * sys.M, sys.M);
    for (int i = 0; i < sys.L; ++i)
      if (i != l) yl -= sys.sigma_s * sys.G(l, i) * x.segment(i * sys.M, sys.M);
    CHECK((yl - y.segment(l * sys.M, sys.M)).norm() < 1e-9 * (1 + yl.norm()));
  }
}

TEST_CASE("non-finite data is rejected") {
  const Domain D = make_unit_box(2, 1, 1);
  AssemblyPlan plan(D);
  PhaseSpaceField bad = [](const Point&, const Direction&) { return std::nan(""); };
  PhaseSpaceField zero = [](const Point&, const Direction&) { return 0.0; };
  CHECK_THROWS_AS(plan.load(unit(1, 1, 1), bad, zero), DataError);
}
