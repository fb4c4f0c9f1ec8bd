#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sgrte/errors.hpp"
#include "sgrte/problems.hpp"
#include "sgrte/solver.hpp"

using namespace sgrte;

namespace {

BlockSystem make_system(const ProblemSpec& p, const Domain& D, int n, double theta0) {
  AssemblyPlan plan(D);
  const OrdinateSet set = build_sn(n);
  const KernelMatrix K = build_kernel(p.phase, set);
  SystemInputs in{p.sigma_t, p.sigma_s, theta0, p.source, p.inflow, false, p.zero_inflow};
  return build_system(plan, set, K, in);
}

double max_relative_difference(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) {
  double d = 0, n = 0;
  for (size_t l = 0; l < a.size(); ++l) {
    d += (a[l] - b[l]).squaredNorm();
    n += a[l].squaredNorm();
  }
  return std::sqrt(d / n);
}

}  // namespace

TEST_CASE("pure absorber converges in one sweep to the direct solution") {
  ProblemSpec p = example1();
  p.sigma_s = 0;
  p.sigma_t = 1;
  const Domain D = make_domain(p, 1, 2);
  const BlockSystem sys = make_system(p, D, 4, 1e3);
  CHECK_FALSE(sys.coupled());
  const SolveResult r = solve_system(sys);
  CHECK(r.stats.converged);
  CHECK(r.stats.sweeps == 1);
  CHECK(r.stats.status == "converged");
  for (int l = 0; l < sys.L; ++l) {
    Eigen::SparseLU<SpMat> lu(sys.D[l]);
    CHECK((lu.solve(sys.F[l]) - r.U[l]).norm() < 1e-10 * r.U[l].norm());
  }
}

TEST_CASE("zero data gives the zero solution") {
  ProblemSpec p = example1();
  p.source = [](const Point&, const Direction&) { return 0.0; };
  const Domain D = make_domain(p, 1, 1);
  const SolveResult r = solve_system(make_system(p, D, 2, 100));
  CHECK(r.stats.converged);
  for (const auto& u : r.U) CHECK(u.norm() == 0.0);
}

TEST_CASE("Jacobi and Gauss-Seidel agree") {
  const ProblemSpec p = example1();
  const Domain D = make_domain(p, 2, 2);
  const BlockSystem sys = make_system(p, D, 2, 1e4);
  const BlockFactors f(sys);
  SolverOptions gs, jac;
  jac.variant = SweepVariant::jacobi;
  const SolveResult a = solve_system(sys, f, gs);
  const SolveResult b = solve_system(sys, f, jac);
  REQUIRE(a.stats.converged);
  REQUIRE(b.stats.converged);
  CHECK(max_relative_difference(a.U, b.U) < 10 * gs.tol);
  CHECK(b.stats.sweeps >= a.stats.sweeps);
  CHECK(a.stats.residual < 100 * gs.tol);
  CHECK(b.stats.residual < 100 * jac.tol);
  CHECK(a.stats.history.size() == static_cast<size_t>(a.stats.sweeps));
  CHECK(true_residual(sys, a.U) == doctest::Approx(a.stats.residual));
}

TEST_CASE("sweep budget exhaustion is reported") {
  const ProblemSpec p = example1();
  const Domain D = make_domain(p, 1, 1);
  SolverOptions opt;
  opt.max_sweeps = 2;
  const SolveResult r = solve_system(make_system(p, D, 2, 100), opt);
  CHECK_FALSE(r.stats.converged);
  CHECK(r.stats.status == "max_sweeps");
  CHECK(r.stats.sweeps == 2);
}

TEST_CASE("anisotropic scattering converges with a contraction") {
  const ProblemSpec p = example2(0.5);
  const Domain D = make_domain(p, 1, 2);
  const SolveResult r = solve_system(make_system(p, D, 4, 1e3));
  CHECK(r.stats.converged);
  for (size_t i = 1; i + 1 < r.stats.history.size(); ++i) CHECK(r.stats.history[i] < r.stats.history[i - 1]);
}

TEST_CASE("options and variants") {
  CHECK(parse_variant("jacobi") == SweepVariant::jacobi);
  CHECK(parse_variant("gauss_seidel") == SweepVariant::gauss_seidel);
  CHECK_THROWS_AS(parse_variant("sor"), ConfigError);
  CHECK(std::string(variant_name(SweepVariant::jacobi)) == "jacobi");
  const ProblemSpec p = example1();
  const Domain D = make_domain(p, 0, 1);
  const BlockSystem sys = make_system(p, D, 2, 10);
  SolverOptions bad;
  bad.tol = 0;
  CHECK_THROWS_AS(solve_system(sys, bad), ArgumentError);
  bad.tol = 1e-10;
  bad.max_sweeps = 0;
  CHECK_THROWS_AS(solve_system(sys, bad), ArgumentError);
}

TEST_CASE("singular blocks are detected") {
  // In (x, y) geometry a direction along z has no in-plane transport; with
  // sigma_t = 0 the block vanishes.
  const Domain D = make_unit_box(2, 0, 2);
  AssemblyPlan plan(D);
  BlockSystem sys;
  sys.L = 1;
  sys.M = D.dofs;
  sys.D.push_back(plan.transport(Direction(0, 0, 1), 0.0, 1.0));
  sys.F.push_back(Eigen::VectorXd::Ones(D.dofs));
  sys.G = Eigen::MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(BlockFactors{sys}, SolverError);
}

TEST_CASE("stats CSV") {
  SolverStats s;
  s.sweeps = 12;
  s.final_change = 5e-11;
  s.residual = 1e-12;
  s.status = "converged";
  std::ostringstream os;
  write_stats_csv(os, s, true);
  CHECK(os.str().rfind("sweeps,final_change,residual,seconds,status\n12,", 0) == 0);
}
