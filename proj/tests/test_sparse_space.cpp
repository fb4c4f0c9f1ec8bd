#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "sgrte/errors.hpp"
#include "sgrte/quadrature.hpp"
#include "sgrte/sparse_space.hpp"

using namespace sgrte;

namespace {

constexpr double pi = std::numbers::pi;

// Brute-force count: every level multi-index in [0,N]^d with |n|_1 <= N.
long brute_count(int d, int k, int N) {
  long total = 0;
  for (int a = 0; a <= N; ++a)
    for (int b = 0; b <= N; ++b)
      for (int c = 0; c <= (d == 3 ? N : 0); ++c) {
        if (a + b + c > N) continue;
        long p = wavelet_space_dim(k, a) * wavelet_space_dim(k, b);
        if (d == 3) p *= wavelet_space_dim(k, c);
        total += p;
      }
  return total;
}

// L2 error of a fine-grid representation against f by per-cell Gauss quadrature.
double fine_l2_error(const SparseSpace& s, const Eigen::VectorXd& fine, const ScalarField& f) {
  const int k = s.degree();
  const long cells = s.cells_per_axis();
  const auto rule = gauss_legendre(k + 4);
  double err2 = 0;
  Eigen::VectorXd Lx(k + 1), Ly(k + 1);
  const double h = 1.0 / cells;
  for (long i = 0; i < cells; ++i)
    for (long j = 0; j < cells; ++j) {
      const Eigen::VectorXd blk = cell_block(s, fine, {i, j, 0});
      for (Eigen::Index p = 0; p < rule.size(); ++p)
        for (Eigen::Index q = 0; q < rule.size(); ++q) {
          legendre_values(k, rule.nodes[p], Lx);
          legendre_values(k, rule.nodes[q], Ly);
          double v = 0;
          for (int a = 0; a <= k; ++a)
            for (int b = 0; b <= k; ++b) v += blk[a * (k + 1) + b] * Lx[a] * Ly[b];
          v /= h;
          const Point x((i + rule.nodes[p]) * h, (j + rule.nodes[q]) * h, 0);
          err2 += rule.weights[p] * rule.weights[q] * h * h * std::pow(v - f(x), 2);
        }
    }
  return std::sqrt(err2);
}

}  // namespace

TEST_CASE("enumerate_dofs examples") {
  CHECK(enumerate_dofs(2, 0, 2).size() == 8);
  CHECK(enumerate_dofs(2, 1, 1).size() == 12);
  CHECK(enumerate_dofs(3, 2, 0).size() == 27);
  CHECK_THROWS_AS(enumerate_dofs(4, 1, 1), ArgumentError);
}

TEST_CASE("dof formula agrees with brute-force enumeration") {
  for (int d : {2, 3})
    for (int k = 0; k <= 3; ++k)
      for (int N = 0; N <= 6; ++N) {
        if (d == 3 && N == 6 && k == 3) continue;  // large, adds nothing
        const long e = static_cast<long>(enumerate_dofs(d, k, N).size());
        CHECK(e == brute_count(d, k, N));
        CHECK(sparse_dof_count(d, k, N) == e);
      }
}

TEST_CASE("enumeration order and uniqueness") {
  const auto dofs = enumerate_dofs(3, 1, 3);
  std::set<std::array<long, 9>> seen;
  int prev_sum = 0;
  for (const auto& h : dofs) {
    const int s = h.levels[0] + h.levels[1] + h.levels[2];
    CHECK(s >= prev_sum);
    prev_sum = s;
    seen.insert({h.levels[0], h.levels[1], h.levels[2], h.cells[0], h.cells[1], h.cells[2], h.polys[0], h.polys[1], h.polys[2]});
    for (int m = 0; m < 3; ++m) CHECK(h.cells[m] < level_cells(h.levels[m]));
  }
  CHECK(seen.size() == dofs.size());

  const SparseSpace s(3, 1, 3);
  for (long p = 0; p < s.size(); ++p) {
    CHECK(s.dof(p) == dofs[p]);
    CHECK(s.index_of(dofs[p]) == p);
  }
}

TEST_CASE("dof growth report") {
  const auto r2 = dof_growth_report(2, 0, 5);
  CHECK(r2[5].sparse == 112);
  CHECK(r2[5].full == 1024);
  for (const auto& r : r2) CHECK(r.full == (1L << (2 * r.N)));
  const auto r3 = dof_growth_report(3, 2, 3);
  CHECK(r3[3].sparse == 1026);
  CHECK(r3[3].full == 13824);
  for (int d : {2, 3}) {
    const auto rows = dof_growth_report(d, 1, d == 2 ? 8 : 5);
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].N == 0) CHECK(rows[i].sparse == rows[i].full);
      else CHECK(rows[i].sparse < rows[i].full);
      if (i > 0) CHECK(rows[i].sparse > rows[i - 1].sparse);
    }
  }
  CHECK_THROWS_AS(dof_growth_report(3, 1, 9), ArgumentError);
}

TEST_CASE("projection of a constant hits only the scaling dof") {
  for (int d : {2, 3}) {
    const SparseSpace s(d, 2, 2);
    const auto c = project_l2(s, [](const Point&) { return 3.5; });
    CHECK(c[0] == doctest::Approx(3.5));
    CHECK(c.tail(c.size() - 1).cwiseAbs().maxCoeff() < 1e-12);
  }
  BoxMap m;
  m.origin = Point(1, 0, 0);
  m.lengths = Point(2, 0.5, 1);
  const SparseSpace s(2, 1, 3, m);
  const auto c = project_l2(s, [](const Point&) { return 2.0; });
  CHECK(c[0] == doctest::Approx(2.0 * std::sqrt(1.0)));
  CHECK(evaluate(s, c, Point(2.3, 0.4, 0)) == doctest::Approx(2.0));
}

TEST_CASE("projection is the identity on the space") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  for (int d : {2, 3}) {
    BoxMap m;
    m.origin = Point(-0.5, 1.0, 0.25);
    m.lengths = Point(1.5, 2.0, 0.75);
    const SparseSpace s(d, 2, d == 2 ? 3 : 2, m);
    Eigen::VectorXd c(s.size());
    for (auto& v : c) v = U(rng) - 0.5;
    auto f = [&](const Point& x) { return evaluate(s, c, x); };
    const Eigen::VectorXd p = project_l2(s, f);
    CHECK((p - c).cwiseAbs().maxCoeff() < 1e-10);
    for (int t = 0; t < 50; ++t) {
      Point x = m.origin;
      for (int a = 0; a < d; ++a) x[a] += m.lengths[a] * U(rng);
      CHECK(std::abs(evaluate(s, p, x) - f(x)) < 1e-10);
    }
  }
}

TEST_CASE("Q_k polynomials are reproduced exactly") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k <= 3; ++k) {
    const SparseSpace s(2, k, 0);
    auto f = [k](const Point& x) { return std::pow(x[0] - 0.3, k) * (1 + std::pow(x[1], k)) + 0.5; };
    const auto c = project_l2(s, f);
    for (int t = 0; t < 30; ++t) {
      const Point x(U(rng), U(rng), 0);
      CHECK(std::abs(evaluate(s, c, x) - f(x)) < 1e-10);
    }
    const SparseSpace s3(3, k, 2);
    auto g = [k](const Point& x) { return std::pow(x[0], k) * std::pow(1 - x[1], k) * std::pow(x[2] + 1, k); };
    const auto c3 = project_l2(s3, g);
    for (int t = 0; t < 30; ++t) {
      const Point x(U(rng), U(rng), U(rng));
      CHECK(std::abs(evaluate(s3, c3, x) - g(x)) < 1e-10);
    }
  }
}

TEST_CASE("evaluate contract") {
  const SparseSpace s(2, 1, 2);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(s.size());
  CHECK(evaluate(s, z, Point(0.3, 0.7, 0)) == 0.0);
  Eigen::VectorXd e = z;
  e[0] = 1.0;
  CHECK(evaluate(s, e, Point(0.3, 0.7, 0)) == doctest::Approx(1.0));
  CHECK(evaluate(s, e, Point(0.0, 1.0, 0)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(evaluate(s, e, Point(1.2, 0.5, 0)), ArgumentError);
}

TEST_CASE("non-finite data is reported with the quadrature point") {
  const SparseSpace s(2, 1, 1);
  try {
    project_l2(s, [](const Point& x) { return x[0] > 0.5 ? std::nan("") : 1.0; });
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("quadrature point") != std::string::npos);
  }
}

TEST_CASE("fine cell restriction examples") {
  const SparseSpace s(2, 1, 3);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s.size());
  c[0] = 1.0;
  const Eigen::VectorXd fine = fine_cell_restriction(s, c);
  const double h = 1.0 / 8;
  for (long i = 0; i < 8; ++i)
    for (long j = 0; j < 8; ++j) {
      const auto blk = cell_block(s, fine, {i, j, 0});
      CHECK(blk[0] == doctest::Approx(h));  // integral of 1 * (1/h) over an h x h cell
      CHECK(blk.tail(blk.size() - 1).cwiseAbs().maxCoeff() < 1e-14);
    }

  // Haar-type dof at level (1, 0) for k = 0
  const SparseSpace s0(2, 0, 2);
  HierIndex hx;
  hx.levels = {1, 0, 0};
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(s0.size());
  c0[s0.index_of(hx)] = 1.0;
  const Eigen::VectorXd f0 = fine_cell_restriction(s0, c0);
  for (long i = 0; i < 4; ++i)
    for (long j = 0; j < 4; ++j) {
      const double v = cell_block(s0, f0, {i, j, 0})[0];
      CHECK(v == doctest::Approx(i < 2 ? 0.25 : -0.25));
    }
}

TEST_CASE("restriction is orthogonal and round-trips") {
  std::mt19937 rng(11);
  std::normal_distribution<double> G;
  for (int d : {2, 3}) {
    const SparseSpace s(d, 2, d == 2 ? 4 : 3);
    Eigen::VectorXd c(s.size());
    for (auto& v : c) v = G(rng);
    const Eigen::VectorXd fine = fine_cell_restriction(s, c);
    CHECK(fine.norm() == doctest::Approx(c.norm()).epsilon(1e-12));
    CHECK((fine_cell_gather(s, fine) - c).cwiseAbs().maxCoeff() < 1e-12);

    // cell_dofs is the transpose relation of the restriction
    std::uniform_int_distribution<long> cell(0, s.cells_per_axis() - 1);
    for (int t = 0; t < 20; ++t) {
      std::array<long, kMaxDim> K{cell(rng), cell(rng), d == 3 ? cell(rng) : 0};
      const CellExpansion ex = s.cell_dofs(K);
      Eigen::VectorXd blk = Eigen::VectorXd::Zero(s.local_size());
      for (size_t j = 0; j < ex.dofs.size(); ++j) blk += c[ex.dofs[j]] * ex.local.col(j);
      CHECK((blk - cell_block(s, fine, K)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("evaluate through the fine restriction matches direct evaluation") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> U(0, 1);
  const SparseSpace s(2, 2, 4);
  Eigen::VectorXd c(s.size());
  for (auto& v : c) v = U(rng) - 0.5;
  const Eigen::VectorXd fine = fine_cell_restriction(s, c);
  const long cells = s.cells_per_axis();
  Eigen::VectorXd Lx(3), Ly(3);
  for (int t = 0; t < 10000; ++t) {
    const Point x(U(rng), U(rng), 0);
    const long i = dyadic_cell(x[0], cells), j = dyadic_cell(x[1], cells);
    const auto blk = cell_block(s, fine, {i, j, 0});
    legendre_values(2, x[0] * cells - i, Lx);
    legendre_values(2, x[1] * cells - j, Ly);
    double v = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) v += blk[a * 3 + b] * Lx[a] * Ly[b];
    v *= cells;
    CHECK(std::abs(v - evaluate(s, c, x)) < 1e-10);
  }
}

TEST_CASE("Bessel inequality and L2 projection decay") {
  auto f = [](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
  const double norm2 = 0.25;
  for (int k : {1, 2}) {
    std::vector<double> err;
    double prev_norm = 0;
    for (int N = 2; N <= 6; ++N) {
      const SparseSpace s(2, k, N);
      const auto c = project_l2(s, f);
      CHECK(c.squaredNorm() <= norm2 + 1e-12);
      CHECK(c.squaredNorm() >= prev_norm - 1e-14);
      prev_norm = c.squaredNorm();
      err.push_back(fine_l2_error(s, fine_cell_restriction(s, c), f));
    }
    // least-squares slope of -log2(err) against N
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < err.size(); ++i) {
      const double x = 2.0 + i, y = -std::log2(err[i]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double n = static_cast<double>(err.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    MESSAGE("k=" << k << " L2 projection slope " << slope);
    CHECK(slope >= k + 0.8);
  }
}

TEST_CASE("coefficient file round trip") {
  const SparseSpace s(2, 1, 2);
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(s.size(), -1.0, 1.0 / 3.0);
  std::stringstream ss;
  write_coefficients(ss, s, c);
  const Eigen::VectorXd back = read_coefficients(ss, s);
  CHECK(back == c);
  std::stringstream bad("# sgrte-coefficients d=3 k=1 N=2 dofs=1 ordering=levelsum-lex\n1\n");
  CHECK_THROWS_AS(read_coefficients(bad, s), DataError);
}
