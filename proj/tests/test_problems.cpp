#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sgrte/errors.hpp"
#include "sgrte/problems.hpp"

using namespace sgrte;

TEST_CASE("sphere rule about an axis") {
  const Direction axis = Direction(0.2, -0.5, 0.84).normalized();
  CHECK(sphere_integral_about(axis, [](const Direction&) { return 1.0; }) == doctest::Approx(4 * std::numbers::pi).epsilon(1e-13));
  // int s1^2 s3^2 = 4 pi / 15
  CHECK(sphere_integral_about(axis, [](const Direction& v) { return v[0] * v[0] * v[2] * v[2]; }) ==
        doctest::Approx(4 * std::numbers::pi / 15).epsilon(1e-12));
  // a forward peak about the axis normalizes
  const PhaseFunction hg = PhaseFunction::henyey_greenstein(0.9);
  CHECK(sphere_integral_about(axis, [&](const Direction& v) { return hg(std::clamp(axis.dot(v), -1.0, 1.0)); }) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("manufactured sources satisfy the transport equation") {
  CHECK(manufactured_residual(example1()) < 1e-7);
  CHECK(manufactured_residual(example2(0.1)) < 1e-7);
  CHECK(manufactured_residual(example2(0.9)) < 1e-7);
  CHECK(manufactured_residual(example3(0.5)) < 1e-7);
  CHECK(manufactured_residual(example3(0.9)) < 1e-6);
  CHECK(manufactured_residual(example6_lshape()) < 1e-7);
  CHECK(manufactured_residual(example7_circle()) < 1e-7);
}

TEST_CASE("a wrong source is detected") {
  ProblemSpec p = example1();
  p.source = [](const Point& x, const Direction& w) { return example1().source(x, w) + 1e-3; };
  CHECK(manufactured_residual(p) > 5e-4);
  CHECK_THROWS_AS(manufactured_residual(example4_source3d()), ArgumentError);
}

TEST_CASE("catalog") {
  for (const char* name : {"example1", "example2", "example3", "example4", "example5", "example6", "example7"}) {
    const ProblemSpec p = problem_by_name(name);
    CHECK(p.name == name);
    CHECK(bool(p.source));
    CHECK(bool(p.inflow));
    const Domain D = make_domain(p, 1, 1);
    CHECK(D.dim == p.dim);
  }
  CHECK_THROWS_AS(problem_by_name("example8"), ConfigError);
  CHECK(problem_by_name("example2").phase.kind() == PhaseKind::henyey_greenstein);
  CHECK(problem_by_name("example3").phase.kind() == PhaseKind::sam);
  CHECK_FALSE(problem_by_name("example4").exact.has_value());
}

TEST_CASE("box sources") {
  const ProblemSpec p = example4_source3d();
  const Direction w(0, 0, 1);
  CHECK(p.source(Point(0.1, 0.1, 0.1), w) == 1.0);
  CHECK(p.source(Point(0.3, 0.1, 0.1), w) == 0.0);
  const ProblemSpec q = example5_source2d({{Point(0.1, 0.4, 0), Point(0.3, 0.6, 0), 2.0},
                                          {Point(0.7, 0.4, 0), Point(0.9, 0.6, 0), 2.0}});
  CHECK(q.source(Point(0.2, 0.5, 0), w) == 2.0);
  CHECK(q.source(Point(0.8, 0.5, 0), w) == 2.0);
  CHECK(q.source(Point(0.5, 0.5, 0), w) == 0.0);
  const ProblemSpec c = custom_problem("lshape", 1, 0.5, PhaseFunction::isotropic(), {}, 0.25);
  CHECK(c.dim == 2);
  CHECK(c.inflow(Point(0, 0, 0), w) == 0.25);
  CHECK_FALSE(c.zero_inflow);
  CHECK_THROWS_AS(custom_problem("sphere", 1, 0, PhaseFunction::isotropic(), {}, 0), ConfigError);
}
