#include "sgrte/problems.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sgrte/errors.hpp"
#include "sgrte/quadrature.hpp"

namespace sgrte {

namespace {

constexpr double pi = std::numbers::pi;

double sin3(const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]); }

// omega . grad of sin(pi x) sin(pi y) sin(pi z)
double grad3(const Point& x, const Direction& w) {
  const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]), sz = std::sin(pi * x[2]);
  const double cx = std::cos(pi * x[0]), cy = std::cos(pi * x[1]), cz = std::cos(pi * x[2]);
  return pi * (w[0] * cx * sy * sz + w[1] * sx * cy * sz + w[2] * sx * sy * cz);
}

double sin2(const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); }

PhaseSpaceField zero_field() {
  return [](const Point&, const Direction&) { return 0.0; };
}

PhaseSpaceField box_source(const std::vector<SourceBox>& boxes, int dim) {
  return [boxes, dim](const Point& x, const Direction&) {
    double f = 0;
    for (const SourceBox& b : boxes) {
      bool in = true;
      for (int a = 0; a < dim; ++a) in = in && x[a] >= b.lo[a] && x[a] <= b.hi[a];
      if (in) f += b.strength;
    }
    return f;
  };
}

// Shared solution of examples 2 and 3: u = 10 s3 sin sin sin, S u = c1 u.
ProblemSpec anisotropic(const std::string& name, const PhaseFunction& phase) {
  ProblemSpec p;
  p.name = name;
  p.geometry = "cube";
  p.dim = 3;
  p.sigma_t = 3;
  p.sigma_s = 1;
  p.phase = phase;
  const double c1 = phase.first_moment();
  const double st = p.sigma_t, ss = p.sigma_s;
  p.exact = [](const Point& x, const Direction& w) { return 10 * w[2] * sin3(x); };
  p.source = [=](const Point& x, const Direction& w) { return 10 * w[2] * (grad3(x, w) + (st - c1 * ss) * sin3(x)); };
  p.inflow = zero_field();
  p.zero_inflow = true;
  return p;
}

}  // namespace

ProblemSpec example1() {
  ProblemSpec p;
  p.name = "example1";
  p.geometry = "cube";
  p.dim = 3;
  p.sigma_t = 2;
  p.sigma_s = 1;
  p.exact = [](const Point& x, const Direction&) { return sin3(x); };
  p.source = [](const Point& x, const Direction& w) { return grad3(x, w) + sin3(x); };
  p.inflow = zero_field();
  p.zero_inflow = true;
  return p;
}

ProblemSpec example2(double eta) { return anisotropic("example2", PhaseFunction::henyey_greenstein(eta)); }

ProblemSpec example3(double eta) { return anisotropic("example3", PhaseFunction::sam(eta)); }

ProblemSpec example4_source3d() {
  ProblemSpec p;
  p.name = "example4";
  p.geometry = "cube";
  p.dim = 3;
  p.sigma_t = 1;
  p.sigma_s = 0.4;
  p.sources = {{Point(0, 0, 0), Point(0.2, 0.2, 0.2), 1.0}};
  p.source = box_source(p.sources, 3);
  p.inflow = zero_field();
  p.zero_inflow = true;
  return p;
}

ProblemSpec example5_source2d(std::vector<SourceBox> sources) {
  ProblemSpec p;
  p.name = "example5";
  p.geometry = "square";
  p.dim = 2;
  p.sigma_t = 1;
  p.sigma_s = 0.4;
  if (sources.empty()) sources = {{Point(0, 0, 0), Point(0.2, 0.2, 0), 1.0}};
  p.sources = std::move(sources);
  p.source = box_source(p.sources, 2);
  p.inflow = zero_field();
  p.zero_inflow = true;
  return p;
}

ProblemSpec example6_lshape() {
  ProblemSpec p;
  p.name = "example6";
  p.geometry = "lshape";
  p.dim = 2;
  p.sigma_t = 2;
  p.sigma_s = 1;
  auto u = [](const Point& x, const Direction&) { return sin2(x); };
  p.exact = u;
  p.source = [](const Point& x, const Direction& w) {
    const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]);
    return pi * (w[0] * std::cos(pi * x[0]) * sy + w[1] * sx * std::cos(pi * x[1])) + sx * sy;
  };
  p.inflow = u;
  return p;
}

ProblemSpec example7_circle(double radius, const Point& center, double half) {
  ProblemSpec p = example6_lshape();
  p.name = "example7";
  p.geometry = "circle";
  p.circle_radius = radius;
  p.circle_center = center;
  p.circle_half = half;
  return p;
}

ProblemSpec custom_problem(const std::string& geometry, double sigma_t, double sigma_s, const PhaseFunction& phase,
                           std::vector<SourceBox> sources, double boundary_value) {
  ProblemSpec p;
  p.name = "custom";
  p.geometry = geometry;
  if (geometry == "cube") p.dim = 3;
  else if (geometry == "square" || geometry == "lshape" || geometry == "circle") p.dim = 2;
  else throw ConfigError("unknown geometry '" + geometry + "' (cube, square, lshape, circle)");
  p.sigma_t = sigma_t;
  p.sigma_s = sigma_s;
  p.phase = phase;
  p.sources = std::move(sources);
  p.source = box_source(p.sources, p.dim);
  p.inflow = [boundary_value](const Point&, const Direction&) { return boundary_value; };
  p.zero_inflow = boundary_value == 0.0;
  return p;
}

ProblemSpec problem_by_name(const std::string& name, double eta) {
  if (name == "example1") return example1();
  if (name == "example2") return example2(eta < -1 ? 0.1 : eta);
  if (name == "example3") return example3(eta < -1 ? 0.5 : eta);
  if (name == "example4") return example4_source3d();
  if (name == "example5") return example5_source2d();
  if (name == "example6") return example6_lshape();
  if (name == "example7") return example7_circle();
  throw ConfigError("unknown problem '" + name + "' (example1..example7, custom)");
}

Domain make_domain(const ProblemSpec& p, int k, int N) {
  if (p.geometry == "cube") return make_unit_box(3, k, N);
  if (p.geometry == "square") return make_unit_box(2, k, N);
  if (p.geometry == "lshape") return make_lshape(k, N);
  if (p.geometry == "circle") return make_circle(k, N, p.circle_radius, p.circle_center, p.circle_half);
  throw ConfigError("unknown geometry '" + p.geometry + "'");
}

double sphere_integral_about(const Direction& axis, const std::function<double(const Direction&)>& F, int panels,
                             int gauss, int azimuth) {
  const Direction e3 = axis.normalized();
  Direction e1 = std::abs(e3[0]) < 0.9 ? Direction::UnitX() : Direction::UnitY();
  e1 = (e1 - e1.dot(e3) * e3).normalized();
  const Direction e2 = e3.cross(e1);
  const auto rule = gauss_legendre(gauss);
  double total = 0;
  // panel edges in t graded quadratically toward t = 1
  for (int p = 0; p < panels; ++p) {
    const double s0 = double(p) / panels, s1 = double(p + 1) / panels;
    const double t0 = 1 - 2 * (1 - s0) * (1 - s0), t1 = 1 - 2 * (1 - s1) * (1 - s1);
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
      const double t = t0 + (t1 - t0) * rule.nodes[q];
      const double st = std::sqrt(std::max(0.0, 1 - t * t));
      double ring = 0;
      for (int j = 0; j < azimuth; ++j) {
        const double phi = 2 * pi * j / azimuth;
        ring += F(t * e3 + st * (std::cos(phi) * e1 + std::sin(phi) * e2));
      }
      total += (t1 - t0) * rule.weights[q] * ring * 2 * pi / azimuth;
    }
  }
  return total;
}

double manufactured_residual(const ProblemSpec& p, int samples, unsigned seed) {
  if (!p.exact) throw ArgumentError("problem " + p.name + " has no exact solution");
  const PhaseSpaceField& u = *p.exact;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::normal_distribution<double> G;
  const double h = 1e-3;
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    Point x = Point::Zero();
    for (int a = 0; a < p.dim; ++a) x[a] = 0.05 + 0.9 * U(rng);
    if (p.geometry == "lshape" && x[0] > 1 && x[1] > 1) x[0] -= 1;
    if (p.geometry == "circle") x = p.circle_center + 0.5 * p.circle_radius * (x - Point(0.5, 0.5, 0));
    Direction w(G(rng), G(rng), G(rng));
    w.normalize();
    // fourth-order central difference along the advected part of omega
    Direction adv = w;
    if (p.dim == 2) adv[2] = 0;
    auto ua = [&](double t) { return u(x + t * adv, w); };
    const double dudw = (-ua(2 * h) + 8 * ua(h) - 8 * ua(-h) + ua(-2 * h)) / (12 * h);
    double scatter = 0;
    if (p.sigma_s != 0)
      scatter = sphere_integral_about(w, [&](const Direction& v) { return p.phase(std::clamp(w.dot(v), -1.0, 1.0)) * u(x, v); });
    const double r = dudw + p.sigma_t * u(x, w) - p.sigma_s * scatter - p.source(x, w);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace sgrte
