#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgrte/assembly.hpp"
#include "sgrte/domains.hpp"
#include "sgrte/scattering.hpp"

namespace sgrte {

/// Axis-aligned source region with constant strength.
struct SourceBox {
  Point lo = Point::Zero();
  Point hi = Point::Zero();
  double strength = 1.0;
};

struct ProblemSpec {
  std::string name;
  std::string geometry = "cube";  // cube | square | lshape | circle
  int dim = 3;
  double sigma_t = 1.0;
  double sigma_s = 0.0;
  PhaseFunction phase = PhaseFunction::isotropic();
  PhaseSpaceField source;
  PhaseSpaceField inflow;
  std::optional<PhaseSpaceField> exact;
  bool zero_inflow = false;
  std::vector<SourceBox> sources;  // box-source problems only

  double circle_radius = 0.5;
  Point circle_center = Point(0.5, 0.5, 0);
  double circle_half = -1.0;  // inner square half-width; < 0 selects radius / sqrt 2
};

ProblemSpec example1();
ProblemSpec example2(double eta = 0.1);
ProblemSpec example3(double eta = 0.5);
ProblemSpec example4_source3d();
/// 2-D box-source problem; empty `sources` selects a single 0.2 x 0.2 source at the origin corner.
ProblemSpec example5_source2d(std::vector<SourceBox> sources = {});
ProblemSpec example6_lshape();
/// Default disc: inscribed in the unit square.
ProblemSpec example7_circle(double radius = 0.5, const Point& center = Point(0.5, 0.5, 0), double half = -1.0);

/// Constant coefficients, box sources and a constant inflow value.
ProblemSpec custom_problem(const std::string& geometry, double sigma_t, double sigma_s, const PhaseFunction& phase,
                           std::vector<SourceBox> sources, double boundary_value);

/// Look up a catalog entry by name (example1..example7).
ProblemSpec problem_by_name(const std::string& name, double eta = -2.0);

Domain make_domain(const ProblemSpec& p, int k, int N);

/// Integral over the sphere of F(omega_hat) with a product rule aligned with
/// `axis`: composite Gauss in t = axis . omega_hat (panels graded toward t = 1)
/// and the trapezoid rule in azimuth.
double sphere_integral_about(const Direction& axis, const std::function<double(const Direction&)>& F, int panels = 40,
                             int gauss = 10, int azimuth = 16);

/// max |omega . grad u + sigma_t u - sigma_s S u - f| over random samples;
/// S u uses sphere_integral_about and grad u fourth-order differences.
double manufactured_residual(const ProblemSpec& p, int samples = 100, unsigned seed = 7);

}  // namespace sgrte
