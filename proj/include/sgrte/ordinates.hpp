#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace sgrte {

using Direction = Eigen::Vector3d;

/// Discrete-ordinate set on the unit sphere. Weights sum to 4 pi.
struct OrdinateSet {
  int order = 0;
  std::vector<Direction> directions;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(directions.size()); }
};

/// Directory holding the shipped S<n>.txt tables. SGRTE_DATA_DIR overrides the
/// compiled-in location.
std::string ordinate_data_dir();

/// Level-symmetric S_n set, n in {2,4,...,12}.
OrdinateSet build_sn(int n);

/// Parse a first-octant table (header line with n, then rows s1 s2 s3 w) and
/// expand it over the eight octants.
OrdinateSet read_ordinates(std::istream& is);
OrdinateSet load_ordinates(const std::string& path);
void write_ordinates(std::ostream& os, const OrdinateSet& set);

/// Expand first-octant nodes by sign flips; weights are rescaled to sum to 4 pi.
OrdinateSet expand_octants(int order, const std::vector<std::array<double, 4>>& octant);

double sphere_quad(const OrdinateSet& set, const std::function<double(const Direction&)>& F);

/// Exact integral of s1^a s2^b s3^c over the unit sphere.
double sphere_moment(int a, int b, int c);

struct MomentReport {
  int degree = 0;
  double max_error = 0.0;
  std::array<int, 3> worst{};
  bool passed(double tol) const { return max_error < tol; }
};

/// Largest absolute moment error over all monomials of total degree <= degree.
MomentReport validate_precision(const OrdinateSet& set, int degree);

}  // namespace sgrte
