#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "sgrte/assembly.hpp"
#include "sgrte/domains.hpp"
#include "sgrte/ordinates.hpp"

namespace sgrte {

/// Value of the discrete field `coeffs` (global numbering) at x; NaN outside the domain.
double evaluate_domain(const Domain& domain, const Eigen::VectorXd& coeffs, const Point& x);

/// L2 projection of g onto the whole domain space.
Eigen::VectorXd project_domain(const Domain& domain, const ScalarField& g);

/// Squared L2 norms of (u_h - g) and of g over the domain, per-fine-cell Gauss
/// with q points per axis (q < 0 selects max(k+3, 5)).
struct SquaredNorms {
  double error = 0.0;
  double exact = 0.0;
};
SquaredNorms l2_norms(const Domain& domain, const Eigen::VectorXd& coeffs, const ScalarField& g, int q = -1);

struct ErrorReport {
  std::string problem;
  int N = 0, k = 0, n = 0;
  double theta0 = 0.0;
  long dofs = 0;
  double relative = 0.0;
  std::vector<double> direction_errors;  // absolute L2 error per ordinate
  std::vector<double> direction_norms;
};

/// sqrt(sum w_l |u_l - u_h^l|^2) / sqrt(sum w_l |u_l|^2); DataError if the denominator vanishes.
ErrorReport weighted_relative_error(const Domain& domain, const OrdinateSet& set, const std::vector<Eigen::VectorXd>& U,
                                    const PhaseSpaceField& exact, int q = -1);

/// L2 and H1-seminorm errors of a box-space function against f and grad f.
struct ProjectionErrors {
  double l2 = 0.0;
  double h1 = 0.0;
};
ProjectionErrors projection_errors(const SparseSpace& space, const Eigen::VectorXd& coeffs, const ScalarField& f,
                                   const std::function<Point(const Point&)>& grad, int q = -1);

/// Coefficients of the angular average (1/4 pi) sum_l w_l u_h^l.
Eigen::VectorXd flux_coefficients(const OrdinateSet& set, const std::vector<Eigen::VectorXd>& U);

/// Uniform sampling grid; nz = 1 gives a 2-D grid (a z = lo[2] slice in 3-D).
struct GridField {
  int nx = 0, ny = 0, nz = 1;
  Point lo = Point::Zero(), hi = Point::Zero();
  std::vector<double> values;  // x fastest, then y, then z

  Point point(int i, int j, int l) const;
  double& at(int i, int j, int l = 0) { return values[(std::size_t(l) * ny + j) * nx + i]; }
  double at(int i, int j, int l = 0) const { return values[(std::size_t(l) * ny + j) * nx + i]; }
};

GridField sample_grid(const Domain& domain, const Eigen::VectorXd& coeffs, int nx, int ny, int nz, const Point& lo,
                      const Point& hi);
/// Photon flux on the default grid: 101^2 over the bounding box in 2-D, a 51^2 slice at height z in 3-D.
GridField photon_flux(const Domain& domain, const OrdinateSet& set, const std::vector<Eigen::VectorXd>& U,
                      double z = 0.1, int samples = -1);

void write_grid(std::ostream& os, const GridField& g);
GridField read_grid(std::istream& is);
void write_grid_file(const std::string& path, const GridField& g);

/// One row of a convergence table.
struct StudyRow {
  std::string problem;
  int n = 2, k = 0, N = 0;
  double theta0 = 0.0;
  long dofs = 0;
  double error = 0.0;  // NaN when no exact solution
  double rate = 0.0;   // NaN when undefined
  int sweeps = 0;
  double residual = 0.0;
  double seconds = 0.0;  // not written; wall time would break byte-identical output
  std::string status;
};

std::string study_header();
/// Errors at 6 significant digits unless `full_precision`.
std::string format_study_row(const StudyRow& r, bool full_precision = false);
/// log2(previous / current) computed from the printed error strings.
double printed_rate(const std::string& previous, const std::string& current);
std::string format_error(double e, bool full_precision = false);

}  // namespace sgrte
