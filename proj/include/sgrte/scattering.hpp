#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "sgrte/ordinates.hpp"
#include "sgrte/sparse_space.hpp"

namespace sgrte {

enum class PhaseKind { isotropic, henyey_greenstein, sam, table };

/// Scattering phase function g(t), t the cosine of the scattering angle.
/// Normalized so that 2 pi * int_{-1}^{1} g(t) dt = 1; checked on construction.
class PhaseFunction {
 public:
  static PhaseFunction isotropic();
  static PhaseFunction henyey_greenstein(double eta);
  static PhaseFunction sam(double eta);
  /// Piecewise-linear table on increasing t covering [-1,1].
  static PhaseFunction from_table(std::vector<double> t, std::vector<double> g);
  static PhaseFunction load_table(const std::string& path);

  PhaseKind kind() const { return kind_; }
  double eta() const { return eta_; }
  std::string name() const;

  double operator()(double t) const;

  /// 2 pi int g dt
  double normalization() const;
  /// 2 pi int t g dt; the kernel maps s_i to first_moment() * s_i.
  double first_moment() const;

 private:
  PhaseFunction(PhaseKind kind, double eta) : kind_(kind), eta_(eta) {}
  double integrate(const std::function<double(double)>& h) const;
  void check_normalization(double tol) const;

  PhaseKind kind_;
  double eta_ = 0.0;
  double sam_np_ = 0.0, sam_ks_ = 0.0;
  std::vector<double> t_, g_;
};

/// G[l][i] = w_i g(omega_l . omega_i)
struct KernelMatrix {
  Eigen::MatrixXd G;
  Eigen::VectorXd row_sums;
  double m = 0.0;  // max row sum
};

KernelMatrix build_kernel(const PhaseFunction& pf, const OrdinateSet& set);

struct AssumptionReport {
  double m = 0.0;
  double min_margin = 0.0;  // min over samples of sigma_t - m sigma_s
  Point where = Point::Zero();
  bool ok() const { return min_margin > 0; }
};

/// Evaluates sigma_t - m sigma_s at each sample point. Negative coefficients
/// throw ArgumentError; a nonpositive margin is only reported.
AssumptionReport check_assumption(const KernelMatrix& kernel, const ScalarField& sigma_t, const ScalarField& sigma_s,
                                  const std::vector<Point>& samples);
AssumptionReport check_assumption(const KernelMatrix& kernel, double sigma_t, double sigma_s);

/// Throws AssumptionError unless the report is positive.
void require_assumption(const AssumptionReport& rep);

}  // namespace sgrte
