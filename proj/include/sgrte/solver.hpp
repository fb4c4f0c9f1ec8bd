#pragma once

#include <Eigen/Core>
#include <Eigen/SparseLU>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sgrte/assembly.hpp"

namespace sgrte {

enum class SweepVariant { gauss_seidel, jacobi };

struct SolverOptions {
  double tol = 1e-10;
  int max_sweeps = 500;
  SweepVariant variant = SweepVariant::gauss_seidel;
};

struct SolverStats {
  bool converged = false;
  int sweeps = 0;
  double final_change = 0.0;
  double residual = 0.0;  // ||D U - F|| / ||F|| (absolute when F = 0)
  double seconds = 0.0;
  std::string status;     // converged | max_sweeps | residual_check
  std::vector<double> history;
};

/// Cached sparse LU of every direction block.
class BlockFactors {
 public:
  explicit BlockFactors(const BlockSystem& sys);
  Eigen::VectorXd solve(int l, const Eigen::VectorXd& b) const;
  int size() const { return static_cast<int>(lu_.size()); }

 private:
  std::vector<std::unique_ptr<Eigen::SparseLU<SpMat>>> lu_;
};

struct SolveResult {
  std::vector<Eigen::VectorXd> U;
  SolverStats stats;
};

/// Block Gauss-Seidel (or Jacobi) source iteration from a zero start.
SolveResult solve_system(const BlockSystem& sys, const BlockFactors& factors, const SolverOptions& opt = {});
SolveResult solve_system(const BlockSystem& sys, const SolverOptions& opt = {});

double true_residual(const BlockSystem& sys, const std::vector<Eigen::VectorXd>& U);

const char* variant_name(SweepVariant v);
SweepVariant parse_variant(const std::string& s);

void write_stats_csv(std::ostream& os, const SolverStats& s, bool header);

}  // namespace sgrte
