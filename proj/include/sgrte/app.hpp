#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgrte/postprocess.hpp"
#include "sgrte/problems.hpp"
#include "sgrte/solver.hpp"

namespace sgrte {

struct PhaseConfig {
  std::string kind = "isotropic";  // isotropic | hg | sam | table
  double eta = 0.0;
  std::string table;
};

struct CustomConfig {
  std::string geometry = "square";
  double sigma_t = 1.0;
  double sigma_s = 0.0;
  PhaseConfig phase;
  double boundary = 0.0;
  std::vector<SourceBox> sources;
};

struct RunConfig {
  std::string problem = "example1";
  std::optional<double> eta;
  int N = 2, k = 2, n = 2;
  std::optional<double> theta0;  // empty = 10^(N+k)
  SolverOptions solver;
  bool allow_assumption_violation = false;

  double circle_radius = 0.5;
  Point circle_center = Point(0.5, 0.5, 0);
  double circle_half = -1.0;
  std::vector<SourceBox> sources;  // overrides example5 layout when nonempty
  CustomConfig custom;

  std::string report;        // CSV error/stats row
  std::string flux;          // photon flux grid
  double flux_z = 0.1;
  int flux_samples = -1;
  std::string coefficients;  // per-direction coefficients
  std::string stats;         // solver history

  std::vector<int> study_N, study_k, study_n;
  std::string study_output;
  bool full_precision = false;
};

/// Parse a YAML config; unknown keys and bad values raise ConfigError with the key path and line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Range checks; throws ConfigError.
void validate(const RunConfig& cfg);

ProblemSpec build_problem(const RunConfig& cfg);
double resolve_theta0(const RunConfig& cfg, int N, int k);

struct RunOutcome {
  ProblemSpec problem;
  Domain domain;
  OrdinateSet set;
  KernelMatrix kernel;
  AssumptionReport assumption;
  double theta0 = 0.0;
  long dimension = 0;
  double sparsity = 0.0;
  SolveResult result;
  std::optional<ErrorReport> error;
};

/// One pipeline run at (N, k, n). Throws AssumptionError when the scattering
/// assumption fails and the config does not allow it.
RunOutcome run_case(const RunConfig& cfg, int N, int k, int n);

/// Study over the configured ranges; resumes from rows already converged in
/// the output file. Returns the rows in grid order (n, then k, then N).
std::vector<StudyRow> run_study(const RunConfig& cfg, std::ostream& log);
void write_study(std::ostream& os, const std::vector<StudyRow>& rows, bool full_precision);
std::vector<StudyRow> read_study(std::istream& is);

/// Property suites; prints PASS/FAIL lines and returns the number of failures.
int run_checks(const RunConfig& cfg, std::ostream& os);

}  // namespace sgrte
