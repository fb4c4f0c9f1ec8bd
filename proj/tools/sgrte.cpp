#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "sgrte/app.hpp"
#include "sgrte/errors.hpp"
#include "sgrte/wavelet1d.hpp"

using namespace sgrte;

namespace {

enum Exit { ok = 0, config_error = 2, solver_failure = 3, assumption_violation = 4 };

struct Overrides {
  std::string config;
  std::string problem, theta0, variant, assumption;
  std::optional<double> eta, tol;
  std::optional<int> N, k, n, max_sweeps;
  std::string report, flux, coefficients, stats, output;
  std::optional<double> flux_z;
  std::optional<int> flux_samples;
  std::vector<int> study_N, study_k, study_n;
  bool full_precision = false;
  std::string dump_basis;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.problem.empty()) c.problem = o.problem;
  if (o.eta) c.eta = o.eta;
  if (o.N) c.N = *o.N;
  if (o.k) c.k = *o.k;
  if (o.n) c.n = *o.n;
  if (!o.theta0.empty()) {
    if (o.theta0 == "auto") c.theta0.reset();
    else {
      try {
        c.theta0 = std::stod(o.theta0);
      } catch (const std::exception&) {
        throw ConfigError("--theta0 must be a number or auto");
      }
    }
  }
  if (o.tol) c.solver.tol = *o.tol;
  if (o.max_sweeps) c.solver.max_sweeps = *o.max_sweeps;
  if (!o.variant.empty()) c.solver.variant = parse_variant(o.variant);
  if (!o.assumption.empty()) c.allow_assumption_violation = o.assumption == "ignore";
  if (!o.report.empty()) c.report = o.report;
  if (!o.flux.empty()) c.flux = o.flux;
  if (o.flux_z) c.flux_z = *o.flux_z;
  if (o.flux_samples) c.flux_samples = *o.flux_samples;
  if (!o.coefficients.empty()) c.coefficients = o.coefficients;
  if (!o.stats.empty()) c.stats = o.stats;
  if (!o.output.empty()) c.study_output = o.output;
  if (!o.study_N.empty()) c.study_N = o.study_N;
  if (!o.study_k.empty()) c.study_k = o.study_k;
  if (!o.study_n.empty()) c.study_n = o.study_n;
  if (o.full_precision) c.full_precision = true;
  if (c.study_N.empty()) c.study_N = {c.N};
  if (c.study_k.empty()) c.study_k = {c.k};
  if (c.study_n.empty()) c.study_n = {c.n};
  validate(c);
  return c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  return os;
}

void write_solution(const std::string& path, const RunOutcome& o) {
  std::ofstream os = open_out(path);
  os << "# d k N dofs directions ordering\n"
     << o.domain.dim << ' ' << o.domain.degree << ' ' << o.domain.level << ' ' << o.domain.dofs << ' ' << o.set.size()
     << " patch-major\n";
  char buf[32];
  for (const auto& u : o.result.U) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", u[i]);
      os << (i ? " " : "") << buf;
    }
    os << '\n';
  }
}

int cmd_solve(const RunConfig& c) {
  const RunOutcome o = run_case(c, c.N, c.k, c.n);
  const SolverStats& s = o.result.stats;
  std::printf("problem   %s\n", o.problem.name.c_str());
  std::printf("space     d=%d N=%d k=%d dofs=%ld (S%d, %d directions, system %ld, sparsity %.4f%%)\n", o.domain.dim,
              c.N, c.k, o.domain.dofs, c.n, o.set.size(), o.dimension, 100 * o.sparsity);
  std::printf("theta0    %g\n", o.theta0);
  std::printf("margin    %.6g (m=%.6g)\n", o.assumption.min_margin, o.assumption.m);
  std::printf("solver    %s, %d sweeps, change %.3e, residual %.3e, %.2fs\n", s.status.c_str(), s.sweeps, s.final_change,
              s.residual, s.seconds);
  if (o.error) std::printf("error     %s\n", format_error(o.error->relative).c_str());
  if (!c.report.empty()) {
    StudyRow r{o.problem.name, c.n, c.k, c.N, o.theta0, o.domain.dofs, o.error ? o.error->relative : std::nan(""),
               std::nan(""), s.sweeps, s.residual, s.seconds, s.status};
    std::ofstream os = open_out(c.report);
    write_study(os, {r}, c.full_precision);
  }
  if (!c.flux.empty()) write_grid_file(c.flux, photon_flux(o.domain, o.set, o.result.U, c.flux_z, c.flux_samples));
  if (!c.coefficients.empty()) write_solution(c.coefficients, o);
  if (!c.stats.empty()) {
    std::ofstream os = open_out(c.stats);
    write_stats_csv(os, s, true);
  }
  return s.converged ? ok : solver_failure;
}

int cmd_study(const RunConfig& c) {
  const std::vector<StudyRow> rows = run_study(c, std::cerr);
  if (c.study_output.empty()) write_study(std::cout, rows, c.full_precision);
  for (const StudyRow& r : rows)
    if (r.status != "converged") return solver_failure;
  return ok;
}

int cmd_dump_matrix(const RunConfig& c, const std::string& path, bool summary_only) {
  const ProblemSpec p = build_problem(c);
  const Domain D = make_domain(p, c.k, c.N);
  const OrdinateSet set = build_sn(c.n);
  const KernelMatrix K = build_kernel(p.phase, set);
  const AssemblyPlan plan(D);
  SystemInputs in{p.sigma_t, p.sigma_s, resolve_theta0(c, c.N, c.k), p.source, p.inflow, false, p.zero_inflow};
  const BlockSystem sys = build_system(plan, set, K, in);
  if (summary_only) {
    write_sparsity_summary(std::cout, sys);
    return ok;
  }
  if (path.empty()) write_matrix(std::cout, sys);
  else {
    std::ofstream os = open_out(path);
    write_matrix(os, sys);
    write_sparsity_summary(std::cout, sys);
  }
  return ok;
}

int cmd_dof_report(int d, int k, int Nmax) {
  if (d < 1 || d > 3 || k < 0 || k > 4 || Nmax < 0 || Nmax > 10) throw ConfigError("dof-report needs d in 1..3, k in 0..4, N in 0..10");
  std::printf("N,sparse,full,ratio\n");
  for (const DofGrowthRow& r : dof_growth_report(d, k, Nmax)) std::printf("%d,%ld,%ld,%.6g\n", r.N, r.sparse, r.full, r.ratio);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-grid discrete-ordinate DG solver for steady monoenergetic radiative transfer"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("-c,--config", o.config, "YAML config file");
  app.add_option("--dump-basis", o.dump_basis, "write the 1-D basis tables for (k, N) to this file");

  auto run_options = [&](CLI::App* s) {
    s->add_option("-p,--problem", o.problem, "example1..example7 or custom");
    s->add_option("--eta", o.eta, "anisotropy factor for examples 2 and 3");
    s->add_option("-N,--level", o.N, "maximal sparse level");
    s->add_option("-k,--degree", o.k, "polynomial degree");
    s->add_option("-n,--order", o.n, "S_n order");
    s->add_option("--theta0", o.theta0, "penalty constant or auto (10^(N+k))");
    s->add_option("--tol", o.tol, "sweep tolerance");
    s->add_option("--max-sweeps", o.max_sweeps, "sweep budget");
    s->add_option("--variant", o.variant, "gauss_seidel or jacobi")->check(CLI::IsMember({"gauss_seidel", "jacobi"}));
    s->add_option("--assumption", o.assumption, "enforce or ignore the scattering assumption")
        ->check(CLI::IsMember({"enforce", "ignore"}));
  };

  CLI::App* solve = app.add_subcommand("solve", "run one case");
  run_options(solve);
  solve->add_option("--report", o.report, "CSV report path");
  solve->add_option("--flux", o.flux, "photon flux grid path");
  solve->add_option("--flux-z", o.flux_z, "slice height for 3-D flux");
  solve->add_option("--flux-samples", o.flux_samples, "grid points per axis");
  solve->add_option("--coefficients", o.coefficients, "coefficient dump path");
  solve->add_option("--stats", o.stats, "solver stats CSV path");

  CLI::App* study = app.add_subcommand("study", "convergence table over N, k, n ranges");
  run_options(study);
  study->add_option("--N-list", o.study_N, "levels")->delimiter(',');
  study->add_option("--k-list", o.study_k, "degrees")->delimiter(',');
  study->add_option("--n-list", o.study_n, "S_n orders")->delimiter(',');
  study->add_option("-o,--output", o.output, "CSV output (resumed if present)");
  study->add_flag("--full-precision", o.full_precision, "17-digit errors");

  CLI::App* check = app.add_subcommand("check", "property suites");
  run_options(check);

  CLI::App* dump = app.add_subcommand("dump-matrix", "write the global matrix as triplets");
  run_options(dump);
  std::string dump_path;
  bool summary_only = false;
  dump->add_option("-o,--output", dump_path, "triplet file (stdout if omitted)");
  dump->add_flag("--summary", summary_only, "print only the sparsity summary");

  CLI::App* dof = app.add_subcommand("dof-report", "sparse versus full dof counts");
  int dof_d = 3, dof_k = 2, dof_N = 6;
  dof->add_option("-d,--dim", dof_d, "dimension");
  dof->add_option("-k,--degree", dof_k, "polynomial degree");
  dof->add_option("-N,--max-level", dof_N, "largest level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (dof->parsed()) return cmd_dof_report(dof_d, dof_k, dof_N);
    const RunConfig c = resolve(o);
    if (!o.dump_basis.empty()) {
      std::ofstream os = open_out(o.dump_basis);
      write_basis_table(os, HierarchicalBasis1D(c.k, c.N));
    }
    if (solve->parsed()) return cmd_solve(c);
    if (study->parsed()) return cmd_study(c);
    if (check->parsed()) {
      const int failures = run_checks(c, std::cout);
      std::printf("%d failure(s)\n", failures);
      return ok;
    }
    if (dump->parsed()) return cmd_dump_matrix(c, dump_path, summary_only);
  } catch (const AssumptionError& e) {
    std::fprintf(stderr, "assumption violated: %s (margin %.6g)\n", e.what(), e.margin());
    return assumption_violation;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return config_error;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return config_error;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return solver_failure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return ok;
}
