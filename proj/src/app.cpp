#include "sgrte/app.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sgrte/errors.hpp"
#include "sgrte/quadrature.hpp"

namespace sgrte {

namespace {

std::string where(const YAML::Node& n, const std::string& key) {
  const YAML::Mark m = n.Mark();
  if (m.line < 0) return "'" + key + "'";
  return "'" + key + "' (line " + std::to_string(m.line + 1) + ")";
}

template <class T>
T get(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for " + where(n, key));
  }
}

void check_keys(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed) {
  if (!n.IsMap()) throw ConfigError("expected a mapping at " + where(n, path));
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key " + where(kv.first, path.empty() ? key : path + "." + key));
  }
}

Point get_point(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() < 2 || n.size() > 3) throw ConfigError("expected [x, y] or [x, y, z] for " + where(n, key));
  Point p = Point::Zero();
  for (std::size_t i = 0; i < n.size(); ++i) p[i] = get<double>(n[i], key);
  return p;
}

std::vector<int> get_ints(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar()) return {get<int>(n, key)};
  if (!n.IsSequence()) throw ConfigError("expected a list for " + where(n, key));
  std::vector<int> v;
  for (const auto& e : n) v.push_back(get<int>(e, key));
  return v;
}

std::vector<SourceBox> get_sources(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) throw ConfigError("expected a list of sources for " + where(n, key));
  std::vector<SourceBox> out;
  for (const auto& s : n) {
    check_keys(s, key, {"lo", "hi", "strength"});
    if (!s["lo"] || !s["hi"]) throw ConfigError("source needs lo and hi at " + where(s, key));
    SourceBox b;
    b.lo = get_point(s["lo"], key + ".lo");
    b.hi = get_point(s["hi"], key + ".hi");
    if (s["strength"]) b.strength = get<double>(s["strength"], key + ".strength");
    out.push_back(b);
  }
  return out;
}

PhaseFunction make_phase(const PhaseConfig& c) {
  if (c.kind == "isotropic") return PhaseFunction::isotropic();
  if (c.kind == "hg" || c.kind == "henyey_greenstein") return PhaseFunction::henyey_greenstein(c.eta);
  if (c.kind == "sam") return PhaseFunction::sam(c.eta);
  if (c.kind == "table") return PhaseFunction::load_table(c.table);
  throw ConfigError("phase.kind must be isotropic, hg, sam or table, got '" + c.kind + "'");
}

int geometry_dim(const RunConfig& cfg) {
  if (cfg.problem == "custom") return cfg.custom.geometry == "cube" ? 3 : 2;
  if (cfg.problem == "example1" || cfg.problem == "example2" || cfg.problem == "example3" || cfg.problem == "example4")
    return 3;
  return 2;
}

void validate_case(const RunConfig& cfg, int N, int k, int n) {
  const int d = geometry_dim(cfg);
  if (k < 0 || k > 4) throw ConfigError("k must be in 0..4, got " + std::to_string(k));
  const int nmax = d == 3 ? 5 : 8;
  if (N < 0 || N > nmax)
    throw ConfigError("N must be in 0.." + std::to_string(nmax) + " for d = " + std::to_string(d) + ", got " + std::to_string(N));
  if (n < 2 || n > 12 || n % 2) throw ConfigError("n must be one of 2, 4, 6, 8, 10, 12, got " + std::to_string(n));
}

// theta0 as printed in study rows
std::string theta_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  if (root.IsNull()) return c;
  check_keys(root, "", {"problem", "eta", "N", "k", "n", "theta0", "solver", "assumption", "circle", "sources", "custom",
                        "output", "study"});
  if (root["problem"]) c.problem = get<std::string>(root["problem"], "problem");
  if (root["eta"]) c.eta = get<double>(root["eta"], "eta");
  if (root["N"]) c.N = get<int>(root["N"], "N");
  if (root["k"]) c.k = get<int>(root["k"], "k");
  if (root["n"]) c.n = get<int>(root["n"], "n");
  if (root["theta0"]) {
    const std::string t = get<std::string>(root["theta0"], "theta0");
    if (t != "auto") c.theta0 = get<double>(root["theta0"], "theta0");
  }
  if (const YAML::Node s = root["solver"]) {
    check_keys(s, "solver", {"tol", "max_sweeps", "variant"});
    if (s["tol"]) c.solver.tol = get<double>(s["tol"], "solver.tol");
    if (s["max_sweeps"]) c.solver.max_sweeps = get<int>(s["max_sweeps"], "solver.max_sweeps");
    if (s["variant"]) c.solver.variant = parse_variant(get<std::string>(s["variant"], "solver.variant"));
  }
  if (root["assumption"]) {
    const std::string a = get<std::string>(root["assumption"], "assumption");
    if (a != "enforce" && a != "ignore") throw ConfigError("assumption must be enforce or ignore at " + where(root["assumption"], "assumption"));
    c.allow_assumption_violation = a == "ignore";
  }
  if (const YAML::Node g = root["circle"]) {
    check_keys(g, "circle", {"radius", "center", "half"});
    if (g["radius"]) c.circle_radius = get<double>(g["radius"], "circle.radius");
    if (g["center"]) c.circle_center = get_point(g["center"], "circle.center");
    if (g["half"]) c.circle_half = get<double>(g["half"], "circle.half");
  }
  if (root["sources"]) c.sources = get_sources(root["sources"], "sources");
  if (const YAML::Node u = root["custom"]) {
    check_keys(u, "custom", {"geometry", "sigma_t", "sigma_s", "phase", "boundary", "sources"});
    if (u["geometry"]) c.custom.geometry = get<std::string>(u["geometry"], "custom.geometry");
    if (u["sigma_t"]) c.custom.sigma_t = get<double>(u["sigma_t"], "custom.sigma_t");
    if (u["sigma_s"]) c.custom.sigma_s = get<double>(u["sigma_s"], "custom.sigma_s");
    if (u["boundary"]) c.custom.boundary = get<double>(u["boundary"], "custom.boundary");
    if (u["sources"]) c.custom.sources = get_sources(u["sources"], "custom.sources");
    if (const YAML::Node p = u["phase"]) {
      check_keys(p, "custom.phase", {"kind", "eta", "table"});
      if (p["kind"]) c.custom.phase.kind = get<std::string>(p["kind"], "custom.phase.kind");
      if (p["eta"]) c.custom.phase.eta = get<double>(p["eta"], "custom.phase.eta");
      if (p["table"]) c.custom.phase.table = get<std::string>(p["table"], "custom.phase.table");
    }
  }
  if (const YAML::Node o = root["output"]) {
    check_keys(o, "output", {"report", "flux", "flux_z", "flux_samples", "coefficients", "stats"});
    if (o["report"]) c.report = get<std::string>(o["report"], "output.report");
    if (o["flux"]) c.flux = get<std::string>(o["flux"], "output.flux");
    if (o["flux_z"]) c.flux_z = get<double>(o["flux_z"], "output.flux_z");
    if (o["flux_samples"]) c.flux_samples = get<int>(o["flux_samples"], "output.flux_samples");
    if (o["coefficients"]) c.coefficients = get<std::string>(o["coefficients"], "output.coefficients");
    if (o["stats"]) c.stats = get<std::string>(o["stats"], "output.stats");
  }
  if (const YAML::Node s = root["study"]) {
    check_keys(s, "study", {"N", "k", "n", "output", "full_precision"});
    if (s["N"]) c.study_N = get_ints(s["N"], "study.N");
    else c.study_N = {c.N};
    if (s["k"]) c.study_k = get_ints(s["k"], "study.k");
    else c.study_k = {c.k};
    if (s["n"]) c.study_n = get_ints(s["n"], "study.n");
    else c.study_n = {c.n};
    if (s["output"]) c.study_output = get<std::string>(s["output"], "study.output");
    if (s["full_precision"]) c.full_precision = get<bool>(s["full_precision"], "study.full_precision");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& cfg) {
  static const std::set<std::string> problems = {"example1", "example2", "example3", "example4",
                                                  "example5", "example6", "example7", "custom"};
  if (!problems.count(cfg.problem)) throw ConfigError("problem must be example1..example7 or custom, got '" + cfg.problem + "'");
  if (cfg.problem == "custom") {
    static const std::set<std::string> geos = {"cube", "square", "lshape", "circle"};
    if (!geos.count(cfg.custom.geometry)) throw ConfigError("custom.geometry must be cube, square, lshape or circle");
    if (cfg.custom.sigma_t < 0 || cfg.custom.sigma_s < 0) throw ConfigError("custom cross sections must be nonnegative");
  }
  if (cfg.eta && !(std::abs(*cfg.eta) < 1)) throw ConfigError("eta must lie in (-1, 1)");
  validate_case(cfg, cfg.N, cfg.k, cfg.n);
  for (int N : cfg.study_N)
    for (int k : cfg.study_k)
      for (int n : cfg.study_n) validate_case(cfg, N, k, n);
  if (cfg.theta0 && !(*cfg.theta0 >= 0)) throw ConfigError("theta0 must be nonnegative or auto");
  if (!(cfg.solver.tol > 0)) throw ConfigError("solver.tol must be positive");
  if (cfg.solver.max_sweeps < 1) throw ConfigError("solver.max_sweeps must be at least 1");
  if (cfg.flux_samples != -1 && cfg.flux_samples < 2) throw ConfigError("output.flux_samples must be at least 2");
  if (!(cfg.circle_radius > 0)) throw ConfigError("circle.radius must be positive");
}

ProblemSpec build_problem(const RunConfig& cfg) {
  if (cfg.problem == "custom")
    return custom_problem(cfg.custom.geometry, cfg.custom.sigma_t, cfg.custom.sigma_s, make_phase(cfg.custom.phase),
                          cfg.custom.sources, cfg.custom.boundary);
  if (cfg.problem == "example5") return example5_source2d(cfg.sources);
  if (cfg.problem == "example7") return example7_circle(cfg.circle_radius, cfg.circle_center, cfg.circle_half);
  ProblemSpec p = problem_by_name(cfg.problem, cfg.eta.value_or(-2.0));
  return p;
}

double resolve_theta0(const RunConfig& cfg, int N, int k) { return cfg.theta0 ? *cfg.theta0 : std::pow(10.0, N + k); }

RunOutcome run_case(const RunConfig& cfg, int N, int k, int n) {
  validate_case(cfg, N, k, n);
  RunOutcome out{build_problem(cfg), {}, build_sn(n), {}, {}, resolve_theta0(cfg, N, k), 0, 0.0, {}, std::nullopt};
  const ProblemSpec& p = out.problem;
  out.kernel = build_kernel(p.phase, out.set);
  out.assumption = check_assumption(out.kernel, p.sigma_t, p.sigma_s);
  if (!cfg.allow_assumption_violation) require_assumption(out.assumption);
  out.domain = make_domain(p, k, N);
  const AssemblyPlan plan(out.domain);
  SystemInputs in{p.sigma_t, p.sigma_s, out.theta0, p.source, p.inflow, false, p.zero_inflow};
  const BlockSystem sys = build_system(plan, out.set, out.kernel, in);
  out.dimension = sys.dimension();
  out.sparsity = sys.sparsity_ratio();
  out.result = solve_system(sys, cfg.solver);
  if (p.exact) {
    out.error = weighted_relative_error(out.domain, out.set, out.result.U, *p.exact);
    out.error->problem = p.name;
    out.error->theta0 = out.theta0;
  }
  return out;
}

void write_study(std::ostream& os, const std::vector<StudyRow>& rows, bool full_precision) {
  os << study_header() << '\n';
  for (const StudyRow& r : rows) os << format_study_row(r, full_precision) << '\n';
}

std::vector<StudyRow> read_study(std::istream& is) {
  std::vector<StudyRow> rows;
  std::string line;
  if (!std::getline(is, line)) return rows;
  if (line != study_header()) throw DataError("study file has an unexpected header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (!line.empty() && line.back() == ',') f.push_back("");
    if (f.size() != 11) throw DataError("study row has " + std::to_string(f.size()) + " fields: " + line);
    StudyRow r;
    r.problem = f[0];
    r.n = std::stoi(f[1]);
    r.k = std::stoi(f[2]);
    r.N = std::stoi(f[3]);
    r.theta0 = std::stod(f[4]);
    r.dofs = std::stol(f[5]);
    r.error = f[6].empty() ? std::nan("") : std::stod(f[6]);
    r.rate = f[7].empty() ? std::nan("") : std::stod(f[7]);
    r.sweeps = std::stoi(f[8]);
    r.residual = std::stod(f[9]);
    r.status = f[10];
    rows.push_back(r);
  }
  return rows;
}

std::vector<StudyRow> run_study(const RunConfig& cfg, std::ostream& log) {
  const std::string name = build_problem(cfg).name;
  std::map<std::tuple<int, int, int>, StudyRow> done;
  if (!cfg.study_output.empty()) {
    std::ifstream is(cfg.study_output);
    if (is)
      for (const StudyRow& r : read_study(is))
        if (r.status == "converged" && r.problem == name) done[{r.n, r.k, r.N}] = r;
  }
  std::vector<StudyRow> rows;
  for (int n : cfg.study_n)
    for (int k : cfg.study_k) {
      std::string prev;
      int prevN = -1;
      for (int N : cfg.study_N) {
        StudyRow r;
        const double theta0 = resolve_theta0(cfg, N, k);
        auto it = done.find({n, k, N});
        if (it != done.end() && theta_tag(it->second.theta0) == theta_tag(theta0)) {
          r = it->second;
          log << "skip   n=" << n << " k=" << k << " N=" << N << " (recorded)\n";
        } else {
          r.problem = name;
          r.n = n;
          r.k = k;
          r.N = N;
          r.theta0 = theta0;
          r.error = std::nan("");
          try {
            const RunOutcome o = run_case(cfg, N, k, n);
            r.dofs = o.domain.dofs;
            r.sweeps = o.result.stats.sweeps;
            r.residual = o.result.stats.residual;
            r.seconds = o.result.stats.seconds;
            r.status = o.result.stats.status;
            if (o.error) r.error = o.error->relative;
          } catch (const AssumptionError&) {
            r.status = "assumption_violation";
          } catch (const std::exception& e) {
            r.status = sanitize(std::string("failed: ") + e.what());
          }
          log << "run    n=" << n << " k=" << k << " N=" << N << " error=" << format_error(r.error) << " status=" << r.status
              << '\n';
        }
        // rate from the printed errors of the previous level in this series
        const std::string cur = format_error(r.error, cfg.full_precision);
        r.rate = (prevN == N - 1) ? printed_rate(prev, cur) : std::nan("");
        prev = cur;
        prevN = N;
        rows.push_back(r);
      }
    }
  if (!cfg.study_output.empty()) {
    std::ofstream os(cfg.study_output);
    if (!os) throw DataError("cannot write '" + cfg.study_output + "'");
    write_study(os, rows, cfg.full_precision);
  }
  return rows;
}

int run_checks(const RunConfig& cfg, std::ostream& os) {
  int failures = 0;
  auto line = [&](bool pass, const std::string& what, double value, double bound) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s  %-44s value=%.3e bound=%.1e", pass ? "PASS" : "FAIL", what.c_str(), value, bound);
    os << buf << '\n';
    if (!pass) ++failures;
  };

  for (int n = 2; n <= 12; n += 2) {
    const MomentReport r = validate_precision(build_sn(n), std::min(n, 8));
    line(r.passed(1e-9), "S" + std::to_string(n) + " moments to degree " + std::to_string(std::min(n, 8)), r.max_error, 1e-9);
  }

  for (int k = 0; k <= 4; ++k) {
    const HierarchicalBasis1D b(k, 4);
    const Eigen::MatrixXd T = Eigen::MatrixXd(b.T());
    const double e = (T.transpose() * T - Eigen::MatrixXd::Identity(T.cols(), T.cols())).cwiseAbs().maxCoeff();
    line(e < 1e-12, "wavelet transfer orthogonality k=" + std::to_string(k), e, 1e-12);
  }

  for (int k = 0; k <= 4; ++k) {
    const TriangleSpace t(k, {Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)});
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(t.size(), t.size());
    Eigen::VectorXd v;
    for (const auto& p : t.quadrature(k + 3)) {
      t.values(p.x, v);
      gram += p.w * v * v.transpose();
    }
    const double e = (gram - Eigen::MatrixXd::Identity(t.size(), t.size())).cwiseAbs().maxCoeff();
    line(e < 1e-12, "triangle basis orthonormality k=" + std::to_string(k), e, 1e-12);
  }

  for (double eta : {0.0, 0.1, -0.1, 0.5, -0.5, 0.9}) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%g", eta);
    const double hg = std::abs(PhaseFunction::henyey_greenstein(eta).normalization() - 1);
    line(hg < 1e-10, std::string("HG normalization eta=") + tag, hg, 1e-10);
    const double sam = std::abs(PhaseFunction::sam(eta).normalization() - 1);
    line(sam < 1e-10, std::string("SAM normalization eta=") + tag, sam, 1e-10);
  }

  const ProblemSpec p = build_problem(cfg);
  const OrdinateSet set = build_sn(cfg.n);
  const AssumptionReport a = check_assumption(build_kernel(p.phase, set), p.sigma_t, p.sigma_s);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s scattering assumption S%d (m=%.6g)", p.name.c_str(), cfg.n, a.m);
  line(a.ok(), buf, a.min_margin, 0.0);
  if (p.exact) {
    const double r = manufactured_residual(p);
    line(r < 1e-6, p.name + " manufactured source residual", r, 1e-6);
  }
  return failures;
}

}  // namespace sgrte
