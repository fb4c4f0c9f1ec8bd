#include "sgrte/scattering.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sgrte/errors.hpp"

namespace sgrte {

namespace {
constexpr double kFourPi = 4 * std::numbers::pi;
}

PhaseFunction PhaseFunction::isotropic() { return PhaseFunction(PhaseKind::isotropic, 0.0); }

PhaseFunction PhaseFunction::henyey_greenstein(double eta) {
  if (!(eta > -1 && eta < 1)) throw ArgumentError("Henyey-Greenstein eta must lie in (-1,1)");
  PhaseFunction p(PhaseKind::henyey_greenstein, eta);
  p.check_normalization(1e-10);
  return p;
}

PhaseFunction PhaseFunction::sam(double eta) {
  if (!(eta > -1 && eta < 1)) throw ArgumentError("SAM eta must lie in (-1,1)");
  PhaseFunction p(PhaseKind::sam, eta);
  p.sam_np_ = 2 * eta / (1 - eta);
  p.sam_ks_ = (p.sam_np_ + 1) / (2 * std::numbers::pi * std::pow(2.0, p.sam_np_ + 1));
  p.check_normalization(1e-10);
  return p;
}

PhaseFunction PhaseFunction::from_table(std::vector<double> t, std::vector<double> g) {
  if (t.size() < 2 || t.size() != g.size()) throw DataError("phase table needs at least two (t, g) rows");
  for (size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw DataError("phase table t values must be strictly increasing");
  if (std::abs(t.front() + 1) > 1e-12 || std::abs(t.back() - 1) > 1e-12) throw DataError("phase table must span [-1,1]");
  for (double v : g)
    if (!(v >= 0) || !std::isfinite(v)) throw DataError("phase table values must be finite and nonnegative");
  PhaseFunction p(PhaseKind::table, 0.0);
  p.t_ = std::move(t);
  p.g_ = std::move(g);
  p.check_normalization(1e-6);
  p.eta_ = p.first_moment();
  return p;
}

PhaseFunction PhaseFunction::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open phase table " + path);
  std::vector<double> t, g;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) throw DataError("phase table " + path + ": bad row '" + line + "'");
    t.push_back(a);
    g.push_back(b);
  }
  return from_table(std::move(t), std::move(g));
}

std::string PhaseFunction::name() const {
  std::ostringstream s;
  switch (kind_) {
    case PhaseKind::isotropic: return "isotropic";
    case PhaseKind::henyey_greenstein: s << "hg(" << eta_ << ")"; break;
    case PhaseKind::sam: s << "sam(" << eta_ << ")"; break;
    case PhaseKind::table: s << "table(" << t_.size() << ")"; break;
  }
  return s.str();
}

double PhaseFunction::operator()(double t) const {
  if (t < -1 - 1e-12 || t > 1 + 1e-12) throw ArgumentError("phase function argument outside [-1,1]");
  t = std::clamp(t, -1.0, 1.0);
  switch (kind_) {
    case PhaseKind::isotropic: return 1 / kFourPi;
    case PhaseKind::henyey_greenstein: {
      const double den = 1 + eta_ * eta_ - 2 * eta_ * t;
      if (!(den > 1e-300)) throw DataError("Henyey-Greenstein denominator vanishes at t = " + std::to_string(t));
      return (1 - eta_ * eta_) / (kFourPi * den * std::sqrt(den));
    }
    case PhaseKind::sam: {
      const double v = sam_ks_ * std::pow(1 + t, sam_np_);
      if (!std::isfinite(v)) throw DataError("SAM phase function is singular at t = " + std::to_string(t));
      return v;
    }
    case PhaseKind::table: {
      const auto it = std::upper_bound(t_.begin(), t_.end(), t);
      const size_t i = std::min<size_t>(std::max<std::ptrdiff_t>(it - t_.begin(), 1), t_.size() - 1);
      const double s = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
      return (1 - s) * g_[i - 1] + s * g_[i];
    }
  }
  throw InternalError("unknown phase kind");
}

double PhaseFunction::integrate(const std::function<double(double)>& h) const {
  if (kind_ == PhaseKind::table) {
    // exact for piecewise-linear g times a polynomial of degree <= 1
    double s = 0;
    for (size_t i = 1; i < t_.size(); ++i) {
      const double a = t_[i - 1], b = t_[i], m = 0.5 * (a + b), r = 0.5 * (b - a) / std::sqrt(3.0);
      s += 0.5 * (b - a) * (h(m - r) * (*this)(m - r) + h(m + r) * (*this)(m + r));
    }
    return 2 * std::numbers::pi * s;
  }
  boost::math::quadrature::tanh_sinh<double> q;
  if (kind_ == PhaseKind::sam) {
    // tc = a - t left of the midpoint, so 1 + t = -tc stays accurate near t = -1
    auto f = [&](double t, double tc) {
      const double opt = t < 0 ? -tc : 1 + t;
      return h(t) * sam_ks_ * std::pow(opt, sam_np_);
    };
    return 2 * std::numbers::pi * q.integrate(f, -1.0, 1.0);
  }
  return 2 * std::numbers::pi * q.integrate([&](double t) { return h(t) * (*this)(t); }, -1.0, 1.0);
}

double PhaseFunction::normalization() const {
  if (kind_ == PhaseKind::isotropic) return 1.0;
  return integrate([](double) { return 1.0; });
}

double PhaseFunction::first_moment() const {
  if (kind_ == PhaseKind::isotropic) return 0.0;
  return integrate([](double t) { return t; });
}

void PhaseFunction::check_normalization(double tol) const {
  const double z = normalization();
  if (!(std::abs(z - 1) <= tol)) {
    std::ostringstream msg;
    msg << "phase function " << name() << " is not normalized: 2 pi int g = " << z;
    throw DataError(msg.str());
  }
}

KernelMatrix build_kernel(const PhaseFunction& pf, const OrdinateSet& set) {
  const int L = set.size();
  KernelMatrix k;
  k.G.resize(L, L);
  for (int l = 0; l < L; ++l)
    for (int i = 0; i < L; ++i) {
      const double t = std::clamp(set.directions[l].dot(set.directions[i]), -1.0, 1.0);
      k.G(l, i) = set.weights[i] * pf(t);
    }
  k.row_sums = k.G.rowwise().sum();
  k.m = k.row_sums.maxCoeff();
  return k;
}

AssumptionReport check_assumption(const KernelMatrix& kernel, const ScalarField& sigma_t, const ScalarField& sigma_s,
                                  const std::vector<Point>& samples) {
  if (samples.empty()) throw ArgumentError("assumption check needs at least one sample point");
  AssumptionReport rep;
  rep.m = kernel.m;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const Point& x : samples) {
    const double st = sigma_t(x), ss = sigma_s(x);
    if (!(ss >= 0) || !(st >= 0)) {
      std::ostringstream msg;
      msg << "coefficients must be nonnegative, got sigma_t=" << st << " sigma_s=" << ss << " at ("
          << x.transpose() << ")";
      throw ArgumentError(msg.str());
    }
    const double margin = st - kernel.m * ss;
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.where = x;
    }
  }
  return rep;
}

AssumptionReport check_assumption(const KernelMatrix& kernel, double sigma_t, double sigma_s) {
  return check_assumption(kernel, [=](const Point&) { return sigma_t; }, [=](const Point&) { return sigma_s; },
                          {Point::Zero()});
}

void require_assumption(const AssumptionReport& rep) {
  if (rep.ok()) return;
  std::ostringstream msg;
  msg << "sigma_t - m sigma_s must be positive; minimum " << rep.min_margin << " (m = " << rep.m << ") at ("
      << rep.where.transpose() << ")";
  throw AssumptionError(msg.str(), rep.min_margin);
}

}  // namespace sgrte
