#include "sgrte/ordinates.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "sgrte/errors.hpp"

#ifndef SGRTE_DEFAULT_DATA_DIR
#define SGRTE_DEFAULT_DATA_DIR "data"
#endif

namespace sgrte {

std::string ordinate_data_dir() {
  if (const char* env = std::getenv("SGRTE_DATA_DIR")) return std::string(env) + "/ordinates";
  return std::string(SGRTE_DEFAULT_DATA_DIR) + "/ordinates";
}

OrdinateSet build_sn(int n) {
  if (n < 2 || n > 12 || n % 2 != 0)
    throw ArgumentError("unsupported S_n order " + std::to_string(n) + " (expected 2, 4, ..., 12)");
  OrdinateSet set = load_ordinates(ordinate_data_dir() + "/S" + std::to_string(n) + ".txt");
  if (set.order != n) throw DataError("ordinate table for S" + std::to_string(n) + " has header " + std::to_string(set.order));
  return set;
}

OrdinateSet expand_octants(int order, const std::vector<std::array<double, 4>>& octant) {
  if (octant.empty()) throw DataError("empty ordinate table");
  OrdinateSet set;
  set.order = order;
  std::vector<double> w;
  for (int sign = 0; sign < 8; ++sign)
    for (const auto& row : octant) {
      Direction d(row[0], row[1], row[2]);
      if (d.minCoeff() < 0 || row[3] <= 0) throw DataError("first-octant row with negative entry");
      d.normalize();
      for (int a = 0; a < 3; ++a)
        if (sign & (4 >> a)) d[a] = -d[a];
      set.directions.push_back(d);
      w.push_back(row[3]);
    }
  set.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  set.weights *= 4 * std::numbers::pi / set.weights.sum();
  return set;
}

OrdinateSet read_ordinates(std::istream& is) {
  std::string line;
  int order = -1;
  std::vector<std::array<double, 4>> rows;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (order < 0) {
      if (!(ls >> order)) throw DataError("ordinate table: bad header line '" + line + "'");
      continue;
    }
    std::array<double, 4> r{};
    if (!(ls >> r[0] >> r[1] >> r[2] >> r[3])) throw DataError("ordinate table: bad row '" + line + "'");
    rows.push_back(r);
  }
  if (order < 0) throw DataError("ordinate table: missing header");
  OrdinateSet set = expand_octants(order, rows);
  if (set.size() != order * (order + 2))
    throw DataError("ordinate table: S" + std::to_string(order) + " needs " + std::to_string(order * (order + 2) / 8) +
                    " first-octant rows, found " + std::to_string(rows.size()));
  return set;
}

OrdinateSet load_ordinates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ordinate table " + path);
  return read_ordinates(in);
}

void write_ordinates(std::ostream& os, const OrdinateSet& set) {
  os << set.order << '\n' << std::setprecision(16);
  for (int l = 0; l < set.size(); ++l) {
    const Direction& d = set.directions[l];
    if (d.minCoeff() < 0) continue;
    os << d[0] << ' ' << d[1] << ' ' << d[2] << ' ' << set.weights[l] << '\n';
  }
}

double sphere_quad(const OrdinateSet& set, const std::function<double(const Direction&)>& F) {
  double s = 0;
  for (int l = 0; l < set.size(); ++l) {
    const double v = F(set.directions[l]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite integrand at direction " << l << " (" << set.directions[l].transpose() << ")";
      throw DataError(msg.str());
    }
    s += set.weights[l] * v;
  }
  return s;
}

double sphere_moment(int a, int b, int c) {
  if (a < 0 || b < 0 || c < 0) throw ArgumentError("negative monomial exponent");
  if (a % 2 || b % 2 || c % 2) return 0.0;
  const double al = 0.5 * (a + 1), be = 0.5 * (b + 1), ga = 0.5 * (c + 1);
  return 2.0 * std::exp(std::lgamma(al) + std::lgamma(be) + std::lgamma(ga) - std::lgamma(al + be + ga));
}

MomentReport validate_precision(const OrdinateSet& set, int degree) {
  if (degree < 0 || degree > 16) throw ArgumentError("moment degree must be in [0,16]");
  MomentReport rep;
  rep.degree = degree;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b)
      for (int c = 0; a + b + c <= degree; ++c) {
        double q = 0;
        for (int l = 0; l < set.size(); ++l) {
          const Direction& d = set.directions[l];
          q += set.weights[l] * std::pow(d[0], a) * std::pow(d[1], b) * std::pow(d[2], c);
        }
        const double err = std::abs(q - sphere_moment(a, b, c));
        if (err > rep.max_error) {
          rep.max_error = err;
          rep.worst = {a, b, c};
        }
      }
  return rep;
}

}  // namespace sgrte
