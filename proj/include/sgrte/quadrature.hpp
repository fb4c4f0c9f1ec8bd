#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <numbers>

namespace sgrte {

template <typename Scalar>
struct QuadratureRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
  Eigen::Index size() const { return nodes.size(); }
};

/// Gauss-Legendre rule with `n` points on [0, 1]; exact for degree 2n - 1.
/// Nodes come from Newton iteration on the three-term recurrence.
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_legendre(int n) {
  QuadratureRule<Scalar> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 1;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = 1, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const Scalar p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 2 * std::numeric_limits<Scalar>::epsilon()) break;
    }
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    // map [-1,1] -> [0,1], ascending order
    rule.nodes[i] = (1 - x) / 2;
    rule.nodes[n - 1 - i] = (1 + x) / 2;
    rule.weights[i] = w / 2;
    rule.weights[n - 1 - i] = w / 2;
  }
  return rule;
}

/// Values of the L2([0,1])-orthonormal Legendre polynomials sqrt(2a+1) P_a(2x-1),
/// a = 0..k, written into `out`.
template <typename Scalar, typename Out>
void legendre_values(int k, Scalar x, Out&& out) {
  const Scalar t = 2 * x - 1;
  Scalar p0 = 1, p1 = t;
  for (int a = 0; a <= k; ++a) {
    Scalar p;
    if (a == 0) {
      p = 1;
    } else if (a == 1) {
      p = t;
    } else {
      p = ((2 * a - 1) * t * p1 - (a - 1) * p0) / a;
      p0 = p1;
      p1 = p;
    }
    out[a] = std::sqrt(Scalar(2 * a + 1)) * p;
  }
}

/// Values and first derivatives (with respect to x on [0,1]) of the orthonormal
/// Legendre polynomials.
template <typename Scalar, typename Out, typename DOut>
void legendre_values_and_derivatives(int k, Scalar x, Out&& val, DOut&& der) {
  const Scalar t = 2 * x - 1;
  Scalar p_prev = 0, p = 1, d_prev = 0, d = 0;
  for (int a = 0; a <= k; ++a) {
    if (a == 1) {
      p_prev = 1;
      p = t;
      d_prev = 0;
      d = 1;
    } else if (a >= 2) {
      const Scalar pn = ((2 * a - 1) * t * p - (a - 1) * p_prev) / a;
      const Scalar dn = d_prev + (2 * a - 1) * p;  // P'_a = P'_{a-2} + (2a-1) P_{a-1}
      p_prev = p;
      p = pn;
      d_prev = d;
      d = dn;
    }
    const Scalar s = std::sqrt(Scalar(2 * a + 1));
    val[a] = s * p;
    der[a] = 2 * s * d;
  }
}

}  // namespace sgrte
