#pragma once

// One-dimensional quadrature helpers shared by the moment, propagator and
// oracle code.

#include <lds/rational.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace lds {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw Error("quadrature rule needs at least one node");
  QuadratureRule r;
  for (double x : boost::math::legendre_p_zeros<double>(n)) {
    double dp = boost::math::legendre_p_prime(n, x);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes.push_back(x);
    r.weights.push_back(w);
    if (x != 0.0) {
      r.nodes.push_back(-x);
      r.weights.push_back(w);
    }
  }
  return r;
}

/// Composite rule: `panels` equal panels on [lo, hi], each with an
/// `order`-point Gauss-Legendre rule.
inline QuadratureRule composite_gauss_legendre(double lo, double hi, int panels, int order) {
  QuadratureRule base = gauss_legendre(order);
  QuadratureRule out;
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      out.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
      out.weights.push_back(0.5 * h * base.weights[i]);
    }
  }
  return out;
}

struct IntegralEstimate {
  double value = 0;
  double error = 0;
};

/// Adaptive Gauss-Kronrod (61 points) on a finite interval.
inline IntegralEstimate integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                           double rel_tol = 1e-14) {
  IntegralEstimate out;
  double l1 = 0;
  out.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, rel_tol, &out.error, &l1);
  return out;
}

}  // namespace lds
