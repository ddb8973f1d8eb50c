#pragma once

// Free propagators on the line, the circle, the infinite lattice and the
// circular lattice, plus the map from (m, a) to lattice couplings.

#include <lds/quadrature.hpp>
#include <lds/rational.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace lds {

/// e^{-m|t|} / (2m).
inline double propagator_line(double m, double t) {
  if (!(m > 0)) throw Error("mass must be positive");
  return std::exp(-m * std::abs(t)) / (2 * m);
}

struct SeriesEstimate {
  double value = 0;
  long terms = 0;
  double tail_bound = 0;
};

/// Fourier series  T sum_n cos(2 pi n t/T) / ((2 pi n)^2 + (mT)^2)  on a circle
/// of length T. The 1/n^2 part is summed in closed form; the remainder decays
/// like 1/n^4 and is truncated once its tail bound is below `tol`.
inline SeriesEstimate propagator_circle_series(double m, double period, double t, double tol = 1e-12) {
  if (!(m > 0) || !(period > 0)) throw Error("mass and period must be positive");
  constexpr double pi = std::numbers::pi;
  const double mu2 = (m * period) * (m * period);
  double x = 2 * pi * std::fmod(std::abs(t), period) / period;
  if (x > 2 * pi) x = 2 * pi;

  // sum_{n>=1} cos(n x)/n^2 for x in [0, 2 pi]
  const double clausen = pi * pi / 6 - pi * x / 2 + x * x / 4;
  const double scale = 1.0 / (m * m * period) + 2 * period * clausen / (4 * pi * pi);
  const double rounding = 64 * std::numeric_limits<double>::epsilon() * std::abs(scale);
  if (!(tol > rounding)) throw Error("tolerance unachievable");

  // tail of 2T sum_{n>M} mu2/((2 pi n)^2 ((2 pi n)^2 + mu2)) <= 2T mu2 / ((2 pi)^4 3 M^3)
  const double c4 = 2 * period * mu2 / std::pow(2 * pi, 4);
  long limit = static_cast<long>(std::ceil(std::cbrt(c4 / (3 * tol)))) + 1;
  SeriesEstimate out;
  double remainder = 0;
  for (long n = limit; n >= 1; --n) {
    const double q = 2 * pi * static_cast<double>(n);
    remainder += std::cos(static_cast<double>(n) * x) * mu2 / (q * q * (q * q + mu2));
  }
  out.value = scale - 2 * period * remainder;
  out.terms = limit;
  out.tail_bound = c4 / (3.0 * std::pow(static_cast<double>(limit), 3));
  return out;
}

inline double propagator_circle(double m, double period, double t, double tol = 1e-12) {
  return propagator_circle_series(m, period, t, tol).value;
}

struct EffectiveParams {
  double m_eff = 0;
  double z_eff = 0;
};

/// Effective mass and pole residue of the infinite-lattice propagator.
inline EffectiveParams lattice_effective_params(double m, double a) {
  if (!(m > 0) || !(a > 0)) throw Error("mass and spacing must be positive");
  const double eta = (m * a) * (m * a) / 2;
  const double root = std::sqrt(2 * eta + eta * eta);
  EffectiveParams out;
  out.m_eff = -std::log1p(eta - root) / a;
  out.z_eff = a / (2 * root);
  return out;
}

/// Z_eff e^{-m_eff |n| a}.
inline double propagator_infinite_lattice(double m, double a, long n) {
  EffectiveParams p = lattice_effective_params(m, a);
  return p.z_eff * std::exp(-p.m_eff * static_cast<double>(std::labs(n)) * a);
}

/// Lattice momentum-space propagator 1 / ((2/a^2)(1 - cos(E a)) + m^2).
inline double lattice_momentum_propagator(double m, double a, double energy) {
  return 1.0 / ((2.0 / (a * a)) * (1.0 - std::cos(energy * a)) + m * m);
}

/// Discrete Fourier sum over the Brillouin window e = [-N/2]+1 .. [N/2].
inline double propagator_circular_lattice(double m, int sites, double a, long n) {
  if (!(m > 0) || !(a > 0)) throw Error("mass and spacing must be positive");
  if (sites < 1) throw Error("lattice must have at least one site");
  constexpr double pi = std::numbers::pi;
  const long lo = static_cast<long>(std::floor(-sites / 2.0)) + 1;
  const long hi = static_cast<long>(std::floor(sites / 2.0));
  const double ma2 = (m * a) * (m * a);
  const long nn = ((n % sites) + sites) % sites;
  double sum = 0;
  for (long e = lo; e <= hi; ++e) {
    const double theta = 2 * pi * static_cast<double>(e) / sites;
    sum += a * a * std::cos(theta * static_cast<double>(nn)) / (2 * (1 - std::cos(theta)) + ma2);
  }
  return sum / (sites * a);
}

struct FreeCouplings {
  Rational k;
  Rational w;  ///< zero when the lattice has a single site
};

/// Lattice couplings of the discretized free action
///   a sum_n [ (phi_{n+1} - phi_n)^2 / (2 a^2) + m^2 phi_n^2 / 2 ]
/// on N periodic sites. With these, gaussian_reduce of {i:1, j:1} equals the
/// circular-lattice propagator at separation i - j.
inline FreeCouplings free_discretization(const Rational& m, const Rational& a, int sites) {
  if (m <= 0 || a <= 0) throw Error("mass and spacing must be positive");
  if (sites < 1) throw Error("lattice must have at least one site");
  FreeCouplings out;
  out.k = a * m * m;
  if (sites >= 2) out.k += Rational(2) / a;
  if (sites == 2) out.w = Rational(2) / a;
  else if (sites >= 3) out.w = Rational(1) / a;
  return out;
}

}  // namespace lds
