#include <lds/propagators.hpp>
#include <lds/reduction.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace lds;

namespace {

/// Closed form of the circle series.
double circle_closed_form(double m, double period, double t) {
  t = std::fmod(std::abs(t), period);
  return std::cosh(m * (period / 2 - t)) / (2 * m * std::sinh(m * period / 2));
}

/// Brillouin-zone integral of the lattice momentum propagator.
double brillouin(double m, double a, long n) {
  const double pi = std::numbers::pi;
  auto f = [&](double e) { return lattice_momentum_propagator(m, a, e) * std::cos(e * n * a) / (2 * pi); };
  return integrate_adaptive(f, -pi / a, pi / a, 1e-15).value;
}

}  // namespace

TEST(Line, Values) {
  EXPECT_DOUBLE_EQ(propagator_line(1, 0), 0.5);
  EXPECT_LT(propagator_line(1, 60), 1e-25);
  EXPECT_DOUBLE_EQ(propagator_line(2, 1), std::exp(-2.0) / 4);
  EXPECT_DOUBLE_EQ(propagator_line(2, -1), propagator_line(2, 1));
  EXPECT_THROW(propagator_line(0, 1), Error);
}

TEST(Circle, MatchesClosedForm) {
  for (double m : {0.5, 1.0, 3.0})
    for (double period : {1.0, 8.0})
      for (double t : {0.0, 0.3, 1.7, 4.0, 7.9})
        EXPECT_NEAR(propagator_circle(m, period, t, 1e-13), circle_closed_form(m, period, t), 1e-12);
}

TEST(Circle, PeriodicAndEven) {
  EXPECT_NEAR(propagator_circle(1, 8, 1), propagator_circle(1, 8, 9), 1e-12);
  EXPECT_NEAR(propagator_circle(1, 8, -2.5), propagator_circle(1, 8, 2.5), 1e-12);
}

TEST(Circle, CloseToLineForShortTimes) {
  for (double t = 0; t <= 2.0; t += 0.25)
    EXPECT_LT(std::abs(propagator_circle(1, 8, t) / propagator_line(1, t) - 1), 0.05) << t;
}

TEST(Circle, MinimumNearHalfPeriod) {
  const double m = 1, period = 8;
  double v = propagator_circle(m, period, period / 2);
  EXPECT_GT(v, 0.5 * std::exp(-m * period / 2));
  EXPECT_LT(v, 2.0 * std::exp(-m * period / 2));
  for (double t : {1.0, 2.0, 3.0, 3.9}) EXPECT_GT(propagator_circle(m, period, t), v);
}

TEST(Circle, ToleranceUnachievable) {
  try {
    propagator_circle(1, 8, 1, 1e-20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("tolerance unachievable"), std::string::npos);
  }
}

TEST(EffectiveParams, CoarseLatticeValues) {
  EffectiveParams p = lattice_effective_params(1, 0.9);
  EXPECT_NEAR(p.z_eff, 0.456, 1e-3);
  EXPECT_NEAR(p.m_eff, 0.969, 1e-3);
  EXPECT_NEAR(propagator_infinite_lattice(1, 0.9, 0), 0.456, 1e-3);
}

TEST(EffectiveParams, ContinuumLimit) {
  EffectiveParams p = lattice_effective_params(2, 1e-5);
  EXPECT_NEAR(p.m_eff, 2, 1e-8);
  EXPECT_NEAR(p.z_eff, 0.25, 1e-8);
  EffectiveParams q = lattice_effective_params(1, 0.1);
  double exact = 1 - q.m_eff, series = 0.01 / 24;
  EXPECT_NEAR(series, exact, 0.1 * exact);
  EXPECT_NEAR(q.z_eff, (1 - 0.01 / 8) / 2, 1e-5);
}

TEST(InfiniteLattice, BrillouinIntegral) {
  for (double a : {0.3, 0.9})
    for (long n : {0L, 1L, 3L, -4L}) EXPECT_NEAR(propagator_infinite_lattice(1, a, n), brillouin(1, a, n), 1e-10);
  EXPECT_DOUBLE_EQ(propagator_infinite_lattice(1, 0.5, 3), propagator_infinite_lattice(1, 0.5, -3));
}

TEST(CircularLattice, PeriodicAndEven) {
  for (int sites : {1, 2, 5, 8}) {
    for (long n = 0; n < sites; ++n) {
      EXPECT_NEAR(propagator_circular_lattice(1, sites, 0.5, n), propagator_circular_lattice(1, sites, 0.5, n + sites), 1e-14);
      EXPECT_NEAR(propagator_circular_lattice(1, sites, 0.5, n), propagator_circular_lattice(1, sites, 0.5, -n), 1e-14);
    }
  }
}

TEST(CircularLattice, MatchesGaussianReduction) {
  const Rational m(1), a(1, 2);
  for (int sites = 1; sites <= 8; ++sites) {
    FreeCouplings c = free_discretization(m, a, sites);
    PotentialCoefficients p;
    p.k = c.k;
    LatticeSpec spec(1, sites, p, c.w);
    GaussianReducer g(spec);
    for (int j = 0; j < sites; ++j) {
      MultiIndex nu = dense1({1});
      nu.add(site1(j), 1);
      EXPECT_NEAR(to_double(g.ratio(nu)), propagator_circular_lattice(1, sites, 0.5, j), 1e-12) << sites << " " << j;
    }
  }
}

TEST(CircularLattice, ContinuumLimitToCircle) {
  const double m = 1, period = 4, t = 1;
  double previous = 1e9;
  for (int sites : {16, 64, 256, 1024}) {
    const double a = period / sites;
    double diff = std::abs(propagator_circular_lattice(m, sites, a, std::lround(t / a)) - propagator_circle(m, period, t));
    EXPECT_LT(diff, previous);
    previous = diff;
  }
  EXPECT_LT(previous, 1e-5);
}

TEST(CircularLattice, LargeVolumeToInfiniteLattice) {
  const double m = 1, a = 0.5;
  double previous = 1e9;
  for (int sites : {8, 16, 32, 64}) {
    double diff = std::abs(propagator_circular_lattice(m, sites, a, 0) - propagator_infinite_lattice(m, a, 0));
    EXPECT_LT(diff, previous);
    previous = diff;
  }
  EXPECT_LT(previous, 1e-12);
}

TEST(LimitDiagram, BothPathsReachLine) {
  // lattice -> circle -> line and lattice -> infinite lattice -> line at t = 1
  const double m = 1, t = 1;
  double via_circle = propagator_circle(m, 40, t);
  double via_lattice = propagator_infinite_lattice(m, 1e-3, std::lround(t / 1e-3));
  EXPECT_NEAR(via_circle, propagator_line(m, t), 1e-12);
  EXPECT_NEAR(via_lattice, propagator_line(m, t), 1e-6);
  EXPECT_NEAR(propagator_circular_lattice(m, 4000, 0.01, 100), propagator_line(m, t), 1e-4);
}

TEST(Discretization, Map) {
  FreeCouplings one = free_discretization(1, Rational(1, 2), 1);
  EXPECT_EQ(one.k, Rational(1, 2));
  EXPECT_EQ(one.w, 0);
  FreeCouplings two = free_discretization(1, Rational(1, 2), 2);
  EXPECT_EQ(two.k, Rational(9, 2));
  EXPECT_EQ(two.w, 4);
  FreeCouplings many = free_discretization(2, Rational(1, 2), 6);
  EXPECT_EQ(many.k, 6);
  EXPECT_EQ(many.w, 2);
}
