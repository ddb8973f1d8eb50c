#include <lds/evolution.hpp>
#include <lds/oracle.hpp>
#include <lds/symmetry.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace lds;

namespace {

PotentialCoefficients quartic(Rational k, Rational lambda) {
  PotentialCoefficients p;
  p.k = k;
  p.lambda = lambda;
  return p;
}

}  // namespace

TEST(Oracle, GaussianTwoSites) {
  LatticeSpec spec(1, 2, quartic(1, 0), Rational(1, 2));
  OracleResult r = direct_correlator(spec, dense1({1, 1}));
  EXPECT_NEAR(r.normalized, 2.0 / 3.0, 1e-10);
  EXPECT_LT(r.error, 1e-8);
}

TEST(Oracle, SingleSiteMatchesMoment) {
  LatticeSpec spec(1, 1, quartic(1, 1));
  OracleResult r = direct_correlator(spec, dense1({2}));
  EXPECT_NEAR(r.normalized, onsite_moment(2, quartic(1, 1)) / onsite_moment(0, quartic(1, 1)), 1e-10);
  EXPECT_NEAR(r.value, onsite_moment(2, quartic(1, 1)), 1e-10);
}

TEST(Oracle, OddWeightIsZero) {
  LatticeSpec spec(1, 3, quartic(1, 1), Rational(1, 4));
  EXPECT_EQ(direct_correlator(spec, dense1({1, 2})).normalized, 0.0);
}

TEST(Oracle, TensorAgreesWithMonteCarlo) {
  LatticeSpec spec(1, 3, quartic(1, Rational(1, 2)), Rational(1, 4));
  OracleConfig mc;
  mc.method = OracleMethod::monte_carlo;
  mc.samples = 400'000;
  OracleResult q = direct_correlator(spec, dense1({2, 2, 2}));
  OracleResult m = direct_correlator(spec, dense1({2, 2, 2}), mc);
  EXPECT_GT(m.error, 0.0);
  EXPECT_LT(std::abs(q.normalized - m.normalized), 3 * (m.error + q.error));
}

TEST(Oracle, MonteCarloDeterministicAcrossThreads) {
  LatticeSpec spec(1, 3, quartic(1, Rational(1, 2)), Rational(1, 4));
  OracleConfig mc;
  mc.method = OracleMethod::monte_carlo;
  mc.samples = 20'000;
  OracleResult a = direct_correlator(spec, dense1({2}), mc);
  mc.threads = 3;
  OracleResult b = direct_correlator(spec, dense1({2}), mc);
  EXPECT_EQ(a.normalized, b.normalized);
}

TEST(Oracle, NodeDoublingStable) {
  LatticeSpec spec(1, 3, quartic(1, Rational(1, 2)), Rational(1, 4));
  OracleConfig base;
  base.nodes = 40;
  OracleConfig doubled = base;
  doubled.nodes = 80;
  OracleResult a = direct_correlator(spec, dense1({2, 1, 1}), base);
  OracleResult b = direct_correlator(spec, dense1({2, 1, 1}), doubled);
  EXPECT_LE(std::abs(a.normalized - b.normalized), a.error + b.error + 1e-14);
}

TEST(Oracle, SymmetricUnderGroup) {
  LatticeSpec spec(1, 3, quartic(1, Rational(1, 2)), Rational(1, 4));
  MultiIndex nu = dense1({3, 1, 0});
  OracleResult base = direct_correlator(spec, nu);
  for (const auto& g : hypercubic_group(1, 3)) {
    OracleResult r = direct_correlator(spec, apply_group(g, nu, 3));
    EXPECT_NEAR(r.normalized, base.normalized, base.error + r.error + 1e-12);
  }
}

TEST(Oracle, MasterIdentity) {
  LatticeSpec spec(1, 3, quartic(1, Rational(1, 2)), Rational(1, 3));
  std::vector<MultiIndex> targets{dense1({3, 2, 2}), dense1({0, 3, 2}), dense1({4, 2, 0})};
  for (const auto& nu : targets) {
    auto [combo, trace] = reduce_to_primitive(nu, spec);
    std::vector<MultiIndex> prims;
    for (const auto& [mu, c] : combo.terms()) prims.push_back(mu);
    auto values = direct_correlators(spec, prims);
    double sum = 0, err = 0;
    std::size_t i = 0;
    for (const auto& [mu, c] : combo.terms()) {
      double cv = to_double(c.constant_value());
      sum += cv * values[i].normalized;
      err += std::abs(cv) * values[i].error;
      ++i;
    }
    OracleResult direct = direct_correlator(spec, nu);
    EXPECT_NEAR(sum, direct.normalized, err + direct.error + 1e-10) << nu.to_string();
  }
}

TEST(Oracle, Errors) {
  EXPECT_THROW(direct_correlator(LatticeSpec(1, 5, quartic(1, 1)), dense1({2})), Error);
  try {
    direct_correlator(LatticeSpec(1, 5, quartic(1, 1)), dense1({2}));
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("dimension too large"), std::string::npos);
  }
  OracleConfig mc;
  mc.method = OracleMethod::monte_carlo;
  EXPECT_THROW(direct_correlator(LatticeSpec(1, 11, quartic(1, 1)), dense1({2}), mc), Error);
  try {
    direct_correlator(LatticeSpec(1, 2, quartic(1, 0), Rational(1)), dense1({2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("non-integrable action"), std::string::npos);
  }
}
