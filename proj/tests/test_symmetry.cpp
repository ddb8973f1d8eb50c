#include <lds/reduction.hpp>
#include <lds/symmetry.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lds;

namespace {

GroupElement rotation(int shift) {
  GroupElement g = GroupElement::identity(1);
  g.shift[0] = shift;
  return g;
}

GroupElement reflection() {
  GroupElement g = GroupElement::identity(1);
  g.reflect[0] = true;
  return g;
}

}  // namespace

TEST(Group, ApplyExamples) {
  EXPECT_EQ(apply_group(rotation(1), dense1({2}), 3), dense1({0, 2}));
  EXPECT_EQ(apply_group(reflection(), dense1({0, 1}), 3), dense1({0, 0, 1}));
  MultiIndex nu = dense1({1, 0, 3});
  EXPECT_EQ(apply_group(GroupElement::identity(1), nu, 3), nu);
}

TEST(Group, DihedralOrder) {
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(hypercubic_group(1, n).size(), static_cast<std::size_t>(2 * n));
  EXPECT_EQ(hypercubic_group(2, 3).size(), 2u * 4u * 9u);
}

TEST(Group, Canonicalize) {
  LatticeSpec spec(1, 3);
  OrbitSummary one = canonicalize(dense1({2}), spec);
  EXPECT_EQ(one.canonical, dense1({0, 0, 2}));
  OrbitSummary two = canonicalize(dense1({1, 2}), spec);
  EXPECT_EQ(two.orbit_size, 6u);
  EXPECT_EQ(spec.dense(two.canonical), (std::vector<int>{0, 1, 2}));
  OrbitSummary all = canonicalize(dense1({2, 2, 2}), spec);
  EXPECT_EQ(all.orbit_size, 1u);
  EXPECT_EQ(all.canonical, dense1({2, 2, 2}));
  EXPECT_EQ(all.stabilizer_size, 6u);
}

TEST(Group, NonUniformIsTrivial) {
  LatticeSpec spec(1, 3);
  spec.set_potential(site1(1), PotentialCoefficients{0, 2, 0, 1});
  OrbitSummary s = canonicalize(dense1({2}), spec);
  EXPECT_EQ(s.canonical, dense1({2}));
  EXPECT_EQ(s.orbit_size, 1u);
}

TEST(Parity, Zero) {
  LatticeSpec spec(1, 5, PotentialCoefficients{0, 1, 0, 1});
  EXPECT_TRUE(is_parity_zero(dense1({1}), spec));
  EXPECT_FALSE(is_parity_zero(dense1({1, 1}), spec));
  EXPECT_TRUE(is_parity_zero(MultiIndex{{site1(0), 3}, {site1(4), 2}}, spec));
  LatticeSpec odd(1, 2, PotentialCoefficients{0, 1, 1, 1});
  try {
    is_parity_zero(dense1({1}), odd);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("parity not a symmetry"), std::string::npos);
  }
}

TEST(Counting, ClosedForms) {
  const std::uint64_t expected[] = {2, 5, 14, 41, 122, 365, 1094, 3281};
  for (int n = 1; n <= 8; ++n) EXPECT_EQ(count_primitive_basis(n, 1, 4, SymmetryLevel::parity), expected[n - 1]);
  EXPECT_EQ(count_primitive_basis(2, 1, 3, SymmetryLevel::none), 4u);
  EXPECT_EQ(count_primitive_basis(3, 1, 4, SymmetryLevel::none), 27u);
  EXPECT_EQ(count_primitive_basis(2, 2, 4, SymmetryLevel::none), 81u);
  EXPECT_THROW(count_primitive_basis(3, 1, 3, SymmetryLevel::parity), Error);
}

TEST(Counting, FullOrbits) {
  std::uint64_t n3 = count_primitive_basis(3, 1, 4, SymmetryLevel::full);
  EXPECT_GE(n3 * 12, 27u);
  EXPECT_LE(n3, 14u);
  // D_3 acts as S_3: even multisets 000, 002, 011, 022, 112, 222.
  EXPECT_EQ(n3, 6u);
  EXPECT_EQ(count_primitive_basis(2, 1, 4, SymmetryLevel::full), 4u);
  EXPECT_EQ(count_primitive_basis(1, 1, 4, SymmetryLevel::full), 2u);
  EXPECT_THROW(count_primitive_basis(30, 1, 4, SymmetryLevel::full), Error);
}

TEST(GroupProperty, CompositionAndInverse) {
  std::mt19937_64 rng(21);
  for (int d : {1, 2}) {
    for (int n : {2, 3, 4}) {
      LatticeSpec spec(d, n);
      auto group = hypercubic_group(d, n);
      std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
      for (int t = 0; t < 40; ++t) {
        const auto& g = group[pick(rng)];
        const auto& h = group[pick(rng)];
        MultiIndex nu = lds::testing::random_index(rng, spec, 3);
        MultiIndex gh = apply_group(g, apply_group(h, nu, n), n);
        EXPECT_EQ(apply_group(compose(g, h, n), nu, n), gh);
        EXPECT_EQ(apply_group(inverse(g, n), apply_group(g, nu, n), n), nu);
        EXPECT_EQ(weight(apply_group(g, nu, n)), weight(nu));
        EXPECT_EQ(tau(apply_group(g, nu, n)), tau(nu));
      }
    }
  }
}

TEST(GroupProperty, OrbitStabilizer) {
  std::mt19937_64 rng(22);
  LatticeSpec spec(2, 3);
  Canonicalizer c(spec);
  for (int t = 0; t < 30; ++t) {
    OrbitSummary s = c.summarize(spec, lds::testing::random_index(rng, spec, 2));
    EXPECT_EQ(s.orbit_size * s.stabilizer_size, s.group_order);
    EXPECT_EQ(c.summarize(spec, s.canonical).canonical, s.canonical);
  }
}

TEST(GroupProperty, ReductionCommutesWithSymmetry) {
  std::mt19937_64 rng(23);
  for (int d : {1, 2}) {
    const int n = d == 1 ? 4 : 3;
    LatticeSpec spec = lds::testing::symbolic_lattice(d, n, false);
    Reducer r(spec);
    auto group = hypercubic_group(d, n);
    std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
    for (int t = 0; t < 6; ++t) {
      MultiIndex nu = lds::testing::random_index(rng, spec, d == 1 ? 5 : 4);
      const auto& g = group[pick(rng)];
      Combination mapped = r.reduce(nu).mapped([&](const MultiIndex& m) { return apply_group(g, m, n); });
      EXPECT_EQ(r.reduce(apply_group(g, nu, n)), mapped);
    }
  }
}

TEST(CountingProperty, LowerBound) {
  for (int n = 3; n <= 8; ++n) {
    std::uint64_t full = count_primitive_basis(n, 1, 4, SymmetryLevel::full);
    std::uint64_t raw = count_primitive_basis(n, 1, 4, SymmetryLevel::none);
    EXPECT_GE(full * 4 * static_cast<std::uint64_t>(n), raw);
    EXPECT_LE(full, count_primitive_basis(n, 1, 4, SymmetryLevel::parity));
  }
}
