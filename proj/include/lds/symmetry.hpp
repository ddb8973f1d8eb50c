#pragma once

// Lattice symmetries: the dihedral group D_N in d = 1 and the group generated
// by per-axis translations, per-axis reflections and axis permutations in
// d > 1; Z_2 field parity; orbit canonicalization and basis counting.

#include <lds/lattice.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

namespace lds {

/// x -> S R P x : permute axes (coordinate a moves to axis_permutation[a]),
/// then reflect flagged axes (x_a -> -x_a), then translate.
struct GroupElement {
  std::vector<int> shift;
  std::vector<bool> reflect;
  std::vector<int> axis_permutation;

  static GroupElement identity(int d) {
    GroupElement g;
    g.shift.assign(static_cast<std::size_t>(d), 0);
    g.reflect.assign(static_cast<std::size_t>(d), false);
    g.axis_permutation.resize(static_cast<std::size_t>(d));
    std::iota(g.axis_permutation.begin(), g.axis_permutation.end(), 0);
    return g;
  }

  int dimension() const { return static_cast<int>(shift.size()); }

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

inline Site apply_group(const GroupElement& g, const Site& x, int extent) {
  const auto d = x.coords.size();
  std::vector<int> y(d);
  for (std::size_t a = 0; a < d; ++a) y[static_cast<std::size_t>(g.axis_permutation[a])] = x.coords[a];
  for (std::size_t a = 0; a < d; ++a) {
    if (g.reflect[a]) y[a] = -y[a];
    y[a] += g.shift[a];
  }
  return Site(std::move(y)).normalized(extent);
}

inline MultiIndex apply_group(const GroupElement& g, const MultiIndex& nu, int extent) {
  MultiIndex out;
  for (const auto& [s, n] : nu.entries()) out.add(apply_group(g, s, extent), n);
  return out;
}

/// (g o h)(x) = g(h(x)).
inline GroupElement compose(const GroupElement& g, const GroupElement& h, int extent) {
  const auto d = g.shift.size();
  GroupElement out = GroupElement::identity(static_cast<int>(d));
  std::vector<int> moved_shift(d);
  std::vector<bool> moved_reflect(d);
  for (std::size_t a = 0; a < d; ++a) {
    auto b = static_cast<std::size_t>(g.axis_permutation[a]);
    moved_shift[b] = h.shift[a];
    moved_reflect[b] = h.reflect[a];
  }
  for (std::size_t a = 0; a < d; ++a)
    out.axis_permutation[a] = g.axis_permutation[static_cast<std::size_t>(h.axis_permutation[a])];
  for (std::size_t a = 0; a < d; ++a) {
    out.reflect[a] = g.reflect[a] != moved_reflect[a];
    int s = g.reflect[a] ? -moved_shift[a] : moved_shift[a];
    out.shift[a] = (((g.shift[a] + s) % extent) + extent) % extent;
  }
  return out;
}

inline GroupElement inverse(const GroupElement& g, int extent) {
  const auto d = g.shift.size();
  GroupElement out = GroupElement::identity(static_cast<int>(d));
  // g^-1 = P^-1 R S^-1 ;  written again as S' R' P'.
  for (std::size_t a = 0; a < d; ++a) out.axis_permutation[static_cast<std::size_t>(g.axis_permutation[a])] = static_cast<int>(a);
  for (std::size_t a = 0; a < d; ++a) {
    auto src = static_cast<std::size_t>(g.axis_permutation[a]);
    out.reflect[a] = g.reflect[src];
    int s = g.reflect[src] ? g.shift[src] : -g.shift[src];
    out.shift[a] = ((s % extent) + extent) % extent;
  }
  return out;
}

/// All d! * 2^d * N^d elements (as formal triples; for N <= 2 distinct
/// elements may act identically on sites).
inline std::vector<GroupElement> hypercubic_group(int d, int extent) {
  std::vector<GroupElement> out;
  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  std::int64_t translations = 1;
  for (int a = 0; a < d; ++a) translations *= extent;
  do {
    for (int flags = 0; flags < (1 << d); ++flags) {
      for (std::int64_t t = 0; t < translations; ++t) {
        GroupElement g = GroupElement::identity(d);
        g.axis_permutation = perm;
        std::int64_t rest = t;
        for (int a = 0; a < d; ++a) {
          g.reflect[static_cast<std::size_t>(a)] = (flags >> a) & 1;
          g.shift[static_cast<std::size_t>(a)] = static_cast<int>(rest % extent);
          rest /= extent;
        }
        out.push_back(std::move(g));
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

struct OrbitSummary {
  MultiIndex canonical;
  std::size_t orbit_size = 1;
  std::size_t stabilizer_size = 1;
  std::size_t group_order = 1;
};

/// Canonical representative under a precomputed group: the orbit member whose
/// dense row-major tuple is lexicographically smallest.
class Canonicalizer {
 public:
  explicit Canonicalizer(const LatticeSpec& spec)
      : dimension_(spec.dimension()), extent_(spec.extent()), sites_(spec.site_count()) {
    auto group = spec.is_uniform() ? hypercubic_group(dimension_, extent_)
                                   : std::vector<GroupElement>{GroupElement::identity(dimension_)};
    // Each element as a permutation of flat site indices.
    for (const auto& g : group) {
      std::vector<int> perm(static_cast<std::size_t>(sites_));
      for (int s = 0; s < sites_; ++s) perm[static_cast<std::size_t>(s)] = spec.flat(apply_group(g, spec.site(s), extent_));
      perms_.push_back(std::move(perm));
    }
  }

  std::size_t group_order() const { return perms_.size(); }

  /// Dense-tuple form; cheaper for enumeration sweeps.
  std::vector<int> canonical_dense(const std::vector<int>& occ, std::size_t* orbit = nullptr,
                                   std::size_t* stabilizer = nullptr) const {
    std::vector<int> best;
    std::vector<int> image(occ.size());
    std::set<std::vector<int>> images;
    std::size_t fixed = 0;
    for (const auto& perm : perms_) {
      for (std::size_t s = 0; s < occ.size(); ++s) image[static_cast<std::size_t>(perm[s])] = occ[s];
      if (image == occ) ++fixed;
      if (orbit) images.insert(image);
      if (best.empty() || image < best) best = image;
    }
    if (orbit) *orbit = images.size();
    if (stabilizer) *stabilizer = fixed;
    return best;
  }

  OrbitSummary summarize(const LatticeSpec& spec, const MultiIndex& nu) const {
    OrbitSummary out;
    std::vector<int> best = canonical_dense(spec.dense(nu), &out.orbit_size, &out.stabilizer_size);
    out.canonical = spec.from_dense(best);
    out.group_order = perms_.size();
    return out;
  }

 private:
  int dimension_;
  int extent_;
  int sites_;
  std::vector<std::vector<int>> perms_;
};

/// Orbit summary under the lattice group; a non-uniform lattice has only the
/// identity, so the canonical form is the input.
inline OrbitSummary canonicalize(const MultiIndex& nu, const LatticeSpec& spec) {
  return Canonicalizer(spec).summarize(spec, nu);
}

/// True iff the correlator vanishes by phi -> -phi parity.
inline bool is_parity_zero(const MultiIndex& nu, const LatticeSpec& spec) {
  if (!spec.is_even()) throw Error("parity not a symmetry");
  return weight(nu) % 2 == 1;
}

enum class SymmetryLevel { none, parity, full };

inline std::uint64_t checked_power(std::uint64_t base, std::uint64_t exponent, std::uint64_t limit) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exponent; ++i) {
    if (base != 0 && out > limit / base) throw Error("enumeration too large");
    out *= base;
  }
  return out;
}

/// Number of primitive correlators on an N^d lattice with anharmonicity
/// m_anh: raw, after dropping parity-odd ones, or after also identifying
/// group orbits. Parity applies only to even potentials (m_anh even).
inline std::uint64_t count_primitive_basis(int extent, int d, int m_anh, SymmetryLevel level,
                                           std::uint64_t enumeration_limit = 20'000'000) {
  if (extent < 1 || d < 1) throw Error("lattice extent and dimension must be positive");
  if (m_anh < 2 || m_anh > 4) throw Error("m_anh must lie in [2, 4]");
  std::uint64_t sites = checked_power(static_cast<std::uint64_t>(extent), static_cast<std::uint64_t>(d), 1u << 20);
  const std::uint64_t base = static_cast<std::uint64_t>(m_anh - 1);
  const bool parity = m_anh % 2 == 0;
  const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max() / 4;

  if (level == SymmetryLevel::none) return checked_power(base, sites, cap);
  if (level == SymmetryLevel::parity) {
    if (!parity) throw Error("parity not a symmetry");
    // Occupations 0..base-1 with base odd: one more even value than odd.
    return (checked_power(base, sites, cap) + 1) / 2;
  }

  std::uint64_t total = checked_power(base, sites, enumeration_limit);
  LatticeSpec spec(d, extent);
  Canonicalizer canon(spec);
  std::vector<int> occ(static_cast<std::size_t>(sites), 0);
  std::uint64_t orbits = 0;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t rest = code;
    int w = 0;
    for (auto& o : occ) {
      o = static_cast<int>(rest % base);
      rest /= base;
      w += o;
    }
    if (parity && w % 2 == 1) continue;
    if (canon.canonical_dense(occ) == occ) ++orbits;
  }
  return orbits;
}

}  // namespace lds
