#pragma once

#include <lds/lattice.hpp>

#include <random>
#include <string>

namespace lds::testing {

inline Coefficient sym(const std::string& s, int e = 1) { return Coefficient::symbol(s, e); }

/// Quartic lattice with site couplings k<i>, lambda<i> (numbered from 1) and
/// a single bond symbol w.
inline LatticeSpec symbolic_lattice(int d, int extent, bool per_site = true) {
  PotentialCoefficients p;
  p.k = sym("k");
  p.lambda = sym("lambda");
  LatticeSpec spec(d, extent, p, sym("w"));
  if (per_site) {
    for (int s = 0; s < spec.site_count(); ++s) {
      PotentialCoefficients q;
      q.k = sym("k" + std::to_string(s + 1));
      q.lambda = sym("lambda" + std::to_string(s + 1));
      spec.set_potential(spec.site(s), q);
    }
  }
  return spec;
}

/// Numeric quartic lattice with uniform couplings.
inline LatticeSpec numeric_lattice(int d, int extent, Rational k, Rational lambda, Rational w) {
  PotentialCoefficients p;
  p.k = k;
  p.lambda = lambda;
  return LatticeSpec(d, extent, p, w);
}

inline MultiIndex random_index(std::mt19937_64& rng, const LatticeSpec& spec, int max_occ) {
  std::uniform_int_distribution<int> occ(0, max_occ);
  MultiIndex nu;
  for (int s = 0; s < spec.site_count(); ++s) nu.set(spec.site(s), occ(rng));
  return nu;
}

}  // namespace lds::testing
