#pragma once

// Periodic hypercubic lattices, couplings, and multi-indices.

#include <lds/coefficient.hpp>

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lds {

/// Lattice point. Coordinates are stored most-significant axis first, so the
/// default ordering is row-major.
struct Site {
  std::vector<int> coords;

  Site() = default;
  explicit Site(std::vector<int> c) : coords(std::move(c)) {}
  Site(std::initializer_list<int> c) : coords(c) {}

  int dimension() const { return static_cast<int>(coords.size()); }

  /// Reduces every coordinate into [0, extent).
  Site normalized(int extent) const {
    Site out = *this;
    for (int& c : out.coords) c = ((c % extent) + extent) % extent;
    return out;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t a = 0; a < coords.size(); ++a) s += (a ? "," : "") + std::to_string(coords[a]);
    return s + ")";
  }

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;
};

/// Sparse occupation numbers; absent sites carry zero.
class MultiIndex {
 public:
  MultiIndex() = default;
  MultiIndex(std::initializer_list<std::pair<Site, int>> entries) {
    for (const auto& [s, n] : entries) add(s, n);
  }

  const std::map<Site, int>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  int at(const Site& s) const {
    auto it = entries_.find(s);
    return it == entries_.end() ? 0 : it->second;
  }

  void set(const Site& s, int n) {
    if (n < 0) throw Error("occupation underflow at site " + s.to_string());
    if (n == 0) entries_.erase(s);
    else entries_[s] = n;
  }

  void add(const Site& s, int delta) { set(s, at(s) + delta); }

  /// Copy with occupation at `s` shifted by `delta`.
  MultiIndex shifted(const Site& s, int delta) const {
    MultiIndex out = *this;
    out.add(s, delta);
    return out;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (const auto& [site, n] : entries_) {
      s += (first ? "" : ", ") + site.to_string() + ":" + std::to_string(n);
      first = false;
    }
    return s + "}";
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::map<Site, int> entries_;
};

inline int weight(const MultiIndex& nu) {
  int w = 0;
  for (const auto& [s, n] : nu.entries()) w += n;
  return w;
}

inline int tau(const MultiIndex& nu) { return static_cast<int>(nu.entries().size()); }

struct Norms {
  int inf_norm = 0;
  int one_norm = 0;
  int distance_to_Hc = 0;  ///< one-distance to the edge-2 hypercube of primitives
};

inline Norms norms(const MultiIndex& nu) {
  Norms out;
  for (const auto& [s, n] : nu.entries()) {
    out.inf_norm = std::max(out.inf_norm, n);
    out.one_norm += n;
    out.distance_to_Hc += std::max(n - 2, 0);
  }
  return out;
}

inline bool is_primitive(const MultiIndex& nu, int m_anh) {
  for (const auto& [s, n] : nu.entries())
    if (n > m_anh - 2) return false;
  return true;
}

/// On-site potential a*phi + k*phi^2/2 + g*phi^3/3 + lambda*phi^4/4.
struct PotentialCoefficients {
  Coefficient a{0};
  Coefficient k{1};
  Coefficient g{0};
  Coefficient lambda{0};

  /// Highest power with a nonzero coefficient.
  int m_anh() const {
    if (!lambda.is_zero()) return 4;
    if (!g.is_zero()) return 3;
    if (!k.is_zero()) return 2;
    throw Error("potential has no quadratic or higher term");
  }

  bool is_even() const { return a.is_zero() && g.is_zero(); }
  bool is_numeric() const {
    return a.is_constant() && k.is_constant() && g.is_constant() && lambda.is_constant();
  }

  friend bool operator==(const PotentialCoefficients&, const PotentialCoefficients&) = default;
};

struct Bond {
  int first = 0;   ///< flat site index
  int second = 0;  ///< flat site index, first + e_axis
  int axis = 0;
  Coefficient w{0};
};

/// Periodic hypercubic lattice of extent N along each of d axes with
/// nearest-neighbour bonds. An axis of extent 2 carries a single bond per
/// transverse position; an axis of extent 1 carries none.
class LatticeSpec {
 public:
  LatticeSpec(int dimension, int extent, PotentialCoefficients potential = {}, Coefficient w = Coefficient(0))
      : dimension_(dimension), extent_(extent) {
    if (dimension < 1) throw Error("lattice dimension must be >= 1");
    if (extent < 1) throw Error("lattice extent must be >= 1");
    site_count_ = 1;
    for (int a = 0; a < dimension; ++a) site_count_ *= extent;
    potentials_.assign(static_cast<std::size_t>(site_count_), potential);
    for (int s = 0; s < site_count_; ++s) {
      Site x = site(s);
      for (int axis = 0; axis < dimension_; ++axis) {
        if (extent_ == 1) continue;
        if (extent_ == 2 && x.coords[static_cast<std::size_t>(axis)] != 0) continue;
        Site y = x;
        y.coords[static_cast<std::size_t>(axis)] += 1;
        bonds_.push_back(Bond{s, flat(y), axis, w});
      }
    }
  }

  int dimension() const { return dimension_; }
  int extent() const { return extent_; }
  int site_count() const { return site_count_; }

  Site site(int flat_index) const {
    std::vector<int> c(static_cast<std::size_t>(dimension_));
    for (int a = dimension_ - 1; a >= 0; --a) {
      c[static_cast<std::size_t>(a)] = flat_index % extent_;
      flat_index /= extent_;
    }
    return Site(std::move(c));
  }

  int flat(const Site& s) const {
    if (s.dimension() != dimension_) throw Error("site " + s.to_string() + " has wrong dimension");
    Site n = s.normalized(extent_);
    int f = 0;
    for (int c : n.coords) f = f * extent_ + c;
    return f;
  }

  Site normalize(const Site& s) const { return site(flat(s)); }

  std::vector<Site> sites() const {
    std::vector<Site> out;
    for (int s = 0; s < site_count_; ++s) out.push_back(site(s));
    return out;
  }

  const PotentialCoefficients& potential(int flat_index) const {
    return potentials_.at(static_cast<std::size_t>(flat_index));
  }
  const PotentialCoefficients& potential(const Site& s) const { return potential(flat(s)); }

  void set_potential(const Site& s, PotentialCoefficients p) {
    potentials_.at(static_cast<std::size_t>(flat(s))) = std::move(p);
  }
  void set_potential_all(const PotentialCoefficients& p) {
    std::fill(potentials_.begin(), potentials_.end(), p);
  }

  const std::vector<Bond>& bonds() const { return bonds_; }

  /// Index of the bond joining two sites, if they are nearest neighbours.
  std::optional<int> bond_between(int s1, int s2) const {
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      const Bond& bd = bonds_[b];
      if ((bd.first == s1 && bd.second == s2) || (bd.first == s2 && bd.second == s1))
        return static_cast<int>(b);
    }
    return std::nullopt;
  }

  void set_bond_coupling(int bond_index, Coefficient w) {
    bonds_.at(static_cast<std::size_t>(bond_index)).w = std::move(w);
  }
  void set_bond_coupling(const Site& s1, const Site& s2, Coefficient w) {
    auto b = bond_between(flat(s1), flat(s2));
    if (!b) throw Error("sites " + s1.to_string() + " and " + s2.to_string() + " are not nearest neighbours");
    set_bond_coupling(*b, std::move(w));
  }
  void set_bond_coupling_all(const Coefficient& w) {
    for (auto& b : bonds_) b.w = w;
  }

  /// Neighbour of `s` one step along `axis` in direction `dir` (+1 / -1),
  /// together with the bond joining them.
  std::optional<std::pair<int, int>> neighbour(int s, int axis, int dir) const {
    if (extent_ == 1) return std::nullopt;
    Site y = site(s);
    y.coords[static_cast<std::size_t>(axis)] += dir;
    int t = flat(y);
    auto b = bond_between(s, t);
    return std::make_pair(t, *b);
  }

  /// Distinct (neighbour, bond) pairs incident to `s`.
  std::vector<std::pair<int, int>> neighbours(int s) const {
    std::vector<std::pair<int, int>> out;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      if (bonds_[b].first == s) out.emplace_back(bonds_[b].second, static_cast<int>(b));
      else if (bonds_[b].second == s) out.emplace_back(bonds_[b].first, static_cast<int>(b));
    }
    return out;
  }

  int m_anh() const {
    int m = 2;
    for (const auto& p : potentials_) m = std::max(m, p.m_anh());
    return m;
  }

  bool is_numeric() const {
    for (const auto& p : potentials_)
      if (!p.is_numeric()) return false;
    for (const auto& b : bonds_)
      if (!b.w.is_constant()) return false;
    return true;
  }

  /// No source or cubic terms anywhere, so phi -> -phi is a symmetry.
  bool is_even() const {
    for (const auto& p : potentials_)
      if (!p.is_even()) return false;
    return true;
  }

  bool is_uniform() const {
    for (const auto& p : potentials_)
      if (!(p == potentials_.front())) return false;
    for (const auto& b : bonds_)
      if (!(b.w == bonds_.front().w)) return false;
    return true;
  }

  bool all_bonds_zero() const {
    for (const auto& b : bonds_)
      if (!b.w.is_zero()) return false;
    return true;
  }

  std::set<std::string> symbols() const {
    std::set<std::string> out;
    auto take = [&](const Coefficient& c) {
      auto s = c.symbols();
      out.insert(s.begin(), s.end());
    };
    for (const auto& p : potentials_) {
      take(p.a);
      take(p.k);
      take(p.g);
      take(p.lambda);
    }
    for (const auto& b : bonds_) take(b.w);
    return out;
  }

  /// Copy with every coupling evaluated under `values` (unassigned symbols kept).
  LatticeSpec substituted(const Assignment& values) const {
    LatticeSpec out = *this;
    for (auto& p : out.potentials_) {
      p.a = p.a.substitute(values);
      p.k = p.k.substitute(values);
      p.g = p.g.substitute(values);
      p.lambda = p.lambda.substitute(values);
    }
    for (auto& b : out.bonds_) b.w = b.w.substitute(values);
    return out;
  }

  /// Dense occupation tuple in row-major site order.
  std::vector<int> dense(const MultiIndex& nu) const {
    std::vector<int> out(static_cast<std::size_t>(site_count_), 0);
    for (const auto& [s, n] : nu.entries()) out[static_cast<std::size_t>(flat(s))] += n;
    return out;
  }

  MultiIndex from_dense(const std::vector<int>& occ) const {
    if (static_cast<int>(occ.size()) != site_count_) throw Error("dense multi-index has wrong length");
    MultiIndex nu;
    for (int s = 0; s < site_count_; ++s) nu.set(site(s), occ[static_cast<std::size_t>(s)]);
    return nu;
  }

  /// Same multi-index with every site normalized into this lattice.
  MultiIndex normalize(const MultiIndex& nu) const { return from_dense(dense(nu)); }

 private:
  int dimension_;
  int extent_;
  int site_count_ = 1;
  std::vector<PotentialCoefficients> potentials_;
  std::vector<Bond> bonds_;
};

/// Convenience for one-dimensional sites.
inline Site site1(int i) { return Site{i}; }

/// One-dimensional multi-index from a dense tuple.
inline MultiIndex dense1(std::initializer_list<int> occ) {
  MultiIndex nu;
  int i = 0;
  for (int n : occ) nu.set(site1(i++), n);
  return nu;
}

}  // namespace lds
