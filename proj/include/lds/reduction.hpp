#pragma once

// Lattice Dyson-Schwinger reduction of correlators G(nu) to primitive
// correlators. Each step solves the integration-by-parts identity at one site
//
//   nu_i G(nu - e_i) = < Phi^nu dS/dphi_i >
//
// for its highest-weight term and rewrites G(nu) through lower weights.

#include <lds/lattice.hpp>
#include <lds/linear_combination.hpp>

#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lds {

using Combination = LinearCombination<MultiIndex>;

struct ReductionTrace {
  std::size_t steps = 0;          ///< LDS applications performed
  std::size_t visited = 0;        ///< distinct multi-indices touched
  std::size_t max_branching = 0;  ///< most terms produced by a single step
};

namespace detail {

/// Coefficient multiplying the highest-weight term of the LDS identity.
inline const Coefficient& top_coupling(const PotentialCoefficients& p, int m_anh) {
  switch (m_anh) {
    case 4: return p.lambda;
    case 3: return p.g;
    default: throw Error("no weight-lowering LDS step for a quadratic action; use gaussian_reduce");
  }
}

}  // namespace detail

/// One LDS solution at site `i`: G(nu) as a combination of correlators of
/// lower weight. With p = m_anh - 1 and c the top coupling (lambda or g):
///
///   G(nu) = [ (nu_i - p) G(nu - (p+1)e_i) - a G(nu - p e_i) - k G(nu - (p-1)e_i)
///             - g G(nu - e_i) [quartic only] + sum_j w_ij G(nu - p e_i + e_j) ] / c
inline Combination lds_solve_step(const MultiIndex& nu_in, const Site& i_in, const LatticeSpec& spec) {
  const MultiIndex nu = spec.normalize(nu_in);
  const int i = spec.flat(i_in);
  const Site si = spec.site(i);
  const int m_anh = spec.m_anh();
  const int p = m_anh - 1;
  const int n = nu.at(si);
  if (m_anh < 3) throw Error("no weight-lowering LDS step for a quadratic action; use gaussian_reduce");
  if (n < p) throw Error("site not reducible: occupation " + std::to_string(n) + " at " + si.to_string());

  const PotentialCoefficients& pot = spec.potential(i);
  const Coefficient& top = detail::top_coupling(pot, m_anh);
  if (top.is_zero())
    throw Error(m_anh == 4 ? "vanishing quartic coupling at reduced site" : "vanishing cubic coupling at reduced site");
  if (!top.is_unit()) throw Error("top coupling at reduced site is not a single monomial: " + top.to_string());
  const Coefficient inv = top.inverse();

  Combination out;
  if (n - p > 0) out.add_term(nu.shifted(si, -(p + 1)), inv * Coefficient(n - p));
  if (!pot.a.is_zero()) out.add_term(nu.shifted(si, -p), -(pot.a * inv));
  if (!pot.k.is_zero()) out.add_term(nu.shifted(si, -(p - 1)), -(pot.k * inv));
  if (m_anh == 4 && !pot.g.is_zero()) out.add_term(nu.shifted(si, -1), -(pot.g * inv));
  for (const auto& [j, b] : spec.neighbours(i)) {
    const Coefficient& w = spec.bonds()[static_cast<std::size_t>(b)].w;
    if (w.is_zero()) continue;
    MultiIndex moved = nu.shifted(si, -p);
    moved.add(spec.site(j), 1);
    out.add_term(moved, w * inv);
  }
  return out;
}

/// Memoized reduction to primitive correlators. The site reduced at each step
/// is the first site in `site_order` whose occupation is at least m_anh - 1;
/// the default order is row-major.
class Reducer {
 public:
  explicit Reducer(LatticeSpec spec, std::vector<int> site_order = {})
      : spec_(std::move(spec)), m_anh_(spec_.m_anh()), order_(std::move(site_order)) {
    if (order_.empty()) {
      order_.resize(static_cast<std::size_t>(spec_.site_count()));
      std::iota(order_.begin(), order_.end(), 0);
    }
    if (static_cast<int>(order_.size()) != spec_.site_count()) throw Error("site order must list every site once");
    std::vector<int> check = order_;
    std::sort(check.begin(), check.end());
    for (int s = 0; s < spec_.site_count(); ++s)
      if (check[static_cast<std::size_t>(s)] != s) throw Error("site order must list every site once");
    if (const char* cap = std::getenv("LDS_MEMO_LIMIT")) memo_limit_ = std::strtoull(cap, nullptr, 10);
  }

  const LatticeSpec& spec() const { return spec_; }
  const ReductionTrace& trace() const { return trace_; }
  std::size_t memo_size() const { return memo_.size(); }
  void set_memo_limit(std::size_t entries) { memo_limit_ = entries; }

  Combination reduce(const MultiIndex& nu_in) {
    const MultiIndex nu = spec_.normalize(nu_in);
    if (seen_.insert(nu).second) trace_.visited = seen_.size();
    if (is_primitive(nu, m_anh_)) return Combination(nu);
    if (auto it = memo_.find(nu); it != memo_.end()) return it->second;

    const Site s = pick_site(nu);
    Combination step = lds_solve_step(nu, s, spec_);
    ++trace_.steps;
    trace_.max_branching = std::max(trace_.max_branching, step.size());

    Combination result;
    for (const auto& [term, c] : step.terms()) result.add_scaled(reduce(term), c);

    if (memo_limit_ != 0 && memo_.size() >= memo_limit_) memo_.clear();
    memo_.emplace(nu, result);
    return result;
  }

 private:
  Site pick_site(const MultiIndex& nu) const {
    for (int s : order_) {
      Site x = spec_.site(s);
      if (nu.at(x) >= m_anh_ - 1) return x;
    }
    throw Error("no reducible site in " + nu.to_string());
  }

  LatticeSpec spec_;
  int m_anh_;
  std::vector<int> order_;
  std::map<MultiIndex, Combination> memo_;
  std::set<MultiIndex> seen_;
  ReductionTrace trace_;
  std::size_t memo_limit_ = 0;
};

inline std::pair<Combination, ReductionTrace> reduce_to_primitive(const MultiIndex& nu, const LatticeSpec& spec) {
  Reducer r(spec);
  Combination c = r.reduce(nu);
  return {std::move(c), r.trace()};
}

/// Reduction in the decoupled-site regime (all bond couplings zero).
inline Combination reduce_random_field(const MultiIndex& nu, const LatticeSpec& spec) {
  if (!spec.all_bonds_zero()) throw Error("nonzero bond coupling");
  return Reducer(spec).reduce(nu);
}

// ---------------------------------------------------------------------------
// Gaussian theory

namespace detail {

using RationalMatrix = std::vector<std::vector<Rational>>;

/// Gauss-Jordan inverse; nullopt when singular.
inline std::optional<RationalMatrix> invert(RationalMatrix m) {
  const std::size_t n = m.size();
  RationalMatrix inv(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m[pivot][col] == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    std::swap(m[pivot], m[col]);
    std::swap(inv[pivot], inv[col]);
    Rational scale = Rational(1) / m[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      m[col][c] *= scale;
      inv[col][c] *= scale;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0) continue;
      Rational f = m[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        m[r][c] -= f * m[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

}  // namespace detail

/// Kinetic matrix T with T_jj = -k_j and T_jl = sum of bond couplings
/// joining j and l. Requires numeric couplings.
inline detail::RationalMatrix kinetic_matrix(const LatticeSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.site_count());
  detail::RationalMatrix t(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t j = 0; j < n; ++j) t[j][j] = -spec.potential(static_cast<int>(j)).k.constant_value();
  for (const auto& b : spec.bonds()) {
    Rational w = b.w.constant_value();
    t[static_cast<std::size_t>(b.first)][static_cast<std::size_t>(b.second)] += w;
    t[static_cast<std::size_t>(b.second)][static_cast<std::size_t>(b.first)] += w;
  }
  return t;
}

/// Exact ratio alpha(nu) = G(nu) / G(0) for a quadratic action (lambda = g = 0),
/// from the recursion
///   G(mu + e_i) = sum_j (T^-1)_ij [ a_j G(mu) - mu_j G(mu - e_j) ].
class GaussianReducer {
 public:
  explicit GaussianReducer(const LatticeSpec& spec) : spec_(spec) {
    if (!spec.is_numeric()) throw Error("gaussian reduction requires numeric couplings");
    for (int s = 0; s < spec.site_count(); ++s) {
      const auto& p = spec.potential(s);
      if (!p.lambda.is_zero() || !p.g.is_zero()) throw Error("gaussian reduction requires lambda = g = 0");
      source_.push_back(p.a.constant_value());
    }
    auto inv = detail::invert(kinetic_matrix(spec));
    if (!inv) throw Error("singular kinetic operator");
    inverse_ = std::move(*inv);
    even_ = spec.is_even();
  }

  Rational ratio(const MultiIndex& nu) { return ratio_dense(spec_.dense(nu)); }

  const detail::RationalMatrix& inverse_kinetic() const { return inverse_; }

 private:
  Rational ratio_dense(const std::vector<int>& nu) {
    int total = std::accumulate(nu.begin(), nu.end(), 0);
    if (total == 0) return Rational(1);
    if (even_ && total % 2 == 1) return Rational(0);
    if (auto it = memo_.find(nu); it != memo_.end()) return it->second;

    std::size_t i = 0;
    while (nu[i] == 0) ++i;
    std::vector<int> mu = nu;
    --mu[i];
    Rational result = 0;
    Rational g_mu = 0;
    bool have_g_mu = false;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const Rational& tij = inverse_[i][j];
      if (tij == 0) continue;
      if (source_[j] != 0) {
        if (!have_g_mu) {
          g_mu = ratio_dense(mu);
          have_g_mu = true;
        }
        result += tij * source_[j] * g_mu;
      }
      if (mu[j] > 0) {
        std::vector<int> lower = mu;
        --lower[j];
        result -= tij * mu[j] * ratio_dense(lower);
      }
    }
    memo_.emplace(nu, result);
    return result;
  }

  LatticeSpec spec_;
  std::vector<Rational> source_;
  detail::RationalMatrix inverse_;
  bool even_ = true;
  std::map<std::vector<int>, Rational> memo_;
};

inline Rational gaussian_reduce(const MultiIndex& nu, const LatticeSpec& spec) {
  return GaussianReducer(spec).ratio(nu);
}

// ---------------------------------------------------------------------------
// Operator algebra: O_i = N_i + D_i + L_i + R_i for the quartic action.

enum class ElementaryOperator { N, D, L, R };

/// Applies one elementary operator at site `i`. L and R move occupation along
/// `axis`; on an axis of extent 2 the single collapsed bond is carried by R
/// and L vanishes.
inline Combination apply_elementary_operator(ElementaryOperator which, const Site& i_in, const Combination& x,
                                             const LatticeSpec& spec, int axis = 0) {
  const int i = spec.flat(i_in);
  const Site si = spec.site(i);
  const auto& pot = spec.potential(i);
  if (pot.lambda.is_zero()) throw Error("vanishing quartic coupling at reduced site");
  const Coefficient inv = pot.lambda.inverse();

  std::optional<std::pair<int, int>> mover;
  if (which == ElementaryOperator::R) mover = spec.neighbour(i, axis, +1);
  if (which == ElementaryOperator::L && spec.extent() > 2) mover = spec.neighbour(i, axis, -1);

  Combination out;
  for (const auto& [nu, c] : x.terms()) {
    const int n = nu.at(si);
    switch (which) {
      case ElementaryOperator::N:
        if (n - 3 != 0) out.add_term(nu.shifted(si, -4), c * inv * Coefficient(n - 3));
        break;
      case ElementaryOperator::D:
        if (!pot.k.is_zero()) out.add_term(nu.shifted(si, -2), -(c * pot.k * inv));
        break;
      case ElementaryOperator::L:
      case ElementaryOperator::R: {
        if (!mover) break;
        const Coefficient& w = spec.bonds()[static_cast<std::size_t>(mover->second)].w;
        if (w.is_zero()) break;
        MultiIndex moved = nu.shifted(si, -3);
        moved.add(spec.site(mover->first), 1);
        out.add_term(moved, c * w * inv);
        break;
      }
    }
  }
  return out;
}

/// Full LDS operator O_i applied term by term.
inline Combination apply_lds_operator(const Site& i, const Combination& x, const LatticeSpec& spec) {
  Combination out;
  for (const auto& [nu, c] : x.terms()) out.add_scaled(lds_solve_step(nu, i, spec), c);
  return out;
}

/// Exact test of [O_i, O_j] = 0 on one sample multi-index.
inline bool check_operator_commutation(const Site& i, const Site& j, const MultiIndex& sample,
                                       const LatticeSpec& spec) {
  if (spec.flat(i) == spec.flat(j)) return true;
  Combination start(spec.normalize(sample));
  Combination ij = apply_lds_operator(i, apply_lds_operator(j, start, spec), spec);
  Combination ji = apply_lds_operator(j, apply_lds_operator(i, start, spec), spec);
  return ij == ji;
}

}  // namespace lds
