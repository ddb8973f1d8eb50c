#pragma once

// Coupling flows of primitive correlators: exact random-field initial data,
// the linear systems dP/dx = M(x) P generated by reduction, their numerical
// integration, and the commuting-flow compatibility of per-bond systems.

#include <lds/quadrature.hpp>
#include <lds/reduction.hpp>
#include <lds/symmetry.hpp>

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace lds {

// ---------------------------------------------------------------------------
// Single-site moments

struct MomentEstimate {
  double value = 0;
  double error = 0;
};

namespace detail {

struct NumericPotential {
  double a, k, g, lambda;

  explicit NumericPotential(const PotentialCoefficients& p)
      : a(to_double(p.a.constant_value())),
        k(to_double(p.k.constant_value())),
        g(to_double(p.g.constant_value())),
        lambda(to_double(p.lambda.constant_value())) {}

  double operator()(double x) const { return x * (a + x * (k / 2 + x * (g / 3 + x * lambda / 4))); }
};

inline void require_integrable(const PotentialCoefficients& p) {
  if (!p.is_numeric()) throw Error("moment requires numeric couplings");
  const Rational lam = p.lambda.constant_value();
  if (lam < 0) throw Error("non-integrable potential");
  if (lam == 0 && (!p.g.is_zero() || p.k.constant_value() <= 0)) throw Error("non-integrable potential");
}

}  // namespace detail

/// Integral of phi^power exp(-V(phi)) over the real line: adaptive quadrature
/// on a window outside which the integrand is below e^-46 of its peak.
inline MomentEstimate onsite_moment_estimate(int power, const PotentialCoefficients& pot, double rel_tol = 1e-14) {
  if (power < 0) throw Error("moment order must be nonnegative");
  detail::require_integrable(pot);
  if (power % 2 == 1 && pot.is_even()) return {};
  const detail::NumericPotential v(pot);

  auto log_weight = [&](double x) {
    return (power == 0 ? 0.0 : power * std::log(std::max(std::abs(x), 1e-300))) - v(x);
  };
  double peak = log_weight(0.0);
  double radius = 0;
  const double drop = 46;
  for (double r = 0.0625; r < 1e6; r *= 1.0625) {
    const double lo = log_weight(-r), hi = log_weight(r);
    peak = std::max({peak, lo, hi});
    if (lo < peak - drop && hi < peak - drop && log_weight(-1.5 * r) < lo && log_weight(1.5 * r) < hi) {
      radius = r;
      break;
    }
  }
  if (radius == 0) throw Error("non-integrable potential");

  auto f = [&](double x) { return std::exp(log_weight(x) - peak) * (power == 0 ? 1.0 : (x < 0 && power % 2 ? -1.0 : 1.0)); };
  IntegralEstimate left = integrate_adaptive(f, -radius, 0.0, rel_tol);
  IntegralEstimate right = integrate_adaptive(f, 0.0, radius, rel_tol);
  const double scale = std::exp(peak);
  MomentEstimate out;
  out.value = (left.value + right.value) * scale;
  // Tail: the log-weight is decreasing past the window, at most peak - drop.
  out.error = (left.error + right.error + 2 * std::exp(-drop) * radius) * scale;
  return out;
}

inline double onsite_moment(int power, const PotentialCoefficients& pot) { return onsite_moment_estimate(power, pot).value; }

/// Values of the primitive correlators of a decoupled lattice (all bonds zero):
/// products of single-site moments.
inline std::vector<double> initial_primitive_values(const LatticeSpec& spec, const std::vector<MultiIndex>& basis) {
  if (!spec.all_bonds_zero()) throw Error("nonzero bond coupling");
  std::map<std::pair<int, int>, double> cache;
  auto moment = [&](int s, int n) {
    auto key = std::make_pair(s, n);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    return cache[key] = onsite_moment(n, spec.potential(s));
  };
  std::vector<double> out;
  for (const auto& nu : basis) {
    double v = 1;
    for (int s = 0; s < spec.site_count(); ++s) v *= moment(s, nu.at(spec.site(s)));
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flow systems

enum class FlowKind { global_w, per_bond_w, global_k, global_lambda };

struct BasisOptions {
  bool parity = true;     ///< drop odd-weight primitives when the action is even
  bool compress = false;  ///< one representative per symmetry orbit (uniform couplings)
};

/// Primitive multi-indices ordered by weight, then by MultiIndex order.
inline std::vector<MultiIndex> primitive_basis(const LatticeSpec& spec, BasisOptions opt = {}) {
  const int top = spec.m_anh() - 2;
  const int sites = spec.site_count();
  const bool use_parity = opt.parity && spec.is_even();
  std::optional<Canonicalizer> canon;
  if (opt.compress && spec.is_uniform()) canon.emplace(spec);

  std::vector<MultiIndex> out;
  std::vector<int> occ(static_cast<std::size_t>(sites), 0);
  while (true) {
    int w = 0;
    for (int o : occ) w += o;
    if (!(use_parity && w % 2 == 1) && (!canon || canon->canonical_dense(occ) == occ)) out.push_back(spec.from_dense(occ));
    std::size_t pos = 0;
    while (pos < occ.size() && occ[pos] == top) occ[pos++] = 0;
    if (pos == occ.size()) break;
    ++occ[pos];
  }
  std::stable_sort(out.begin(), out.end(), [](const MultiIndex& x, const MultiIndex& y) {
    return weight(x) != weight(y) ? weight(x) < weight(y) : x < y;
  });
  return out;
}

struct FlowSystem {
  LatticeSpec spec;                     ///< couplings with the flow symbols installed
  FlowKind kind = FlowKind::global_w;
  std::vector<std::string> parameters;  ///< one matrix per parameter
  std::vector<MultiIndex> basis;
  std::map<MultiIndex, std::size_t> index;
  bool compressed = false;
  bool parity = false;
  /// rows[p][r]: d P(basis[r]) / d parameters[p] as a combination of basis members.
  std::vector<std::vector<Combination>> rows;

  /// Position of a primitive in the basis, after canonicalization when the
  /// basis is compressed; nullopt for parity-odd primitives outside the basis.
  std::optional<std::size_t> locate(const MultiIndex& mu) const {
    MultiIndex key = compressed ? canonicalize(mu, spec).canonical : spec.normalize(mu);
    if (auto it = index.find(key); it != index.end()) return it->second;
    if (parity && weight(mu) % 2 == 1) return std::nullopt;
    throw Error("primitive " + mu.to_string() + " is not in the flow basis");
  }
};

/// Symbol names of the flowing couplings.
inline std::vector<std::string> flow_parameters(const LatticeSpec& spec, FlowKind kind) {
  switch (kind) {
    case FlowKind::global_w: return {"w"};
    case FlowKind::global_k: return {"k"};
    case FlowKind::global_lambda: return {"lambda"};
    case FlowKind::per_bond_w: {
      std::vector<std::string> out;
      for (std::size_t b = 0; b < spec.bonds().size(); ++b) out.push_back("w" + std::to_string(b + 1));
      return out;
    }
  }
  return {};
}

/// Copy of `spec` whose flowing couplings are replaced by their symbols.
inline LatticeSpec install_flow_symbols(const LatticeSpec& spec, FlowKind kind) {
  LatticeSpec out = spec;
  switch (kind) {
    case FlowKind::global_w: out.set_bond_coupling_all(Coefficient::symbol("w")); break;
    case FlowKind::per_bond_w:
      for (std::size_t b = 0; b < out.bonds().size(); ++b)
        out.set_bond_coupling(static_cast<int>(b), Coefficient::symbol("w" + std::to_string(b + 1)));
      break;
    case FlowKind::global_k:
    case FlowKind::global_lambda:
      for (int s = 0; s < out.site_count(); ++s) {
        PotentialCoefficients p = out.potential(s);
        (kind == FlowKind::global_k ? p.k : p.lambda) = Coefficient::symbol(kind == FlowKind::global_k ? "k" : "lambda");
        out.set_potential(out.site(s), p);
      }
      break;
  }
  return out;
}

/// Correlators whose sum gives d G(nu) / d parameter `p`, before reduction.
inline Combination flow_source(const LatticeSpec& spec, FlowKind kind, std::size_t p, const MultiIndex& nu) {
  Combination out;
  auto bond_term = [&](const Bond& b) {
    MultiIndex m = nu;
    m.add(spec.site(b.first), 1);
    m.add(spec.site(b.second), 1);
    out.add_term(m, Coefficient(1));
  };
  switch (kind) {
    case FlowKind::global_w:
      for (const auto& b : spec.bonds()) bond_term(b);
      break;
    case FlowKind::per_bond_w: bond_term(spec.bonds().at(p)); break;
    case FlowKind::global_k:
      for (int s = 0; s < spec.site_count(); ++s) out.add_term(nu.shifted(spec.site(s), 2), Coefficient(Rational(-1, 2)));
      break;
    case FlowKind::global_lambda:
      for (int s = 0; s < spec.site_count(); ++s) out.add_term(nu.shifted(spec.site(s), 4), Coefficient(Rational(-1, 4)));
      break;
  }
  return out;
}

/// Builds the flow system of `kind` over the primitive basis. Couplings that
/// do not flow keep whatever value (numeric or symbolic) `spec` gives them.
inline FlowSystem generate_flow_system(const LatticeSpec& spec, FlowKind kind, BasisOptions opt = {}) {
  FlowSystem sys{install_flow_symbols(spec, kind), kind, flow_parameters(spec, kind), {}, {}, false, false, {}};
  if (kind == FlowKind::per_bond_w) opt.compress = false;
  sys.compressed = opt.compress && sys.spec.is_uniform();
  sys.parity = opt.parity && sys.spec.is_even();
  sys.basis = primitive_basis(sys.spec, opt);
  for (std::size_t r = 0; r < sys.basis.size(); ++r) sys.index.emplace(sys.basis[r], r);

  Reducer reducer(sys.spec);
  std::optional<Canonicalizer> canon;
  if (sys.compressed) canon.emplace(sys.spec);
  for (std::size_t p = 0; p < sys.parameters.size(); ++p) {
    std::vector<Combination> matrix;
    for (const auto& nu : sys.basis) {
      Combination row;
      const Combination source = flow_source(sys.spec, kind, p, nu);
      for (const auto& [term, c] : source.terms()) row.add_scaled(reducer.reduce(term), c);
      if (canon) row = row.mapped([&](const MultiIndex& m) { return canon->summarize(sys.spec, m).canonical; });
      for (const auto& [mu, c] : row.terms())
        if (!sys.index.count(mu)) throw Error("flow row leaves the basis at " + mu.to_string());
      matrix.push_back(std::move(row));
    }
    sys.rows.push_back(std::move(matrix));
  }
  return sys;
}

/// Least superset of `seed` closed under "add every basis element on the
/// right-hand side of a member's row" (all parameters).
inline std::set<MultiIndex> dependency_closure(const std::set<MultiIndex>& seed, const FlowSystem& sys) {
  std::set<MultiIndex> out;
  std::vector<MultiIndex> queue;
  for (const auto& s : seed) {
    MultiIndex key = sys.basis.at(*sys.locate(s));
    if (out.insert(key).second) queue.push_back(key);
  }
  while (!queue.empty()) {
    MultiIndex cur = queue.back();
    queue.pop_back();
    const std::size_t r = sys.index.at(cur);
    for (const auto& matrix : sys.rows)
      for (const auto& [mu, c] : matrix[r].terms())
        if (out.insert(mu).second) queue.push_back(mu);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Numerical integration

namespace detail {

/// c * prod_p x_p^e_p over the flow parameters.
struct CompiledTerm {
  double c;
  std::vector<std::pair<std::size_t, int>> powers;
};

struct CompiledEntry {
  std::size_t row, col;
  std::vector<CompiledTerm> terms;
};

}  // namespace detail

/// Flow matrices with every non-flowing symbol substituted, ready for
/// evaluation at floating-point parameter values.
class CompiledFlow {
 public:
  CompiledFlow(const FlowSystem& sys, const Assignment& fixed = {}) : size_(sys.basis.size()) {
    negative_.assign(sys.parameters.size(), false);
    for (const auto& matrix : sys.rows) {
      std::vector<detail::CompiledEntry> entries;
      for (std::size_t r = 0; r < matrix.size(); ++r) {
        for (const auto& [mu, coeff] : matrix[r].terms()) {
          detail::CompiledEntry e{r, sys.index.at(mu), {}};
          const Coefficient reduced = coeff.substitute(fixed);
          for (const auto& [mono, q] : reduced.terms()) {
            detail::CompiledTerm t{to_double(q), {}};
            for (const auto& [name, ex] : mono.factors()) {
              auto it = std::find(sys.parameters.begin(), sys.parameters.end(), name);
              if (it == sys.parameters.end()) throw Error("unassigned symbol: " + name);
              auto p = static_cast<std::size_t>(it - sys.parameters.begin());
              t.powers.emplace_back(p, ex);
              if (ex < 0) negative_[p] = true;
            }
            e.terms.push_back(std::move(t));
          }
          entries.push_back(std::move(e));
        }
      }
      matrices_.push_back(std::move(entries));
    }
  }

  std::size_t size() const { return size_; }
  std::size_t parameter_count() const { return matrices_.size(); }
  bool has_pole(std::size_t p) const { return negative_[p]; }

  /// out += scale * M_p(x) y
  void apply(std::size_t p, const std::vector<double>& x, double scale, const std::vector<double>& y,
             std::vector<double>& out) const {
    for (const auto& e : matrices_[p]) {
      double v = 0;
      for (const auto& t : e.terms) {
        double m = t.c;
        for (const auto& [q, ex] : t.powers) m *= std::pow(x[q], ex);
        v += m;
      }
      out[e.row] += scale * v * y[e.col];
    }
  }

 private:
  std::size_t size_;
  std::vector<std::vector<detail::CompiledEntry>> matrices_;
  std::vector<bool> negative_;
};

struct FlowState {
  std::vector<double> parameters;
  std::vector<double> values;
  double error_estimate = 0;
  std::size_t steps = 0;
};

struct IntegrationOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  std::size_t max_steps = 1'000'000;
};

/// Integrates dP/ds = sum_p (target_p - start_p) M_p(start + s (target - start)) P
/// over s in [0, 1] with an adaptive Dormand-Prince 5(4) pair.
inline FlowState integrate_flow(const CompiledFlow& flow, const std::vector<double>& start,
                                const std::vector<double>& target, const std::vector<double>& initial,
                                IntegrationOptions opt = {}) {
  using State = std::vector<double>;
  namespace ode = boost::numeric::odeint;
  const std::size_t np = flow.parameter_count();
  if (start.size() != np || target.size() != np) throw Error("flow endpoint has wrong number of parameters");
  if (initial.size() != flow.size()) throw Error("initial vector has wrong length");
  for (double v : initial)
    if (!std::isfinite(v)) throw Error("initial values must be finite");

  FlowState out{target, initial, 0, 0};
  std::vector<double> delta(np);
  bool moving = false;
  for (std::size_t p = 0; p < np; ++p) {
    delta[p] = target[p] - start[p];
    if (delta[p] == 0) continue;
    moving = true;
  }
  if (!moving) return out;
  for (std::size_t p = 0; p < np; ++p) {
    bool touches = (start[p] <= 0 && target[p] >= 0) || (start[p] >= 0 && target[p] <= 0);
    if (flow.has_pole(p) && touches) throw Error("singular flow point");
    // parameters that stay fixed also must not sit on a pole
    if (flow.has_pole(p) && delta[p] == 0 && start[p] == 0) throw Error("singular flow point");
  }

  auto rhs = [&](const State& y, State& dy, double s) {
    std::vector<double> x(np);
    for (std::size_t p = 0; p < np; ++p) x[p] = start[p] + s * delta[p];
    std::fill(dy.begin(), dy.end(), 0.0);
    for (std::size_t p = 0; p < np; ++p)
      if (delta[p] != 0) flow.apply(p, x, delta[p], y, dy);
  };

  State y = initial;
  auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<State>>(opt.abs_tol, opt.rel_tol);
  double s = 0, h = opt.initial_step;
  std::size_t attempts = 0;
  while (s < 1.0) {
    if (++attempts > opt.max_steps) throw Error("step underflow");
    h = std::min(h, 1.0 - s);
    if (h < 1e-14 * std::max(1.0, s)) throw Error("step underflow");
    if (stepper.try_step(rhs, y, s, h) == ode::success) ++out.steps;
    if (1.0 - s < 1e-15) break;
  }
  for (double v : y)
    if (!std::isfinite(v)) throw Error("step underflow");
  out.values = std::move(y);
  double scale = 0;
  for (double v : out.values) scale = std::max(scale, std::abs(v));
  out.error_estimate = static_cast<double>(out.steps) * (opt.abs_tol + opt.rel_tol * scale);
  return out;
}

/// Moves one parameter at a time, in order, from start to target.
inline FlowState integrate_flow_sequential(const CompiledFlow& flow, const std::vector<double>& start,
                                           const std::vector<double>& target, const std::vector<double>& initial,
                                           IntegrationOptions opt = {}) {
  std::vector<double> here = start;
  FlowState state{start, initial, 0, 0};
  for (std::size_t p = 0; p < start.size(); ++p) {
    std::vector<double> next = here;
    next[p] = target[p];
    FlowState leg = integrate_flow(flow, here, next, state.values, opt);
    state.values = std::move(leg.values);
    state.error_estimate += leg.error_estimate;
    state.steps += leg.steps;
    here = next;
  }
  state.parameters = here;
  return state;
}

/// Sum_mu c(mu) P(mu) for a combination of primitives (parity-odd primitives
/// outside the basis contribute zero).
inline double evaluate_combination(const Combination& c, const FlowSystem& sys, const std::vector<double>& values,
                                   const Assignment& at = {}) {
  double total = 0;
  for (const auto& [mu, coeff] : c.terms()) {
    auto idx = sys.locate(mu);
    if (!idx) continue;
    total += to_double(coeff.evaluate(at)) * values[*idx];
  }
  return total;
}

// ---------------------------------------------------------------------------
// Compatibility of commuting flows

namespace detail {

using DenseRational = std::vector<std::vector<Rational>>;

inline DenseRational evaluate_matrix(const FlowSystem& sys, std::size_t p, const Assignment& at,
                                     const std::string& derivative = {}) {
  const std::size_t n = sys.basis.size();
  DenseRational m(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t r = 0; r < n; ++r)
    for (const auto& [mu, c] : sys.rows[p][r].terms())
      m[r][sys.index.at(mu)] = (derivative.empty() ? c : c.derivative(derivative)).evaluate(at);
  return m;
}

}  // namespace detail

/// Exact residual matrix of the integrability condition for parameters i, j:
///   d_i g^(j) - d_j g^(i) + g^(j) g^(i) - g^(i) g^(j)
/// at a rational point; entry [nu][xi].
inline detail::DenseRational compatibility_matrix(const FlowSystem& sys, const Assignment& point, std::size_t i,
                                                  std::size_t j) {
  const std::size_t n = sys.basis.size();
  auto gi = detail::evaluate_matrix(sys, i, point), gj = detail::evaluate_matrix(sys, j, point);
  auto di_gj = detail::evaluate_matrix(sys, j, point, sys.parameters[i]);
  auto dj_gi = detail::evaluate_matrix(sys, i, point, sys.parameters[j]);
  detail::DenseRational out(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      Rational v = di_gj[a][b] - dj_gi[a][b];
      for (std::size_t m = 0; m < n; ++m) v += gj[a][m] * gi[m][b] - gi[a][m] * gj[m][b];
      out[a][b] = v;
    }
  return out;
}

inline double compatibility_residual(const FlowSystem& sys, const Assignment& point, std::size_t i, std::size_t j,
                                     const MultiIndex& nu, const MultiIndex& xi) {
  auto m = compatibility_matrix(sys, point, i, j);
  return to_double(m.at(*sys.locate(nu)).at(*sys.locate(xi)));
}

/// Largest |residual| over all parameter pairs and all matrix entries.
inline double max_compatibility_residual(const FlowSystem& sys, const Assignment& point) {
  double worst = 0;
  for (std::size_t i = 0; i < sys.parameters.size(); ++i)
    for (std::size_t j = i + 1; j < sys.parameters.size(); ++j)
      for (const auto& row : compatibility_matrix(sys, point, i, j))
        for (const auto& v : row) worst = std::max(worst, std::abs(to_double(v)));
  return worst;
}

}  // namespace lds
