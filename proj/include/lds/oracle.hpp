#pragma once

// Direct numerical integration of lattice correlators
//   G(nu) = int prod_i dphi_i  phi^nu exp(-S[phi])
// by tensor-product Gauss-Legendre quadrature or importance-sampled Monte
// Carlo. Independent of the reduction engine.

#include <lds/lattice.hpp>
#include <lds/quadrature.hpp>
#include <lds/reduction.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace lds {

enum class OracleMethod { tensor, monte_carlo };

struct OracleConfig {
  OracleMethod method = OracleMethod::tensor;
  int nodes = 0;               ///< tensor: nodes per axis (0 picks from the box size)
  int order = 10;              ///< tensor: Gauss-Legendre points per panel
  double phi_max = 0;          ///< truncation half-width (0 derives it from the action)
  std::uint64_t samples = 200'000;
  std::uint64_t seed = 20'240'917;
  double tol = 1e-12;          ///< drives the truncation box
  int threads = 1;
};

struct OracleResult {
  double value = 0;       ///< unnormalized G(nu)
  double normalized = 0;  ///< G(nu) / G(0)
  double error = 0;       ///< estimate for `normalized`
  double value_error = 0;
};

namespace detail {

struct NumericAction {
  int sites = 0;
  std::vector<double> a, k, g, lambda;
  struct Link {
    int s, t;
    double w;
  };
  std::vector<Link> links;
  bool even = true;

  explicit NumericAction(const LatticeSpec& spec) : sites(spec.site_count()) {
    if (!spec.is_numeric()) throw Error("oracle requires numeric couplings");
    for (int s = 0; s < sites; ++s) {
      const auto& p = spec.potential(s);
      a.push_back(to_double(p.a.constant_value()));
      k.push_back(to_double(p.k.constant_value()));
      g.push_back(to_double(p.g.constant_value()));
      lambda.push_back(to_double(p.lambda.constant_value()));
    }
    for (const auto& b : spec.bonds()) {
      double w = to_double(b.w.constant_value());
      if (w != 0) links.push_back({b.first, b.second, w});
    }
    even = spec.is_even();
  }

  double site_potential(int s, double x) const {
    const auto i = static_cast<std::size_t>(s);
    return x * (a[i] + x * (k[i] / 2 + x * (g[i] / 3 + x * lambda[i] / 4)));
  }

  double bond_strength(int s) const {
    double total = 0;
    for (const auto& l : links)
      if (l.s == s || l.t == s) total += std::abs(l.w);
    return total;
  }

  /// Cholesky test of K - shift * I, where K is the quadratic form of the action.
  bool quadratic_positive_definite(double shift = 0) const {
    const auto n = static_cast<std::size_t>(sites);
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = k[i] - shift;
    for (const auto& l : links) {
      m[static_cast<std::size_t>(l.s)][static_cast<std::size_t>(l.t)] -= l.w;
      m[static_cast<std::size_t>(l.t)][static_cast<std::size_t>(l.s)] -= l.w;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double d = m[j][j];
      for (std::size_t p = 0; p < j; ++p) d -= m[j][p] * m[j][p];
      if (!(d > 0)) return false;
      m[j][j] = std::sqrt(d);
      for (std::size_t i = j + 1; i < n; ++i) {
        double v = m[i][j];
        for (std::size_t p = 0; p < j; ++p) v -= m[i][p] * m[j][p];
        m[i][j] = v / m[j][j];
      }
    }
    return true;
  }

  /// Smallest eigenvalue of K by bisection on positive definiteness.
  double quadratic_min_eigenvalue() const {
    double lo = 0, hi = *std::max_element(k.begin(), k.end());
    for (int it = 0; it < 60; ++it) {
      double mid = (lo + hi) / 2;
      (quadratic_positive_definite(mid) ? lo : hi) = mid;
    }
    return lo;
  }

  void require_integrable() const {
    bool all_quartic = true, all_gaussian = true;
    for (int s = 0; s < sites; ++s) {
      const auto i = static_cast<std::size_t>(s);
      if (lambda[i] < 0) throw Error("non-integrable action");
      if (lambda[i] == 0) all_quartic = false;
      if (lambda[i] != 0 || g[i] != 0) all_gaussian = false;
    }
    if (all_quartic) return;
    if (all_gaussian && quadratic_positive_definite()) return;
    throw Error("non-integrable action");
  }

  /// Per-site lower bound of the action: S >= sum_s V_s(x_s) - c_s x_s^2 / 2,
  /// since |w x y| <= |w| (x^2 + y^2) / 2.
  double bound_potential(int s, double x) const { return site_potential(s, x) - bond_strength(s) * x * x / 2; }

  double action(const std::vector<double>& x) const {
    double total = 0;
    for (int s = 0; s < sites; ++s) total += site_potential(s, x[static_cast<std::size_t>(s)]);
    for (const auto& l : links) total -= l.w * x[static_cast<std::size_t>(l.s)] * x[static_cast<std::size_t>(l.t)];
    return total;
  }
};

/// Half-width beyond which |x|^power exp(-bound(x)) is below e^-drop of its
/// maximum, for every site.
inline double oracle_box(const NumericAction& act, int power, double drop) {
  double radius = 0;
  bool gaussian = true;
  for (double l : act.lambda) gaussian = gaussian && l == 0;
  for (int s = 0; s < act.sites; ++s) {
    std::function<double(double)> lw;
    if (gaussian) {
      // every marginal is gaussian with variance at most 1 / (smallest eigenvalue)
      const double curvature = act.quadratic_min_eigenvalue();
      lw = [=, &act](double x) {
        return power * std::log(std::max(std::abs(x), 1e-300)) - curvature * x * x / 2 -
               std::abs(act.a[static_cast<std::size_t>(s)] * x);
      };
    } else {
      lw = [=, &act](double x) {
        return power * std::log(std::max(std::abs(x), 1e-300)) - act.bound_potential(s, x);
      };
    }
    double peak = lw(0.0);
    double r = 0.0625;
    for (; r < 1e6; r *= 1.0625) {
      peak = std::max({peak, lw(r), lw(-r)});
      if (lw(r) < peak - drop && lw(-r) < peak - drop && lw(1.5 * r) < lw(r) && lw(-1.5 * r) < lw(-r)) break;
    }
    if (r >= 1e6) throw Error("non-integrable action");
    radius = std::max(radius, r);
  }
  return radius;
}

inline int max_occupation(const LatticeSpec& spec, const std::vector<MultiIndex>& targets) {
  int p = 0;
  for (const auto& nu : targets) {
    const MultiIndex normal = spec.normalize(nu);
    for (const auto& [s, n] : normal.entries()) p = std::max(p, n);
  }
  return p;
}

/// Tensor-product sums  sum_x w(x) exp(-S(x)) x^nu  for every target, on a
/// given 1D rule. Returns one value per target.
inline std::vector<double> tensor_sums(const NumericAction& act,
                                       const std::vector<std::vector<int>>& dense_targets, const QuadratureRule& rule,
                                       int threads, int max_power) {
  const int n = act.sites;
  const std::size_t m = rule.nodes.size();
  const std::size_t terms = dense_targets.size();
  const auto np = static_cast<std::size_t>(max_power + 1);

  // site factors w_j exp(-V_s(x_j)) and powers x_j^p
  std::vector<std::vector<double>> site_factor(static_cast<std::size_t>(n), std::vector<double>(m));
  for (int s = 0; s < n; ++s)
    for (std::size_t j = 0; j < m; ++j)
      site_factor[static_cast<std::size_t>(s)][j] = rule.weights[j] * std::exp(-act.site_potential(s, rule.nodes[j]));
  std::vector<std::vector<double>> powers(m, std::vector<double>(np, 1.0));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t p = 1; p < np; ++p) powers[j][p] = powers[j][p - 1] * rule.nodes[j];

  // links grouped by their later site, so a partial product can be built site by site
  std::vector<std::vector<std::pair<int, double>>> back_links(static_cast<std::size_t>(n));
  for (const auto& l : act.links) {
    int hi = std::max(l.s, l.t), lo = std::min(l.s, l.t);
    back_links[static_cast<std::size_t>(hi)].emplace_back(lo, l.w);
  }

  const std::size_t outer = m;  // first-site node index distributes the work
  std::vector<std::vector<double>> partial(outer, std::vector<double>(terms, 0.0));

  auto work = [&](std::size_t first_lo, std::size_t first_hi) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 1.0);
    std::vector<double> inner(np * 1, 0.0);
    const std::size_t last = static_cast<std::size_t>(n - 1);
    for (std::size_t f = first_lo; f < first_hi; ++f) {
      std::vector<double>& acc = partial[f];
      // odometer over sites 1..n-2, innermost site handled as a vector
      std::fill(idx.begin(), idx.end(), 0);
      idx[0] = f;
      bool done = false;
      while (!done) {
        // weight of sites 0..n-2
        double w = 1.0;
        for (std::size_t s = 0; s < last; ++s) {
          x[s] = rule.nodes[idx[s]];
          double v = site_factor[s][idx[s]];
          for (const auto& [lo, wl] : back_links[s]) v *= std::exp(wl * x[s] * x[static_cast<std::size_t>(lo)]);
          w *= v;
        }
        if (n == 1) w = 1.0;
        // innermost site: moments u_p = sum_j factor_j x_j^p
        std::fill(inner.begin(), inner.end(), 0.0);
        std::size_t j_lo = 0, j_hi = m;
        if (n == 1) {
          j_lo = f;
          j_hi = f + 1;
        }
        for (std::size_t j = j_lo; j < j_hi; ++j) {
          double v = site_factor[last][j];
          const double xl = rule.nodes[j];
          for (const auto& [lo, wl] : back_links[last]) v *= std::exp(wl * xl * x[static_cast<std::size_t>(lo)]);
          for (std::size_t p = 0; p < np; ++p) inner[p] += v * powers[j][p];
        }
        for (std::size_t t = 0; t < terms; ++t) {
          const auto& nu = dense_targets[t];
          double v = w * inner[static_cast<std::size_t>(nu[last])];
          for (std::size_t s = 0; s < last; ++s) v *= powers[idx[s]][static_cast<std::size_t>(nu[s])];
          acc[t] += v;
        }
        // advance odometer over sites 1..n-2
        done = true;
        for (std::size_t s = last; s-- > 1;) {
          if (++idx[s] < m) {
            done = false;
            break;
          }
          idx[s] = 0;
        }
      }
    }
  };

  int nt = std::max(1, std::min<int>(threads, static_cast<int>(outer)));
  if (nt == 1) {
    work(0, outer);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
      pool.emplace_back(work, outer * static_cast<std::size_t>(t) / static_cast<std::size_t>(nt),
                        outer * static_cast<std::size_t>(t + 1) / static_cast<std::size_t>(nt));
    for (auto& th : pool) th.join();
  }
  std::vector<double> out(terms, 0.0);
  for (std::size_t f = 0; f < outer; ++f)
    for (std::size_t t = 0; t < terms; ++t) out[t] += partial[f][t];
  return out;
}

inline OracleResult finish(double value, double value_err, double vacuum, double vacuum_err) {
  OracleResult r;
  r.value = value;
  r.value_error = value_err;
  r.normalized = value / vacuum;
  r.error = value_err / std::abs(vacuum) + std::abs(value) * vacuum_err / (vacuum * vacuum);
  return r;
}

}  // namespace detail

/// Oracle values for several correlators at once (one sweep).
inline std::vector<OracleResult> direct_correlators(const LatticeSpec& spec, const std::vector<MultiIndex>& targets,
                                                    const OracleConfig& cfg = {}) {
  const detail::NumericAction act(spec);
  const int n = spec.site_count();
  if (cfg.method == OracleMethod::tensor && n > 4) throw Error("dimension too large");
  if (cfg.method == OracleMethod::monte_carlo && n > 10) throw Error("dimension too large");
  act.require_integrable();

  std::vector<std::vector<int>> dense;
  dense.push_back(std::vector<int>(static_cast<std::size_t>(n), 0));
  for (const auto& nu : targets) dense.push_back(spec.dense(nu));
  const int max_power = std::max(detail::max_occupation(spec, targets), 0);
  const double drop = std::log(1.0 / cfg.tol) + 10;
  const double box = cfg.phi_max > 0 ? cfg.phi_max : detail::oracle_box(act, max_power, drop);

  std::vector<OracleResult> out;
  if (cfg.method == OracleMethod::tensor) {
    int order = std::max(cfg.order, 2);
    int panels = cfg.nodes > 0 ? std::max(1, (cfg.nodes + order - 1) / order)
                               : std::max(2, static_cast<int>(std::ceil(2 * box / 1.25)));
    int coarse_panels = std::max(1, panels * 2 / 3);
    auto fine = detail::tensor_sums(act, dense, composite_gauss_legendre(-box, box, panels, order), cfg.threads, max_power);
    auto coarse = detail::tensor_sums(act, dense, composite_gauss_legendre(-box, box, coarse_panels, order), cfg.threads, max_power);
    const double tail = std::exp(-drop) * std::abs(fine[0]) * n;
    for (std::size_t t = 1; t < dense.size(); ++t) {
      int w = 0;
      for (int o : dense[t]) w += o;
      if (act.even && w % 2 == 1) {
        out.push_back(OracleResult{});
        continue;
      }
      out.push_back(detail::finish(fine[t], std::abs(fine[t] - coarse[t]) + tail, fine[0],
                                   std::abs(fine[0] - coarse[0]) + tail));
    }
    return out;
  }

  // Monte Carlo with per-site proposal densities proportional to exp(-V_s),
  // piecewise constant on fine bins of the box.
  const int bins = 4096;
  const double h = 2 * box / bins;
  std::vector<std::vector<double>> cdf(static_cast<std::size_t>(n)), log_density(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    std::vector<double> mass(static_cast<std::size_t>(bins));
    double vmin = 1e300;
    for (int b = 0; b < bins; ++b) vmin = std::min(vmin, act.site_potential(s, -box + (b + 0.5) * h));
    double total = 0;
    for (int b = 0; b < bins; ++b) {
      mass[static_cast<std::size_t>(b)] = std::exp(-(act.site_potential(s, -box + (b + 0.5) * h) - vmin));
      total += mass[static_cast<std::size_t>(b)];
    }
    auto& c = cdf[static_cast<std::size_t>(s)];
    auto& ld = log_density[static_cast<std::size_t>(s)];
    double run = 0;
    for (int b = 0; b < bins; ++b) {
      double p = mass[static_cast<std::size_t>(b)] / total;
      run += p;
      c.push_back(run);
      ld.push_back(p > 0 ? std::log(p / h) : -1e300);
    }
    c.back() = 1.0;
  }

  const std::size_t terms = dense.size();
  const std::uint64_t chunks = 64;
  struct Moments {
    std::vector<double> sum, sum_sq, cross;  // of W x^nu, (W x^nu)^2, W * W x^nu
  };
  std::vector<Moments> parts(chunks, Moments{std::vector<double>(terms, 0.0), std::vector<double>(terms, 0.0),
                                             std::vector<double>(terms, 0.0)});
  auto work = [&](std::uint64_t lo, std::uint64_t hi) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (std::uint64_t chunk = lo; chunk < hi; ++chunk) {
      std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * (chunk + 1));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const std::uint64_t count = cfg.samples / chunks + (chunk < cfg.samples % chunks ? 1 : 0);
      Moments& mo = parts[chunk];
      for (std::uint64_t i = 0; i < count; ++i) {
        double log_w = 0;
        for (int s = 0; s < n; ++s) {
          const auto& c = cdf[static_cast<std::size_t>(s)];
          auto b = static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), unit(rng)) - c.begin());
          b = std::min(b, c.size() - 1);
          x[static_cast<std::size_t>(s)] = -box + (static_cast<double>(b) + unit(rng)) * h;
          log_w += -act.site_potential(s, x[static_cast<std::size_t>(s)]) - log_density[static_cast<std::size_t>(s)][b];
        }
        for (const auto& l : act.links) log_w += l.w * x[static_cast<std::size_t>(l.s)] * x[static_cast<std::size_t>(l.t)];
        const double wgt = std::exp(log_w);
        for (std::size_t t = 0; t < terms; ++t) {
          double v = wgt;
          for (int s = 0; s < n; ++s) v *= std::pow(x[static_cast<std::size_t>(s)], dense[t][static_cast<std::size_t>(s)]);
          mo.sum[t] += v;
          mo.sum_sq[t] += v * v;
          mo.cross[t] += v * wgt;
        }
      }
    }
  };
  int nt = std::max(1, std::min<int>(cfg.threads, static_cast<int>(chunks)));
  if (nt == 1) {
    work(0, chunks);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, chunks * t / nt, chunks * (t + 1) / nt);
    for (auto& th : pool) th.join();
  }
  Moments total{std::vector<double>(terms, 0.0), std::vector<double>(terms, 0.0), std::vector<double>(terms, 0.0)};
  for (const auto& p : parts)
    for (std::size_t t = 0; t < terms; ++t) {
      total.sum[t] += p.sum[t];
      total.sum_sq[t] += p.sum_sq[t];
      total.cross[t] += p.cross[t];
    }
  const double count = static_cast<double>(cfg.samples);
  const double mean0 = total.sum[0] / count;
  const double var0 = std::max(total.sum_sq[0] / count - mean0 * mean0, 0.0);
  for (std::size_t t = 1; t < terms; ++t) {
    int w = 0;
    for (int o : dense[t]) w += o;
    if (act.even && w % 2 == 1) {
      out.push_back(OracleResult{});
      continue;
    }
    const double mean = total.sum[t] / count;
    const double var = std::max(total.sum_sq[t] / count - mean * mean, 0.0);
    const double cov = total.cross[t] / count - mean * mean0;
    OracleResult r;
    r.value = mean;
    r.value_error = std::sqrt(var / count);
    r.normalized = mean / mean0;
    // delta method for a ratio of means
    const double ratio = r.normalized;
    const double var_ratio = (var - 2 * ratio * cov + ratio * ratio * var0) / (mean0 * mean0 * count);
    r.error = std::sqrt(std::max(var_ratio, 0.0));
    out.push_back(r);
  }
  return out;
}

inline OracleResult direct_correlator(const LatticeSpec& spec, const MultiIndex& nu, const OracleConfig& cfg = {}) {
  return direct_correlators(spec, {nu}, cfg).front();
}

}  // namespace lds
