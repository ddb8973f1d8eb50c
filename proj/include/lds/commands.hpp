#pragma once

// Job runners behind the command-line tool. Each returns the report text and
// the process exit code.

#include <lds/evolution.hpp>
#include <lds/job.hpp>
#include <lds/oracle.hpp>
#include <lds/propagators.hpp>
#include <lds/reduction.hpp>
#include <lds/symmetry.hpp>

#include <json.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace lds {

enum ExitCode { exit_ok = 0, exit_usage = 2, exit_computation = 3, exit_verification = 4 };

struct Report {
  std::string text;
  int exit_code = exit_ok;
};

namespace detail {

using json = nlohmann::json;

/// Resolved configuration as {section: {key: value}}.
inline json config_json(const JobSpec& job) {
  json out = json::object();
  for (const auto& [section, body] : to_ptree(job))
    for (const auto& [key, node] : body) out[section][key] = node.data();
  return out;
}

inline std::string csv_preamble(const JobSpec& job) {
  std::string s;
  for (const auto& [section, body] : to_ptree(job))
    for (const auto& [key, node] : body) s += "# " + section + "." + key + " = " + node.data() + "\n";
  return s;
}

inline json coefficient_json(const Coefficient& c) {
  json out = json::array();
  for (const auto& [m, q] : c.terms()) out.push_back({{"monomial", m.to_string()}, {"rational", to_string(q)}});
  return out;
}

inline std::string csv_number(double x) { return format_double(x); }

inline std::string csv_dense(const std::vector<int>& occ) {
  std::string s;
  for (std::size_t i = 0; i < occ.size(); ++i) s += (i ? " " : "") + std::to_string(occ[i]);
  return s;
}

inline LatticeSpec numeric_lattice_for(const JobSpec& job) {
  LatticeSpec spec = job_lattice(job);
  if (!spec.is_numeric()) throw UsageError(job.command + " requires numeric couplings");
  return spec;
}

inline FlowKind parse_flow_kind(const std::string& s) {
  if (s == "w") return FlowKind::global_w;
  if (s == "per_bond") return FlowKind::per_bond_w;
  if (s == "k") return FlowKind::global_k;
  if (s == "lambda") return FlowKind::global_lambda;
  throw UsageError("unknown flow kind '" + s + "' (w, per_bond, k, lambda)");
}

/// Lattice with the flowing couplings set to `values`.
inline LatticeSpec at_flow_point(LatticeSpec spec, FlowKind kind, const std::vector<Rational>& values) {
  switch (kind) {
    case FlowKind::global_w:
      spec.set_bond_coupling_all(Coefficient(values.at(0)));
      break;
    case FlowKind::per_bond_w:
      for (std::size_t b = 0; b < values.size(); ++b) spec.set_bond_coupling(static_cast<int>(b), Coefficient(values[b]));
      break;
    case FlowKind::global_k:
    case FlowKind::global_lambda:
      for (int s = 0; s < spec.site_count(); ++s) {
        PotentialCoefficients p = spec.potential(s);
        (kind == FlowKind::global_k ? p.k : p.lambda) = Coefficient(values.at(0));
        spec.set_potential(spec.site(s), p);
      }
      break;
  }
  return spec;
}

inline std::vector<double> to_doubles(const std::vector<Rational>& xs) {
  std::vector<double> out;
  for (const auto& x : xs) out.push_back(to_double(x));
  return out;
}

inline OracleConfig oracle_config(const JobSpec& job) {
  OracleConfig cfg;
  if (job.oracle_method == "tensor") cfg.method = OracleMethod::tensor;
  else if (job.oracle_method == "monte_carlo") cfg.method = OracleMethod::monte_carlo;
  else throw UsageError("unknown oracle method '" + job.oracle_method + "' (tensor, monte_carlo)");
  if (job.oracle_samples <= 0 || job.oracle_order <= 0 || job.oracle_nodes < 0)
    throw UsageError("oracle sizes must be positive");
  cfg.nodes = job.oracle_nodes;
  cfg.order = job.oracle_order;
  cfg.samples = static_cast<std::uint64_t>(job.oracle_samples);
  cfg.seed = job.seed;
  cfg.threads = job.threads;
  return cfg;
}

// ---------------------------------------------------------------------------

inline Report run_reduce(const JobSpec& job) {
  LatticeSpec spec = job_lattice(job);
  if (job.targets.empty()) throw UsageError("reduce needs [targets] nu");
  std::vector<MultiIndex> targets;
  for (const auto& occ : job.targets) targets.push_back(job_target(spec, occ));

  json results = json::array();
  std::string csv = "target,index,monomial,rational\n";
  for (std::size_t t = 0; t < targets.size(); ++t) {
    auto [combo, trace] = reduce_to_primitive(targets[t], spec);
    json terms = json::array();
    for (const auto& [mu, c] : combo.terms()) {
      terms.push_back({{"index", spec.dense(mu)}, {"coefficient", coefficient_json(c)}});
      for (const auto& [m, q] : c.terms())
        csv += csv_dense(job.targets[t]) + "," + csv_dense(spec.dense(mu)) + "," + m.to_string() + "," + to_string(q) + "\n";
    }
    results.push_back({{"target", job.targets[t]},
                       {"terms", terms},
                       {"trace", {{"steps", trace.steps}, {"visited", trace.visited}, {"max_branching", trace.max_branching}}}});
  }
  if (job.format == "csv") return {csv_preamble(job) + csv, exit_ok};
  return {json{{"command", "reduce"}, {"config", config_json(job)}, {"results", results}}.dump(2) + "\n", exit_ok};
}

inline Report run_count(const JobSpec& job) {
  if (job.count_min < 1 || job.count_max < job.count_min) throw UsageError("count: need 1 <= min_extent <= max_extent");
  const bool even = job.count_m_anh % 2 == 0;
  json rows = json::array();
  std::string csv = "extent,none,parity,full,orbit_bound\n";
  for (int n = job.count_min; n <= job.count_max; ++n) {
    std::uint64_t none = 0, parity = 0, full = 0;
    double bound = 0;
    try {
      none = count_primitive_basis(n, job.count_dimension, job.count_m_anh, SymmetryLevel::none);
      if (even) parity = count_primitive_basis(n, job.count_dimension, job.count_m_anh, SymmetryLevel::parity);
      full = count_primitive_basis(n, job.count_dimension, job.count_m_anh, SymmetryLevel::full);
      bound = static_cast<double>(none) / static_cast<double>(Canonicalizer(LatticeSpec(job.count_dimension, n)).group_order());
    } catch (const Error& e) {
      throw UsageError(std::string("count: ") + e.what());
    }
    json row{{"extent", n}, {"none", none}, {"full", full}, {"orbit_bound", bound}};
    row["parity"] = even ? json(parity) : json(nullptr);
    rows.push_back(row);
    csv += std::to_string(n) + "," + std::to_string(none) + "," + (even ? std::to_string(parity) : "") + "," +
           std::to_string(full) + "," + csv_number(bound) + "\n";
  }
  if (job.format == "csv") return {csv_preamble(job) + csv, exit_ok};
  return {json{{"command", "count"}, {"config", config_json(job)}, {"rows", rows}}.dump(2) + "\n", exit_ok};
}

inline Report run_propagator(const JobSpec& job) {
  const std::string& kind = job.propagator_kind;
  if (!(job.mass > 0)) throw UsageError("propagator: mass must be positive");
  struct Point {
    double t;
    double value;
  };
  std::vector<Point> series;
  json extra = json::object();
  if (kind == "line" || kind == "circle") {
    if (job.points < 1) throw UsageError("propagator: points must be positive");
    if (kind == "circle" && !(job.period > 0)) throw UsageError("propagator: period must be positive");
    for (int i = 0; i < job.points; ++i) {
      double t = job.points == 1 ? job.t_min : job.t_min + (job.t_max - job.t_min) * i / (job.points - 1);
      series.push_back({t, kind == "line" ? propagator_line(job.mass, t)
                                          : propagator_circle(job.mass, job.period, t, job.tol)});
    }
  } else if (kind == "lattice" || kind == "circular") {
    if (!(job.spacing > 0)) throw UsageError("propagator: spacing must be positive");
    EffectiveParams e = lattice_effective_params(job.mass, job.spacing);
    extra = {{"m_eff", e.m_eff}, {"z_eff", e.z_eff}};
    if (kind == "lattice") {
      long lo = std::lround(job.t_min / job.spacing), hi = std::lround(job.t_max / job.spacing);
      for (long n = lo; n <= hi; ++n)
        series.push_back({n * job.spacing, propagator_infinite_lattice(job.mass, job.spacing, n)});
    } else {
      if (job.sites < 1) throw UsageError("propagator: sites must be positive");
      for (int n = 0; n < job.sites; ++n)
        series.push_back({n * job.spacing, propagator_circular_lattice(job.mass, job.sites, job.spacing, n)});
    }
  } else {
    throw UsageError("unknown propagator kind '" + kind + "' (line, circle, lattice, circular)");
  }
  if (job.format == "csv") {
    std::string csv = csv_preamble(job) + "t,value\n";
    for (const auto& p : series) csv += csv_number(p.t) + "," + csv_number(p.value) + "\n";
    return {csv, exit_ok};
  }
  json s = json::array();
  for (const auto& p : series) s.push_back({{"t", p.t}, {"value", p.value}});
  json out{{"command", "propagator"}, {"config", config_json(job)}, {"kind", kind}, {"series", s}};
  if (!extra.empty()) out["effective"] = extra;
  return {out.dump(2) + "\n", exit_ok};
}

struct EvolveResult {
  FlowSystem system;
  FlowState state;
  LatticeSpec end;
};

inline EvolveResult evolve(const LatticeSpec& spec, FlowKind kind, const std::vector<Rational>& from,
                           const std::vector<Rational>& to, BasisOptions basis, double tol) {
  const std::size_t np = kind == FlowKind::per_bond_w ? spec.bonds().size() : 1;
  if (np == 0) throw UsageError("lattice has no bonds to flow");
  if (from.size() != np || to.size() != np)
    throw UsageError("flow start and end need " + std::to_string(np) + " value(s)");
  LatticeSpec start = at_flow_point(spec, kind, from);
  if (!start.all_bonds_zero()) throw UsageError("flow must start from zero bond couplings");
  FlowSystem sys = generate_flow_system(start, kind, basis);
  IntegrationOptions opt;
  opt.rel_tol = tol;
  opt.abs_tol = tol * 1e-2;
  FlowState state = integrate_flow(CompiledFlow(sys), to_doubles(from), to_doubles(to),
                                   initial_primitive_values(start, sys.basis), opt);
  return {std::move(sys), std::move(state), at_flow_point(spec, kind, to)};
}

inline Report run_evolve(const JobSpec& job) {
  LatticeSpec spec = numeric_lattice_for(job);
  FlowKind kind = parse_flow_kind(job.flow_kind);
  EvolveResult r = evolve(spec, kind, job.flow_start, job.flow_end, {job.parity, job.compress}, job.tol);
  const FlowSystem& sys = r.system;
  const double vacuum = r.state.values.at(*sys.locate(MultiIndex{}));

  json basis = json::array();
  std::string csv = "index,value,normalized\n";
  for (std::size_t i = 0; i < sys.basis.size(); ++i) {
    auto occ = spec.dense(sys.basis[i]);
    basis.push_back({{"index", occ}, {"value", r.state.values[i]}, {"normalized", r.state.values[i] / vacuum}});
    csv += csv_dense(occ) + "," + csv_number(r.state.values[i]) + "," + csv_number(r.state.values[i] / vacuum) + "\n";
  }
  json targets = json::array();
  for (const auto& occ : job.targets) {
    Combination c = reduce_to_primitive(job_target(r.end, occ), r.end).first;
    double value = evaluate_combination(c, sys, r.state.values);
    targets.push_back({{"index", occ}, {"normalized", value / vacuum}});
    csv += csv_dense(occ) + "," + csv_number(value) + "," + csv_number(value / vacuum) + "\n";
  }
  if (job.format == "csv") return {csv_preamble(job) + csv, exit_ok};
  json out{{"command", "evolve"},
           {"config", config_json(job)},
           {"parameters", sys.parameters},
           {"start", to_doubles(job.flow_start)},
           {"end", r.state.parameters},
           {"basis", basis},
           {"targets", targets},
           {"error_estimate", r.state.error_estimate},
           {"steps", r.state.steps}};
  return {out.dump(2) + "\n", exit_ok};
}

inline Report run_oracle(const JobSpec& job) {
  LatticeSpec spec = numeric_lattice_for(job);
  if (job.targets.empty()) throw UsageError("oracle needs [targets] nu");
  std::vector<MultiIndex> targets;
  for (const auto& occ : job.targets) targets.push_back(job_target(spec, occ));
  OracleConfig cfg = oracle_config(job);
  auto results = direct_correlators(spec, targets, cfg);
  if (job.format == "csv") {
    std::string csv = csv_preamble(job) + "index,value,normalized,error\n";
    for (std::size_t t = 0; t < targets.size(); ++t)
      csv += csv_dense(job.targets[t]) + "," + csv_number(results[t].value) + "," + csv_number(results[t].normalized) +
             "," + csv_number(results[t].error) + "\n";
    return {csv, exit_ok};
  }
  json rows = json::array();
  for (std::size_t t = 0; t < targets.size(); ++t)
    rows.push_back({{"index", job.targets[t]},
                    {"value", results[t].value},
                    {"value_error", results[t].value_error},
                    {"normalized", results[t].normalized},
                    {"error", results[t].error}});
  return {json{{"command", "oracle"}, {"config", config_json(job)}, {"results", rows}}.dump(2) + "\n", exit_ok};
}

// ---------------------------------------------------------------------------
// verify

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};

inline std::vector<MultiIndex> all_indices_up_to(const LatticeSpec& spec, int max_weight) {
  std::vector<MultiIndex> out;
  std::vector<int> occ(static_cast<std::size_t>(spec.site_count()), 0);
  while (true) {
    if (std::accumulate(occ.begin(), occ.end(), 0) <= max_weight) out.push_back(spec.from_dense(occ));
    std::size_t s = 0;
    while (s < occ.size() && occ[s] == max_weight) occ[s++] = 0;
    if (s == occ.size()) break;
    ++occ[s];
  }
  return out;
}

inline Check check_pipeline(const JobSpec& job, const LatticeSpec& spec) {
  Check c{"reduce_evolve_vs_oracle", true, ""};
  if (spec.site_count() > 4) return {c.name, true, "skipped: oracle limited to 4 sites"};
  std::vector<Rational> zero, target;
  for (const auto& b : spec.bonds()) {
    zero.emplace_back(0);
    target.push_back(b.w.constant_value());
  }
  if (target.empty()) return {c.name, true, "skipped: no bonds"};
  EvolveResult r = evolve(spec, FlowKind::per_bond_w, zero, target, {true, false}, job.tol);
  const double vacuum = r.state.values.at(*r.system.locate(MultiIndex{}));
  auto targets = all_indices_up_to(spec, job.verify_max_weight);
  OracleConfig cfg = oracle_config(job);
  cfg.method = OracleMethod::tensor;
  auto oracle = direct_correlators(spec, targets, cfg);
  double worst = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    Combination combo = reduce_to_primitive(targets[t], spec).first;
    double value = evaluate_combination(combo, r.system, r.state.values) / vacuum;
    double expected = oracle[t].normalized;
    double dev = expected == 0.0 ? std::abs(value) : std::abs(value - expected) / std::abs(expected);
    worst = std::max(worst, dev);
  }
  c.pass = worst <= job.verify_tol;
  c.detail = std::to_string(targets.size()) + " correlators; worst relative deviation " + format_double(worst);
  return c;
}

inline Check check_path_independence(const JobSpec& job, const LatticeSpec& spec) {
  std::mt19937_64 rng(job.seed);
  std::uniform_int_distribution<int> occ(0, 5);
  int bad = 0;
  for (int sample = 0; sample < 4; ++sample) {
    MultiIndex nu;
    for (int s = 0; s < spec.site_count(); ++s) nu.set(spec.site(s), occ(rng));
    Combination reference = Reducer(spec).reduce(nu);
    std::vector<int> order(static_cast<std::size_t>(spec.site_count()));
    std::iota(order.begin(), order.end(), 0);
    for (int t = 0; t < 5; ++t) {
      std::shuffle(order.begin(), order.end(), rng);
      if (!(Reducer(spec, order).reduce(nu) == reference)) ++bad;
    }
  }
  return {"path_independence", bad == 0, std::to_string(bad) + " of 20 reorderings differ"};
}

inline Check check_parity(const LatticeSpec& spec, int max_weight) {
  if (!spec.is_even()) return {"parity", true, "skipped: odd potential"};
  int bad = 0;
  for (const auto& nu : all_indices_up_to(spec, std::min(max_weight, 6))) {
    Combination c = reduce_to_primitive(nu, spec).first;
    for (const auto& [mu, coeff] : c.terms())
      if (weight(mu) % 2 != weight(nu) % 2) ++bad;
  }
  return {"parity", bad == 0, std::to_string(bad) + " parity-violating terms"};
}

inline Check check_rigidity(const LatticeSpec& spec) {
  LatticeSpec start = spec;
  start.set_bond_coupling_all(Coefficient(0));
  if (spec.bonds().empty()) return {"rigidity", true, "skipped: no bonds"};
  FlowSystem sys = generate_flow_system(start, FlowKind::global_w);
  auto closure = dependency_closure({MultiIndex{}}, sys);
  return {"rigidity", closure.size() == sys.basis.size(),
          std::to_string(closure.size()) + " of " + std::to_string(sys.basis.size()) + " basis elements reached"};
}

inline Check check_compatibility(const LatticeSpec& spec) {
  if (spec.bonds().size() < 2) return {"compatibility", true, "skipped: fewer than two bonds"};
  LatticeSpec start = spec;
  start.set_bond_coupling_all(Coefficient(0));
  FlowSystem sys = generate_flow_system(start, FlowKind::per_bond_w);
  Assignment point;
  for (std::size_t b = 0; b < sys.parameters.size(); ++b) point[sys.parameters[b]] = spec.bonds()[b].w.constant_value();
  double residual = max_compatibility_residual(sys, point);
  return {"compatibility", residual < 1e-8, "max residual " + format_double(residual)};
}

inline Check check_gaussian(const LatticeSpec& spec) {
  if (spec.dimension() != 1) return {"gaussian_dft", true, "skipped: d > 1"};
  const int n = spec.extent();
  FreeCouplings c = free_discretization(Rational(1), Rational(1, 2), n);
  PotentialCoefficients p;
  p.k = c.k;
  GaussianReducer g(LatticeSpec(1, n, p, Coefficient(c.w)));
  double worst = 0;
  for (int j = 0; j < n; ++j) {
    MultiIndex nu = dense1({1});
    nu.add(site1(j), 1);
    worst = std::max(worst, std::abs(to_double(g.ratio(nu)) - propagator_circular_lattice(1, n, 0.5, j)));
  }
  return {"gaussian_dft", worst <= 1e-10, "max deviation " + format_double(worst)};
}

inline Report run_verify(const JobSpec& job) {
  LatticeSpec spec = numeric_lattice_for(job);
  if (spec.m_anh() != 4 || !spec.is_even()) throw UsageError("verify needs an even quartic potential");
  std::vector<Check> checks{check_pipeline(job, spec), check_path_independence(job, spec),
                            check_parity(spec, job.verify_max_weight), check_rigidity(spec),
                            check_compatibility(spec), check_gaussian(spec)};
  bool all = true;
  for (const auto& c : checks) all = all && c.pass;
  const int code = all ? exit_ok : exit_verification;
  if (job.format == "csv") {
    std::string csv = csv_preamble(job) + "check,pass,detail\n";
    for (const auto& c : checks) csv += c.name + "," + (c.pass ? "true" : "false") + "," + c.detail + "\n";
    return {csv, code};
  }
  json rows = json::array();
  for (const auto& c : checks) rows.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {json{{"command", "verify"}, {"config", config_json(job)}, {"checks", rows}, {"pass", all}}.dump(2) + "\n",
          code};
}

inline Report failure_report(const JobSpec& job, int code, const std::string& message) {
  const char* kind = code == exit_usage ? "usage" : "computation";
  if (job.format == "csv") {
    std::string quoted = message;
    for (std::size_t i = quoted.find('"'); i != std::string::npos; i = quoted.find('"', i + 2)) quoted.insert(i, "\"");
    return {std::string("error,") + kind + ",\"" + quoted + "\"\n", code};
  }
  json out{{"command", job.command}, {"error", {{"kind", kind}, {"message", message}}}};
  try {
    out["config"] = config_json(job);
  } catch (const Error&) {
  }
  return {out.dump(2) + "\n", code};
}

}  // namespace detail

/// Runs one job; errors become machine-readable reports with exit code 2 or 3.
inline Report run_job(const JobSpec& job) {
  try {
    if (job.format != "json" && job.format != "csv") throw UsageError("format must be json or csv");
    if (job.threads < 1) throw UsageError("threads must be positive");
    if (!(job.tol > 0)) throw UsageError("tol must be positive");
    if (job.command == "reduce") return detail::run_reduce(job);
    if (job.command == "count") return detail::run_count(job);
    if (job.command == "propagator") return detail::run_propagator(job);
    if (job.command == "evolve") return detail::run_evolve(job);
    if (job.command == "oracle") return detail::run_oracle(job);
    if (job.command == "verify") return detail::run_verify(job);
    throw UsageError("unknown command '" + job.command + "'");
  } catch (const UsageError& e) {
    return detail::failure_report(job, exit_usage, e.what());
  } catch (const std::exception& e) {
    return detail::failure_report(job, exit_computation, e.what());
  }
}

}  // namespace lds
