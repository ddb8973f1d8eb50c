#pragma once

// Batch job description and its INI form.

#include <lds/lattice.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lds {

/// Malformed or unsupported job; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct JobSpec {
  std::string command = "reduce";
  std::string format = "json";
  std::string output;
  double tol = 1e-10;
  std::uint64_t seed = 20240917;
  int threads = 1;

  int dimension = 1;
  int extent = 2;
  PotentialCoefficients potential;
  Coefficient w{0};
  /// (field, flat site) -> value, field one of a, k, g, lambda.
  std::map<std::pair<std::string, int>, Coefficient> site_couplings;
  /// (flat site, flat site) -> value.
  std::map<std::pair<int, int>, Coefficient> bond_couplings;

  std::vector<std::vector<int>> targets;

  std::string flow_kind = "w";
  std::vector<Rational> flow_start{Rational(0)};
  std::vector<Rational> flow_end{Rational(1, 4)};
  bool compress = false;
  bool parity = true;

  std::string propagator_kind = "line";
  double mass = 1;
  double period = 8;
  double spacing = 0.5;
  int sites = 8;
  double t_min = 0;
  double t_max = 4;
  int points = 17;

  int count_min = 1;
  int count_max = 8;
  int count_dimension = 1;
  int count_m_anh = 4;

  std::string oracle_method = "tensor";
  int oracle_nodes = 0;
  int oracle_order = 10;
  long oracle_samples = 200000;

  double verify_tol = 1e-5;
  int verify_max_weight = 4;

  friend bool operator==(const JobSpec&, const JobSpec&) = default;
};

namespace detail {

inline std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

inline bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

/// Shortest of %.15g / %.17g that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  if (std::strtod(buf, nullptr) != x) std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(trim(text));
  T value{};
  in >> value;
  if (in.fail() || !in.eof()) throw UsageError("invalid value for " + key + ": '" + text + "'");
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw UsageError("invalid value for " + key + ": '" + text + "'");
}

}  // namespace detail

/// A coupling is a rational literal or a symbol name.
inline Coefficient parse_coupling(const std::string& text) {
  std::string t = detail::trim(text);
  if (detail::is_identifier(t)) return Coefficient::symbol(t);
  try {
    return Coefficient(parse_rational(t));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

inline std::string format_coupling(const Coefficient& c) {
  if (c.is_constant()) return to_string(c.constant_value());
  if (c.size() == 1) {
    const auto& [m, q] = *c.terms().begin();
    if (q == 1 && m.factors().size() == 1 && m.factors()[0].second == 1) return m.factors()[0].first;
  }
  throw UsageError("coupling must be a rational or a symbol: " + c.to_string());
}

/// "3,3; 2,0" -> {{3,3},{2,0}}
inline std::vector<std::vector<int>> parse_targets(const std::string& text) {
  std::vector<std::vector<int>> out;
  for (const auto& item : detail::split(text, ';')) {
    if (item.empty()) continue;
    std::vector<int> occ;
    for (const auto& n : detail::split(item, ',')) occ.push_back(detail::parse_number<int>("targets", n));
    out.push_back(std::move(occ));
  }
  return out;
}

inline std::string format_targets(const std::vector<std::vector<int>>& targets) {
  std::string s;
  for (const auto& occ : targets) {
    if (!s.empty()) s += "; ";
    for (std::size_t i = 0; i < occ.size(); ++i) s += (i ? "," : "") + std::to_string(occ[i]);
  }
  return s;
}

inline std::vector<Rational> parse_rational_list(const std::string& key, const std::string& text) {
  std::vector<Rational> out;
  for (const auto& item : detail::split(text, ',')) {
    try {
      out.push_back(parse_rational(item));
    } catch (const Error& e) {
      throw UsageError(key + ": " + e.what());
    }
  }
  return out;
}

inline std::string format_rational_list(const std::vector<Rational>& xs) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : ",") + to_string(x);
  return s;
}

inline boost::property_tree::ptree to_ptree(const JobSpec& job) {
  using detail::format_double;
  boost::property_tree::ptree t;
  auto put = [&](const std::string& section, const std::string& key, const std::string& value) {
    t.put(boost::property_tree::ptree::path_type(section + "/" + key, '/'), value);
  };
  put("job", "command", job.command);
  put("job", "format", job.format);
  put("job", "output", job.output);
  put("job", "tol", format_double(job.tol));
  put("job", "seed", std::to_string(job.seed));
  put("job", "threads", std::to_string(job.threads));

  put("lattice", "dimension", std::to_string(job.dimension));
  put("lattice", "extent", std::to_string(job.extent));

  put("couplings", "a", format_coupling(job.potential.a));
  put("couplings", "k", format_coupling(job.potential.k));
  put("couplings", "g", format_coupling(job.potential.g));
  put("couplings", "lambda", format_coupling(job.potential.lambda));
  put("couplings", "w", format_coupling(job.w));
  for (const auto& [key, c] : job.site_couplings)
    put("couplings", key.first + "@" + std::to_string(key.second), format_coupling(c));
  for (const auto& [key, c] : job.bond_couplings)
    put("couplings", "w@" + std::to_string(key.first) + "-" + std::to_string(key.second), format_coupling(c));

  put("targets", "nu", format_targets(job.targets));

  put("flow", "kind", job.flow_kind);
  put("flow", "start", format_rational_list(job.flow_start));
  put("flow", "end", format_rational_list(job.flow_end));
  put("flow", "compress", job.compress ? "true" : "false");
  put("flow", "parity", job.parity ? "true" : "false");

  put("propagator", "kind", job.propagator_kind);
  put("propagator", "mass", format_double(job.mass));
  put("propagator", "period", format_double(job.period));
  put("propagator", "spacing", format_double(job.spacing));
  put("propagator", "sites", std::to_string(job.sites));
  put("propagator", "t_min", format_double(job.t_min));
  put("propagator", "t_max", format_double(job.t_max));
  put("propagator", "points", std::to_string(job.points));

  put("count", "min_extent", std::to_string(job.count_min));
  put("count", "max_extent", std::to_string(job.count_max));
  put("count", "dimension", std::to_string(job.count_dimension));
  put("count", "m_anh", std::to_string(job.count_m_anh));

  put("oracle", "method", job.oracle_method);
  put("oracle", "nodes", std::to_string(job.oracle_nodes));
  put("oracle", "order", std::to_string(job.oracle_order));
  put("oracle", "samples", std::to_string(job.oracle_samples));

  put("verify", "tol", format_double(job.verify_tol));
  put("verify", "max_weight", std::to_string(job.verify_max_weight));
  return t;
}

inline std::string to_ini(const JobSpec& job) {
  std::ostringstream out;
  boost::property_tree::write_ini(out, to_ptree(job));
  return out.str();
}

inline JobSpec job_from_ptree(const boost::property_tree::ptree& t) {
  using detail::parse_bool;
  using detail::parse_number;
  JobSpec job;
  for (const auto& [section, body] : t) {
    if (body.empty() && !body.data().empty()) throw UsageError("key outside a section: " + section);
    for (const auto& [key, node] : body) {
      const std::string v = node.data();
      const std::string name = section + "." + key;
      if (section == "job") {
        if (key == "command") job.command = detail::trim(v);
        else if (key == "format") job.format = detail::trim(v);
        else if (key == "output") job.output = detail::trim(v);
        else if (key == "tol") job.tol = parse_number<double>(name, v);
        else if (key == "seed") job.seed = parse_number<std::uint64_t>(name, v);
        else if (key == "threads") job.threads = parse_number<int>(name, v);
        else throw UsageError("unknown key " + name);
      } else if (section == "lattice") {
        if (key == "dimension") job.dimension = parse_number<int>(name, v);
        else if (key == "extent") job.extent = parse_number<int>(name, v);
        else throw UsageError("unknown key " + name);
      } else if (section == "couplings") {
        auto at = key.find('@');
        if (at == std::string::npos) {
          if (key == "a") job.potential.a = parse_coupling(v);
          else if (key == "k") job.potential.k = parse_coupling(v);
          else if (key == "g") job.potential.g = parse_coupling(v);
          else if (key == "lambda") job.potential.lambda = parse_coupling(v);
          else if (key == "w") job.w = parse_coupling(v);
          else throw UsageError("unknown key " + name);
          continue;
        }
        std::string field = key.substr(0, at), where = key.substr(at + 1);
        if (field == "w") {
          auto dash = where.find('-');
          if (dash == std::string::npos) throw UsageError("bond key must read w@i-j: " + name);
          int i = parse_number<int>(name, where.substr(0, dash)), j = parse_number<int>(name, where.substr(dash + 1));
          job.bond_couplings[{i, j}] = parse_coupling(v);
        } else if (field == "a" || field == "k" || field == "g" || field == "lambda") {
          job.site_couplings[{field, parse_number<int>(name, where)}] = parse_coupling(v);
        } else {
          throw UsageError("unknown key " + name);
        }
      } else if (section == "targets") {
        if (key == "nu") job.targets = parse_targets(v);
        else throw UsageError("unknown key " + name);
      } else if (section == "flow") {
        if (key == "kind") job.flow_kind = detail::trim(v);
        else if (key == "start") job.flow_start = parse_rational_list(name, v);
        else if (key == "end") job.flow_end = parse_rational_list(name, v);
        else if (key == "compress") job.compress = parse_bool(name, v);
        else if (key == "parity") job.parity = parse_bool(name, v);
        else throw UsageError("unknown key " + name);
      } else if (section == "propagator") {
        if (key == "kind") job.propagator_kind = detail::trim(v);
        else if (key == "mass") job.mass = parse_number<double>(name, v);
        else if (key == "period") job.period = parse_number<double>(name, v);
        else if (key == "spacing") job.spacing = parse_number<double>(name, v);
        else if (key == "sites") job.sites = parse_number<int>(name, v);
        else if (key == "t_min") job.t_min = parse_number<double>(name, v);
        else if (key == "t_max") job.t_max = parse_number<double>(name, v);
        else if (key == "points") job.points = parse_number<int>(name, v);
        else throw UsageError("unknown key " + name);
      } else if (section == "count") {
        if (key == "min_extent") job.count_min = parse_number<int>(name, v);
        else if (key == "max_extent") job.count_max = parse_number<int>(name, v);
        else if (key == "dimension") job.count_dimension = parse_number<int>(name, v);
        else if (key == "m_anh") job.count_m_anh = parse_number<int>(name, v);
        else throw UsageError("unknown key " + name);
      } else if (section == "oracle") {
        if (key == "method") job.oracle_method = detail::trim(v);
        else if (key == "nodes") job.oracle_nodes = parse_number<int>(name, v);
        else if (key == "order") job.oracle_order = parse_number<int>(name, v);
        else if (key == "samples") job.oracle_samples = parse_number<long>(name, v);
        else throw UsageError("unknown key " + name);
      } else if (section == "verify") {
        if (key == "tol") job.verify_tol = parse_number<double>(name, v);
        else if (key == "max_weight") job.verify_max_weight = parse_number<int>(name, v);
        else throw UsageError("unknown key " + name);
      } else {
        throw UsageError("unknown section [" + section + "]");
      }
    }
  }
  return job;
}

inline JobSpec parse_job(std::istream& in) {
  boost::property_tree::ptree t;
  try {
    boost::property_tree::read_ini(in, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return job_from_ptree(t);
}

inline JobSpec parse_job(const std::string& text) {
  std::istringstream in(text);
  return parse_job(in);
}

/// Lattice described by the job; per-site and per-bond keys override the
/// uniform couplings.
inline LatticeSpec job_lattice(const JobSpec& job) {
  if (job.dimension < 1 || job.extent < 1) throw UsageError("lattice dimension and extent must be positive");
  LatticeSpec spec(job.dimension, job.extent, job.potential, job.w);
  for (const auto& [key, c] : job.site_couplings) {
    const auto& [field, s] = key;
    if (s < 0 || s >= spec.site_count()) throw UsageError("site out of range in " + field + "@" + std::to_string(s));
    PotentialCoefficients p = spec.potential(s);
    if (field == "a") p.a = c;
    else if (field == "k") p.k = c;
    else if (field == "g") p.g = c;
    else p.lambda = c;
    spec.set_potential(spec.site(s), p);
  }
  for (const auto& [key, c] : job.bond_couplings) {
    auto b = spec.bond_between(key.first, key.second);
    if (!b) throw UsageError("no bond between sites " + std::to_string(key.first) + " and " + std::to_string(key.second));
    spec.set_bond_coupling(*b, c);
  }
  try {
    spec.m_anh();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return spec;
}

inline MultiIndex job_target(const LatticeSpec& spec, const std::vector<int>& occ) {
  if (static_cast<int>(occ.size()) != spec.site_count())
    throw UsageError("target needs " + std::to_string(spec.site_count()) + " occupations");
  for (int n : occ)
    if (n < 0) throw UsageError("negative occupation in target");
  return spec.from_dense(occ);
}

}  // namespace lds
