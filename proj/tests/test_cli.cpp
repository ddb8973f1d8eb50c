#include <lds/commands.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace lds;
using nlohmann::json;

namespace {

JobSpec two_site_job(const std::string& command) {
  JobSpec job;
  job.command = command;
  job.extent = 2;
  job.potential.k = Coefficient(1);
  job.potential.lambda = Coefficient(Rational(1, 2));
  return job;
}

json run_json(const JobSpec& job, int expected_exit = exit_ok) {
  Report r = run_job(job);
  EXPECT_EQ(r.exit_code, expected_exit) << r.text;
  return json::parse(r.text);
}

Rational q(const std::string& s) { return parse_rational(s); }

}  // namespace

TEST(JobSpec, RoundTripDefault) {
  JobSpec job;
  EXPECT_EQ(parse_job(to_ini(job)), job);
}

TEST(JobSpec, RoundTripEverything) {
  JobSpec job;
  job.command = "evolve";
  job.format = "csv";
  job.output = "out/result.csv";
  job.tol = 3.7e-9;
  job.seed = 99;
  job.threads = 3;
  job.dimension = 2;
  job.extent = 3;
  job.potential.a = Coefficient(q("-1/7"));
  job.potential.k = Coefficient::symbol("k");
  job.potential.g = Coefficient(q("0.125"));
  job.potential.lambda = Coefficient::symbol("lam");
  job.w = Coefficient::symbol("w");
  job.site_couplings[{"k", 4}] = Coefficient(q("5/3"));
  job.site_couplings[{"lambda", 0}] = Coefficient::symbol("lambda1");
  job.bond_couplings[{0, 1}] = Coefficient(q("1/9"));
  job.targets = {{1, 0, 2, 0, 0, 0, 0, 0, 3}, {0, 0, 0, 0, 0, 0, 0, 0, 0}};
  job.flow_kind = "per_bond";
  job.flow_start = {q("0"), q("0")};
  job.flow_end = {q("1/3"), q("-2/5")};
  job.compress = true;
  job.parity = false;
  job.propagator_kind = "circle";
  job.mass = 0.1 + 0.2;
  job.period = 8.5;
  job.t_max = 1.0 / 3.0;
  job.oracle_method = "monte_carlo";
  job.oracle_samples = 12345;
  job.verify_tol = 1e-7;
  JobSpec back = parse_job(to_ini(job));
  EXPECT_EQ(back, job);
  EXPECT_EQ(to_ini(back), to_ini(job));
}

TEST(JobSpec, RoundTripRandomProperty) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(-50, 50), den(1, 30), small(0, 4);
  std::uniform_real_distribution<double> real(-10, 10);
  for (int t = 0; t < 50; ++t) {
    JobSpec job;
    job.potential.k = Coefficient(canonical(Rational(num(rng), den(rng))));
    job.w = Coefficient(canonical(Rational(num(rng), den(rng))));
    job.mass = real(rng);
    job.tol = std::abs(real(rng)) * 1e-9;
    job.targets = {{small(rng), small(rng)}};
    job.flow_end = {canonical(Rational(num(rng), den(rng)))};
    EXPECT_EQ(parse_job(to_ini(job)), job);
  }
}

TEST(JobSpec, ShippedConfigsRoundTrip) {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(LDS_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    std::ifstream in(entry.path());
    JobSpec job = parse_job(in);
    EXPECT_EQ(parse_job(to_ini(job)), job) << entry.path();
    ++seen;
  }
  EXPECT_GT(seen, 0);
}

TEST(JobSpec, Errors) {
  EXPECT_THROW(parse_job("[lattice]\nextent = two\n"), UsageError);
  EXPECT_THROW(parse_job("[nowhere]\nx = 1\n"), UsageError);
  EXPECT_THROW(parse_job("[couplings]\nk = 1/0\n"), UsageError);
  EXPECT_THROW(parse_job("[couplings]\nw@0 = 1\n"), UsageError);
  JobSpec job = two_site_job("reduce");
  job.bond_couplings[{0, 5}] = Coefficient(1);
  EXPECT_THROW(job_lattice(job), UsageError);
}

TEST(Reduce, TwoSitesMatchesFlowRow) {
  JobSpec job;
  job.potential.k = Coefficient::symbol("k");
  job.potential.lambda = Coefficient::symbol("lambda");
  job.w = Coefficient::symbol("w");
  job.targets = {{3, 3}};
  json out = run_json(job);
  const json& terms = out["results"][0]["terms"];
  ASSERT_EQ(terms.size(), 4u);
  std::map<std::vector<int>, json> by_index;
  for (const auto& t : terms) by_index[t["index"].get<std::vector<int>>()] = t["coefficient"];
  const json vacuum = by_index[std::vector<int>{0, 0}], edge = by_index[std::vector<int>{2, 0}],
             pair = by_index[std::vector<int>{1, 1}];
  EXPECT_EQ(vacuum, json::parse(R"([{"monomial":"lambda^-2*w","rational":"1"}])"));
  EXPECT_EQ(edge, json::parse(R"([{"monomial":"k*lambda^-2*w","rational":"-1"}])"));
  EXPECT_EQ(pair.size(), 2u);
  EXPECT_EQ(out["results"][0]["trace"]["steps"], 3);
  EXPECT_EQ(out["config"]["job"]["command"], "reduce");
}

TEST(Reduce, PrimitiveIsIdentity) {
  JobSpec job = two_site_job("reduce");
  job.targets = {{2, 1}};
  json out = run_json(job);
  ASSERT_EQ(out["results"][0]["terms"].size(), 1u);
  EXPECT_EQ(out["results"][0]["terms"][0]["index"], json::parse("[2,1]"));
  EXPECT_EQ(out["results"][0]["terms"][0]["coefficient"], json::parse(R"([{"monomial":"1","rational":"1"}])"));
}

TEST(Reduce, SymbolicThreeSitesAgainstOracle) {
  JobSpec job;
  job.extent = 3;
  job.potential.k = Coefficient::symbol("k");
  job.potential.lambda = Coefficient::symbol("lambda");
  job.w = Coefficient::symbol("w");
  job.targets = {{0, 3, 2}};
  json out = run_json(job);
  const Assignment at{{"k", Rational(1)}, {"lambda", Rational(1, 2)}, {"w", Rational(1, 4)}};
  LatticeSpec numeric(1, 3, PotentialCoefficients{0, 1, 0, Rational(1, 2)}, Coefficient(Rational(1, 4)));
  double sum = 0, err = 0;
  for (const auto& t : out["results"][0]["terms"]) {
    Rational c = 0;
    for (const auto& m : t["coefficient"]) {
      Coefficient term = Coefficient(parse_rational(m["rational"].get<std::string>()));
      std::string mono = m["monomial"];
      if (mono != "1") {
        for (const auto& factor : detail::split(mono, '*')) {
          auto caret = factor.find('^');
          std::string name = factor.substr(0, caret);
          int e = caret == std::string::npos ? 1 : std::stoi(factor.substr(caret + 1));
          term *= Coefficient::symbol(name, e);
        }
      }
      c += term.evaluate(at);
    }
    OracleResult o = direct_correlator(numeric, numeric.from_dense(t["index"].get<std::vector<int>>()));
    sum += to_double(c) * o.normalized;
    err += std::abs(to_double(c)) * o.error;
  }
  OracleResult direct = direct_correlator(numeric, dense1({0, 3, 2}));
  EXPECT_NEAR(sum, direct.normalized, err + direct.error + 1e-10);
}

TEST(Count, QuarticParityRow) {
  JobSpec job;
  job.command = "count";
  json out = run_json(job);
  const std::vector<std::uint64_t> expected{2, 5, 14, 41, 122, 365, 1094, 3281};
  ASSERT_EQ(out["rows"].size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(out["rows"][i]["parity"], expected[i]);
  EXPECT_GE(out["rows"][2]["full"].get<double>(), 27.0 / 12.0);
}

TEST(Count, CubicAndOversize) {
  JobSpec job;
  job.command = "count";
  job.count_m_anh = 3;
  job.count_min = job.count_max = 2;
  json out = run_json(job);
  EXPECT_EQ(out["rows"][0]["none"], 4);
  EXPECT_TRUE(out["rows"][0]["parity"].is_null());
  job.count_m_anh = 4;
  job.count_max = job.count_min = 30;
  json err = run_json(job, exit_usage);
  EXPECT_EQ(err["error"]["kind"], "usage");
}

TEST(Propagator, LineGrid) {
  JobSpec job;
  job.command = "propagator";
  json out = run_json(job);
  EXPECT_DOUBLE_EQ(out["series"][0]["t"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(out["series"][0]["value"].get<double>(), 0.5);
  job.format = "csv";
  Report csv = run_job(job);
  EXPECT_NE(csv.text.find("\nt,value\n0,0.5\n"), std::string::npos);
}

TEST(Evolve, ZeroLengthFlowKeepsInitialValues) {
  JobSpec job = two_site_job("evolve");
  job.flow_end = {Rational(0)};
  json out = run_json(job);
  LatticeSpec spec = job_lattice(job);
  auto basis = primitive_basis(spec);
  auto init = initial_primitive_values(spec, basis);
  ASSERT_EQ(out["basis"].size(), basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) EXPECT_EQ(out["basis"][i]["value"].get<double>(), init[i]);
}

TEST(Evolve, TargetsAgainstOracle) {
  JobSpec job = two_site_job("evolve");
  job.targets = {{1, 1}, {3, 1}};
  json out = run_json(job);
  LatticeSpec end(1, 2, PotentialCoefficients{0, 1, 0, Rational(1, 2)}, Coefficient(Rational(1, 4)));
  for (const auto& t : out["targets"]) {
    OracleResult o = direct_correlator(end, end.from_dense(t["index"].get<std::vector<int>>()));
    EXPECT_NEAR(t["normalized"].get<double>(), o.normalized, 1e-8);
  }
}

TEST(Oracle, ReportsErrorBars) {
  JobSpec job = two_site_job("oracle");
  job.w = Coefficient(Rational(1, 4));
  job.targets = {{1, 1}};
  json out = run_json(job);
  EXPECT_GT(out["results"][0]["error"].get<double>(), 0.0);
  EXPECT_LT(out["results"][0]["error"].get<double>(), 1e-8);
}

TEST(Verify, TwoSiteSuitePasses) {
  JobSpec job = two_site_job("verify");
  job.w = Coefficient(Rational(1, 4));
  json out = run_json(job);
  EXPECT_TRUE(out["pass"].get<bool>());
  EXPECT_EQ(out["checks"].size(), 6u);
}

TEST(Verify, FailureExitCode) {
  JobSpec job = two_site_job("verify");
  job.w = Coefficient(Rational(1, 4));
  job.verify_tol = 0;
  job.oracle_order = 2;
  job.oracle_nodes = 6;
  json out = run_json(job, exit_verification);
  EXPECT_FALSE(out["pass"].get<bool>());
}

TEST(Cli, ExitCodes) {
  JobSpec job = two_site_job("nonsense");
  EXPECT_EQ(run_job(job).exit_code, exit_usage);
  job.command = "reduce";
  job.format = "xml";
  EXPECT_EQ(run_job(job).exit_code, exit_usage);
  job.format = "json";
  job.targets = {{1, 2, 3}};
  EXPECT_EQ(run_job(job).exit_code, exit_usage);

  JobSpec lam;
  lam.command = "evolve";
  lam.extent = 1;
  lam.potential.lambda = Coefficient(1);
  lam.flow_kind = "lambda";
  lam.flow_start = {Rational(1)};
  lam.flow_end = {Rational(0)};
  json err = run_json(lam, exit_computation);
  EXPECT_NE(err["error"]["message"].get<std::string>().find("singular flow point"), std::string::npos);
}

TEST(Cli, DeterministicReports) {
  JobSpec job = two_site_job("oracle");
  job.extent = 3;
  job.w = Coefficient(Rational(1, 4));
  job.targets = {{2, 2, 2}};
  job.oracle_method = "monte_carlo";
  job.oracle_samples = 20000;
  EXPECT_EQ(run_job(job).text, run_job(job).text);
  job.threads = 2;
  std::string two = run_job(job).text;
  job.threads = 1;
  std::string one = run_job(job).text;
  EXPECT_EQ(json::parse(one)["results"], json::parse(two)["results"]);

  JobSpec ev = two_site_job("evolve");
  EXPECT_EQ(run_job(ev).text, run_job(ev).text);
}
