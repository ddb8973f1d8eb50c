// lds: batch front end. One job per invocation; the report goes to --out
// (written atomically) or stdout.

#include <lds/commands.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

int write_atomically(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return 1;
    out << text;
    out.flush();
    if (!out) return 1;
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  return ec ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice Dyson-Schwinger workbench"};
  app.require_subcommand(1, 1);

  std::string config, out, format;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  const std::pair<const char*, const char*> commands[] = {
      {"reduce", "reduce [targets] to primitive correlators"},
      {"count", "count primitive correlators with and without symmetry"},
      {"propagator", "tabulate a free propagator"},
      {"evolve", "integrate a coupling flow from the decoupled lattice"},
      {"oracle", "evaluate [targets] by direct integration"},
      {"verify", "run the cross-module identity suite"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "INI job file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output path (default stdout)");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--tol", tol, "integrator / series tolerance");
    sub->add_option("--seed", seed, "Monte Carlo seed");
    sub->add_option("--threads", threads, "worker threads");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : lds::exit_usage;
  }

  lds::JobSpec job;
  if (!config.empty()) {
    std::ifstream in(config);
    try {
      job = lds::parse_job(in);
    } catch (const lds::Error& e) {
      job.command = app.get_subcommands().front()->get_name();
      std::cerr << "lds: " << e.what() << "\n";
      std::cout << lds::detail::failure_report(job, lds::exit_usage, e.what()).text;
      return lds::exit_usage;
    }
  }
  job.command = app.get_subcommands().front()->get_name();
  if (!format.empty()) job.format = format;
  if (!out.empty()) job.output = out;
  if (tol) job.tol = *tol;
  if (seed) job.seed = *seed;
  if (threads) job.threads = *threads;

  lds::Report report = lds::run_job(job);
  if (report.exit_code == lds::exit_usage || report.exit_code == lds::exit_computation)
    std::cerr << "lds: " << job.command << " failed (exit " << report.exit_code << ")\n";
  if (job.output.empty()) {
    std::cout << report.text;
  } else if (write_atomically(job.output, report.text) != 0) {
    std::cerr << "lds: cannot write " << job.output << "\n";
    return lds::exit_computation;
  }
  return report.exit_code;
}
