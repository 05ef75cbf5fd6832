// ratiomom: moments of the sum-of-squares ratio under mixed Poisson counts.
//
//   ratiomom limits   --config study.json
//   ratiomom converge --config study.json --threads 4 --out rows.csv
//   ratiomom simulate --seed 7 --format json
//   ratiomom verify

#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "ratiomom/errors.hpp"
#include "ratiomom/harness.hpp"

namespace h = ratiomom::harness;

namespace {

int code(h::Exit e) { return static_cast<int>(e); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact, asymptotic and simulated moments of sum(X^2)/sum(X)^2 under mixed Poisson counts"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  unsigned hw = std::thread::hardware_concurrency();
  int threads = hw == 0 ? 1 : static_cast<int>(hw);
  std::string format = "csv";

  app.add_option("--config", config_path, "JSON study file (defaults apply when omitted)")->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "Output path (default: config 'output' or stdout)");
  app.add_option("--seed", seed, "Override simulation.seed");
  app.add_option("--threads", threads, "Worker threads; never changes results")->check(CLI::Range(1, 1024));
  app.add_option("--format", format, "Row format")->check(CLI::IsMember({"csv", "json"}));

  auto* limits = app.add_subcommand("limits", "Limit constants for alpha in (0,1) with per-r terms");
  auto* converge = app.add_subcommand("converge", "Quadrature / Monte Carlo against asymptotes over the t grid");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo moments and coefficient-of-variation summaries");
  auto* verify = app.add_subcommand("verify", "Run the identity suite; exit 1 on any failure");
  for (auto* sc : {limits, converge, simulate, verify}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return code(h::Exit::Usage);
  }

  h::StudyConfig cfg;
  try {
    if (!config_path.empty()) cfg = h::load_config(config_path);
  } catch (const ratiomom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return code(h::Exit::Usage);
  }
  if (seed) cfg.simulation.seed = *seed;
  if (!out_path.empty()) cfg.output = out_path;

  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) {
      std::cerr << "cannot write " << cfg.output << "\n";
      return code(h::Exit::Usage);
    }
  }
  std::ostream& os = cfg.output.empty() ? std::cout : file;
  const bool json = format == "json";

  try {
    auto prov = cfg.provenance();
    if (verify->parsed()) {
      const auto checks = h::cmd_verify(cfg, threads);
      h::write_verify_report(os, checks);
      for (const auto& c : checks) {
        if (!c.passed) return code(h::Exit::VerifyFailed);
      }
      return code(h::Exit::Ok);
    }
    if (limits->parsed()) {
      prov.insert(prov.begin(), {"command", "limits"});
      const auto rows = h::cmd_limits(cfg);
      json ? h::write_limits_json(os, rows, prov) : h::write_limits_csv(os, rows, prov);
      return code(h::Exit::Ok);
    }
    const bool sim = simulate->parsed();
    prov.insert(prov.begin(), {"command", sim ? "simulate" : "converge"});
    const auto rows = sim ? h::cmd_simulate(cfg, threads) : h::cmd_converge(cfg, threads);
    json ? h::write_rows_json(os, rows, prov) : h::write_rows_csv(os, rows, prov);
  } catch (const ratiomom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return code(h::Exit::Usage);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(h::Exit::Usage);
  }
  return code(h::Exit::Ok);
}
