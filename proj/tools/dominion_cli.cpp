#include "dominion/commands.hpp"
#include "dominion/config.hpp"
#include "dominion/error.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace dominion;

namespace {

int usage_or_check(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ParseError:
    case ErrorCode::NonpositiveEps:
    case ErrorCode::NotScalarParameterized:
      return kExitUsage;
    default:
      return kExitCheckFailed;
  }
}

// Summary goes to stderr so stdout carries only the JSON report when no
// report path is given.
int finish(const CommandResult& r, const std::string& report_path, bool print_json) {
  for (const auto& line : r.summary) std::cerr << line << '\n';
  if (!report_path.empty()) write_report(r.report, report_path);
  if (print_json && report_path.empty()) std::cout << r.report.dump(2) << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dominion: p-dominance certificates for singularly perturbed systems"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  bool no_timestamp = false;
  std::string report_path;
  app.add_flag("--no-timestamp", no_timestamp, "omit generated_at from reports");
  app.add_option("--report", report_path, "write the JSON report to this file");

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "system configuration (JSON)")->required()->check(CLI::ExistingFile);
  };

  auto* certify = app.add_subcommand("certify", "check the slow and fast dominance LMIs");
  add_config(certify);

  double eps = 0.0;
  auto* decouple = app.add_subcommand("decouple", "solve the decoupling equations at a given eps");
  add_config(decouple);
  decouple->add_option("--eps", eps, "time-scale parameter")->required();

  auto* eps_star = app.add_subcommand("epsilon-star", "search for a certified eps bound");
  add_config(eps_star);

  double t_final = 9.0;
  std::string out_dir;
  auto* simulate = app.add_subcommand("simulate", "integrate the configured initial conditions");
  add_config(simulate);
  simulate->add_option("--t-final", t_final, "final time")->required();
  simulate->add_option("--out", out_dir, "output directory for CSVs and report.json")->required();

  int pairs = 100;
  std::uint64_t seed = 42;
  auto* probe = app.add_subcommand("monotone-probe", "sample trajectory pairs and classify differences");
  add_config(probe);
  probe->add_option("--pairs", pairs, "number of pairs")->capture_default_str();
  probe->add_option("--t-final", t_final, "final time")->capture_default_str();
  probe->add_option("--seed", seed, "RNG seed")->capture_default_str();

  std::optional<double> eps_override;
  std::optional<double> sigma_override;
  auto* reproduce = app.add_subcommand("reproduce-paper", "run the full nonlinear spring example");
  reproduce->add_option("--out", out_dir, "output directory")->required();
  reproduce->add_option("--eps", eps_override, "override eps");
  reproduce->add_option("--sigma-r", sigma_override, "override sigma_r");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const CommandOptions opt{!no_timestamp};
  try {
    if (*reproduce) {
      const CommandResult r = cmd_reproduce_paper(out_dir, {eps_override, sigma_override}, opt);
      write_report(r.report, report_path.empty() ? std::filesystem::path(out_dir) / "report.json"
                                                 : std::filesystem::path(report_path));
      return finish(r, "", false);
    }
    const SystemConfig cfg = load_config(config_path);
    if (*certify) return finish(cmd_certify(cfg, opt), report_path, true);
    if (*decouple) return finish(cmd_decouple(cfg, eps, opt), report_path, true);
    if (*eps_star) return finish(cmd_epsilon_star(cfg, opt), report_path, true);
    if (*simulate) {
      const CommandResult r = cmd_simulate(cfg, t_final, out_dir, opt);
      write_report(r.report, report_path.empty() ? std::filesystem::path(out_dir) / "report.json"
                                                 : std::filesystem::path(report_path));
      return finish(r, "", false);
    }
    if (*probe) return finish(cmd_monotone_probe(cfg, pairs, t_final, seed, opt), report_path, true);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_or_check(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitUsage;
}
