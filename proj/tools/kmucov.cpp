#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "kmu/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"coverage probability of an interference-limited Poisson cellular downlink"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string method;
  std::string force_fail;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;

  auto add_sweep_options = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment file")->required();
    sub->add_option("--out", out_path, "CSV output path (overrides [output] csv)");
    sub->add_option("--seed", seed, "simulation seed (overrides [sim] seed)");
    sub->add_option("--trials", trials, "simulation trials (overrides [sim] trials)");
    sub->add_option("--method", method, "analytic method")
        ->check(CLI::IsMember({"exact", "approx", "auto"}));
  };

  CLI::App* analytic = app.add_subcommand("analytic", "analytic coverage sweep to CSV");
  add_sweep_options(analytic);
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo coverage sweep to CSV");
  add_sweep_options(simulate);
  CLI::App* compare =
      app.add_subcommand("compare", "analytic sweep with Monte Carlo cross-check");
  add_sweep_options(compare);
  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in invariant checks");
  selftest->add_option("--force-fail", force_fail, "corrupt the named check (test hook)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? kmu::cli::kExitOk : kmu::cli::kExitConfigError;
  }

  if (selftest->parsed()) return kmu::cli::cmd_selftest(std::cout, force_fail);

  CLI::App* sub = app.get_subcommands().front();
  kmu::cli::Overrides ov;
  ov.out_csv = out_path;
  ov.method = method;
  if (sub->count("--seed") > 0) {
    ov.has_seed = true;
    ov.seed = seed;
  }
  if (sub->count("--trials") > 0) {
    ov.has_trials = true;
    ov.trials = trials;
  }

  if (analytic->parsed()) return kmu::cli::cmd_analytic(config_path, ov, std::cerr);
  if (simulate->parsed()) return kmu::cli::cmd_simulate(config_path, ov, std::cerr);
  if (compare->parsed()) return kmu::cli::cmd_compare(config_path, ov, std::cerr);
  return kmu::cli::kExitConfigError;
}
