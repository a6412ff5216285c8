// zrlab: spectral laboratory for the Zakharov-Rubenchik / Benney-Roskes
// system. Subcommands: coeffs, soliton, simulate, verify, energy.

#include <CLI11.hpp>

#include "zr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Zakharov-Rubenchik / Benney-Roskes spectral laboratory"};
  app.require_subcommand(1);

  zr::CliOptions opt;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "run configuration file")
        ->required();
    cmd->add_option("--out", opt.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opt.seed, "seed for random-field checks");
    cmd->add_flag("--quiet", opt.quiet, "suppress progress output");
  };

  auto* coeffs = app.add_subcommand("coeffs", "print the coefficient table");
  auto* soliton =
      app.add_subcommand("soliton", "classify and export a soliton profile");
  auto* simulate = app.add_subcommand("simulate", "run a scenario");
  auto* verify = app.add_subcommand("verify", "run the certificate suite");
  auto* energy = app.add_subcommand("energy", "run with energy monitoring");
  for (auto* c : {coeffs, soliton, simulate, verify, energy}) add_common(c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (coeffs->parsed()) return zr::cmd_coeffs(opt);
    if (soliton->parsed()) return zr::cmd_soliton(opt);
    if (simulate->parsed()) return zr::cmd_simulate(opt);
    if (verify->parsed()) return zr::cmd_verify(opt);
    if (energy->parsed()) return zr::cmd_energy(opt);
  } catch (const std::exception& e) {
    std::cerr << "zrlab: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
