// Command-line front end for the spherical p-spin dynamics lab.
//
// Exit codes: 0 success, 1 verification failure, 2 config error,
// 3 infeasible model, 4 numerical instability, 5 resource cap.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "pspin/errors.hpp"
#include "pspin/version.hpp"

namespace {

int exit_code_for(pspin::errc code) {
  switch (code) {
    case pspin::errc::invalid_argument:
    case pspin::errc::invalid_window:
    case pspin::errc::horizon_too_short:
    case pspin::errc::io_error:
      return 2;
    case pspin::errc::infeasible_model:
      return 3;
    case pspin::errc::non_convergence:
    case pspin::errc::instability:
    case pspin::errc::divergence:
      return 4;
    case pspin::errc::resource_limit:
      return 5;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pspin::cli;

  CLI::App app{std::string("pspin ") + PSPIN_VERSION +
               " - spherical mixed p-spin dynamics laboratory"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string config_path;
  std::string level = "quick";

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", opt.out_dir, "output directory (default '.')");
    sub->add_option("--threads", opt.threads, "worker thread cap (default PSPIN_THREADS or 1)");
    auto* seed = sub->add_option("--seed", opt.seed_override, "seed override");
    sub->callback([&, seed]() { opt.has_seed_override = seed->count() > 0; });
  };

  auto* critical = app.add_subcommand("critical", "critical-constant sweep over beta");
  add_common(critical, true);
  auto* solve_fdt = app.add_subcommand("solve-fdt", "one-time stationary (FDT) equation");
  add_common(solve_fdt, true);
  auto* solve_twotime = app.add_subcommand("solve-twotime", "two-time integro-differential solve");
  add_common(solve_twotime, true);
  auto* psi_iterate = app.add_subcommand("psi-iterate", "iterate the Psi map");
  add_common(psi_iterate, true);
  auto* simulate = app.add_subcommand("simulate", "finite-N Langevin Monte Carlo");
  add_common(simulate, true);
  auto* compare = app.add_subcommand("compare", "simulate and compare against a solved grid");
  add_common(compare, true);
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  add_common(verify, false);
  verify->add_option("--level", level, "quick or full (default quick)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(level, opt);
    const auto cfg = load_config(config_path);
    if (critical->parsed()) return cmd_critical(cfg, opt);
    if (solve_fdt->parsed()) return cmd_solve_fdt(cfg, opt);
    if (solve_twotime->parsed()) return cmd_solve_twotime(cfg, opt);
    if (psi_iterate->parsed()) return cmd_psi_iterate(cfg, opt);
    if (simulate->parsed()) return cmd_simulate(cfg, opt);
    if (compare->parsed()) return cmd_compare(cfg, opt);
  } catch (const pspin::error& e) {
    std::fprintf(stderr, "pspin: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pspin: %s\n", e.what());
    return 2;
  }
  return 2;
}
