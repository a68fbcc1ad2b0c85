// mzdual: command-line surface over the solvers and verifiers.
//
//   mzdual --spec game.json --command mz --out results/
//   mzdual xcheck --spec data/aumann_maschler.json
//
// Prints the JSON run report on stdout; CSV tables and report.json go to
// --out. Exit codes: 0 ok, 1 failed verification, 2 invalid input,
// 3 solver non-convergence, 4 hypothesis violation (Isaacs, CFL, bounds).

#include <iostream>

#include "CLI11.hpp"
#include "mzdual/cli.hpp"

int main(int argc, char** argv) {
  mzdual::cli::RunOptions opts;
  std::string positional;
  std::size_t grid_m = 0, horizon = 0;
  double dt = 0.0, dx = 0.0;
  std::uint64_t seed = 0;

  CLI::App app{"Mertens-Zamir and Hamilton-Jacobi solvers for zero-sum games with incomplete "
               "information on both sides"};
  app.add_option("cmd", positional, "u | mz | vn | hj | verify | xcheck");
  app.add_option("--command", opts.command, "Same as the positional command");
  app.add_option("--spec", opts.spec_path, "Game spec (JSON)")->required();
  app.add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  auto* grid_opt = app.add_option("--grid-m", grid_m, "Belief grid resolution m");
  auto* dt_opt = app.add_option("--dt", dt, "Time step");
  auto* dx_opt = app.add_option("--dx", dx, "State lattice spacing");
  auto* seed_opt = app.add_option("--seed", seed, "Sampling seed");
  auto* horizon_opt = app.add_option("--horizon", horizon, "Largest n for vn");
  app.add_flag("--verify", opts.verify, "Run verifiers; exit 1 when a check fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mzdual::cli::kExitValidation;
  }
  if (!positional.empty()) {
    if (!opts.command.empty() && opts.command != positional) {
      std::cerr << "error: conflicting commands '" << positional << "' and '" << opts.command
                << "'\n";
      return mzdual::cli::kExitValidation;
    }
    opts.command = positional;
  }
  if (opts.command.empty()) {
    std::cerr << "error: no command given\n" << app.help();
    return mzdual::cli::kExitValidation;
  }
  if (*grid_opt) opts.grid_m = grid_m;
  if (*dt_opt) opts.dt = dt;
  if (*dx_opt) opts.dx = dx;
  if (*seed_opt) opts.seed = seed;
  if (*horizon_opt) opts.horizon = horizon;

  const mzdual::cli::RunOutcome out = mzdual::cli::run(opts);
  std::cout << out.report << '\n';
  return out.exit_code;
}
