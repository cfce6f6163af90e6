#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tssr/cli.hpp"

int main(int argc, char** argv) {
  using namespace tssr;
  cli::RunConfig config;

  CLI::App app{"Tensor state space simulation and analysis"};
  app.require_subcommand(1);

  std::string method = "exact";

  auto* simulate = app.add_subcommand("simulate", "Simulate a tensor system and write a trajectory CSV");
  // Long flags only; --h is the step size, so -h cannot mean help here.
  simulate->set_help_flag("--help", "Print this help message and exit");
  simulate->add_option("--system", config.system_path, "System file (JSON)")->required();
  simulate->add_option("--out", config.out_path, "CSV output path (stdout when omitted)");
  simulate->add_option("--steps", config.steps, "Number of steps (discrete time)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--t-end", config.t_end, "End time (continuous time)");
  simulate->add_option("--h", config.h, "Step size (default t-end/1000)");
  simulate->add_option("--method", method, "Integrator for continuous time")
      ->check(CLI::IsMember({"exact", "rk4"}))
      ->option_text("exact|rk4 (default exact)");
  simulate->add_flag("--emit-output", config.emit_output, "Include output (y) columns");

  auto* analyze = app.add_subcommand("analyze", "Report stability, controllability and observability");
  analyze->add_option("--system", config.system_path, "System file (JSON)")->required();
  analyze->add_option("--rank-tol", config.analysis.rank_tolerance, "Relative singular value threshold factor");
  analyze->add_option("--stability-margin", config.analysis.stability_margin, "Marginal band half-width");

  auto* multirate = app.add_subcommand("multirate", "Evaluate a multirate system on its global clock");
  multirate->add_option("--system", config.system_path, "Multirate system file (JSON)")->required();
  multirate->add_option("--out", config.out_path, "CSV output path (stdout when omitted)");
  multirate->add_option("--horizon", config.horizon, "Number of global clock ticks")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kSuccess : cli::kConfigError;
  }

  config.command = app.get_subcommands().front()->get_name();
  config.method = method == "rk4" ? Method::rk4 : Method::exact;
  return cli::run(config);
}
