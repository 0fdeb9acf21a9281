#include <iostream>

#include "CLI11.hpp"
#include "ecoplatoon/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = ecoplatoon::cli;
  CLI::App app{"Eco-CACC platoon planner: simulate, compare, stability and timing runs"};
  app.require_subcommand(1);

  cli::CommandOptions options;
  double ds = 0.0;
  double window = 0.0;
  const char* kCommands[][2] = {
      {"simulate", "Plan the platoon and write trajectories, fuel series and a summary"},
      {"compare", "Plan and run the baseline CACC on the same road; report fuel savings"},
      {"stability", "Perturb the leader and report acceleration transfer ratios"},
      {"bench", "Time receding-horizon executions over step sizes and windows"},
  };
  for (const auto& [name, help] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", options.scenario, "Scenario JSON path or preset name")
        ->required();
    sub->add_option("--out", options.out_dir, "Output directory")->required();
    sub->add_option("--ds", ds, "Spatial step (m); for bench, runs only this step")
        ->check(CLI::PositiveNumber);
    sub->add_option("--window", window, "Receding window (m), switches to receding mode; for bench, runs only this window")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--ilqr", options.ilqr, "Drop second-order dynamics terms");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--ds") > 0) options.ds = ds;
  if (chosen->count("--window") > 0) options.window = window;
  return cli::RunCommand(chosen->get_name(), options, std::cerr);
}
