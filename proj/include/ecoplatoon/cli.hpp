#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecoplatoon/scenario.hpp"

namespace ecoplatoon::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kNotConverged = 3,
  kRuntimeFailure = 4,
};

struct CommandOptions {
  std::string scenario;  // path or preset name
  std::filesystem::path out_dir;
  std::optional<double> ds;      // m
  std::optional<double> window;  // m, switches one-shot scenarios to receding
  bool ilqr = false;
};

// Applies command-line overrides. For bench, --ds and --window narrow the
// sweep to a single value instead.
void ApplyOverrides(Scenario& scenario, const CommandOptions& options, bool bench);

// Warning text when the grid differs from the one the default weights were
// tuned for, empty otherwise.
std::string StepSizeWarning(const Scenario& scenario);

// Each command writes its CSVs, summary.json and a plotting script to
// options.out_dir and returns an exit code. Progress and diagnostics go to
// `log`.
int Simulate(const Scenario& scenario, const CommandOptions& options, std::ostream& log);
int Compare(const Scenario& scenario, const CommandOptions& options, std::ostream& log);
int Stability(const Scenario& scenario, const CommandOptions& options, std::ostream& log);
int Bench(const Scenario& scenario, const CommandOptions& options, std::ostream& log);

// Loads the scenario, applies overrides and dispatches; maps exceptions to
// exit codes.
int RunCommand(const std::string& command, const CommandOptions& options, std::ostream& log);

// Writes `content` to a sibling temporary file and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ecoplatoon::cli
