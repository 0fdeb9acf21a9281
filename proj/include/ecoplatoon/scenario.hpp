#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecoplatoon/baseline_cacc.hpp"
#include "ecoplatoon/cost_model.hpp"
#include "ecoplatoon/ddp_solver.hpp"
#include "ecoplatoon/fuel_eval.hpp"
#include "ecoplatoon/platoon_model.hpp"
#include "ecoplatoon/stability_harness.hpp"
#include "ecoplatoon/terrain.hpp"

namespace ecoplatoon {

enum class HorizonMode { kOneShot, kReceding };

struct HorizonSettings {
  HorizonMode mode = HorizonMode::kOneShot;
  double window_length = 40.0;   // m
  double replan_interval = 1.0;  // m
};

struct BenchSettings {
  std::vector<double> step_sizes{0.05, 0.1, 1.0};  // m
  std::vector<double> windows{20.0, 30.0, 40.0};   // m
  double replan_interval = 1.0;                    // m
};

// Grid of platoon sizes and leader perturbations for the stability command.
// Empty lists fall back to the scenario's own platoon and perturbation.
struct StabilitySweep {
  std::vector<int> vehicle_counts;
  std::vector<double> magnitudes;  // m/s
};

// Everything one experiment needs, with units already converted to SI.
struct Scenario {
  std::string name;
  std::string road_label;  // preset name or profile file
  SlopeProfile profile = SlopeProfile::Flat(800.0);
  PlatoonConfig platoon;
  std::vector<double> initial_gap_errors;  // s, one per follower
  std::optional<double> initial_speed;     // m/s, defaults to the target speed
  CostWeights weights;
  SolverOptions solver;
  BaselineOptions baseline;
  FuelModel fuel_model = FuelModel::LightDutyDefault();
  std::string fuel_model_source = "built-in";
  std::optional<PerturbationSpec> perturbation;
  HorizonSettings horizon;
  BenchSettings bench;
  StabilitySweep stability;

  // Start state: leader at t = 0, followers offset by their headway minus
  // the configured gap error, all at the initial speed.
  Vector InitialState() const;
  void Validate() const;
};

// Directories searched for presets, in order: $ECOPLATOON_PRESET_DIR (if
// set), then the install-time preset directory.
std::vector<std::filesystem::path> PresetSearchPath();

// Resolves a scenario argument: an existing path is used as is; otherwise
// `name` and `name.json` are looked up on the preset search path.
std::filesystem::path ResolveScenarioPath(const std::string& argument);

// Speeds accept a bare number (m/s) or {"value": x, "unit": "mph" | "m/s"}.
Scenario ParseScenario(std::string_view json_text, const std::filesystem::path& base_dir);
Scenario LoadScenario(const std::filesystem::path& path);

}  // namespace ecoplatoon
