#pragma once

#include <string>
#include <vector>

#include "ecoplatoon/scenario.hpp"

namespace ecoplatoon {

// One Eco-CACC plan over the whole route, from either horizon mode.
struct EcoRun {
  PlatoonState states;
  ControlTrajectory controls;
  std::vector<double> grades;
  CostBreakdown cost;
  std::vector<IterationRecord> iterations;  // one-shot only
  std::vector<double> execution_times;      // s, one entry per solve
  double max_violation = 0.0;
  int inner_iterations = 0;
  bool converged = false;
  bool completed = false;  // false if a receding run stopped early
  std::string message;
};

EcoRun RunEco(const Scenario& scenario);

// Largest constraint value over the executed steps (0 if all satisfied).
double MaxViolation(const PlatoonState& states, const ControlTrajectory& controls,
                    const PlatoonConfig& config);

struct SegmentDelta {
  double start = 0.0;   // m
  double end = 0.0;     // m
  double grade = 0.0;   // rad
  double baseline_fuel = 0.0;  // L, whole platoon
  double eco_fuel = 0.0;       // L

  double delta() const { return baseline_fuel - eco_fuel; }
};

struct Comparison {
  EcoRun eco;
  std::vector<TimeTrace> baseline_traces;
  std::vector<FuelSeries> eco_fuel;
  std::vector<FuelSeries> baseline_fuel;
  std::vector<SegmentDelta> segments;
  double eco_total = 0.0;       // L
  double baseline_total = 0.0;  // L

  double savings_percent() const { return 100.0 * (baseline_total - eco_total) / baseline_total; }
  // Sum of deltas over segments with positive (negative) grade.
  double uphill_delta() const;
  double downhill_delta() const;
};

// Eco-CACC plan plus the baseline controller on the same road and start.
// Throws if the Eco-CACC run did not complete or cannot be resimulated.
Comparison RunComparison(const Scenario& scenario);
// Same, reusing an existing Eco-CACC run.
Comparison CompleteComparison(const Scenario& scenario, EcoRun eco);

// Baseline traces and fuel only.
std::vector<TimeTrace> RunScenarioBaseline(const Scenario& scenario);

struct StabilityCase {
  int num_vehicles = 0;
  double magnitude = 0.0;  // m/s
  StabilityReport report;
};

// Sweeps the scenario's stability grid (or its own platoon size and
// perturbation) from an equilibrium start at the target speed.
std::vector<StabilityCase> RunStabilitySweep(const Scenario& scenario);

struct BenchRow {
  double ds = 0.0;      // m
  double window = 0.0;  // m
  int executions = 0;
  double mean_time = 0.0;  // s
  double max_time = 0.0;   // s
  double eco_fuel = 0.0;   // L
  double max_violation = 0.0;
  bool completed = false;
  bool converged = false;
};

// Receding-horizon timing sweep over the bench grid; timings cover the
// solver calls only.
std::vector<BenchRow> RunBench(const Scenario& scenario);

// Copy of the scenario with a different grid size (horizon steps follow).
Scenario WithStepSize(const Scenario& scenario, double ds);

}  // namespace ecoplatoon
