#include "ecoplatoon/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ecoplatoon {

double MaxViolation(const PlatoonState& states, const ControlTrajectory& controls,
                    const PlatoonConfig& config) {
  const ConstraintSet constraints(config);
  double worst = 0.0;
  for (int k = 0; k < controls.num_steps(); ++k) {
    const Vector e = constraints.Evaluate(states.StepVector(k), controls.accels.col(k));
    worst = std::max(worst, e.maxCoeff());
  }
  return worst;
}

Scenario WithStepSize(const Scenario& scenario, double ds) {
  Scenario out = scenario;
  out.platoon.ds = ds;
  out.platoon.horizon_steps = static_cast<int>(std::lround(scenario.profile.total_length() / ds));
  return out;
}

EcoRun RunEco(const Scenario& scenario) {
  const PlatoonConfig& config = scenario.platoon;
  const Vector x0 = scenario.InitialState();
  EcoRun run;
  if (scenario.horizon.mode == HorizonMode::kOneShot) {
    const ControlProblem problem = MakeProblem(config, scenario.weights, scenario.profile, x0);
    SolveReport report = Solve(problem, scenario.solver);
    run.states = std::move(report.states);
    run.controls = std::move(report.controls);
    run.grades = problem.grades;
    run.cost = report.cost;
    run.iterations = std::move(report.iterations);
    run.execution_times = {report.wall_time};
    run.inner_iterations = report.inner_iterations;
    run.converged = report.converged;
    run.completed = true;
    run.message = report.message;
  } else {
    RecedingOptions receding;
    receding.window_length = scenario.horizon.window_length;
    receding.replan_interval = scenario.horizon.replan_interval;
    RecedingResult result =
        RecedingHorizonRun(config, scenario.weights, scenario.profile, x0, scenario.solver, receding);
    run.states = std::move(result.states);
    run.controls = std::move(result.controls);
    run.grades = SampleGrades(scenario.profile, 0.0, config.ds, run.controls.num_steps());
    run.execution_times = std::move(result.execution_times);
    run.inner_iterations = std::accumulate(result.execution_iterations.begin(),
                                           result.execution_iterations.end(), 0);
    run.completed = result.completed;
    run.converged = result.completed && result.all_converged;
    run.message = result.message;
    if (run.completed) {
      run.cost = TrajectoryCost(run.states, run.controls, run.grades, config, scenario.weights);
    }
  }
  if (run.completed) run.max_violation = MaxViolation(run.states, run.controls, config);
  return run;
}

std::vector<TimeTrace> RunScenarioBaseline(const Scenario& scenario) {
  return RunBaseline(scenario.platoon, scenario.profile, scenario.InitialState(),
                     scenario.baseline);
}

double Comparison::uphill_delta() const {
  double sum = 0.0;
  for (const auto& seg : segments) {
    if (seg.grade > 0.0) sum += seg.delta();
  }
  return sum;
}

double Comparison::downhill_delta() const {
  double sum = 0.0;
  for (const auto& seg : segments) {
    if (seg.grade < 0.0) sum += seg.delta();
  }
  return sum;
}

Comparison RunComparison(const Scenario& scenario) {
  return CompleteComparison(scenario, RunEco(scenario));
}

Comparison CompleteComparison(const Scenario& scenario, EcoRun eco) {
  const PlatoonConfig& config = scenario.platoon;
  Comparison out;
  out.eco = std::move(eco);
  if (!out.eco.completed) {
    throw std::runtime_error("Eco-CACC run did not complete: " + out.eco.message);
  }
  out.eco_fuel = PlanFuel(scenario.fuel_model, out.eco.states, out.eco.controls,
                          scenario.profile, config, scenario.baseline.dt);
  out.baseline_traces = RunScenarioBaseline(scenario);
  for (std::size_t i = 0; i < out.baseline_traces.size(); ++i) {
    out.baseline_fuel.push_back(TrajectoryFuel(scenario.fuel_model, out.baseline_traces[i],
                                               scenario.profile, config.vehicles[i], config));
  }
  out.eco_total = TotalFuel(out.eco_fuel);
  out.baseline_total = TotalFuel(out.baseline_fuel);

  const auto& bp = scenario.profile.breakpoints();
  for (std::size_t j = 0; j < scenario.profile.num_segments(); ++j) {
    SegmentDelta seg;
    seg.start = bp[j];
    seg.end = bp[j + 1];
    seg.grade = scenario.profile.grades()[j];
    seg.baseline_fuel = FuelBetween(out.baseline_fuel, seg.start, seg.end);
    seg.eco_fuel = FuelBetween(out.eco_fuel, seg.start, seg.end);
    out.segments.push_back(seg);
  }
  return out;
}

std::vector<StabilityCase> RunStabilitySweep(const Scenario& scenario) {
  std::vector<int> counts = scenario.stability.vehicle_counts;
  if (counts.empty()) counts.push_back(scenario.platoon.num_vehicles());
  std::vector<double> magnitudes = scenario.stability.magnitudes;
  PerturbationSpec base = scenario.perturbation.value_or(PerturbationSpec{});
  if (magnitudes.empty()) magnitudes.push_back(base.magnitude);

  StabilityOptions options;
  options.solver = scenario.solver;
  options.receding.window_length = scenario.horizon.window_length;
  options.receding.replan_interval = scenario.horizon.replan_interval;

  std::vector<StabilityCase> cases;
  for (int n : counts) {
    PlatoonConfig config = scenario.platoon;
    const VehicleParams lead = config.vehicles.empty() ? VehicleParams{} : config.vehicles.front();
    config.vehicles.resize(static_cast<std::size_t>(n), lead);
    const Vector x0 = EquilibriumStep(config, config.target_speed);
    for (double delta : magnitudes) {
      PerturbationSpec spec = base;
      spec.magnitude = delta;
      StabilityCase c;
      c.num_vehicles = n;
      c.magnitude = delta;
      c.report = RunPerturbation(config, scenario.weights, scenario.profile, x0, spec, options);
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

std::vector<BenchRow> RunBench(const Scenario& scenario) {
  std::vector<BenchRow> rows;
  for (double ds : scenario.bench.step_sizes) {
    const Scenario grid = WithStepSize(scenario, ds);
    for (double window : scenario.bench.windows) {
      RecedingOptions receding;
      receding.window_length = window;
      receding.replan_interval = std::max(scenario.bench.replan_interval, ds);
      const RecedingResult result =
          RecedingHorizonRun(grid.platoon, grid.weights, grid.profile, grid.InitialState(),
                             grid.solver, receding);
      BenchRow row;
      row.ds = ds;
      row.window = window;
      row.executions = static_cast<int>(result.execution_times.size());
      if (row.executions > 0) {
        row.mean_time = std::accumulate(result.execution_times.begin(),
                                        result.execution_times.end(), 0.0) /
                        row.executions;
        row.max_time =
            *std::max_element(result.execution_times.begin(), result.execution_times.end());
      }
      row.completed = result.completed;
      row.converged = result.completed && result.all_converged;
      if (result.completed) {
        row.max_violation = MaxViolation(result.states, result.controls, grid.platoon);
        row.eco_fuel = TotalFuel(PlanFuel(grid.fuel_model, result.states, result.controls,
                                          grid.profile, grid.platoon, grid.baseline.dt));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace ecoplatoon
