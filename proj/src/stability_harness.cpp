#include "ecoplatoon/stability_harness.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ecoplatoon/fuel_eval.hpp"

namespace ecoplatoon {

PerturbationShape ParsePerturbationShape(std::string_view name) {
  if (name == "step") return PerturbationShape::kStep;
  if (name == "pulse") return PerturbationShape::kPulse;
  throw ConfigError("unknown perturbation shape \"" + std::string(name) +
                    "\" (expected step or pulse)");
}

std::string_view PerturbationShapeName(PerturbationShape shape) {
  return shape == PerturbationShape::kStep ? "step" : "pulse";
}

void PerturbationSpec::Validate(double route_length) const {
  if (!(std::isfinite(magnitude) && magnitude != 0.0)) {
    throw ConfigError("perturbation magnitude must be finite and non-zero");
  }
  if (!(onset_position >= 0.0 && onset_position < route_length)) {
    throw ConfigError("perturbation onset must lie inside the route");
  }
  if (shape == PerturbationShape::kPulse && !(duration > 0.0)) {
    throw ConfigError("pulse duration must be positive");
  }
}

double StabilityReport::max_gamma() const {
  double best = 0.0;
  for (double g : gamma) {
    if (std::isfinite(g)) best = std::max(best, g);
  }
  return best;
}

Matrix FollowingErrors(const PlatoonState& plan, const PlatoonConfig& config) {
  const int n = plan.num_vehicles();
  Matrix errors = Matrix::Zero(n, plan.num_steps() + 1);
  for (int i = 1; i < n; ++i) {
    errors.row(i) = (plan.arrival_times.row(0) - plan.arrival_times.row(i)).array() -
                    i * config.headway;
  }
  return errors;
}

Matrix EquivalentTractionSeries(const PlatoonState& plan, const ControlTrajectory& controls,
                                const std::vector<double>& grades, const PlatoonConfig& config) {
  const int n = plan.num_vehicles();
  const int steps = controls.num_steps();
  Matrix out(n, steps);
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < n; ++i) {
      out(i, k) = EquivalentTractionAccel(controls.accels(i, k), 1.0 / plan.slownesses(i, k),
                                          grades[static_cast<std::size_t>(k)],
                                          config.vehicles[static_cast<std::size_t>(i)], config);
    }
  }
  return out;
}

double SpatialL2Norm(const Eigen::Ref<const Vector>& series, double ds) {
  return std::sqrt(ds) * series.norm();
}

StabilityReport CompareRuns(const PlatoonState& nominal_states,
                            const ControlTrajectory& nominal_controls,
                            const PlatoonState& perturbed_states,
                            const ControlTrajectory& perturbed_controls,
                            const std::vector<double>& grades, const PlatoonConfig& config) {
  const int n = config.num_vehicles();
  StabilityReport report;
  report.deviations =
      EquivalentTractionSeries(perturbed_states, perturbed_controls, grades, config) -
      EquivalentTractionSeries(nominal_states, nominal_controls, grades, config);
  for (int i = 0; i < n; ++i) {
    report.deviation_norms.push_back(SpatialL2Norm(report.deviations.row(i).transpose(), config.ds));
  }
  // Ratios below this floor are numerically meaningless.
  const double floor = 1e-12;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int j = 1; j < n; ++j) {
    const double num = report.deviation_norms[static_cast<std::size_t>(j)];
    const double prev = report.deviation_norms[static_cast<std::size_t>(j - 1)];
    const double lead = report.deviation_norms.front();
    report.gamma.push_back(prev > floor ? num / prev : nan);
    report.gamma_vs_leader.push_back(lead > floor ? num / lead : nan);
  }
  report.stable = report.max_gamma() <= 1.0 + 1e-6;
  return report;
}

namespace {

struct Run {
  PlatoonState states;
  ControlTrajectory controls;
  bool converged = false;
};

Run OneShot(const ControlProblem& problem, const SolverOptions& options, const char* label) {
  SolveReport rep;
  try {
    rep = Solve(problem, options);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(label) + " solve failed: " + e.what());
  }
  return {rep.states, rep.controls, rep.converged};
}

Run Receding(const PlatoonConfig& config, const CostWeights& weights, const SlopeProfile& profile,
             const Vector& x0, const SolverOptions& options, RecedingOptions receding,
             std::function<void(double, Vector&)> hook, const char* label) {
  receding.on_replan = std::move(hook);
  RecedingResult res = RecedingHorizonRun(config, weights, profile, x0, options, receding);
  if (!res.completed) {
    throw std::runtime_error(std::string(label) + " receding-horizon run failed: " + res.message);
  }
  return {res.states, res.controls, res.all_converged};
}

// Adds dv to the leader's speed held in a state vector.
void BumpLeader(Vector& x, double dv) {
  const double v = 1.0 / x[SlownessIndex(0)] + dv;
  x[SlownessIndex(0)] = Slowness(v);
}

}  // namespace

StabilityReport RunPerturbation(const PlatoonConfig& config, const CostWeights& weights,
                                const SlopeProfile& profile, const Vector& x0,
                                const PerturbationSpec& spec, const StabilityOptions& options) {
  config.Validate();
  if (config.num_vehicles() < 2) throw ConfigError("stability runs need at least two vehicles");
  spec.Validate(profile.total_length());

  const ControlProblem nominal_problem = MakeProblem(config, weights, profile, x0);
  Run nominal;
  Run perturbed;
  if (spec.shape == PerturbationShape::kStep && spec.onset_position == 0.0) {
    nominal = OneShot(nominal_problem, options.solver, "nominal");
    ControlProblem shifted = nominal_problem;
    BumpLeader(shifted.x0, spec.magnitude);
    perturbed = OneShot(shifted, options.solver, "perturbed");
  } else {
    const double ds = config.ds;
    const long onset = std::lround(spec.onset_position / ds);
    const long release = spec.shape == PerturbationShape::kPulse
                             ? std::lround((spec.onset_position + spec.duration) / ds)
                             : -1;
    nominal = Receding(config, weights, profile, x0, options.solver, options.receding, nullptr,
                       "nominal");
    // Each bump fires once, at the first replan at or after its position.
    bool bumped = false;
    bool released = false;
    auto hook = [&, onset, release](double s, Vector& x) {
      const long k = std::lround(s / ds);
      if (!bumped && k >= onset) {
        BumpLeader(x, spec.magnitude);
        bumped = true;
      }
      if (release >= 0 && bumped && !released && k >= release) {
        BumpLeader(x, -spec.magnitude);
        released = true;
      }
    };
    perturbed = Receding(config, weights, profile, x0, options.solver, options.receding, hook,
                         "perturbed");
  }

  StabilityReport report = CompareRuns(nominal.states, nominal.controls, perturbed.states,
                                       perturbed.controls, nominal_problem.grades, config);
  report.nominal_converged = nominal.converged;
  report.perturbed_converged = perturbed.converged;
  return report;
}

}  // namespace ecoplatoon
