#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ecoplatoon/common.hpp"
#include "ecoplatoon/cost_model.hpp"
#include "ecoplatoon/ddp_solver.hpp"
#include "ecoplatoon/platoon_model.hpp"
#include "ecoplatoon/terrain.hpp"

namespace ecoplatoon {

enum class PerturbationShape { kStep, kPulse };

PerturbationShape ParsePerturbationShape(std::string_view name);
std::string_view PerturbationShapeName(PerturbationShape shape);

// Leader speed disturbance. A step changes the leader's start speed by
// `magnitude`; a pulse adds `magnitude` to the leader's measured speed at
// `onset_position` and removes it again `duration` metres later, inside a
// receding-horizon run.
struct PerturbationSpec {
  double magnitude = 0.5;        // m/s
  PerturbationShape shape = PerturbationShape::kStep;
  double onset_position = 0.0;   // m
  double duration = 20.0;        // m, pulse only

  void Validate(double route_length) const;
};

struct StabilityReport {
  // Entry j-1 holds the ratio for vehicle j (1-based j = 2..N); NaN marks a
  // ratio whose denominator vanished.
  std::vector<double> gamma;            // ||da_j|| / ||da_{j-1}||
  std::vector<double> gamma_vs_leader;  // ||da_j|| / ||da_1||
  std::vector<double> deviation_norms;  // ||da_j||, j = 1..N
  Matrix deviations;                    // N x K equivalent-traction deviations
  bool stable = true;
  bool nominal_converged = false;
  bool perturbed_converged = false;

  double max_gamma() const;  // over defined ratios, 0 if none
};

// Signed gap error t_1 - t_i - (i-1) h for every vehicle and step (row 0 is
// the leader and stays zero).
Matrix FollowingErrors(const PlatoonState& plan, const PlatoonConfig& config);

// Equivalent traction acceleration of every vehicle at every step.
Matrix EquivalentTractionSeries(const PlatoonState& plan, const ControlTrajectory& controls,
                                const std::vector<double>& grades, const PlatoonConfig& config);

// Discrete L2 norm scaled by sqrt(ds).
double SpatialL2Norm(const Eigen::Ref<const Vector>& series, double ds);

// Builds the report from two runs over the same grid.
StabilityReport CompareRuns(const PlatoonState& nominal_states,
                            const ControlTrajectory& nominal_controls,
                            const PlatoonState& perturbed_states,
                            const ControlTrajectory& perturbed_controls,
                            const std::vector<double>& grades, const PlatoonConfig& config);

struct StabilityOptions {
  SolverOptions solver;
  RecedingOptions receding;  // used by pulses; on_replan is overwritten
};

// Solves the nominal and the perturbed problem and compares their
// equivalent-traction signals. Throws StallError / IntegrationError /
// std::runtime_error with diagnostics if a solve cannot produce a trajectory.
StabilityReport RunPerturbation(const PlatoonConfig& config, const CostWeights& weights,
                                const SlopeProfile& profile, const Vector& x0,
                                const PerturbationSpec& spec, const StabilityOptions& options);

}  // namespace ecoplatoon
