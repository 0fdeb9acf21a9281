#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ecoplatoon/common.hpp"
#include "ecoplatoon/constraints.hpp"
#include "ecoplatoon/cost_model.hpp"
#include "ecoplatoon/platoon_model.hpp"
#include "ecoplatoon/terrain.hpp"

namespace ecoplatoon {

struct SolverOptions {
  double cost_tolerance = 1e-6;       // relative change of the augmented cost
  double violation_tolerance = 1e-3;  // max(0, e) at convergence
  int max_inner_iterations = 50;
  int max_outer_iterations = 8;

  // Levenberg-Marquardt term added to Q_uu.
  double regularization_init = 1e-6;
  double regularization_factor = 10.0;
  double regularization_max = 1e6;

  // false drops the second-order dynamics terms (iLQR).
  bool second_order_dynamics = true;

  double backtrack_factor = 0.5;
  int max_backtracks = 14;
  double armijo_fraction = 1e-4;

  double penalty_init = 10.0;
  double penalty_factor = 10.0;

  void Validate() const;
};

// One optimal-control instance: a platoon over `grades.size()` spatial steps
// starting from the full per-vehicle state x0.
struct ControlProblem {
  PlatoonConfig config;  // horizon_steps is ignored in favor of grades.size()
  CostWeights weights;
  std::vector<double> grades;
  Vector x0;

  int steps() const { return static_cast<int>(grades.size()); }
};

struct Trajectory {
  std::vector<Vector> x;  // K+1 states
  std::vector<Vector> u;  // K controls

  int steps() const { return static_cast<int>(u.size()); }
  PlatoonState ToState() const;
  ControlTrajectory ToControls() const;
};

struct ValueModel {
  Matrix hessian;  // A_k
  Vector gradient; // b_k
  double constant = 0.0;
};

struct FeedbackLaw {
  Matrix gain;         // h_k, N x 2N
  Vector feedforward;  // j_k, N
};

struct BackwardPassResult {
  bool success = false;
  int failed_step = -1;
  std::vector<FeedbackLaw> laws;
  std::vector<ValueModel> values;  // K+1 entries
  // Predicted change of the cost for step length alpha:
  // alpha * linear + alpha^2 * quadratic.
  double expected_linear = 0.0;
  double expected_quadratic = 0.0;

  double ExpectedChange(double alpha) const {
    return alpha * expected_linear + alpha * alpha * expected_quadratic;
  }
};

Trajectory RolloutTrajectory(const ControlProblem& problem, const ControlTrajectory& controls);

// Constraint values for every step; the terminal row uses zero control.
Matrix EvaluateConstraints(const ControlProblem& problem, const Trajectory& trajectory);

double AugmentedCost(const ControlProblem& problem, const Trajectory& trajectory,
                     const ALState& al);

BackwardPassResult BackwardPass(const ControlProblem& problem, const Trajectory& trajectory,
                                const ALState& al, const SolverOptions& options,
                                double regularization);

// U_new = U + h (X_new - X) + alpha j, X_new rolled out from X_0.
// Throws IntegrationError if the rollout leaves the positive-slowness region.
Trajectory ForwardPass(const ControlProblem& problem, const Trajectory& previous,
                       const std::vector<FeedbackLaw>& laws, double alpha);

struct IterationRecord {
  int outer = 0;
  double augmented_cost = 0.0;
  double cost = 0.0;
  double max_violation = 0.0;
  double step_length = 0.0;
  double regularization = 0.0;
  double expected_decrease = 0.0;
  double actual_decrease = 0.0;
};

struct SolveReport {
  PlatoonState states;
  ControlTrajectory controls;
  CostBreakdown cost;
  std::vector<IterationRecord> iterations;
  ALState al;
  double wall_time = 0.0;  // s
  double max_violation = 0.0;
  int inner_iterations = 0;
  int outer_iterations = 0;
  bool converged = false;
  std::string message;
};

struct WarmStart {
  ControlTrajectory controls;
  std::optional<ALState> al;
};

SolveReport Solve(const ControlProblem& problem, const SolverOptions& options,
                  const WarmStart* warm_start = nullptr);

// Builds the one-shot problem over the whole profile.
ControlProblem MakeProblem(const PlatoonConfig& config, const CostWeights& weights,
                           const SlopeProfile& profile, const Vector& x0);

struct RecedingOptions {
  double window_length = 40.0;    // m
  double replan_interval = 1.0;   // m
  // Called with the route position and the measured (absolute-time) state
  // before every window solve; may modify the state.
  std::function<void(double, Vector&)> on_replan;
};

struct RecedingResult {
  PlatoonState states;
  ControlTrajectory controls;
  std::vector<double> execution_times;  // s, one per window solve
  std::vector<int> execution_iterations;
  int executed_steps = 0;
  bool completed = false;
  bool all_converged = true;
  std::string message;
};

// Solves over a sliding spatial window, executes the first replan interval,
// and stitches the executed segments into one route-long trajectory.
// Window states are re-anchored so that the leader's time is zero at the
// start of each window.
RecedingResult RecedingHorizonRun(const PlatoonConfig& config, const CostWeights& weights,
                                  const SlopeProfile& profile, const Vector& x0,
                                  const SolverOptions& options,
                                  const RecedingOptions& receding);

}  // namespace ecoplatoon
