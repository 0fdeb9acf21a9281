#include "ecoplatoon/ddp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace ecoplatoon {

void SolverOptions::Validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("solver options: " + msg); };
  if (!(cost_tolerance > 0.0) || !(violation_tolerance > 0.0)) fail("tolerances must be positive");
  if (max_inner_iterations < 1 || max_outer_iterations < 1) fail("iteration caps must be >= 1");
  if (!(regularization_init > 0.0) || !(regularization_factor > 1.0) ||
      !(regularization_max >= regularization_init)) {
    fail("need regularization_init > 0, factor > 1, max >= init");
  }
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) fail("backtrack_factor must be in (0,1)");
  if (max_backtracks < 0) fail("max_backtracks must be non-negative");
  if (!(penalty_init > 0.0) || !(penalty_factor > 1.0)) {
    fail("need penalty_init > 0 and penalty_factor > 1");
  }
}

PlatoonState Trajectory::ToState() const {
  const int n = static_cast<int>(x.front().size() / 2);
  PlatoonState state(n, steps());
  for (int k = 0; k <= steps(); ++k) state.SetStep(k, x[static_cast<std::size_t>(k)]);
  return state;
}

ControlTrajectory Trajectory::ToControls() const {
  const int n = static_cast<int>(x.front().size() / 2);
  ControlTrajectory controls(n, steps());
  for (int k = 0; k < steps(); ++k) controls.accels.col(k) = u[static_cast<std::size_t>(k)];
  return controls;
}

Trajectory RolloutTrajectory(const ControlProblem& problem, const ControlTrajectory& controls) {
  Trajectory traj;
  const int steps = problem.steps();
  traj.x.reserve(static_cast<std::size_t>(steps) + 1);
  traj.u.reserve(static_cast<std::size_t>(steps));
  traj.x.push_back(problem.x0);
  for (int k = 0; k < steps; ++k) {
    traj.u.emplace_back(controls.accels.col(k));
    traj.x.push_back(StepDynamics(traj.x.back(), traj.u.back(), problem.config.ds));
  }
  return traj;
}

Matrix EvaluateConstraints(const ControlProblem& problem, const Trajectory& trajectory) {
  const ConstraintSet set(problem.config);
  const int steps = trajectory.steps();
  Matrix e(steps + 1, set.size());
  for (int k = 0; k < steps; ++k) {
    e.row(k) = set.Evaluate(trajectory.x[static_cast<std::size_t>(k)],
                            trajectory.u[static_cast<std::size_t>(k)])
                   .transpose();
  }
  e.row(steps) =
      set.Evaluate(trajectory.x.back(), Vector::Zero(problem.config.num_vehicles())).transpose();
  return e;
}

namespace {

double MaxViolation(const Matrix& e) { return std::max(0.0, e.maxCoeff()); }

// AL terms for one row with the slack minimized out at the current e:
// s = max(0, -lambda/rho - e). Rows with s > 0 are inactive and contribute
// a constant, so their rho and lambda are zeroed for the derivatives.
struct AlRow {
  Vector rho, lambda, slack;
  Vector active_rho, active_lambda;
};

AlRow RowAt(const ALState& al, int k, const Vector& e) {
  AlRow row;
  row.rho = al.rho.row(k).transpose();
  row.lambda = al.lambda.row(k).transpose();
  row.slack = (row.rho.array() > 0.0)
                  .select((-row.lambda.cwiseQuotient(row.rho) - e).cwiseMax(0.0), 0.0);
  const auto inactive = (row.slack.array() > 0.0);
  row.active_rho = inactive.select(0.0, row.rho);
  row.active_lambda = inactive.select(0.0, row.lambda);
  return row;
}

double AugmentedStage(double base, const ALState& al, int k, const Vector& e) {
  const AlRow row = RowAt(al, k, e);
  return AugmentedRunningCost(base, e, row.rho, row.lambda, row.slack);
}

void AddActiveTerms(StageDerivatives& stage, const ConstraintDerivatives& de, const ALState& al,
                    int k, const Vector& e, bool include_control = true) {
  const AlRow row = RowAt(al, k, e);
  AddAlDerivativeTerms(stage, de, e, row.active_rho, row.active_lambda, row.slack,
                       include_control);
}

double RelativeChange(double before, double after) {
  return std::abs(before - after) / std::max(1.0, std::abs(before));
}

}  // namespace

double AugmentedCost(const ControlProblem& problem, const Trajectory& trajectory,
                     const ALState& al) {
  const ConstraintSet set(problem.config);
  const int steps = trajectory.steps();
  double total = 0.0;
  for (int k = 0; k < steps; ++k) {
    const auto& x = trajectory.x[static_cast<std::size_t>(k)];
    const auto& u = trajectory.u[static_cast<std::size_t>(k)];
    const double base =
        RunningCost(x, u, problem.grades[static_cast<std::size_t>(k)], problem.config,
                    problem.weights)
            .total;
    total += AugmentedStage(base, al, k, set.Evaluate(x, u));
  }
  const Vector zero = Vector::Zero(problem.config.num_vehicles());
  const double terminal =
      TerminalCost(trajectory.x.back(), problem.config, problem.weights, steps);
  total += AugmentedStage(terminal, al, steps, set.Evaluate(trajectory.x.back(), zero));
  return total;
}

BackwardPassResult BackwardPass(const ControlProblem& problem, const Trajectory& trajectory,
                                const ALState& al, const SolverOptions& options,
                                double regularization) {
  const ConstraintSet set(problem.config);
  const int steps = trajectory.steps();
  const int nu = problem.config.control_dim();
  const double ds = problem.config.ds;

  BackwardPassResult result;
  result.laws.resize(static_cast<std::size_t>(steps));
  result.values.resize(static_cast<std::size_t>(steps) + 1);

  {
    const auto& xk = trajectory.x.back();
    const Vector zero = Vector::Zero(nu);
    StageDerivatives terminal =
        TerminalCostDerivatives(xk, problem.config, problem.weights, steps);
    AddActiveTerms(terminal, set.Derivatives(xk, zero), al, steps, set.Evaluate(xk, zero),
                   /*include_control=*/false);
    auto& vk = result.values.back();
    vk.hessian = terminal.lxx;
    vk.gradient = terminal.lx;
    vk.constant = TerminalCost(xk, problem.config, problem.weights, steps);
  }

  const Matrix eye = Matrix::Identity(nu, nu);
  for (int k = steps - 1; k >= 0; --k) {
    const auto uk = static_cast<std::size_t>(k);
    const Vector& x = trajectory.x[uk];
    const Vector& u = trajectory.u[uk];
    const ValueModel& next = result.values[uk + 1];

    StageDerivatives l = RunningCostDerivatives(x, u, problem.grades[uk], problem.config,
                                                problem.weights);
    const Vector e = set.Evaluate(x, u);
    AddActiveTerms(l, set.Derivatives(x, u), al, k, e);
    const DynamicsDerivatives f = DynamicsJacobians(x, u, ds);

    const Matrix vxx_fx = next.hessian * f.fx;
    const Matrix vxx_fu = next.hessian * f.fu;
    const Vector qx = l.lx + f.fx.transpose() * next.gradient;
    const Vector qu = l.lu + f.fu.transpose() * next.gradient;
    Matrix qxx = l.lxx + f.fx.transpose() * vxx_fx;
    Matrix quu = l.luu + f.fu.transpose() * vxx_fu;
    Matrix qux = l.lux + f.fu.transpose() * vxx_fx;
    if (options.second_order_dynamics) {
      qxx += f.ContractXX(next.gradient);
      quu += f.ContractUU(next.gradient);
      qux += f.ContractUX(next.gradient);
    }
    quu = 0.5 * (quu + quu.transpose()).eval();

    Eigen::LLT<Matrix> llt(quu + regularization * eye);
    if (llt.info() != Eigen::Success) {
      result.success = false;
      result.failed_step = k;
      return result;
    }
    FeedbackLaw& law = result.laws[uk];
    law.gain = -llt.solve(qux);
    law.feedforward = -llt.solve(qu);
    const Matrix& h = law.gain;
    const Vector& j = law.feedforward;

    const double base = AugmentedStage(
        RunningCost(x, u, problem.grades[uk], problem.config, problem.weights).total, al, k, e);

    ValueModel& value = result.values[uk];
    value.hessian = qxx + h.transpose() * quu * h + h.transpose() * qux + qux.transpose() * h;
    value.hessian = 0.5 * (value.hessian + value.hessian.transpose()).eval();
    value.gradient = qx + h.transpose() * quu * j + h.transpose() * qu + qux.transpose() * j;
    const double lin = j.dot(qu);
    const double quad = 0.5 * j.dot(quu * j);
    value.constant = quad + lin + base + next.constant;
    result.expected_linear += lin;
    result.expected_quadratic += quad;
  }
  result.success = true;
  return result;
}

Trajectory ForwardPass(const ControlProblem& problem, const Trajectory& previous,
                       const std::vector<FeedbackLaw>& laws, double alpha) {
  const int steps = previous.steps();
  Trajectory next;
  next.x.reserve(previous.x.size());
  next.u.reserve(previous.u.size());
  next.x.push_back(previous.x.front());
  for (int k = 0; k < steps; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const Vector dx = next.x.back() - previous.x[uk];
    next.u.push_back(previous.u[uk] + laws[uk].gain * dx + alpha * laws[uk].feedforward);
    next.x.push_back(StepDynamics(next.x.back(), next.u.back(), problem.config.ds));
  }
  return next;
}

ControlProblem MakeProblem(const PlatoonConfig& config, const CostWeights& weights,
                           const SlopeProfile& profile, const Vector& x0) {
  ControlProblem problem;
  problem.config = config;
  problem.weights = weights;
  const int steps = static_cast<int>(std::lround(profile.total_length() / config.ds));
  problem.config.horizon_steps = steps;
  problem.grades = SampleGrades(profile, 0.0, config.ds, steps);
  problem.x0 = x0;
  return problem;
}

namespace {

struct InnerResult {
  bool converged = false;
  bool stalled = false;
  int iterations = 0;
};

void FillTrueCost(const ControlProblem& problem, const Trajectory& traj, IterationRecord& rec) {
  rec.cost = TrajectoryCost(traj.ToState(), traj.ToControls(), problem.grades, problem.config,
                            problem.weights)
                 .total;
  rec.max_violation = MaxViolation(EvaluateConstraints(problem, traj));
}

// DDP iterations on the augmented cost with fixed AL parameters.
InnerResult InnerLoop(const ControlProblem& problem, const SolverOptions& options,
                      const ALState& al, int outer, Trajectory& traj, double& regularization,
                      std::vector<IterationRecord>& history) {
  InnerResult out;
  double cost = AugmentedCost(problem, traj, al);
  for (int it = 0; it < options.max_inner_iterations; ++it) {
    ++out.iterations;
    BackwardPassResult bp;
    while (true) {
      bp = BackwardPass(problem, traj, al, options, regularization);
      if (bp.success) break;
      regularization *= options.regularization_factor;
      if (regularization > options.regularization_max) {
        out.stalled = true;
        return out;
      }
    }

    // Stationary: nothing left to gain from the local model.
    const double predicted = -bp.ExpectedChange(1.0);
    if (predicted <= options.cost_tolerance * 1e-3 * std::max(1.0, std::abs(cost))) {
      IterationRecord rec;
      rec.outer = outer;
      rec.augmented_cost = cost;
      rec.regularization = regularization;
      rec.expected_decrease = predicted;
      FillTrueCost(problem, traj, rec);
      history.push_back(rec);
      out.converged = true;
      return out;
    }

    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls <= options.max_backtracks; ++ls, alpha *= options.backtrack_factor) {
      Trajectory candidate;
      try {
        candidate = ForwardPass(problem, traj, bp.laws, alpha);
      } catch (const IntegrationError&) {
        continue;
      }
      const double new_cost = AugmentedCost(problem, candidate, al);
      const double expected = -bp.ExpectedChange(alpha);
      const double actual = cost - new_cost;
      if (std::isfinite(new_cost) && actual > 0.0 &&
          actual >= options.armijo_fraction * expected) {
        IterationRecord rec;
        rec.outer = outer;
        rec.augmented_cost = new_cost;
        rec.step_length = alpha;
        rec.regularization = regularization;
        rec.expected_decrease = expected;
        rec.actual_decrease = actual;
        FillTrueCost(problem, candidate, rec);
        history.push_back(rec);
        const double change = RelativeChange(cost, new_cost);
        traj = std::move(candidate);
        cost = new_cost;
        accepted = true;
        // A short backtracked step says little about stationarity.
        if (change < options.cost_tolerance && alpha == 1.0) out.converged = true;
        break;
      }
    }
    if (!accepted) {
      regularization *= options.regularization_factor;
      if (regularization > options.regularization_max) {
        out.stalled = true;
        return out;
      }
      continue;
    }
    regularization = std::max(options.regularization_init,
                              regularization / options.regularization_factor);
    if (out.converged) return out;
  }
  return out;
}

}  // namespace

SolveReport Solve(const ControlProblem& problem, const SolverOptions& options,
                  const WarmStart* warm_start) {
  const auto start = std::chrono::steady_clock::now();
  options.Validate();
  problem.config.Validate();
  problem.weights.Validate();
  const int steps = problem.steps();
  if (steps < 1) throw ConfigError("control problem needs at least one step");
  const int nu = problem.config.control_dim();
  if (problem.x0.size() != problem.config.state_dim()) {
    throw ConfigError("initial state dimension does not match the platoon size");
  }
  for (int i = 0; i < nu; ++i) {
    if (!(problem.x0[SlownessIndex(i)] > 0.0)) {
      throw DomainError("initial slowness must be positive");
    }
  }

  SolveReport report;
  const ConstraintSet set(problem.config);

  Trajectory traj;
  bool seeded = false;
  if (warm_start != nullptr && warm_start->controls.num_steps() == steps) {
    try {
      traj = RolloutTrajectory(problem, warm_start->controls);
      seeded = true;
    } catch (const IntegrationError&) {
      // A shifted guess can overshoot from a new start state; fall back.
    }
  }
  if (!seeded) traj = RolloutTrajectory(problem, ControlTrajectory(nu, steps));

  ALState al(steps + 1, set.size(), options.penalty_init);
  if (warm_start != nullptr && warm_start->al && warm_start->al->rows() == steps + 1) {
    al = *warm_start->al;
  }
  Matrix e = EvaluateConstraints(problem, traj);
  al = UpdateSlack(al, e);

  double regularization = options.regularization_init;
  for (int outer = 0; outer < options.max_outer_iterations; ++outer) {
    ++report.outer_iterations;
    const InnerResult inner =
        InnerLoop(problem, options, al, outer, traj, regularization, report.iterations);
    report.inner_iterations += inner.iterations;
    e = EvaluateConstraints(problem, traj);
    report.max_violation = MaxViolation(e);
    if (inner.converged && report.max_violation <= options.violation_tolerance) {
      report.converged = true;
      break;
    }
    if (inner.stalled) {
      report.message = "regularization exceeded its cap";
    }
    al = UpdateSlack(al, e);
    al = UpdateMultipliers(al, e);
    al = EscalatePenalty(al, e, options.penalty_factor, options.violation_tolerance);
    al = UpdateSlack(al, e);
    regularization = options.regularization_init;
  }

  report.states = traj.ToState();
  report.controls = traj.ToControls();
  report.cost = TrajectoryCost(report.states, report.controls, problem.grades, problem.config,
                               problem.weights);
  report.al = al;
  if (report.converged) {
    report.message = "converged";
  } else if (report.message.empty()) {
    std::ostringstream msg;
    msg << "not converged after " << report.outer_iterations << " outer iterations (max violation "
        << report.max_violation << ")";
    report.message = msg.str();
  }
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

RecedingResult RecedingHorizonRun(const PlatoonConfig& config, const CostWeights& weights,
                                  const SlopeProfile& profile, const Vector& x0,
                                  const SolverOptions& options,
                                  const RecedingOptions& receding) {
  if (!(receding.window_length >= receding.replan_interval) ||
      !(receding.replan_interval > 0.0)) {
    throw ConfigError("receding horizon needs window >= replan interval > 0");
  }
  const double ds = config.ds;
  const int total = static_cast<int>(std::lround(profile.total_length() / ds));
  const int window = std::max(1, static_cast<int>(std::lround(receding.window_length / ds)));
  const int replan = std::max(1, static_cast<int>(std::lround(receding.replan_interval / ds)));
  const int nu = config.control_dim();

  RecedingResult result;
  result.states = PlatoonState(nu, total);
  result.controls = ControlTrajectory(nu, total);
  Vector x = x0;
  result.states.SetStep(0, x);

  std::optional<WarmStart> warm;
  int pos = 0;
  while (pos < total) {
    if (receding.on_replan) {
      receding.on_replan(pos * ds, x);
      result.states.SetStep(pos, x);
    }
    const int steps = std::min(window, total - pos);
    ControlProblem problem;
    problem.config = config;
    problem.config.horizon_steps = steps;
    problem.weights = weights;
    problem.grades = SampleGrades(profile, pos * ds, ds, steps);
    problem.x0 = x;
    const double offset = x[TimeIndex(0)];
    for (int i = 0; i < nu; ++i) problem.x0[TimeIndex(i)] -= offset;

    SolveReport report;
    try {
      report = Solve(problem, options, warm ? &*warm : nullptr);
    } catch (const std::exception& ex) {
      std::ostringstream msg;
      msg << "window solve at s = " << pos * ds << " m failed: " << ex.what();
      result.message = msg.str();
      result.executed_steps = pos;
      return result;
    }
    result.execution_times.push_back(report.wall_time);
    result.execution_iterations.push_back(report.inner_iterations);
    result.all_converged = result.all_converged && report.converged;

    const int execute = std::min(replan, steps);
    for (int k = 0; k < execute; ++k) {
      const Vector u = report.controls.accels.col(k);
      result.controls.accels.col(pos + k) = u;
      x = StepDynamics(x, u, ds);
      result.states.SetStep(pos + k + 1, x);
    }
    pos += execute;

    // Shift the solution forward to seed the next window.
    const int next_steps = std::min(window, total - pos);
    if (next_steps > 0) {
      WarmStart next;
      next.controls = ControlTrajectory(nu, next_steps);
      ALState al(next_steps + 1, report.al.rho.cols(), options.penalty_init);
      for (int k = 0; k < next_steps; ++k) {
        const int src = std::min(k + execute, steps - 1);
        next.controls.accels.col(k) = report.controls.accels.col(src);
        al.rho.row(k) = report.al.rho.row(src);
        al.lambda.row(k) = report.al.lambda.row(src);
      }
      next.al = al;
      warm = std::move(next);
    }
  }
  result.executed_steps = total;
  result.completed = true;
  result.message = result.all_converged ? "completed" : "completed with unconverged windows";
  return result;
}

}  // namespace ecoplatoon
