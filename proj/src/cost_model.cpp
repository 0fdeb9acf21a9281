#include "ecoplatoon/cost_model.hpp"

#include <cmath>

namespace ecoplatoon {

void CostWeights::Validate() const {
  if (q1 < 0.0 || q2 < 0.0 || q3 < 0.0 || r1 < 0.0) {
    throw ConfigError("cost weights must be non-negative");
  }
}

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& other) {
  cacc += other.cacc;
  ecology += other.ecology;
  effort += other.effort;
  terminal += other.terminal;
  total += other.total;
  return *this;
}

namespace {

double GapError(const Eigen::Ref<const Vector>& x, int vehicle, double headway) {
  return x[TimeIndex(0)] - x[TimeIndex(vehicle)] - vehicle * headway;
}

// Grade plus rolling resistance force per unit speed, m g (sin θ + μ cos θ).
double ResistanceForce(const VehicleParams& params, double theta, const PlatoonConfig& config) {
  return params.mass * config.gravity * (std::sin(theta) + config.rolling_coeff * std::cos(theta));
}

}  // namespace

CostBreakdown RunningCost(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
                          double theta, const PlatoonConfig& config, const CostWeights& weights) {
  const int n = config.num_vehicles();
  CostBreakdown c;
  for (int i = 1; i < n; ++i) {
    const double e = GapError(x, i, config.headway);
    c.cacc += weights.q1 * e * e;
  }
  for (int i = 0; i < n; ++i) {
    const auto& params = config.vehicles[static_cast<std::size_t>(i)];
    const double v = 1.0 / x[SlownessIndex(i)];
    const double a = u[i];
    const double power = params.mass * a * v + ResistanceForce(params, theta, config) * v +
                         config.drag_coeff * v * v * v;
    c.ecology += weights.q2 * power;
    c.effort += weights.r1 * a * a;
  }
  c.total = c.cacc + c.ecology + c.effort;
  return c;
}

double TerminalTarget(int vehicle, const PlatoonConfig& config, int horizon_steps) {
  return horizon_steps * config.ds / config.target_speed - vehicle * config.headway;
}

double TerminalCost(const Eigen::Ref<const Vector>& x_final, const PlatoonConfig& config,
                    const CostWeights& weights, int horizon_steps) {
  double cost = 0.0;
  for (int i = 0; i < config.num_vehicles(); ++i) {
    const double r = x_final[TimeIndex(i)] - TerminalTarget(i, config, horizon_steps);
    cost += weights.q3 * r * r;
  }
  return cost;
}

StageDerivatives RunningCostDerivatives(const Eigen::Ref<const Vector>& x,
                                        const Eigen::Ref<const Vector>& u, double theta,
                                        const PlatoonConfig& config,
                                        const CostWeights& weights) {
  const int n = config.num_vehicles();
  StageDerivatives d;
  d.lx = Vector::Zero(2 * n);
  d.lu = Vector::Zero(n);
  d.lxx = Matrix::Zero(2 * n, 2 * n);
  d.luu = Matrix::Zero(n, n);
  d.lux = Matrix::Zero(n, 2 * n);

  const int t1 = TimeIndex(0);
  for (int i = 1; i < n; ++i) {
    const int ti = TimeIndex(i);
    const double g = 2.0 * weights.q1 * GapError(x, i, config.headway);
    d.lx[t1] += g;
    d.lx[ti] -= g;
    const double h = 2.0 * weights.q1;
    d.lxx(t1, t1) += h;
    d.lxx(ti, ti) += h;
    d.lxx(t1, ti) -= h;
    d.lxx(ti, t1) -= h;
  }

  // Ecology term in slowness: q2 (m a + F) / pi + q2 xi / pi^3.
  for (int i = 0; i < n; ++i) {
    const auto& params = config.vehicles[static_cast<std::size_t>(i)];
    const int p = SlownessIndex(i);
    const double pi = x[p];
    const double a = u[i];
    const double force = params.mass * a + ResistanceForce(params, theta, config);
    const double xi = config.drag_coeff;
    const double pi2 = pi * pi;
    const double pi3 = pi2 * pi;
    d.lx[p] += weights.q2 * (-force / pi2 - 3.0 * xi / (pi2 * pi2));
    d.lxx(p, p) += weights.q2 * (2.0 * force / pi3 + 12.0 * xi / (pi3 * pi2));
    d.lu[i] += weights.q2 * params.mass / pi + 2.0 * weights.r1 * a;
    d.luu(i, i) += 2.0 * weights.r1;
    d.lux(i, p) += -weights.q2 * params.mass / pi2;
  }
  return d;
}

StageDerivatives TerminalCostDerivatives(const Eigen::Ref<const Vector>& x_final,
                                         const PlatoonConfig& config, const CostWeights& weights,
                                         int horizon_steps) {
  const int n = config.num_vehicles();
  StageDerivatives d;
  d.lx = Vector::Zero(2 * n);
  d.lxx = Matrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    const int ti = TimeIndex(i);
    d.lx[ti] = 2.0 * weights.q3 * (x_final[ti] - TerminalTarget(i, config, horizon_steps));
    d.lxx(ti, ti) = 2.0 * weights.q3;
  }
  return d;
}

CostBreakdown TrajectoryCost(const PlatoonState& state, const ControlTrajectory& controls,
                             const std::vector<double>& grades, const PlatoonConfig& config,
                             const CostWeights& weights) {
  const int steps = controls.num_steps();
  CostBreakdown total;
  for (int k = 0; k < steps; ++k) {
    total += RunningCost(state.StepVector(k), controls.accels.col(k),
                         grades[static_cast<std::size_t>(k)], config, weights);
  }
  total.terminal = TerminalCost(state.StepVector(steps), config, weights, steps);
  total.total += total.terminal;
  return total;
}

}  // namespace ecoplatoon
