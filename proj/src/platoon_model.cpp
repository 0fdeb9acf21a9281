#include "ecoplatoon/platoon_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ecoplatoon {

void PlatoonConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("platoon config: " + msg); };
  if (num_vehicles() < 2) fail("need at least two vehicles");
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const auto& v = vehicles[i];
    if (!(v.mass > 0.0)) fail("vehicle " + std::to_string(i + 1) + " mass must be positive");
    if (!(v.a_min < 0.0 && v.a_max > 0.0)) {
      fail("vehicle " + std::to_string(i + 1) + " needs a_min < 0 < a_max");
    }
  }
  if (!(headway > 0.0)) fail("headway must be positive");
  if (!(target_speed > 0.0 && target_speed <= speed_limit)) {
    fail("need 0 < target_speed <= speed_limit");
  }
  if (!(speed_floor > 0.0 && speed_floor < target_speed)) {
    fail("need 0 < speed_floor < target_speed");
  }
  if (!(ds > 0.0)) fail("ds must be positive");
  if (horizon_steps < 1) fail("horizon_steps must be at least 1");
  if (!(gravity > 0.0) || rolling_coeff < 0.0 || drag_coeff < 0.0) {
    fail("gravity must be positive and resistance coefficients non-negative");
  }
}

PlatoonConfig PlatoonConfig::Uniform(int num_vehicles, double target_speed, double ds,
                                     int horizon_steps) {
  PlatoonConfig config;
  config.vehicles.assign(static_cast<std::size_t>(num_vehicles), VehicleParams{});
  config.target_speed = target_speed;
  config.ds = ds;
  config.horizon_steps = horizon_steps;
  return config;
}

PlatoonState::PlatoonState(int num_vehicles, int num_steps)
    : arrival_times(Matrix::Zero(num_vehicles, num_steps + 1)),
      slownesses(Matrix::Zero(num_vehicles, num_steps + 1)) {}

Vector PlatoonState::StepVector(int k) const {
  const int n = num_vehicles();
  Vector x(2 * n);
  for (int i = 0; i < n; ++i) {
    x[TimeIndex(i)] = arrival_times(i, k);
    x[SlownessIndex(i)] = slownesses(i, k);
  }
  return x;
}

void PlatoonState::SetStep(int k, const Eigen::Ref<const Vector>& x) {
  for (int i = 0; i < num_vehicles(); ++i) {
    arrival_times(i, k) = x[TimeIndex(i)];
    slownesses(i, k) = x[SlownessIndex(i)];
  }
}

double Slowness(double speed) {
  if (!(speed > 0.0)) {
    std::ostringstream msg;
    msg << "slowness is undefined for speed " << speed << " m/s";
    throw DomainError(msg.str());
  }
  return 1.0 / speed;
}

Vector EquilibriumStep(const PlatoonConfig& config, double speed, double leader_time) {
  const int n = config.num_vehicles();
  Vector x(2 * n);
  for (int i = 0; i < n; ++i) {
    x[TimeIndex(i)] = leader_time - i * config.headway;
    x[SlownessIndex(i)] = Slowness(speed);
  }
  return x;
}

Vector DiffState(const Eigen::Ref<const Vector>& x, const PlatoonConfig& config) {
  const int n = static_cast<int>(x.size() / 2);
  Vector out(2 * (n - 1));
  for (int i = 1; i < n; ++i) {
    out[2 * (i - 1)] = x[TimeIndex(0)] - x[TimeIndex(i)] - i * config.headway;
    out[2 * (i - 1) + 1] = x[SlownessIndex(0)] - x[SlownessIndex(i)];
  }
  return out;
}

Vector DiffState(const PlatoonState& state, int k, const PlatoonConfig& config) {
  if (k < 0 || k > state.num_steps()) throw DomainError("step index out of range");
  return DiffState(state.StepVector(k), config);
}

Vector StepDynamics(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
                    double ds) {
  const int n = static_cast<int>(u.size());
  Vector next(2 * n);
  for (int i = 0; i < n; ++i) {
    const double t = x[TimeIndex(i)];
    const double pi = x[SlownessIndex(i)];
    const double pi_next = pi - u[i] * pi * pi * pi * ds;
    if (!(pi_next > 0.0) || !std::isfinite(pi_next)) {
      std::ostringstream msg;
      msg << "vehicle " << i + 1 << ": slowness became " << pi_next
          << " (speed diverged within one step)";
      throw IntegrationError(msg.str());
    }
    next[TimeIndex(i)] = t + pi * ds;
    next[SlownessIndex(i)] = pi_next;
  }
  return next;
}

DynamicsDerivatives DynamicsJacobians(const Eigen::Ref<const Vector>& x,
                                      const Eigen::Ref<const Vector>& u, double ds) {
  const int n = static_cast<int>(u.size());
  DynamicsDerivatives d;
  d.fx = Matrix::Identity(2 * n, 2 * n);
  d.fu = Matrix::Zero(2 * n, n);
  d.d2pi_dpi2.resize(n);
  d.d2pi_dpi_da.resize(n);
  for (int i = 0; i < n; ++i) {
    const double pi = x[SlownessIndex(i)];
    const double a = u[i];
    d.fx(TimeIndex(i), SlownessIndex(i)) = ds;
    d.fx(SlownessIndex(i), SlownessIndex(i)) = 1.0 - 3.0 * a * pi * pi * ds;
    d.fu(SlownessIndex(i), i) = -pi * pi * pi * ds;
    d.d2pi_dpi2[i] = -6.0 * a * pi * ds;
    d.d2pi_dpi_da[i] = -3.0 * pi * pi * ds;
  }
  return d;
}

Matrix DynamicsDerivatives::ContractXX(const Eigen::Ref<const Vector>& b) const {
  const auto n = d2pi_dpi2.size();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int p = SlownessIndex(static_cast<int>(i));
    out(p, p) = b[p] * d2pi_dpi2[i];
  }
  return out;
}

Matrix DynamicsDerivatives::ContractUX(const Eigen::Ref<const Vector>& b) const {
  const auto n = d2pi_dpi2.size();
  Matrix out = Matrix::Zero(n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int p = SlownessIndex(static_cast<int>(i));
    out(i, p) = b[p] * d2pi_dpi_da[i];
  }
  return out;
}

Matrix DynamicsDerivatives::ContractUU(const Eigen::Ref<const Vector>& b) const {
  const auto n = d2pi_dpi2.size();
  (void)b;
  return Matrix::Zero(n, n);
}

Matrix DynamicsDerivatives::ComponentHessian(int j) const {
  const auto n = static_cast<int>(d2pi_dpi2.size());
  Matrix h = Matrix::Zero(3 * n, 3 * n);
  if (j % 2 == 1) {
    const int i = j / 2;
    const int p = SlownessIndex(i);
    const int a = 2 * n + i;
    h(p, p) = d2pi_dpi2[i];
    h(p, a) = h(a, p) = d2pi_dpi_da[i];
  }
  return h;
}

PlatoonState Rollout(const Eigen::Ref<const Vector>& x0, const ControlTrajectory& controls,
                     double ds) {
  const int n = static_cast<int>(x0.size() / 2);
  const int steps = controls.num_steps();
  PlatoonState state(n, steps);
  Vector x = x0;
  state.SetStep(0, x);
  for (int k = 0; k < steps; ++k) {
    x = StepDynamics(x, controls.accels.col(k), ds);
    state.SetStep(k + 1, x);
  }
  return state;
}

namespace {

TimeTrace ResimulateVehicle(int vehicle, const PlatoonState& plan,
                            const ControlTrajectory& controls, double ds, double dt) {
  const int steps = controls.num_steps();
  const double end = steps * ds;
  TimeTrace trace;
  double t = plan.arrival_times(vehicle, 0);
  double s = 0.0;
  double v = 1.0 / plan.slownesses(vehicle, 0);
  int cell = 0;

  auto record = [&](double a) {
    trace.time.push_back(t);
    trace.position.push_back(s);
    trace.speed.push_back(v);
    trace.accel.push_back(a);
  };
  auto stall = [&] {
    std::ostringstream msg;
    msg << "vehicle " << vehicle + 1 << " stalls at s = " << s << " m (t = " << t << " s)";
    throw StallError(msg.str());
  };

  record(steps > 0 ? controls.accels(vehicle, 0) : 0.0);
  while (cell < steps) {
    double remaining = dt;
    while (remaining > 0.0 && cell < steps) {
      const double a = controls.accels(vehicle, cell);
      const double to_boundary = (cell + 1) * ds - s;
      const double disc = v * v + 2.0 * a * to_boundary;
      double tau_cross = std::numeric_limits<double>::infinity();
      if (disc > 0.0) tau_cross = 2.0 * to_boundary / (v + std::sqrt(disc));
      if (tau_cross <= remaining) {
        t += tau_cross;
        s = (cell + 1) * ds;
        v = std::sqrt(disc);
        remaining -= tau_cross;
        ++cell;
        record(cell < steps ? controls.accels(vehicle, cell) : 0.0);
      } else {
        if (a < 0.0 && v + a * remaining <= 0.0) stall();
        s += v * remaining + 0.5 * a * remaining * remaining;
        v += a * remaining;
        t += remaining;
        remaining = 0.0;
        record(a);
      }
    }
  }
  trace.position.back() = end;
  return trace;
}

}  // namespace

std::vector<TimeTrace> ResimulateTimeDomain(const PlatoonState& plan,
                                            const ControlTrajectory& controls, double ds,
                                            double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  std::vector<TimeTrace> traces;
  for (int i = 0; i < plan.num_vehicles(); ++i) {
    if (!(plan.slownesses(i, 0) > 0.0)) throw DomainError("plan has non-positive slowness");
    traces.push_back(ResimulateVehicle(i, plan, controls, ds, dt));
  }
  return traces;
}

}  // namespace ecoplatoon
