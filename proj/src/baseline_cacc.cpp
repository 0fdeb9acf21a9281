#include "ecoplatoon/baseline_cacc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ecoplatoon {

void CaccGains::Validate() const {
  if (!(kp_gap > 0.0 && kd_gap > 0.0 && kp_speed > 0.0)) {
    throw ConfigError("baseline gains must all be positive");
  }
}

void BaselineOptions::Validate() const {
  gains.Validate();
  if (!(dt > 0.0)) throw ConfigError("baseline dt must be positive");
  if (!(tire_radius > 0.0)) throw ConfigError("tire radius must be positive");
}

Vector BaselineStep(const KinematicState& state, const PlatoonConfig& config,
                    const CaccGains& gains, double dt) {
  const int n = config.num_vehicles();
  Vector a(n);
  for (int i = 0; i < n; ++i) {
    const double v = state.speed[i];
    if (!(v > 0.0)) throw DomainError("baseline step needs positive speeds");
    double cmd;
    if (i == 0) {
      cmd = gains.kp_speed * (config.target_speed - v);
    } else {
      const double gap = state.position[i - 1] - state.position[i];
      cmd = gains.kp_gap * (gap - config.headway * v) +
            gains.kd_gap * (state.speed[i - 1] - v);
    }
    const auto& params = config.vehicles[static_cast<std::size_t>(i)];
    const double lo = std::max(params.a_min, (config.speed_floor - v) / dt);
    const double hi = std::min(params.a_max, (config.speed_limit - v) / dt);
    a[i] = std::clamp(cmd, std::min(lo, hi), hi);
  }
  return a;
}

double TorqueOf(double accel, double speed, double theta, const VehicleParams& params,
                const PlatoonConfig& config, double tire_radius) {
  const double traction = accel + config.gravity * std::sin(theta) +
                          config.rolling_coeff * config.gravity * std::cos(theta) +
                          config.drag_coeff * speed * speed / params.mass;
  return traction * params.mass * tire_radius;
}

KinematicState KinematicStartFromPlan(const Eigen::Ref<const Vector>& x0,
                                      const PlatoonConfig& config) {
  const int n = config.num_vehicles();
  KinematicState state{Vector(n), Vector(n)};
  for (int i = 0; i < n; ++i) {
    const double pi = x0[SlownessIndex(i)];
    if (!(pi > 0.0)) throw DomainError("start state has non-positive slowness");
    state.speed[i] = 1.0 / pi;
    state.position[i] = -(x0[TimeIndex(0)] - x0[TimeIndex(i)]) * state.speed[i];
  }
  return state;
}

std::vector<TimeTrace> RunBaseline(const PlatoonConfig& config, const SlopeProfile& profile,
                                   const Eigen::Ref<const Vector>& x0,
                                   const BaselineOptions& options) {
  config.Validate();
  options.Validate();
  const int n = config.num_vehicles();
  const double length = profile.total_length();
  const double dt = options.dt;
  KinematicState state = KinematicStartFromPlan(x0, config);

  std::vector<TimeTrace> traces(static_cast<std::size_t>(n));
  double t = x0[TimeIndex(0)];
  auto record = [&](const Vector& a) {
    for (int i = 0; i < n; ++i) {
      auto& tr = traces[static_cast<std::size_t>(i)];
      tr.time.push_back(t);
      tr.position.push_back(state.position[i]);
      tr.speed.push_back(state.speed[i]);
      tr.accel.push_back(a[i]);
    }
  };

  // Generous bound: every vehicle at the speed floor's ten-fold.
  const double start = state.position.minCoeff();
  const double t_max = t + (length - start) / (10.0 * config.speed_floor) + 1.0;
  while (state.position.minCoeff() < length) {
    if (t > t_max) {
      std::ostringstream msg;
      msg << "baseline platoon did not finish the route by t = " << t << " s";
      throw StallError(msg.str());
    }
    const Vector a = BaselineStep(state, config, options.gains, dt);
    record(a);
    state.position += state.speed * dt + 0.5 * a * dt * dt;
    state.speed += a * dt;
    t += dt;
  }
  record(Vector::Zero(n));
  return traces;
}

}  // namespace ecoplatoon
