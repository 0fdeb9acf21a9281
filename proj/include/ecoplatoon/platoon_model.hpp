#pragma once

#include <vector>

#include "ecoplatoon/common.hpp"
#include "ecoplatoon/terrain.hpp"

namespace ecoplatoon {

struct VehicleParams {
  double mass = 1400.0;  // kg
  double a_min = -5.0;   // m/s^2
  double a_max = 3.0;    // m/s^2
};

struct PlatoonConfig {
  std::vector<VehicleParams> vehicles;  // leader first
  double headway = 1.0;                 // s
  double target_speed = 45.0 * kMphToMps;
  double speed_limit = 75.0 * kMphToMps;
  double speed_floor = 0.1;  // m/s, stands in for v >= 0
  double gravity = 9.8;
  double rolling_coeff = 0.015;
  double drag_coeff = 0.000024;  // kg/m
  double ds = 0.1;               // m
  int horizon_steps = 8000;

  int num_vehicles() const { return static_cast<int>(vehicles.size()); }
  int state_dim() const { return 2 * num_vehicles(); }
  int control_dim() const { return num_vehicles(); }
  double horizon_length() const { return horizon_steps * ds; }

  // Throws ConfigError naming the first violated invariant.
  void Validate() const;

  // Identical vehicles with Table-1 style defaults.
  static PlatoonConfig Uniform(int num_vehicles, double target_speed, double ds,
                               int horizon_steps);
};

// Per-step state layout: [t_1, pi_1, t_2, pi_2, ..., t_N, pi_N].
inline constexpr int TimeIndex(int vehicle) { return 2 * vehicle; }
inline constexpr int SlownessIndex(int vehicle) { return 2 * vehicle + 1; }

// Arrival time and slowness of every vehicle at every spatial step.
struct PlatoonState {
  Matrix arrival_times;  // N x (K+1), s
  Matrix slownesses;     // N x (K+1), s/m

  PlatoonState() = default;
  PlatoonState(int num_vehicles, int num_steps);

  int num_vehicles() const { return static_cast<int>(arrival_times.rows()); }
  int num_steps() const { return static_cast<int>(arrival_times.cols()) - 1; }

  Vector StepVector(int k) const;
  void SetStep(int k, const Eigen::Ref<const Vector>& x);
};

struct ControlTrajectory {
  Matrix accels;  // N x K, m/s^2

  ControlTrajectory() = default;
  ControlTrajectory(int num_vehicles, int num_steps) : accels(Matrix::Zero(num_vehicles, num_steps)) {}
  int num_steps() const { return static_cast<int>(accels.cols()); }
};

double Slowness(double speed);

// Equilibrium point of the gap term: t_i = t_1 - (i-1) h, all at `speed`.
Vector EquilibriumStep(const PlatoonConfig& config, double speed, double leader_time = 0.0);

// [t1-t2-h, pi1-pi2, ..., t1-tN-(N-1)h, pi1-piN] at step k.
Vector DiffState(const PlatoonState& state, int k, const PlatoonConfig& config);
Vector DiffState(const Eigen::Ref<const Vector>& x, const PlatoonConfig& config);

// t' = t + pi ds, pi' = pi - a pi^3 ds for every vehicle.
Vector StepDynamics(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
                    double ds);

// First derivatives are dense; second derivatives only live on the
// (pi_i, pi_i) and (a_i, pi_i) entries of each vehicle's slowness update.
struct DynamicsDerivatives {
  Matrix fx;           // 2N x 2N
  Matrix fu;           // 2N x N
  Vector d2pi_dpi2;    // N, -6 a pi ds
  Vector d2pi_dpi_da;  // N, -3 pi^2 ds

  // sum_j b_j * d^2 f_j / dx^2 and friends.
  Matrix ContractXX(const Eigen::Ref<const Vector>& b) const;
  Matrix ContractUX(const Eigen::Ref<const Vector>& b) const;  // N x 2N
  Matrix ContractUU(const Eigen::Ref<const Vector>& b) const;  // zero

  // Dense Hessian of output component j (2N+N square, ordered [x; u]).
  Matrix ComponentHessian(int j) const;
};

DynamicsDerivatives DynamicsJacobians(const Eigen::Ref<const Vector>& x,
                                      const Eigen::Ref<const Vector>& u, double ds);

PlatoonState Rollout(const Eigen::Ref<const Vector>& x0, const ControlTrajectory& controls,
                     double ds);

// Time-indexed trace of one vehicle.
struct TimeTrace {
  std::vector<double> time;      // s
  std::vector<double> position;  // m
  std::vector<double> speed;     // m/s
  std::vector<double> accel;     // m/s^2, held over [time[j], time[j+1])

  std::size_t size() const { return time.size(); }
};

// Integrates ds/dt = v, dv/dt = a(s) with a fixed step `dt`, where a(s) is
// the plan's control for the spatial cell containing s. Steps are split at
// cell boundaries so that the kinematics inside each cell are exact. The
// returned traces start at each vehicle's t_{i,0} and end at s = K ds.
std::vector<TimeTrace> ResimulateTimeDomain(const PlatoonState& plan,
                                            const ControlTrajectory& controls, double ds,
                                            double dt);

}  // namespace ecoplatoon
