#pragma once

#include <vector>

#include "ecoplatoon/common.hpp"
#include "ecoplatoon/platoon_model.hpp"
#include "ecoplatoon/terrain.hpp"

namespace ecoplatoon {

// Constant-time-gap PD follower with a speed-holding leader.
struct CaccGains {
  double kp_gap = 0.45;   // 1/s^2
  double kd_gap = 1.2;    // 1/s
  double kp_speed = 0.8;  // 1/s

  void Validate() const;
};

struct BaselineOptions {
  CaccGains gains;
  double dt = 0.05;          // s
  double tire_radius = 0.3;  // m

  void Validate() const;
};

// Physical positions and speeds at one instant, leader first.
struct KinematicState {
  Vector position;  // m
  Vector speed;     // m/s
};

// Acceleration commands for one time step. Gaps are bumper-free distances
// s_{i-1} - s_i; commands are clamped to the acceleration limits and so that
// the next speed stays inside [speed_floor, speed_limit].
Vector BaselineStep(const KinematicState& state, const PlatoonConfig& config,
                    const CaccGains& gains, double dt);

// Wheel torque needed to realize `accel` against grade, rolling and drag
// resistance.
double TorqueOf(double accel, double speed, double theta, const VehicleParams& params,
                const PlatoonConfig& config, double tire_radius);

// Physical start matching a space-domain start state: the leader is at s = 0
// and follower i trails it by the headway offset t_1 - t_i of that state,
// i.e. sits at -(t_1 - t_i) v_i. Speeds come from the slownesses.
KinematicState KinematicStartFromPlan(const Eigen::Ref<const Vector>& x0,
                                      const PlatoonConfig& config);

// Time-stepped run until every vehicle has passed the end of the profile.
// Traces start at t = t_1 of `x0`. Road before s = 0 and after the end is flat
// (the controller ignores grade either way). Throws StallError if a vehicle
// fails to finish.
std::vector<TimeTrace> RunBaseline(const PlatoonConfig& config, const SlopeProfile& profile,
                                   const Eigen::Ref<const Vector>& x0,
                                   const BaselineOptions& options);

}  // namespace ecoplatoon
