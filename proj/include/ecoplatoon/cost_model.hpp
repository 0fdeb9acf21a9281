#pragma once

#include <vector>

#include "ecoplatoon/common.hpp"
#include "ecoplatoon/platoon_model.hpp"

namespace ecoplatoon {

// Stage costs are summed per spatial step without a ds factor, so the
// weights are tied to the step size they were tuned for (0.1 m).
struct CostWeights {
  double q1 = 500.0;   // gap tracking
  double q2 = 10.0;    // ecology (traction power)
  double q3 = 5000.0;  // terminal arrival time
  double r1 = 1.0e6;   // control effort

  void Validate() const;
};

struct CostBreakdown {
  double cacc = 0.0;
  double ecology = 0.0;
  double effort = 0.0;
  double terminal = 0.0;
  double total = 0.0;

  CostBreakdown& operator+=(const CostBreakdown& other);
};

CostBreakdown RunningCost(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
                          double theta, const PlatoonConfig& config, const CostWeights& weights);

// Arrival time each vehicle should have at the end of the horizon: the
// nominal travel time K ds / v^d shifted by the vehicle's headway offset.
double TerminalTarget(int vehicle, const PlatoonConfig& config, int horizon_steps);

double TerminalCost(const Eigen::Ref<const Vector>& x_final, const PlatoonConfig& config,
                    const CostWeights& weights, int horizon_steps);

struct StageDerivatives {
  Vector lx;   // 2N
  Vector lu;   // N
  Matrix lxx;  // 2N x 2N
  Matrix luu;  // N x N
  Matrix lux;  // N x 2N
};

StageDerivatives RunningCostDerivatives(const Eigen::Ref<const Vector>& x,
                                        const Eigen::Ref<const Vector>& u, double theta,
                                        const PlatoonConfig& config, const CostWeights& weights);

// Only lx and lxx are populated.
StageDerivatives TerminalCostDerivatives(const Eigen::Ref<const Vector>& x_final,
                                         const PlatoonConfig& config, const CostWeights& weights,
                                         int horizon_steps);

// Sum of stage costs over the horizon plus the terminal cost.
CostBreakdown TrajectoryCost(const PlatoonState& state, const ControlTrajectory& controls,
                             const std::vector<double>& grades, const PlatoonConfig& config,
                             const CostWeights& weights);

}  // namespace ecoplatoon
