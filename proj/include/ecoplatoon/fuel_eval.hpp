#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "ecoplatoon/common.hpp"
#include "ecoplatoon/platoon_model.hpp"
#include "ecoplatoon/terrain.hpp"

namespace ecoplatoon {

// Log-polynomial fuel-rate regression:
//   rate = exp(sum_{j,i} c(j, i) * speed^i * accel^j)
// with speed in km/h and acceleration in km/h/s (the units the published
// light-duty coefficients are fitted in). Row j is the acceleration power,
// column i the speed power.
struct FuelModel {
  Eigen::Matrix4d positive_accel;
  Eigen::Matrix4d negative_accel;

  // Composite light-duty vehicle, bundled so that tests and the library work
  // without the data file.
  static FuelModel LightDutyDefault();

  double idle_rate() const;  // L/s at rest
  void Validate() const;
};

FuelModel ParseFuelModel(std::string_view json_text);
FuelModel LoadFuelModel(const std::filesystem::path& path);

// a + g sin θ + μ g cos θ + ξ v² / m
double EquivalentTractionAccel(double accel, double speed, double theta,
                               const VehicleParams& params, const PlatoonConfig& config);

// L/s; never below the idle rate.
double FuelRate(const FuelModel& model, double speed, double accel_eq);

struct FuelSeries {
  double total = 0.0;             // L
  std::vector<double> position;   // m, sample positions along the trace
  std::vector<double> cumulative; // L consumed up to position[j]

  // Cumulative fuel at an arbitrary position (linear between samples).
  double CumulativeAt(double s) const;
};

// Integrates the fuel rate along a time trace, counting only the stretch of
// road inside [0, total_length]. Each held-acceleration interval is split at
// the route ends and evaluated at its midpoint speed and grade. Grade outside
// the profile is taken as flat.
FuelSeries TrajectoryFuel(const FuelModel& model, const TimeTrace& trace,
                          const SlopeProfile& profile, const VehicleParams& params,
                          const PlatoonConfig& config);

// Per-vehicle fuel of a space-domain plan after resimulation at `dt`.
std::vector<FuelSeries> PlanFuel(const FuelModel& model, const PlatoonState& plan,
                                 const ControlTrajectory& controls, const SlopeProfile& profile,
                                 const PlatoonConfig& config, double dt = 0.05);

double TotalFuel(const std::vector<FuelSeries>& per_vehicle);

// Fuel used inside [from, to) summed over vehicles.
double FuelBetween(const std::vector<FuelSeries>& per_vehicle, double from, double to);

}  // namespace ecoplatoon
