#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ecoplatoon/stability_harness.hpp"

namespace ecoplatoon {
namespace {

constexpr double kCollectorSpeed = 45.0 * kMphToMps;

PlatoonConfig Config(int n, double ds = 0.1) {
  return PlatoonConfig::Uniform(n, kCollectorSpeed, ds, static_cast<int>(std::lround(800.0 / ds)));
}

TEST(FollowingErrors, PerfectSpacingIsZero) {
  const PlatoonConfig config = Config(3, 1.0);
  const PlatoonState plan =
      Rollout(EquilibriumStep(config, 20.0), ControlTrajectory(3, 800), 1.0);
  EXPECT_LT(FollowingErrors(plan, config).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FollowingErrors, MatchRawArrivalTimes) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> t(0.0, 100.0);
  PlatoonConfig config = Config(4, 1.0);
  config.headway = 1.2;
  PlatoonState plan(4, 10);
  plan.slownesses.setConstant(0.05);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k <= 10; ++k) plan.arrival_times(i, k) = t(rng);
  }
  const Matrix e = FollowingErrors(plan, config);
  ASSERT_EQ(e.rows(), 4);
  ASSERT_EQ(e.cols(), 11);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_EQ(e(0, k), 0.0);
    for (int i = 1; i < 4; ++i) {
      EXPECT_DOUBLE_EQ(e(i, k), plan.arrival_times(0, k) - plan.arrival_times(i, k) - i * 1.2);
    }
  }
}

TEST(SpatialL2Norm, ScalesBySqrtStep) {
  Vector v(4);
  v << 3.0, 4.0, 0.0, 0.0;
  EXPECT_DOUBLE_EQ(SpatialL2Norm(v, 0.25), 2.5);
}

TEST(CompareRuns, IdenticalRunsGiveUndefinedRatios) {
  const PlatoonConfig config = Config(3, 1.0);
  ControlTrajectory u(3, 800);
  const PlatoonState plan = Rollout(EquilibriumStep(config, 20.0), u, 1.0);
  const std::vector<double> grades(800, 0.02);
  const StabilityReport r = CompareRuns(plan, u, plan, u, grades, config);
  for (double n : r.deviation_norms) EXPECT_EQ(n, 0.0);
  for (double g : r.gamma) EXPECT_TRUE(std::isnan(g));
  EXPECT_TRUE(r.stable);
  EXPECT_EQ(r.max_gamma(), 0.0);
}

TEST(CompareRuns, RatiosFromKnownDeviations) {
  // Perturbed accelerations differ by 1, 0.5 and 0.25 everywhere.
  const PlatoonConfig config = Config(3, 1.0);
  ControlTrajectory u(3, 100), w(3, 100);
  w.accels.row(0).setConstant(0.04);
  w.accels.row(1).setConstant(0.02);
  w.accels.row(2).setConstant(0.01);
  PlatoonState plan(3, 100);
  plan.slownesses.setConstant(0.05);  // same speeds in both: drag terms cancel
  const std::vector<double> grades(100, 0.0);
  const StabilityReport r = CompareRuns(plan, u, plan, w, grades, config);
  EXPECT_NEAR(r.gamma[0], 0.5, 1e-12);
  EXPECT_NEAR(r.gamma[1], 0.5, 1e-12);
  EXPECT_NEAR(r.gamma_vs_leader[1], 0.25, 1e-12);
  EXPECT_NEAR(r.deviation_norms[0], 0.04 * 10.0, 1e-12);
  EXPECT_TRUE(r.stable);
}

TEST(PerturbationSpec, Validation) {
  PerturbationSpec s;
  s.magnitude = 0.0;
  EXPECT_THROW(s.Validate(800.0), ConfigError);
  s = PerturbationSpec{};
  s.onset_position = 900.0;
  EXPECT_THROW(s.Validate(800.0), ConfigError);
  s = PerturbationSpec{};
  s.shape = PerturbationShape::kPulse;
  s.onset_position = 100.0;
  s.duration = 0.0;
  EXPECT_THROW(s.Validate(800.0), ConfigError);
  EXPECT_EQ(ParsePerturbationShape("pulse"), PerturbationShape::kPulse);
  EXPECT_THROW(ParsePerturbationShape("ramp"), ConfigError);
}

TEST(RunPerturbation, VanishingPerturbationGivesVanishingDeviations) {
  const PlatoonConfig config = Config(3, 1.0);
  const SlopeProfile road = BuildPreset(RoadClass::kCollector);
  const Vector x0 = EquilibriumStep(config, config.target_speed);
  StabilityOptions opt;
  PerturbationSpec big, small;
  big.magnitude = 0.5;
  small.magnitude = 1e-4;
  const auto rb = RunPerturbation(config, CostWeights{}, road, x0, big, opt);
  const auto rs = RunPerturbation(config, CostWeights{}, road, x0, small, opt);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_LT(rs.deviation_norms[j], rb.deviation_norms[j] * 1e-3 + 1e-12);
  }
}

TEST(RunPerturbation, ThreeVehicleStepIsStringStable) {
  const PlatoonConfig config = Config(3);
  PerturbationSpec spec;
  spec.magnitude = 0.5;
  const auto r = RunPerturbation(config, CostWeights{}, BuildPreset(RoadClass::kCollector),
                                 EquilibriumStep(config, config.target_speed), spec,
                                 StabilityOptions{});
  EXPECT_TRUE(r.nominal_converged);
  EXPECT_TRUE(r.perturbed_converged);
  for (double g : r.gamma) {
    ASSERT_FALSE(std::isnan(g));
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0 + 1e-6);
  }
  EXPECT_TRUE(r.stable);
}

TEST(RunPerturbation, LeaderRatioFallsWithPlatoonSize) {
  std::vector<double> first_follower;
  for (int n : {3, 4, 5}) {
    const PlatoonConfig config = Config(n);
    PerturbationSpec spec;
    spec.magnitude = 0.5;
    const auto r = RunPerturbation(config, CostWeights{}, BuildPreset(RoadClass::kCollector),
                                   EquilibriumStep(config, config.target_speed), spec,
                                   StabilityOptions{});
    first_follower.push_back(r.gamma_vs_leader[0]);
  }
  EXPECT_GT(first_follower[0], first_follower[1]);
  EXPECT_GT(first_follower[1], first_follower[2]);
}

TEST(RunPerturbation, PulseRunsInsideRecedingHorizon) {
  const PlatoonConfig config = Config(3, 1.0);
  PerturbationSpec spec;
  spec.shape = PerturbationShape::kPulse;
  spec.magnitude = 0.5;
  spec.onset_position = 200.0;
  spec.duration = 20.0;
  StabilityOptions opt;
  opt.receding.window_length = 40.0;
  opt.receding.replan_interval = 1.0;
  const auto r = RunPerturbation(config, CostWeights{}, BuildPreset(RoadClass::kCollector),
                                 EquilibriumStep(config, config.target_speed), spec, opt);
  EXPECT_EQ(r.deviations.cols(), 800);
  // Nothing happens before the onset.
  EXPECT_LT(r.deviations.leftCols(199).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GT(r.deviation_norms[0], 0.0);
}

TEST(RunPerturbation, NeedsTwoVehicles) {
  PlatoonConfig config = Config(2, 1.0);
  config.vehicles.resize(1);
  EXPECT_THROW(RunPerturbation(config, CostWeights{}, SlopeProfile::Flat(800.0),
                               Vector::Constant(2, 0.05), PerturbationSpec{}, StabilityOptions{}),
               ConfigError);
}

}  // namespace
}  // namespace ecoplatoon
