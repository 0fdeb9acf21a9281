#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ecoplatoon/baseline_cacc.hpp"
#include "ecoplatoon/fuel_eval.hpp"

namespace ecoplatoon {
namespace {

PlatoonConfig Config(int n) { return PlatoonConfig::Uniform(n, 20.0, 0.1, 8000); }

TEST(BaselineStep, EquilibriumCommandsZero) {
  const PlatoonConfig config = Config(3);
  KinematicState s{Vector(3), Vector::Constant(3, 20.0)};
  s.position << 0.0, -20.0, -40.0;
  const Vector a = BaselineStep(s, config, CaccGains{}, 0.05);
  EXPECT_LT(a.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BaselineStep, LeaderBelowTargetAccelerates) {
  const PlatoonConfig config = Config(2);
  KinematicState s{Vector(2), Vector(2)};
  s.position << 0.0, -18.0;
  s.speed << 18.0, 18.0;
  const Vector a = BaselineStep(s, config, CaccGains{}, 0.05);
  EXPECT_NEAR(a[0], 0.8 * 2.0, 1e-12);
}

TEST(BaselineStep, ClampsToAccelerationLimits) {
  const PlatoonConfig config = Config(2);
  KinematicState s{Vector(2), Vector(2)};
  s.position << 0.0, -1.0;  // far too close
  s.speed << 5.0, 25.0;
  const Vector a = BaselineStep(s, config, CaccGains{}, 0.05);
  EXPECT_DOUBLE_EQ(a[1], -5.0);
}

TEST(BaselineStep, GapErrorDecaysMonotonically) {
  // Two vehicles, leader at constant speed, follower starts 5 m too far back.
  const PlatoonConfig config = Config(2);
  const double dt = 0.01;
  KinematicState s{Vector(2), Vector::Constant(2, 20.0)};
  s.position << 0.0, -25.0;
  double prev = std::abs(s.position[0] - s.position[1] - config.headway * s.speed[1]);
  for (int step = 0; step < 6000; ++step) {
    const Vector a = BaselineStep(s, config, CaccGains{}, dt);
    s.position += s.speed * dt + 0.5 * a * dt * dt;
    s.speed += a * dt;
    const double err = std::abs(s.position[0] - s.position[1] - config.headway * s.speed[1]);
    EXPECT_LE(err, prev + 1e-9) << "step " << step;
    prev = err;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(TorqueOf, FreeRolling) {
  PlatoonConfig config = Config(2);
  config.rolling_coeff = 0.0;
  config.drag_coeff = 0.0;
  EXPECT_EQ(TorqueOf(0.0, 20.0, 0.0, VehicleParams{}, config, 0.3), 0.0);
}

TEST(TorqueOf, Substitution) {
  const PlatoonConfig config = Config(2);
  const double expected = (1.0 + 0.147 + 0.000024 * 400.0 / 1400.0) * 1400.0 * 0.3;
  EXPECT_NEAR(TorqueOf(1.0, 20.0, 0.0, VehicleParams{}, config, 0.3), expected, 1e-9);
}

TEST(TorqueOf, IncreasesWithGrade) {
  const PlatoonConfig config = Config(2);
  double prev = TorqueOf(0.5, 20.0, 0.0, VehicleParams{}, config, 0.3);
  for (int j = 1; j <= 50; ++j) {
    const double t = TorqueOf(0.5, 20.0, 0.01 * j, VehicleParams{}, config, 0.3);
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(TorqueOf, EquivalentTractionIdentity) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> a(-4.0, 3.0), v(0.5, 33.0), th(-0.2, 0.2),
      m(900.0, 2500.0);
  const PlatoonConfig config = Config(2);
  for (int trial = 0; trial < 100; ++trial) {
    const VehicleParams p{m(rng), -5.0, 3.0};
    const double aa = a(rng), vv = v(rng), tt = th(rng);
    EXPECT_NEAR(EquivalentTractionAccel(aa, vv, tt, p, config),
                TorqueOf(aa, vv, tt, p, config, 0.3) / (p.mass * 0.3), 1e-12);
  }
}

TEST(KinematicStart, FollowersTrailByHeadwayDistance) {
  const PlatoonConfig config = Config(3);
  const Vector x0 = EquilibriumStep(config, 20.0);
  const KinematicState s = KinematicStartFromPlan(x0, config);
  EXPECT_DOUBLE_EQ(s.position[0], 0.0);
  EXPECT_NEAR(s.position[1], -20.0, 1e-12);
  EXPECT_NEAR(s.position[2], -40.0, 1e-12);
}

TEST(RunBaseline, EveryVehicleFinishesTheRoute) {
  const PlatoonConfig config = Config(3);
  Vector x0 = EquilibriumStep(config, 20.0);
  x0[TimeIndex(1)] -= 0.3;
  const auto traces = RunBaseline(config, BuildPreset(RoadClass::kCollector), x0, BaselineOptions{});
  ASSERT_EQ(traces.size(), 3u);
  for (const auto& tr : traces) {
    EXPECT_GE(tr.position.back(), 800.0);
    EXPECT_DOUBLE_EQ(tr.time.front(), 0.0);
    for (std::size_t j = 1; j < tr.size(); ++j) {
      EXPECT_GE(tr.position[j], tr.position[j - 1]);
      EXPECT_NEAR(tr.time[j] - tr.time[j - 1], 0.05, 1e-12);
    }
  }
  // Leader holds its target on a grade-compensated road.
  for (double v : traces[0].speed) EXPECT_NEAR(v, 20.0, 1e-9);
}

TEST(BaselineOptions, Validation) {
  BaselineOptions o;
  o.dt = 0.0;
  EXPECT_THROW(o.Validate(), ConfigError);
  o = BaselineOptions{};
  o.gains.kd_gap = -1.0;
  EXPECT_THROW(o.Validate(), ConfigError);
}

}  // namespace
}  // namespace ecoplatoon
