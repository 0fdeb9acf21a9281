#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ecoplatoon/cost_model.hpp"
#include "test_util.hpp"

namespace ecoplatoon {
namespace {

using testing::FdGradient;
using testing::FdJacobian;
using testing::MaxRelError;

CostWeights Only(double q1, double q2, double q3, double r1) {
  CostWeights w;
  w.q1 = q1;
  w.q2 = q2;
  w.q3 = q3;
  w.r1 = r1;
  return w;
}

TEST(RunningCost, EquilibriumOnFlatRoadWithoutEcologyIsZero) {
  const PlatoonConfig config = PlatoonConfig::Uniform(3, 20.0, 0.1, 10);
  const Vector x = EquilibriumStep(config, 20.0, 4.0);
  const CostBreakdown c = RunningCost(x, Vector::Zero(3), 0.0, config, Only(500, 0, 5000, 1e6));
  EXPECT_EQ(c.total, 0.0);
}

TEST(RunningCost, GapErrorOfHalfSecond) {
  const PlatoonConfig config = PlatoonConfig::Uniform(2, 20.0, 0.1, 10);
  Vector x = EquilibriumStep(config, 20.0);
  x[TimeIndex(1)] -= 0.5;
  const CostBreakdown c = RunningCost(x, Vector::Zero(2), 0.0, config, Only(500, 0, 0, 0));
  EXPECT_DOUBLE_EQ(c.cacc, 125.0);
  EXPECT_DOUBLE_EQ(c.total, 125.0);
}

TEST(RunningCost, EcologyTermSpreadsheetValue) {
  const PlatoonConfig config = PlatoonConfig::Uniform(1 + 1, 20.0, 0.1, 10);
  const double theta = std::atan(0.06);
  const double m = 1400.0, g = 9.8, mu = 0.015, xi = 0.000024, v = 20.0, a = 0.5;
  const double expected_per_vehicle =
      10.0 * (m * a * v + m * g * std::sin(theta) * v + mu * m * g * std::cos(theta) * v +
              xi * v * v * v);
  // Hand value: 10 * (14000 + 16434.5 + 4108.6 + 0.192)
  EXPECT_NEAR(expected_per_vehicle, 345432.48, 0.01);
  Vector x = EquilibriumStep(config, v);
  Vector u(2);
  u << a, a;
  const CostBreakdown c = RunningCost(x, u, theta, config, CostWeights{});
  EXPECT_NEAR(c.ecology, 2.0 * expected_per_vehicle, 1e-6);
  EXPECT_NEAR(c.effort, 2.0 * 1e6 * 0.25, 1e-9);
}

TEST(TerminalCost, ZeroAtTargets) {
  const PlatoonConfig config = PlatoonConfig::Uniform(3, 20.0, 0.1, 8000);
  Vector x = EquilibriumStep(config, 20.0, 8000 * 0.1 / 20.0);
  EXPECT_NEAR(TerminalCost(x, config, CostWeights{}, 8000), 0.0, 1e-18);
}

TEST(TerminalCost, OneSecondLate) {
  const PlatoonConfig config = PlatoonConfig::Uniform(3, 20.0, 0.1, 8000);
  Vector x = EquilibriumStep(config, 20.0, 40.0);
  x[TimeIndex(2)] += 1.0;
  EXPECT_NEAR(TerminalCost(x, config, CostWeights{}, 8000), 5000.0, 1e-9);
}

TEST(TerminalCost, MatchesRecomputation) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> t(30.0, 50.0);
  PlatoonConfig config = PlatoonConfig::Uniform(4, 18.0, 0.1, 8000);
  config.headway = 1.4;
  Vector x = EquilibriumStep(config, 18.0);
  for (int i = 0; i < 4; ++i) x[TimeIndex(i)] = t(rng);
  double expected = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double target = 800.0 / 18.0 - i * 1.4;
    expected += 5000.0 * std::pow(x[TimeIndex(i)] - target, 2);
  }
  EXPECT_NEAR(TerminalCost(x, config, CostWeights{}, 8000), expected, 1e-9 * expected);
}

TEST(CostDerivatives, ControlGradientVanishesWithoutEcologyOrEffort) {
  const PlatoonConfig config = PlatoonConfig::Uniform(3, 20.0, 0.1, 10);
  const Vector x = EquilibriumStep(config, 20.0);
  const auto d = RunningCostDerivatives(x, Vector::Zero(3), 0.05, config, Only(500, 0, 5000, 0));
  EXPECT_EQ(d.lu.norm(), 0.0);
}

TEST(CostDerivatives, EcologyControlGradientIsQ2MassSpeed) {
  const PlatoonConfig config = PlatoonConfig::Uniform(2, 20.0, 0.1, 10);
  Vector x(4);
  x << 0.0, 1.0 / 17.0, -1.0, 1.0 / 23.0;
  const auto d = RunningCostDerivatives(x, Vector::Zero(2), 0.1, config, Only(0, 10, 0, 0));
  EXPECT_NEAR(d.lu[0], 10.0 * 1400.0 * 17.0, 1e-8);
  EXPECT_NEAR(d.lu[1], 10.0 * 1400.0 * 23.0, 1e-8);
}

TEST(CostDerivatives, MatchFiniteDifferencesAtRandomPoints) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> t(-5.0, 5.0), v(5.0, 33.0), a(-4.0, 2.5),
      th(-0.15, 0.15);
  const int n = 3;
  PlatoonConfig config = PlatoonConfig::Uniform(n, 20.0, 0.1, 10);
  const CostWeights w{};
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(2 * n), u(n);
    for (int i = 0; i < n; ++i) {
      x[TimeIndex(i)] = t(rng);
      x[SlownessIndex(i)] = 1.0 / v(rng);
      u[i] = a(rng);
    }
    const double theta = th(rng);
    const auto d = RunningCostDerivatives(x, u, theta, config, w);
    auto cost_x = [&](const Vector& y) { return RunningCost(y, u, theta, config, w).total; };
    auto cost_u = [&](const Vector& y) { return RunningCost(x, y, theta, config, w).total; };
    // Cost is quadratic in the times, so a coarse step there is exact and
    // avoids roundoff against a 1e6-sized total; slowness needs a fine one.
    Vector hx(2 * n);
    for (int i = 0; i < n; ++i) {
      hx[TimeIndex(i)] = 1e-2;
      hx[SlownessIndex(i)] = 1e-7;
    }
    EXPECT_LT(MaxRelError(d.lx, FdGradient(cost_x, x, hx)), 1e-5);
    EXPECT_LT(MaxRelError(d.lu, FdGradient(cost_u, u, 1e-5)), 1e-5);
    auto grad_x = [&](const Vector& y) {
      return Vector(RunningCostDerivatives(y, u, theta, config, w).lx);
    };
    auto grad_u = [&](const Vector& y) {
      return Vector(RunningCostDerivatives(x, y, theta, config, w).lu);
    };
    auto grad_u_of_x = [&](const Vector& y) {
      return Vector(RunningCostDerivatives(y, u, theta, config, w).lu);
    };
    EXPECT_LT(MaxRelError(d.lxx, FdJacobian(grad_x, x, 1e-7)), 1e-5);
    EXPECT_LT(MaxRelError(d.luu, FdJacobian(grad_u, u, 1e-5)), 1e-5);
    EXPECT_LT(MaxRelError(d.lux, FdJacobian(grad_u_of_x, x, 1e-7)), 1e-5);
  }
}

TEST(TerminalDerivatives, MatchFiniteDifferences) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> t(30.0, 50.0);
  const PlatoonConfig config = PlatoonConfig::Uniform(3, 20.0, 0.1, 8000);
  const CostWeights w{};
  Vector x = EquilibriumStep(config, 20.0);
  for (int i = 0; i < 3; ++i) x[TimeIndex(i)] = t(rng);
  const auto d = TerminalCostDerivatives(x, config, w, 8000);
  auto f = [&](const Vector& y) { return TerminalCost(y, config, w, 8000); };
  EXPECT_LT(MaxRelError(d.lx, FdGradient(f, x, 1e-5)), 1e-5);
  auto g = [&](const Vector& y) { return Vector(TerminalCostDerivatives(y, config, w, 8000).lx); };
  EXPECT_LT(MaxRelError(d.lxx, FdJacobian(g, x, 1e-5)), 1e-5);
}

TEST(TrajectoryCost, SumsStagesAndTerminal) {
  const int steps = 20;
  const PlatoonConfig config = PlatoonConfig::Uniform(2, 20.0, 1.0, steps);
  ControlTrajectory u(2, steps);
  u.accels.setConstant(0.2);
  const PlatoonState s = Rollout(EquilibriumStep(config, 20.0), u, 1.0);
  const std::vector<double> grades(steps, 0.03);
  const CostWeights w{};
  double expected = 0.0;
  for (int k = 0; k < steps; ++k) {
    expected += RunningCost(s.StepVector(k), u.accels.col(k), 0.03, config, w).total;
  }
  expected += TerminalCost(s.StepVector(steps), config, w, steps);
  const CostBreakdown c = TrajectoryCost(s, u, grades, config, w);
  EXPECT_NEAR(c.total, expected, 1e-9 * std::abs(expected));
  EXPECT_NEAR(c.cacc + c.ecology + c.effort + c.terminal, c.total, 1e-9 * std::abs(expected));
}

TEST(CostWeights, RejectsNegative) {
  CostWeights w;
  w.q2 = -1.0;
  EXPECT_THROW(w.Validate(), ConfigError);
}

}  // namespace
}  // namespace ecoplatoon
