#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "ecoplatoon/fuel_eval.hpp"

#ifndef ECOPLATOON_TEST_PRESET_DIR
#define ECOPLATOON_TEST_PRESET_DIR "presets"
#endif

namespace ecoplatoon {
namespace {

PlatoonConfig Config() { return PlatoonConfig::Uniform(2, 20.0, 0.1, 8000); }

// Direct evaluation of exp(sum c_ji v^i a^j), written out term by term.
double ReferenceRate(const Eigen::Matrix4d& c, double v_kmh, double a_kmhs) {
  double sum = 0.0;
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) sum += c(j, i) * std::pow(v_kmh, i) * std::pow(a_kmhs, j);
  }
  return std::exp(sum);
}

TEST(EquivalentTraction, FlatRoadWithoutResistanceIsAccel) {
  PlatoonConfig config = Config();
  config.rolling_coeff = 0.0;
  config.drag_coeff = 0.0;
  EXPECT_DOUBLE_EQ(EquivalentTractionAccel(0.7, 20.0, 0.0, VehicleParams{}, config), 0.7);
}

TEST(EquivalentTraction, CoastingDownhillIsNegative) {
  EXPECT_LT(EquivalentTractionAccel(0.0, 20.0, -std::atan(0.06), VehicleParams{}, Config()), 0.0);
}

TEST(FuelRate, IdleAtRest) {
  const FuelModel model = FuelModel::LightDutyDefault();
  EXPECT_DOUBLE_EQ(FuelRate(model, 0.0, 0.0), std::exp(model.positive_accel(0, 0)));
  EXPECT_DOUBLE_EQ(model.idle_rate(), std::exp(-7.73452));
}

TEST(FuelRate, IncreasesWithTractionAtFixedSpeed) {
  // Inside the regression's power envelope (a v <= 60 W/kg); the cubic
  // turns over beyond it at highway speed.
  const FuelModel model = FuelModel::LightDutyDefault();
  for (double v = 2.0; v <= 33.0; v += 1.0) {
    double prev = FuelRate(model, v, 0.0);
    for (int j = 1; j <= 300 && 0.01 * j * v <= 60.0; ++j) {
      const double r = FuelRate(model, v, 0.01 * j);
      EXPECT_GT(r, prev) << "v = " << v << ", a = " << 0.01 * j;
      prev = r;
    }
  }
}

TEST(FuelRate, MatchesDirectPolynomialEvaluation) {
  const FuelModel model = FuelModel::LightDutyDefault();
  // 20 m/s = 72 km/h; +-0.5 m/s^2 = +-1.8 km/h/s.
  EXPECT_NEAR(FuelRate(model, 20.0, 0.5), ReferenceRate(model.positive_accel, 72.0, 1.8), 1e-15);
  EXPECT_NEAR(FuelRate(model, 20.0, -0.5), ReferenceRate(model.negative_accel, 72.0, -1.8),
              1e-15);
  // Published light-duty magnitude at 72 km/h cruise: about 1 mL/s.
  EXPECT_GT(FuelRate(model, 20.0, 0.0), 5e-4);
  EXPECT_LT(FuelRate(model, 20.0, 0.0), 2e-3);
}

TEST(FuelRate, NegativeSpeedThrows) {
  EXPECT_THROW(FuelRate(FuelModel::LightDutyDefault(), -1.0, 0.0), DomainError);
}

TEST(FuelModel, ShippedFileMatchesBuiltIn) {
  const FuelModel file =
      LoadFuelModel(std::filesystem::path(ECOPLATOON_TEST_PRESET_DIR) / "vt_micro_light_duty.json");
  const FuelModel builtin = FuelModel::LightDutyDefault();
  EXPECT_EQ(file.positive_accel, builtin.positive_accel);
  EXPECT_EQ(file.negative_accel, builtin.negative_accel);
}

TEST(FuelModel, ParseErrorsNameTheLine) {
  const std::string text =
      "{\n  \"positive_accel\": [[1,2,3,4],[1,2,3,4],[1,2,3,4],[1,2,3,4]],\n"
      "  \"negative_accel\": [[1,2,3],[1,2,3,4],[1,2,3,4],[1,2,3,4]]\n}";
  try {
    ParseFuelModel(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(TrajectoryFuel, EmptyTraceIsZero) {
  const FuelSeries f = TrajectoryFuel(FuelModel::LightDutyDefault(), TimeTrace{},
                                      SlopeProfile::Flat(800.0), VehicleParams{}, Config());
  EXPECT_EQ(f.total, 0.0);
}

TEST(TrajectoryFuel, ConstantSpeedIsRateTimesDuration) {
  const PlatoonConfig config = Config();
  TimeTrace tr;
  for (int j = 0; j <= 800; ++j) {
    tr.time.push_back(0.05 * j);
    tr.position.push_back(20.0 * 0.05 * j);
    tr.speed.push_back(20.0);
    tr.accel.push_back(0.0);
  }
  const FuelModel model = FuelModel::LightDutyDefault();
  const FuelSeries f =
      TrajectoryFuel(model, tr, SlopeProfile::Flat(800.0), VehicleParams{}, config);
  const double aeq = EquivalentTractionAccel(0.0, 20.0, 0.0, VehicleParams{}, config);
  EXPECT_NEAR(f.total, FuelRate(model, 20.0, aeq) * 40.0, 1e-12);
  EXPECT_NEAR(f.CumulativeAt(400.0), f.total / 2.0, 1e-12);
}

TEST(TrajectoryFuel, OnlyCountsRoadInsideTheRoute) {
  const PlatoonConfig config = Config();
  TimeTrace tr;
  for (int j = 0; j <= 1000; ++j) {
    tr.time.push_back(0.05 * j);
    tr.position.push_back(-100.0 + 20.0 * 0.05 * j);  // -100 m .. 900 m
    tr.speed.push_back(20.0);
    tr.accel.push_back(0.0);
  }
  const FuelModel model = FuelModel::LightDutyDefault();
  const FuelSeries f =
      TrajectoryFuel(model, tr, SlopeProfile::Flat(800.0), VehicleParams{}, config);
  const double aeq = EquivalentTractionAccel(0.0, 20.0, 0.0, VehicleParams{}, config);
  EXPECT_NEAR(f.total, FuelRate(model, 20.0, aeq) * 40.0, 1e-12);
}

TEST(TrajectoryFuel, UphillCostsMoreThanFlat) {
  const PlatoonConfig config = Config();
  TimeTrace tr;
  for (int j = 0; j <= 800; ++j) {
    tr.time.push_back(0.05 * j);
    tr.position.push_back(0.05 * j * 20.0);
    tr.speed.push_back(20.0);
    tr.accel.push_back(0.0);
  }
  const FuelModel model = FuelModel::LightDutyDefault();
  const double flat =
      TrajectoryFuel(model, tr, SlopeProfile::Flat(800.0), VehicleParams{}, config).total;
  const double hill = TrajectoryFuel(model, tr, SlopeProfile::FromPercentGrades({0, 800}, {6.0}),
                                     VehicleParams{}, config)
                          .total;
  EXPECT_GT(hill, flat);
}

}  // namespace
}  // namespace ecoplatoon
