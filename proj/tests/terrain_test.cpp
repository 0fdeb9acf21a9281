#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ecoplatoon/terrain.hpp"

namespace ecoplatoon {
namespace {

TEST(SlopeProfile, FlatProfileIsZeroEverywhere) {
  const SlopeProfile flat = SlopeProfile::Flat(800.0);
  EXPECT_EQ(flat.GradeAt(123.0), 0.0);
  EXPECT_EQ(flat.GradeAt(0.0), 0.0);
  EXPECT_EQ(flat.GradeAt(800.0), 0.0);
}

TEST(SlopeProfile, SegmentMembershipIsHalfOpen) {
  const SlopeProfile p({0.0, 400.0, 800.0}, {std::atan(0.06), -std::atan(0.06)});
  EXPECT_DOUBLE_EQ(p.GradeAt(399.9), std::atan(0.06));
  EXPECT_DOUBLE_EQ(p.GradeAt(400.0), -std::atan(0.06));
  EXPECT_DOUBLE_EQ(p.GradeAt(800.0), -std::atan(0.06));
  EXPECT_EQ(p.SegmentAt(800.0), 1u);
}

TEST(SlopeProfile, OffRouteQueryThrows) {
  const SlopeProfile p = SlopeProfile::Flat(100.0);
  EXPECT_THROW(p.GradeAt(-0.01), DomainError);
  EXPECT_THROW(p.GradeAt(100.01), DomainError);
}

TEST(SlopeProfile, RejectsMalformedInput) {
  EXPECT_THROW(SlopeProfile({0.0}, {}), ConfigError);
  EXPECT_THROW(SlopeProfile({0.0, 100.0}, {0.0, 0.1}), ConfigError);
  EXPECT_THROW(SlopeProfile({5.0, 100.0}, {0.0}), ConfigError);
  EXPECT_THROW(SlopeProfile({0.0, 100.0, 100.0}, {0.0, 0.0}), ConfigError);
  EXPECT_THROW(SlopeProfile({0.0, 100.0}, {1.6}), ConfigError);
}

TEST(SlopeProfile, PercentGradesConvertThroughArctan) {
  const SlopeProfile p = SlopeProfile::FromPercentGrades({0.0, 50.0}, {15.0});
  EXPECT_DOUBLE_EQ(p.GradeAt(10.0), std::atan(0.15));
}

TEST(BuildPreset, MajorArterialPeakGrade) {
  const SlopeProfile p = BuildPreset(RoadClass::kMajorArterial);
  EXPECT_DOUBLE_EQ(p.total_length(), 800.0);
  double peak = 0.0;
  for (double g : p.grades()) peak = std::max(peak, std::abs(std::tan(g)));
  EXPECT_NEAR(peak, 0.06, 1e-12);
}

TEST(BuildPreset, CollectorPeakGrade) {
  const SlopeProfile p = BuildPreset(RoadClass::kCollector);
  EXPECT_DOUBLE_EQ(p.total_length(), 800.0);
  double peak = 0.0;
  for (double g : p.grades()) peak = std::max(peak, std::abs(std::tan(g)));
  EXPECT_NEAR(peak, 0.15, 1e-12);
}

TEST(BuildPreset, CollectorAlternatesSignAcrossFourHills) {
  // Scan every 0.1 m and count sign changes: four up/down pairs give seven.
  const SlopeProfile p = BuildPreset(RoadClass::kCollector);
  int changes = 0;
  int ups = 0;
  double prev = p.GradeAt(0.0);
  for (int k = 1; k <= 8000; ++k) {
    const double g = p.GradeAt(0.1 * k);
    ASSERT_NE(g, 0.0);
    if ((g > 0.0) != (prev > 0.0)) ++changes;
    prev = g;
  }
  for (double g : p.grades()) ups += g > 0.0 ? 1 : 0;
  EXPECT_EQ(changes, 7);
  EXPECT_EQ(ups, 4);
  EXPECT_GT(p.GradeAt(0.0), 0.0);
}

TEST(BuildPreset, NetElevationIsZero) {
  for (RoadClass kind : {RoadClass::kMajorArterial, RoadClass::kCollector}) {
    const SlopeProfile p = BuildPreset(kind);
    // Riemann sum of tan(theta) on a fine grid, independent of ElevationAt.
    double z = 0.0;
    const double h = 0.01;
    for (int k = 0; k < 80000; ++k) z += std::tan(p.GradeAt((k + 0.5) * h)) * h;
    EXPECT_NEAR(z, 0.0, 1e-9);
    EXPECT_NEAR(p.ElevationAt(800.0), 0.0, 1e-9);
  }
}

TEST(BuildPreset, ElevationPeaksAtHillTop) {
  const SlopeProfile p = BuildPreset(RoadClass::kMajorArterial);
  EXPECT_NEAR(p.ElevationAt(100.0), 6.0, 1e-9);
  EXPECT_NEAR(p.ElevationAt(150.0), 3.0, 1e-9);
}

TEST(RoadClass, ParsesKnownNames) {
  EXPECT_EQ(ParseRoadClass("collector"), RoadClass::kCollector);
  EXPECT_EQ(ParseRoadClass("major_arterial"), RoadClass::kMajorArterial);
  EXPECT_THROW(ParseRoadClass("freeway"), ConfigError);
}

TEST(SampleGrades, ClampsPastTheEnd) {
  const SlopeProfile p({0.0, 10.0, 20.0}, {0.01, -0.02});
  const auto g = SampleGrades(p, 15.0, 1.0, 10);
  ASSERT_EQ(g.size(), 10u);
  EXPECT_DOUBLE_EQ(g.front(), -0.02);
  EXPECT_DOUBLE_EQ(g.back(), -0.02);
}

TEST(ParseSlopeProfile, ReadsPercentGrades) {
  const SlopeProfile p =
      ParseSlopeProfile(R"({"breakpoints_m": [0, 100, 300], "percent_grades": [2, -4]})");
  EXPECT_DOUBLE_EQ(p.total_length(), 300.0);
  EXPECT_DOUBLE_EQ(p.GradeAt(200.0), std::atan(-0.04));
}

TEST(ParseSlopeProfile, ErrorNamesTheLine) {
  const std::string text = "{\n  \"breakpoints_m\": [0, 100],\n  \"percent_grades\": [\"x\"]\n}";
  try {
    ParseSlopeProfile(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadSlopeProfile, MissingFileNamesPath) {
  try {
    LoadSlopeProfile("/nonexistent/road.json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/road.json"), std::string::npos);
  }
}

}  // namespace
}  // namespace ecoplatoon
